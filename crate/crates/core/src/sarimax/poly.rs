//! Lag polynomials, the partial-autocorrelation reparameterization and
//! root checks.
//!
//! Polynomials are stored in "lag form": `c` represents
//! `1 - c[0] B - c[1] B^2 - ...`.

use nalgebra::DMatrix;

/// Full coefficient vector `[1, -c1, -c2, ...]` of a lag-form polynomial.
fn to_full(c: &[f64]) -> Vec<f64> {
    let mut full = Vec::with_capacity(c.len() + 1);
    full.push(1.0);
    full.extend(c.iter().map(|v| -v));
    full
}

fn from_full(full: &[f64]) -> Vec<f64> {
    full[1..].iter().map(|v| -v).collect()
}

fn mul_full(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Spread seasonal lag-form coefficients onto lags `s, 2s, ...`.
pub fn seasonal_expand(c: &[f64], period: usize) -> Vec<f64> {
    let mut out = vec![0.0; c.len() * period];
    for (j, v) in c.iter().enumerate() {
        out[(j + 1) * period - 1] = *v;
    }
    out
}

/// Product of lag-form polynomials `(1 - a(B))(1 - b(B))`, in lag form.
pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    from_full(&mul_full(&to_full(a), &to_full(b)))
}

/// `phi(B) Phi(B^s)` in lag form.
pub fn seasonal_product(nonseasonal: &[f64], seasonal: &[f64], period: usize) -> Vec<f64> {
    multiply(nonseasonal, &seasonal_expand(seasonal, period))
}

/// Lag-form coefficients of `(1-B)^d (1-B^s)^D` multiplied into `base`.
pub fn integrate(base: &[f64], d: usize, big_d: usize, period: usize) -> Vec<f64> {
    let mut out = base.to_vec();
    for _ in 0..d {
        out = multiply(&out, &[1.0]);
    }
    for _ in 0..big_d {
        out = multiply(&out, &seasonal_expand(&[1.0], period));
    }
    out
}

/// Non-zero `(lag, coefficient)` pairs, lags starting at 1.
pub fn sparse_lags(c: &[f64]) -> Vec<(usize, f64)> {
    c.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, v)| (k + 1, *v))
        .collect()
}

/// Partial autocorrelations stay this far inside (-1, 1) so a coefficient
/// pushed toward a unit root never rounds onto it.
const PACF_BOUND: f64 = 1.0 - 1e-6;

/// Map unconstrained reals onto the coefficients of a polynomial with all
/// roots outside the unit circle: each value becomes a partial
/// autocorrelation in (-1, 1), then the Durbin-Levinson recursion builds
/// the coefficients.
pub fn constrain(unconstrained: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = unconstrained
        .iter()
        .map(|u| PACF_BOUND * u / (1.0 + u * u).sqrt())
        .collect();
    from_pacf(&pacf)
}

pub fn from_pacf(pacf: &[f64]) -> Vec<f64> {
    let mut coef: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        let prev = coef.clone();
        for j in 0..k {
            coef[j] = prev[j] - r * prev[k - 1 - j];
        }
        coef.push(r);
    }
    coef
}

/// Inverse of [`from_pacf`]; `None` when the polynomial is not stationary.
pub fn to_pacf(coef: &[f64]) -> Option<Vec<f64>> {
    let mut cur = coef.to_vec();
    let mut pacf = vec![0.0; coef.len()];
    for k in (0..coef.len()).rev() {
        let r = cur[k];
        if !(r.abs() < 1.0) {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k).map(|j| (cur[j] + r * cur[k - 1 - j]) / denom).collect();
        cur = prev;
    }
    Some(pacf)
}

/// Inverse of [`constrain`].
pub fn unconstrain(coef: &[f64]) -> Option<Vec<f64>> {
    let pacf = to_pacf(coef)?;
    if pacf.iter().any(|r| r.abs() >= PACF_BOUND) {
        return None;
    }
    Some(
        pacf.iter()
            .map(|r| {
                let r = r / PACF_BOUND;
                r / (1.0 - r * r).sqrt()
            })
            .collect(),
    )
}

/// Moduli of the roots of `1 - c1 z - ... - ck z^k`, from the eigenvalues
/// of the companion matrix (whose eigenvalues are the reciprocal roots).
pub fn root_moduli(c: &[f64]) -> Vec<f64> {
    let k = c.len();
    if k == 0 {
        return Vec::new();
    }
    let mut m = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        m[(0, j)] = c[j];
    }
    for i in 1..k {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|ev| {
            let r = ev.norm();
            if r == 0.0 {
                f64::INFINITY
            } else {
                1.0 / r
            }
        })
        .collect()
}

/// True when every root lies strictly outside the unit circle.
pub fn roots_outside_unit_circle(c: &[f64]) -> bool {
    root_moduli(c).iter().all(|&r| r > 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seasonal_product_expands() {
        // (1 - 0.5B)(1 - 0.3B^2) = 1 - 0.5B - 0.3B^2 + 0.15B^3
        let c = seasonal_product(&[0.5], &[0.3], 2);
        let expect = [0.5, 0.3, -0.15];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn integrate_random_walk() {
        assert_eq!(integrate(&[], 1, 0, 7), vec![1.0]);
        // (1-B)(1-B^2) = 1 - B - B^2 + B^3
        assert_eq!(integrate(&[], 1, 1, 2), vec![1.0, 1.0, -1.0]);
    }

    #[test]
    fn pacf_roundtrip() {
        let u = [0.3, -1.2, 2.0];
        let c = constrain(&u);
        let back = unconstrain(&c).unwrap();
        for (a, b) in u.iter().zip(back) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(roots_outside_unit_circle(&c));
    }

    #[test]
    fn nonstationary_detected() {
        assert!(!roots_outside_unit_circle(&[1.0]));
        assert!(!roots_outside_unit_circle(&[1.2]));
        assert!(unconstrain(&[1.2]).is_none());
        assert!(roots_outside_unit_circle(&[0.5, 0.3]));
        assert!(!roots_outside_unit_circle(&[0.5, 0.6]));
    }
}
