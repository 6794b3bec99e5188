//! Quasi-Newton (BFGS) minimization with central-difference gradients.

/// Settings for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop once the max-norm of the gradient falls below this.
    pub grad_tol: f64,
    /// Stop after three consecutive iterations with relative objective
    /// change below this.
    pub f_tol: f64,
    /// Relative central-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-8,
            f_tol: 1e-13,
            fd_step: 6e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], step: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = step * x[i].abs().max(1.0);
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(&xp);
        xp[i] = orig - h;
        let fm = f(&xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f` from `x0`. Non-finite objective values are treated as
/// infeasible and rejected by the line search. The returned minimum has
/// `converged == false` when `max_iter` was exhausted.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if n == 0 {
        return Minimum {
            x,
            f: fx,
            iterations: 0,
            converged: true,
        };
    }
    let mut g = numeric_gradient(&f, &x, opts.fd_step);
    let mut h = identity(n);
    let mut fresh_h = true;
    let mut small_steps = 0;

    for iter in 0..opts.max_iter {
        if max_abs(&g) < opts.grad_tol || !fx.is_finite() {
            return Minimum {
                x,
                f: fx,
                iterations: iter,
                converged: fx.is_finite(),
            };
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            h = identity(n);
            fresh_h = true;
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }

        let (step_ok, x_new, f_new) = backtrack(&f, &x, fx, &dir, slope);
        if !step_ok {
            if fresh_h {
                // No descent even along the steepest direction: stationary
                // to within gradient noise.
                return Minimum {
                    x,
                    f: fx,
                    iterations: iter,
                    converged: true,
                };
            }
            h = identity(n);
            fresh_h = true;
            continue;
        }

        let g_new = numeric_gradient(&f, &x_new, opts.fd_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh_h {
                let scale = sy / dot(&y, &y);
                for (i, row) in h.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = if i == j { scale } else { 0.0 };
                    }
                }
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh_h = false;
        }

        let rel = (fx - f_new).abs() / fx.abs().max(1.0);
        small_steps = if rel < opts.f_tol { small_steps + 1 } else { 0 };
        x = x_new;
        fx = f_new;
        g = g_new;
        if small_steps >= 3 {
            return Minimum {
                x,
                f: fx,
                iterations: iter + 1,
                converged: true,
            };
        }
    }
    let converged = max_abs(&g) < opts.grad_tol;
    Minimum {
        x,
        f: fx,
        iterations: opts.max_iter,
        converged,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn backtrack<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    fx: f64,
    dir: &[f64],
    slope: f64,
) -> (bool, Vec<f64>, f64) {
    const C1: f64 = 1e-4;
    let mut t = 1.0;
    let mut trial = x.to_vec();
    for _ in 0..50 {
        for i in 0..x.len() {
            trial[i] = x[i] + t * dir[i];
        }
        let ft = f(&trial);
        if ft.is_finite() && ft <= fx + C1 * t * slope && ft < fx {
            return (true, trial, ft);
        }
        t *= 0.5;
    }
    (false, x.to_vec(), fx)
}

// H <- (I - rho s y') H (I - rho y s') + rho s s'
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(f, &[-1.2, 1.0], &BfgsOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn quadratic_exact() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2) + x[0] * x[1];
        let m = minimize(f, &[0.0, 0.0], &BfgsOptions::default());
        // Stationary point of the quadratic: 2(x-3)+y=0, 4(y+1)+x=0.
        let (xs, ys) = (28.0 / 7.0, -14.0 / 7.0);
        assert!((m.x[0] - xs).abs() < 1e-6 && (m.x[1] - ys).abs() < 1e-6, "{:?}", m);
    }

    #[test]
    fn empty_problem() {
        let m = minimize(|_: &[f64]| 4.0, &[], &BfgsOptions::default());
        assert!(m.converged);
        assert_eq!(m.f, 4.0);
    }
}
