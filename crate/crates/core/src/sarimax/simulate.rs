//! Simulation of SARIMAX processes, used by synthetic scenarios and by
//! estimator consistency checks.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{poly, SarimaxCoefficients, SarimaxSpec};
use crate::error::{ForecastError, Result};
use crate::series::DailySeries;

/// Discarded warm-up length before the returned sample.
pub const WARMUP: usize = 500;

/// A simulated sample and the innovations that produced it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub series: DailySeries,
    /// `innovations[t]` entered the recursion at output index `t`.
    pub innovations: Vec<f64>,
}

/// Simulate `n` points. `exog` holds one column of length `n` per name in
/// `spec.exog`.
pub fn simulate<R: Rng + ?Sized>(
    spec: &SarimaxSpec,
    coefficients: &SarimaxCoefficients,
    n: usize,
    sigma: f64,
    exog: &[Vec<f64>],
    rng: &mut R,
) -> Result<Simulation> {
    spec.validate()?;
    if exog.len() != spec.exog.len() || exog.iter().any(|c| c.len() != n) {
        return Err(ForecastError::Dimension(
            "simulation exogenous columns must match the spec and have length n".into(),
        ));
    }
    if coefficients.beta.len() != spec.exog.len() {
        return Err(ForecastError::Dimension("beta length does not match exog".into()));
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| ForecastError::Config(format!("invalid innovation scale: {e}")))?;
    let s = spec.period;
    let ar = poly::sparse_lags(&poly::integrate(
        &coefficients.ar_poly(s),
        spec.d,
        spec.seasonal_d,
        s,
    ));
    let ma = poly::sparse_lags(&coefficients.ma_poly(s));

    let total = WARMUP + n;
    let a: Vec<f64> = (0..total).map(|_| normal.sample(rng)).collect();
    let mut e = vec![0.0; total];
    for t in 0..total {
        let mut v = a[t];
        for &(k, c) in &ar {
            if t >= k {
                v += c * e[t - k];
            }
        }
        for &(k, c) in &ma {
            if t >= k {
                v -= c * a[t - k];
            }
        }
        e[t] = v;
    }
    let values: Vec<f64> = (0..n)
        .map(|t| {
            let reg: f64 = coefficients
                .beta
                .iter()
                .zip(exog)
                .map(|(b, col)| b * col[t])
                .sum();
            coefficients.intercept + reg + e[WARMUP + t]
        })
        .collect();
    let mut series = DailySeries::from_values(values)?;
    for (name, col) in spec.exog.iter().zip(exog) {
        series = series.with_exog(name.clone(), col.clone())?;
    }
    Ok(Simulation {
        series,
        innovations: a[WARMUP..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_per_seed() {
        let spec = SarimaxSpec::new(1, 1, 1).seasonal(1, 0, 0, 7);
        let mut c = SarimaxCoefficients::zeros(&spec);
        c.phi = vec![0.4];
        c.theta = vec![0.2];
        c.seasonal_phi = vec![0.3];
        let a = simulate(&spec, &c, 50, 1.0, &[], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = simulate(&spec, &c, 50, 1.0, &[], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.innovations.len(), 50);
    }
}
