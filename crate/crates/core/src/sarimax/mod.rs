//! Seasonal ARIMA with optional exogenous regressors.
//!
//! The model is regression with SARIMA errors:
//!
//! ```text
//! y_t = mu + beta' x_t + n_t
//! phi(B) Phi(B^s) (1-B)^d (1-B^s)^D n_t = theta(B) Theta(B^s) a_t
//! ```
//!
//! with `phi(B) = 1 - phi_1 B - ...` and `theta(B) = 1 - theta_1 B - ...`
//! (MA coefficients enter with a minus sign). The intercept `mu` is only
//! present when `d + D = 0`. Parameters are estimated by conditional sum of
//! squares: pre-sample innovations are zero and the first
//! `max(p + sP, q + sQ)` differenced points serve as burn-in.

pub mod poly;
mod report;
pub mod simulate;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ForecastError, Result};
use crate::forecast::{z_value, ForecastResult};
use crate::optim::{minimize, BfgsOptions};
use crate::series::{difference_orders, mean_std, DailySeries, ExogTable};

pub use simulate::{simulate, Simulation};

/// Model orders `(p, d, q) x (P, D, Q, s)` plus exogenous column names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SarimaxSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub period: usize,
    pub exog: Vec<String>,
}

impl SarimaxSpec {
    /// Non-seasonal orders with the weekly period preset.
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            period: 7,
            exog: Vec::new(),
        }
    }

    pub fn seasonal(mut self, p: usize, d: usize, q: usize, period: usize) -> Self {
        self.seasonal_p = p;
        self.seasonal_d = d;
        self.seasonal_q = q;
        self.period = period;
        self
    }

    pub fn with_exog<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.exog = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn has_intercept(&self) -> bool {
        self.d + self.seasonal_d == 0
    }

    pub fn n_arma(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Number of estimated mean-structure and ARMA coefficients.
    pub fn n_params(&self) -> usize {
        self.n_arma() + usize::from(self.has_intercept()) + self.exog.len()
    }

    /// Observations consumed by differencing.
    pub fn diff_loss(&self) -> usize {
        self.d + self.period * self.seasonal_d
    }

    pub fn burn_in(&self) -> usize {
        (self.p + self.period * self.seasonal_p).max(self.q + self.period * self.seasonal_q)
    }

    pub fn is_seasonal(&self) -> bool {
        self.seasonal_p + self.seasonal_d + self.seasonal_q > 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_seasonal() && self.period < 2 {
            return Err(ForecastError::Config(
                "seasonal period must be >= 2 when seasonal orders are used".into(),
            ));
        }
        if self.period == 0 {
            return Err(ForecastError::Config("seasonal period must be positive".into()));
        }
        Ok(())
    }

    /// Effective residual count for a series of length `n`.
    pub fn effective_len(&self, n: usize) -> usize {
        n.saturating_sub(self.diff_loss() + self.burn_in())
    }
}

impl fmt::Display for SarimaxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.exog.is_empty() { "SARIMA" } else { "SARIMAX" };
        write!(
            f,
            "{name}({},{},{})x({},{},{},{})",
            self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
        )
    }
}

/// Estimated coefficients on the original data scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaxCoefficients {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    /// Zero whenever the spec differences the series.
    pub intercept: f64,
    pub beta: Vec<f64>,
}

impl SarimaxCoefficients {
    pub fn zeros(spec: &SarimaxSpec) -> Self {
        Self {
            phi: vec![0.0; spec.p],
            theta: vec![0.0; spec.q],
            seasonal_phi: vec![0.0; spec.seasonal_p],
            seasonal_theta: vec![0.0; spec.seasonal_q],
            intercept: 0.0,
            beta: vec![0.0; spec.exog.len()],
        }
    }

    fn check_shape(&self, spec: &SarimaxSpec) -> Result<()> {
        let ok = self.phi.len() == spec.p
            && self.theta.len() == spec.q
            && self.seasonal_phi.len() == spec.seasonal_p
            && self.seasonal_theta.len() == spec.seasonal_q
            && self.beta.len() == spec.exog.len()
            && (spec.has_intercept() || self.intercept == 0.0);
        if ok {
            Ok(())
        } else {
            Err(ForecastError::Dimension(format!(
                "coefficient shapes do not match {spec}"
            )))
        }
    }

    /// Combined AR lag polynomial `phi(B) Phi(B^s)` in lag form.
    pub fn ar_poly(&self, period: usize) -> Vec<f64> {
        poly::seasonal_product(&self.phi, &self.seasonal_phi, period)
    }

    /// Combined MA lag polynomial `theta(B) Theta(B^s)` in lag form.
    pub fn ma_poly(&self, period: usize) -> Vec<f64> {
        poly::seasonal_product(&self.theta, &self.seasonal_theta, period)
    }

    /// All four polynomials have their roots outside the unit circle.
    pub fn is_stationary_invertible(&self) -> bool {
        [&self.phi, &self.theta, &self.seasonal_phi, &self.seasonal_theta]
            .iter()
            .all(|c| poly::roots_outside_unit_circle(c))
    }
}

/// Settings for the quasi-Newton estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub optimizer: BfgsOptions,
    /// Starting value for every AR and MA coefficient.
    pub initial_coefficient: f64,
    /// Minimum ratio of effective observations to parameters.
    pub min_obs_per_param: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            optimizer: BfgsOptions::default(),
            initial_coefficient: 0.1,
            min_obs_per_param: 10,
        }
    }
}

/// One-step residuals on the original scale, starting at series index
/// `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedResiduals {
    pub offset: usize,
    pub values: Vec<f64>,
}

/// A fitted model conditioned on a history.
#[derive(Debug, Clone, PartialEq)]
pub struct SarimaxFit {
    pub spec: SarimaxSpec,
    pub coefficients: SarimaxCoefficients,
    pub sigma2: f64,
    pub loglik: f64,
    /// Conditional residuals `a_t` of the effective sample.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    history: DailySeries,
}

/// Differenced target and regressors for a spec.
struct Prepared {
    y: Vec<f64>,
    x: Vec<Vec<f64>>,
}

impl Prepared {
    fn new(series: &DailySeries, spec: &SarimaxSpec) -> Result<Self> {
        let (d, sd, s) = (spec.d, spec.seasonal_d, spec.period);
        let y = difference_orders(series.values(), d, sd, s)?;
        let x = series
            .exog_matrix(&spec.exog)?
            .iter()
            .map(|c| difference_orders(c, d, sd, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { y, x })
    }

    fn errors(&self, intercept: f64, beta: &[f64]) -> Vec<f64> {
        let mut w: Vec<f64> = self.y.iter().map(|v| v - intercept).collect();
        for (b, col) in beta.iter().zip(&self.x) {
            if *b != 0.0 {
                for (wi, xi) in w.iter_mut().zip(col) {
                    *wi -= b * xi;
                }
            }
        }
        w
    }
}

/// Conditional residuals of an ARMA recursion on `w`; entries before
/// `burn` are not produced and pre-sample innovations are zero.
fn css_residuals(w: &[f64], ar: &[(usize, f64)], ma: &[(usize, f64)], burn: usize) -> Vec<f64> {
    let n = w.len();
    let mut a = vec![0.0; n];
    for t in burn..n {
        let mut v = w[t];
        for &(k, c) in ar {
            v -= c * w[t - k];
        }
        for &(k, c) in ma {
            if t >= burn + k {
                v += c * a[t - k];
            }
        }
        a[t] = v;
    }
    a.split_off(burn.min(n))
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn concentrated_loglik(ssr: f64, n: usize) -> f64 {
    let n = n as f64;
    let sigma2 = (ssr / n).max(f64::MIN_POSITIVE);
    -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0)
}

fn check_inputs(series: &DailySeries, spec: &SarimaxSpec, min_ratio: usize) -> Result<usize> {
    spec.validate()?;
    for name in &spec.exog {
        if series.exog_column(name).is_none() {
            return Err(ForecastError::Input(format!(
                "series lacks exogenous column '{name}'"
            )));
        }
    }
    let n_eff = spec.effective_len(series.len());
    let needed = min_ratio * spec.n_params().max(1);
    if n_eff < needed {
        return Err(ForecastError::Config(format!(
            "{spec} needs at least {needed} observations after differencing and burn-in, have {n_eff}"
        )));
    }
    Ok(n_eff)
}

/// Fit with the default optimizer settings.
pub fn fit_sarimax(series: &DailySeries, spec: &SarimaxSpec) -> Result<SarimaxFit> {
    fit_sarimax_with(series, spec, &FitOptions::default())
}

pub fn fit_sarimax_with(
    series: &DailySeries,
    spec: &SarimaxSpec,
    opts: &FitOptions,
) -> Result<SarimaxFit> {
    check_inputs(series, spec, opts.min_obs_per_param)?;
    let prep = Prepared::new(series, spec)?;

    // Work on a unit-scale copy so the optimizer sees comparable magnitudes.
    let y_scale = positive_std(&prep.y);
    let x_scales: Vec<f64> = prep.x.iter().map(|c| positive_std(c)).collect();
    let scaled = Prepared {
        y: prep.y.iter().map(|v| v / y_scale).collect(),
        x: prep
            .x
            .iter()
            .zip(&x_scales)
            .map(|(c, s)| c.iter().map(|v| v / s).collect())
            .collect(),
    };

    let layout = Layout::new(spec);
    let x0 = layout.initial(spec, &scaled, opts.initial_coefficient);
    let burn = spec.burn_in();
    let objective = |theta: &[f64]| -> f64 {
        let c = layout.decode(spec, theta);
        let w = scaled.errors(c.intercept, &c.beta);
        let a = css_residuals(
            &w,
            &poly::sparse_lags(&c.ar_poly(spec.period)),
            &poly::sparse_lags(&c.ma_poly(spec.period)),
            burn,
        );
        let mse = sum_sq(&a) / a.len() as f64;
        0.5 * mse.max(1e-300).ln()
    };
    let min = minimize(objective, &x0, &opts.optimizer);
    if !min.converged {
        return Err(ForecastError::Estimation {
            message: format!("{spec}: optimizer did not converge"),
            best_objective: Some(min.f),
            iterations: min.iterations,
        });
    }

    let mut coef = layout.decode(spec, &min.x);
    coef.intercept *= y_scale;
    for (b, xs) in coef.beta.iter_mut().zip(&x_scales) {
        *b *= y_scale / xs;
    }
    let mut fit = SarimaxFit::from_coefficients(series, spec, coef)?;
    fit.iterations = min.iterations;
    Ok(fit)
}

fn positive_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 1.0;
    }
    let (_, s) = mean_std(xs);
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

/// Position of each coefficient block in the unconstrained vector.
struct Layout {
    p: usize,
    q: usize,
    sp: usize,
    sq: usize,
    intercept: bool,
    k: usize,
}

impl Layout {
    fn new(spec: &SarimaxSpec) -> Self {
        Self {
            p: spec.p,
            q: spec.q,
            sp: spec.seasonal_p,
            sq: spec.seasonal_q,
            intercept: spec.has_intercept(),
            k: spec.exog.len(),
        }
    }

    fn decode(&self, spec: &SarimaxSpec, theta: &[f64]) -> SarimaxCoefficients {
        let mut at = 0;
        let mut take = |n: usize| {
            let s = &theta[at..at + n];
            at += n;
            s
        };
        let phi = poly::constrain(take(self.p));
        let th = poly::constrain(take(self.q));
        let sphi = poly::constrain(take(self.sp));
        let sth = poly::constrain(take(self.sq));
        let intercept = if self.intercept { take(1)[0] } else { 0.0 };
        let beta = take(self.k).to_vec();
        debug_assert_eq!(spec.exog.len(), beta.len());
        SarimaxCoefficients {
            phi,
            theta: th,
            seasonal_phi: sphi,
            seasonal_theta: sth,
            intercept,
            beta,
        }
    }

    fn initial(&self, spec: &SarimaxSpec, prep: &Prepared, start: f64) -> Vec<f64> {
        let init_block = |n: usize| -> Vec<f64> {
            poly::unconstrain(&vec![start; n]).unwrap_or_else(|| {
                let r = start.clamp(-0.9, 0.9);
                vec![r / (1.0 - r * r).sqrt(); n]
            })
        };
        let mut x = Vec::new();
        x.extend(init_block(self.p));
        x.extend(init_block(self.q));
        x.extend(init_block(self.sp));
        x.extend(init_block(self.sq));
        x.extend(ols_mean_structure(prep, self.intercept, spec.exog.len()));
        x
    }
}

/// Least-squares intercept and regression coefficients of the differenced
/// target, used as starting values.
fn ols_mean_structure(prep: &Prepared, intercept: bool, k: usize) -> Vec<f64> {
    let cols = usize::from(intercept) + k;
    if cols == 0 {
        return Vec::new();
    }
    let n = prep.y.len();
    let design = DMatrix::from_fn(n, cols, |i, j| {
        if intercept && j == 0 {
            1.0
        } else {
            prep.x[j - usize::from(intercept)][i]
        }
    });
    let rhs = DVector::from_column_slice(&prep.y);
    match design.svd(true, true).solve(&rhs, 1e-12) {
        Ok(sol) => sol.iter().copied().collect(),
        Err(_) => vec![0.0; cols],
    }
}

/// Conditional Gaussian log-likelihood (variance profiled out) of the given
/// coefficients on `series`.
pub fn conditional_loglik(
    series: &DailySeries,
    spec: &SarimaxSpec,
    coefficients: &SarimaxCoefficients,
) -> Result<f64> {
    let fit = SarimaxFit::from_coefficients(series, spec, coefficients.clone())?;
    Ok(fit.loglik)
}

impl SarimaxFit {
    /// Build a fit from known coefficients: residuals, variance and
    /// likelihood are evaluated on `series`.
    pub fn from_coefficients(
        series: &DailySeries,
        spec: &SarimaxSpec,
        coefficients: SarimaxCoefficients,
    ) -> Result<Self> {
        check_inputs(series, spec, 1)?;
        coefficients.check_shape(spec)?;
        if !coefficients.is_stationary_invertible() {
            return Err(ForecastError::Config(
                "coefficients violate stationarity or invertibility".into(),
            ));
        }
        let residuals = residuals_for(series, spec, &coefficients)?;
        let ssr = sum_sq(&residuals);
        let n = residuals.len();
        Ok(Self {
            spec: spec.clone(),
            coefficients,
            sigma2: (ssr / n as f64).max(f64::MIN_POSITIVE),
            loglik: concentrated_loglik(ssr, n),
            residuals,
            iterations: 0,
            history: series.clone(),
        })
    }

    /// The same coefficients conditioned on another history (for rolling
    /// forecast origins or after reloading a persisted fit). Variance and
    /// likelihood keep their estimated values.
    pub fn condition_on(&self, history: &DailySeries) -> Result<Self> {
        check_inputs(history, &self.spec, 1)?;
        let residuals = residuals_for(history, &self.spec, &self.coefficients)?;
        Ok(Self {
            residuals,
            history: history.clone(),
            ..self.clone()
        })
    }

    pub fn history(&self) -> &DailySeries {
        &self.history
    }

    /// One-step in-sample residuals on the original scale, aligned to the
    /// history's index.
    pub fn residual_series(&self) -> AlignedResiduals {
        AlignedResiduals {
            offset: self.spec.diff_loss() + self.spec.burn_in(),
            values: self.residuals.clone(),
        }
    }

    pub fn is_stationary_invertible(&self) -> bool {
        self.coefficients.is_stationary_invertible()
    }

    /// Psi-weights `psi_0..psi_{horizon-1}` of the integrated process.
    pub fn psi_weights(&self, horizon: usize) -> Vec<f64> {
        let s = self.spec.period;
        let ar = poly::integrate(
            &self.coefficients.ar_poly(s),
            self.spec.d,
            self.spec.seasonal_d,
            s,
        );
        let ma = self.coefficients.ma_poly(s);
        let mut psi = vec![0.0; horizon];
        for j in 0..horizon {
            if j == 0 {
                psi[0] = 1.0;
                continue;
            }
            let mut v = if j <= ma.len() { -ma[j - 1] } else { 0.0 };
            for k in 1..=j.min(ar.len()) {
                v += ar[k - 1] * psi[j - k];
            }
            psi[j] = v;
        }
        psi
    }

    /// Minimum-MSE forecasts with `1 - alpha` prediction intervals.
    pub fn forecast(&self, horizon: usize, future_exog: &ExogTable, alpha: f64) -> Result<ForecastResult> {
        if horizon == 0 {
            return Err(ForecastError::Config("horizon must be >= 1".into()));
        }
        let z = z_value(alpha)?;
        let future_x = if self.spec.exog.is_empty() {
            Vec::new()
        } else {
            future_exog.require(&self.spec.exog, horizon)?
        };
        let c = &self.coefficients;
        let s = self.spec.period;
        let y = self.history.values();
        let n = y.len();
        let hist_x = self.history.exog_matrix(&self.spec.exog)?;

        // Regression errors n_t on the original scale, extended by forecasts.
        let mut err: Vec<f64> = (0..n)
            .map(|t| {
                let reg: f64 = c.beta.iter().zip(&hist_x).map(|(b, col)| b * col[t]).sum();
                y[t] - c.intercept - reg
            })
            .collect();
        let mut innov = vec![0.0; n + horizon];
        let offset = self.spec.diff_loss() + self.spec.burn_in();
        innov[offset..offset + self.residuals.len()].copy_from_slice(&self.residuals);

        let ar = poly::sparse_lags(&poly::integrate(&c.ar_poly(s), self.spec.d, self.spec.seasonal_d, s));
        let ma = poly::sparse_lags(&c.ma_poly(s));
        let mut mean = Vec::with_capacity(horizon);
        for h in 0..horizon {
            let t = n + h;
            let mut v = 0.0;
            for &(k, a) in &ar {
                v += a * err[t - k];
            }
            for &(k, m) in &ma {
                if t >= k {
                    v -= m * innov[t - k];
                }
            }
            err.push(v);
            let reg: f64 = c.beta.iter().zip(&future_x).map(|(b, col)| b * col[h]).sum();
            mean.push(v + c.intercept + reg);
        }

        let sigma = self.sigma2.sqrt();
        let mut acc = 0.0;
        let half: Vec<f64> = self
            .psi_weights(horizon)
            .iter()
            .map(|p| {
                acc += p * p;
                z * sigma * acc.sqrt()
            })
            .collect();
        Ok(ForecastResult::from_half_widths(mean, &half))
    }
}

fn residuals_for(
    series: &DailySeries,
    spec: &SarimaxSpec,
    c: &SarimaxCoefficients,
) -> Result<Vec<f64>> {
    let prep = Prepared::new(series, spec)?;
    let w = prep.errors(c.intercept, &c.beta);
    Ok(css_residuals(
        &w,
        &poly::sparse_lags(&c.ar_poly(spec.period)),
        &poly::sparse_lags(&c.ma_poly(spec.period)),
        spec.burn_in(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ar1_fit(phi: f64, last: f64) -> SarimaxFit {
        let series = DailySeries::from_values(vec![0.3, -0.1, 0.7, 1.1, last]).unwrap();
        let spec = SarimaxSpec::new(1, 0, 0);
        let mut c = SarimaxCoefficients::zeros(&spec);
        c.phi = vec![phi];
        SarimaxFit::from_coefficients(&series, &spec, c).unwrap()
    }

    #[test]
    fn ar1_forecast_by_substitution() {
        let fit = ar1_fit(0.5, 2.0);
        let f = fit.forecast(2, &ExogTable::new(), 0.05).unwrap();
        assert!((f.mean[0] - 1.0).abs() < 1e-15);
        assert!((f.mean[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_exogenous_forecast_is_linear_map() {
        let x: Vec<f64> = (0..20).map(|t| (t % 5) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let series = DailySeries::from_values(y).unwrap().with_exog("x", x).unwrap();
        let spec = SarimaxSpec::new(0, 0, 0).with_exog(["x"]);
        let mut c = SarimaxCoefficients::zeros(&spec);
        c.beta = vec![3.0];
        let fit = SarimaxFit::from_coefficients(&series, &spec, c).unwrap();
        let fut = ExogTable::new().with_column("x", vec![1.0, 2.0]);
        let f = fit.forecast(2, &fut, 0.05).unwrap();
        assert_eq!(f.mean, vec![3.0, 6.0]);

        let missing = fit.forecast(3, &fut, 0.05).unwrap_err();
        assert!(matches!(missing, ForecastError::Input(_)));
        assert!(matches!(
            fit.forecast(1, &ExogTable::new(), 0.05),
            Err(ForecastError::Input(_))
        ));
    }

    #[test]
    fn random_walk_flat_mean_sqrt_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut y = vec![0.0];
        for _ in 0..99 {
            let e: f64 = StandardNormal.sample(&mut rng);
            y.push(y.last().unwrap() + e);
        }
        *y.last_mut().unwrap() = 10.0;
        let series = DailySeries::from_values(y).unwrap();
        let spec = SarimaxSpec::new(0, 1, 0);
        let fit = fit_sarimax(&series, &spec).unwrap();
        let f = fit.forecast(30, &ExogTable::new(), 0.05).unwrap();
        let hw = f.half_widths();
        for h in 0..30 {
            assert_eq!(f.mean[h], 10.0);
            let ratio = hw[h] / hw[0];
            assert!((ratio - ((h + 1) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn white_noise_residuals_are_demeaned_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..200)
            .map(|_| 5.0 + Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let series = DailySeries::from_values(y.clone()).unwrap();
        let fit = fit_sarimax(&series, &SarimaxSpec::new(0, 0, 0)).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let r = fit.residual_series();
        assert_eq!(r.offset, 0);
        for (a, b) in r.values.iter().zip(&y) {
            assert!((a - (b - mean)).abs() < 1e-6);
        }
    }

    #[test]
    fn periodic_series_saturated_model_has_zero_residuals() {
        let y: Vec<f64> = (0..100).map(|t| [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0][t % 7]).collect();
        let series = DailySeries::from_values(y).unwrap();
        let spec = SarimaxSpec::new(0, 0, 0).seasonal(0, 1, 0, 7);
        let fit = fit_sarimax(&series, &spec).unwrap();
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(fit.sigma2 > 0.0);
        let f = fit.forecast(14, &ExogTable::new(), 0.05).unwrap();
        for h in 0..14 {
            assert_eq!(f.mean[h], [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0][(100 + h) % 7]);
        }
    }

    #[test]
    fn too_few_observations_is_config_error() {
        let series = DailySeries::from_values((0..30).map(|t| t as f64).collect()).unwrap();
        let spec = SarimaxSpec::new(2, 0, 2).seasonal(1, 0, 1, 7);
        assert!(matches!(fit_sarimax(&series, &spec), Err(ForecastError::Config(_))));
    }

    #[test]
    fn rejects_bad_spec_and_missing_exog() {
        let series = DailySeries::from_values((0..300).map(|t| (t % 3) as f64).collect()).unwrap();
        let spec = SarimaxSpec::new(1, 0, 0).seasonal(1, 0, 0, 1);
        assert!(matches!(fit_sarimax(&series, &spec), Err(ForecastError::Config(_))));
        let spec = SarimaxSpec::new(1, 0, 0).with_exog(["flights"]);
        assert!(matches!(fit_sarimax(&series, &spec), Err(ForecastError::Input(_))));
    }

    #[test]
    fn display_label() {
        let s = SarimaxSpec::new(1, 1, 2).seasonal(3, 1, 1, 7);
        assert_eq!(s.to_string(), "SARIMA(1,1,2)x(3,1,1,7)");
        assert_eq!(s.n_params(), 7);
        assert_eq!(s.burn_in(), 22);
    }
}
