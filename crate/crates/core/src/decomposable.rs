//! Additive decomposable forecaster `y(t) = g(t) + s(t) + h(t) + e(t)`.
//!
//! `g` is a continuous piecewise-linear trend with rate changes `delta_j`
//! at fixed changepoints, `s` is a sum of Fourier terms (weekly, and
//! yearly for long histories), `h` holds one additive effect per holiday
//! class, and extra regressors enter linearly. Estimation is penalized
//! least squares on a max-abs scaled target with time mapped to `[0, 1]`:
//!
//! ```text
//! sum r_t^2 + (1 / changepoint_prior_scale) * sum |delta_j|
//!           + (1 / (2 * seasonality_prior_scale^2)) * sum beta_k^2
//! ```
//!
//! where `beta` covers Fourier, holiday and regressor coefficients. The
//! ridge block is profiled out in closed form and the L1 problem over
//! `delta` is solved by cyclic coordinate descent.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use chrono::{Duration, NaiveDate};
use nalgebra::{DMatrix, DVector};

use crate::error::{ForecastError, Result};
use crate::forecast::{z_value, ForecastResult};
use crate::persist::KvDoc;
use crate::series::{mean_std, DailySeries, ExogTable};

pub const WEEKLY_PERIOD: f64 = 7.0;
pub const YEARLY_PERIOD: f64 = 365.25;
/// Yearly terms are only used when the history spans at least this many days.
pub const MIN_YEARLY_SPAN: usize = 730;
pub const SIGMA_FLOOR: f64 = 1e-8;
const CD_TOL: f64 = 1e-10;
const CD_MAX_SWEEPS: usize = 200_000;

/// Named holiday classes, each a set of dates sharing one effect.
pub type HolidayCalendar = BTreeMap<String, BTreeSet<NaiveDate>>;

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposableSpec {
    pub changepoint_prior_scale: f64,
    pub seasonality_prior_scale: f64,
    pub n_changepoints: usize,
    pub fourier_order_weekly: usize,
    pub fourier_order_yearly: usize,
    pub holidays: HolidayCalendar,
    /// Exogenous columns folded in as linear regressors.
    pub extra_regressors: Vec<String>,
}

impl Default for DecomposableSpec {
    fn default() -> Self {
        Self {
            changepoint_prior_scale: 0.05,
            seasonality_prior_scale: 10.0,
            n_changepoints: 25,
            fourier_order_weekly: 3,
            fourier_order_yearly: 10,
            holidays: HolidayCalendar::new(),
            extra_regressors: Vec::new(),
        }
    }
}

impl DecomposableSpec {
    pub fn with_prior_scales(mut self, changepoint: f64, seasonality: f64) -> Self {
        self.changepoint_prior_scale = changepoint;
        self.seasonality_prior_scale = seasonality;
        self
    }

    pub fn with_regressors<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.extra_regressors = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn label(&self) -> String {
        let kind = if self.extra_regressors.is_empty() {
            "univariate"
        } else {
            "multivariate"
        };
        format!(
            "Decomposable {kind} (cps={}, sps={})",
            self.changepoint_prior_scale, self.seasonality_prior_scale
        )
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.changepoint_prior_scale > 0.0 && self.seasonality_prior_scale > 0.0) {
            return Err(ForecastError::Config("prior scales must be positive".into()));
        }
        if self.fourier_order_weekly == 0 {
            return Err(ForecastError::Config("weekly Fourier order must be >= 1".into()));
        }
        if n < 2 || self.n_changepoints >= n / 2 {
            return Err(ForecastError::Config(format!(
                "{} changepoints need more than {} observations",
                self.n_changepoints,
                2 * self.n_changepoints
            )));
        }
        let yearly = if n >= MIN_YEARLY_SPAN { self.fourier_order_yearly } else { 0 };
        let terms = self.n_changepoints
            + 2 * (self.fourier_order_weekly + yearly)
            + self.holidays.len()
            + 2;
        if n < 2 * terms {
            return Err(ForecastError::Config(format!(
                "decomposable model with {terms} terms needs at least {} observations, have {n}",
                2 * terms
            )));
        }
        Ok(())
    }
}

/// Fitted parameters in original units: rates are per day and time is the
/// day index from the first training date.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposableFit {
    pub spec: DecomposableSpec,
    pub start_date: NaiveDate,
    pub n_train: usize,
    pub base_rate: f64,
    pub offset: f64,
    pub delta: Vec<f64>,
    pub changepoint_times: Vec<usize>,
    pub weekly_coeffs: Vec<f64>,
    pub yearly_coeffs: Vec<f64>,
    pub holiday_effects: BTreeMap<String, f64>,
    /// `(name, coefficient per unit, centering value)`.
    pub regressors: Vec<(String, f64, f64)>,
    pub residual_sigma: f64,
    pub sigma_floored: bool,
    /// In-sample fitted values from the solver.
    pub fitted: Vec<f64>,
}

/// Component time paths, one value per day.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub trend: Vec<f64>,
    pub weekly: Vec<f64>,
    pub yearly: Vec<f64>,
    pub holidays: Vec<f64>,
    pub regressors: Vec<f64>,
}

impl Components {
    pub fn total(&self) -> Vec<f64> {
        (0..self.trend.len())
            .map(|i| self.trend[i] + self.weekly[i] + self.yearly[i] + self.holidays[i] + self.regressors[i])
            .collect()
    }
}

fn day_number(date: NaiveDate) -> f64 {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
    (date - epoch).num_days() as f64
}

fn fourier_row(day: f64, period: f64, order: usize, out: &mut Vec<f64>) {
    for k in 1..=order {
        let arg = 2.0 * PI * k as f64 * day / period;
        out.push(arg.sin());
        out.push(arg.cos());
    }
}

fn changepoints(n: usize, count: usize) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let last = (0.8 * (n - 1) as f64).floor();
    let mut cps: Vec<usize> = (1..=count)
        .map(|j| (last * j as f64 / count as f64).round() as usize)
        .filter(|&c| c > 0)
        .collect();
    cps.dedup();
    cps
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Penalized fit on the training series.
pub fn fit_decomposable(series: &DailySeries, spec: &DecomposableSpec) -> Result<DecomposableFit> {
    let n = series.len();
    spec.validate(n)?;
    let y = series.values();
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let y_scale = if y_scale > 0.0 { y_scale } else { 1.0 };
    let ys: Vec<f64> = y.iter().map(|v| v / y_scale).collect();
    let span = (n - 1) as f64;

    let yearly_order = if n >= MIN_YEARLY_SPAN { spec.fourier_order_yearly } else { 0 };
    let cps = changepoints(n, spec.n_changepoints);

    // Holiday classes without any training occurrence carry no effect.
    let holiday_classes: Vec<(&String, &BTreeSet<NaiveDate>)> = spec
        .holidays
        .iter()
        .filter(|(_, dates)| (0..n).any(|t| dates.contains(&series.date(t))))
        .collect();

    // Regressors with zero variance are dropped (coefficient 0).
    let mut regressors: Vec<(String, Vec<f64>, f64, f64)> = Vec::new();
    for name in &spec.extra_regressors {
        let col = series.exog_column(name).ok_or_else(|| {
            ForecastError::Input(format!("series lacks regressor column '{name}'"))
        })?;
        let (m, s) = mean_std(col);
        if s > 0.0 && s.is_finite() {
            regressors.push((name.clone(), col.iter().map(|v| (v - m) / s).collect(), m, s));
        }
    }

    let n_fourier = 2 * (spec.fourier_order_weekly + yearly_order);
    let p = 2 + n_fourier + holiday_classes.len() + regressors.len();
    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut row = Vec::with_capacity(p);
    for t in 0..n {
        let date = series.date(t);
        let day = day_number(date);
        row.clear();
        row.push(1.0);
        row.push(t as f64 / span);
        fourier_row(day, WEEKLY_PERIOD, spec.fourier_order_weekly, &mut row);
        fourier_row(day, YEARLY_PERIOD, yearly_order, &mut row);
        for (_, dates) in &holiday_classes {
            row.push(if dates.contains(&date) { 1.0 } else { 0.0 });
        }
        for (_, col, _, _) in &regressors {
            row.push(col[t]);
        }
        for (j, v) in row.iter().enumerate() {
            x[(t, j)] = *v;
        }
    }
    check_rank(&x)?;

    let z = DMatrix::from_fn(n, cps.len(), |t, j| {
        (t as f64 / span - cps[j] as f64 / span).max(0.0)
    });
    let lambda2 = 1.0 / (2.0 * spec.seasonality_prior_scale.powi(2));
    let lambda1 = 1.0 / spec.changepoint_prior_scale;

    let mut a = x.transpose() * &x;
    for j in 2..p {
        a[(j, j)] += lambda2;
    }
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| ForecastError::estimation("singular decomposable design"))?;
    let yv = DVector::from_column_slice(&ys);
    let xty = x.transpose() * &yv;

    let delta = if cps.is_empty() {
        Vec::new()
    } else {
        let xtz = x.transpose() * &z;
        let a_inv_xtz = chol.solve(&xtz);
        let gram = z.transpose() * &z - xtz.transpose() * &a_inv_xtz;
        let c = z.transpose() * &yv - a_inv_xtz.transpose() * &xty;
        lasso_cd(&gram, &c, lambda1)?
    };
    let dv = DVector::from_column_slice(&delta);
    let resid_target = if delta.is_empty() { yv.clone() } else { &yv - &z * &dv };
    let beta = chol.solve(&(x.transpose() * &resid_target));

    let fitted_scaled = &x * &beta + if delta.is_empty() { DVector::zeros(n) } else { &z * &dv };
    let fitted: Vec<f64> = fitted_scaled.iter().map(|v| v * y_scale).collect();
    let ssr: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let raw_sigma = (ssr / n as f64).sqrt();
    let sigma_floored = raw_sigma < SIGMA_FLOOR;
    if sigma_floored {
        log::warn!("decomposable fit has zero residual variance; interval width floored");
    }

    let b: Vec<f64> = beta.iter().copied().collect();
    let mut at = 2;
    let weekly_coeffs: Vec<f64> = b[at..at + 2 * spec.fourier_order_weekly]
        .iter()
        .map(|v| v * y_scale)
        .collect();
    at += 2 * spec.fourier_order_weekly;
    let yearly_coeffs: Vec<f64> = b[at..at + 2 * yearly_order].iter().map(|v| v * y_scale).collect();
    at += 2 * yearly_order;
    let mut holiday_effects = BTreeMap::new();
    for (name, _) in &holiday_classes {
        holiday_effects.insert((*name).clone(), b[at] * y_scale);
        at += 1;
    }
    let mut reg_out = Vec::new();
    for (name, _, m, s) in &regressors {
        reg_out.push((name.clone(), b[at] * y_scale / s, *m));
        at += 1;
    }
    Ok(DecomposableFit {
        spec: spec.clone(),
        start_date: series.start_date(),
        n_train: n,
        base_rate: b[1] * y_scale / span,
        offset: b[0] * y_scale,
        delta: delta.iter().map(|d| d * y_scale / span).collect(),
        changepoint_times: cps,
        weekly_coeffs,
        yearly_coeffs,
        holiday_effects,
        regressors: reg_out,
        residual_sigma: raw_sigma.max(SIGMA_FLOOR),
        sigma_floored,
        fitted,
    })
}

fn check_rank(x: &DMatrix<f64>) -> Result<()> {
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |m, v| m.max(*v));
    let min = sv.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(max > 0.0) || min / max < 1e-10 {
        return Err(ForecastError::estimation(
            "singular design: seasonal terms are collinear for this series",
        ));
    }
    Ok(())
}

/// Minimize `d' G d - 2 c' d + lambda |d|_1` by cyclic coordinate descent.
fn lasso_cd(gram: &DMatrix<f64>, c: &DVector<f64>, lambda: f64) -> Result<Vec<f64>> {
    let k = c.len();
    let mut d = vec![0.0; k];
    for sweep in 0..CD_MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for j in 0..k {
            let gjj = gram[(j, j)];
            if gjj <= 1e-14 {
                continue;
            }
            let mut rho = c[j];
            for (i, di) in d.iter().enumerate() {
                if i != j {
                    rho -= gram[(j, i)] * di;
                }
            }
            let new = soft_threshold(rho, lambda / 2.0) / gjj;
            max_change = max_change.max((new - d[j]).abs());
            d[j] = new;
        }
        if max_change < CD_TOL {
            log::trace!("changepoint coordinate descent converged after {sweep} sweeps");
            return Ok(d);
        }
    }
    Err(ForecastError::estimation(
        "changepoint coordinate descent did not converge",
    ))
}

impl DecomposableFit {
    fn trend_at(&self, t: f64) -> f64 {
        let mut g = self.offset + self.base_rate * t;
        for (d, &c) in self.delta.iter().zip(&self.changepoint_times) {
            g += d * (t - c as f64).max(0.0);
        }
        g
    }

    fn seasonal_at(coeffs: &[f64], day: f64, period: f64) -> f64 {
        let mut row = Vec::with_capacity(coeffs.len());
        fourier_row(day, period, coeffs.len() / 2, &mut row);
        row.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// Slope of the trend after the last changepoint.
    pub fn final_rate(&self) -> f64 {
        self.base_rate + self.delta.iter().sum::<f64>()
    }

    /// Components for `len` consecutive days starting at day index `start`
    /// (relative to the training start). `exog` supplies regressor values
    /// for those days; `extra_holidays` adds dates to holiday classes.
    pub fn components(
        &self,
        start: usize,
        len: usize,
        exog: &ExogTable,
        extra_holidays: &HolidayCalendar,
    ) -> Result<Components> {
        let names: Vec<String> = self.regressors.iter().map(|(n, _, _)| n.clone()).collect();
        let x = if names.is_empty() { Vec::new() } else { exog.require(&names, len)? };
        let mut out = Components {
            trend: Vec::with_capacity(len),
            weekly: Vec::with_capacity(len),
            yearly: Vec::with_capacity(len),
            holidays: Vec::with_capacity(len),
            regressors: Vec::with_capacity(len),
        };
        for i in 0..len {
            let t = start + i;
            let date = self.start_date + Duration::days(t as i64);
            let day = day_number(date);
            out.trend.push(self.trend_at(t as f64));
            out.weekly.push(Self::seasonal_at(&self.weekly_coeffs, day, WEEKLY_PERIOD));
            out.yearly.push(Self::seasonal_at(&self.yearly_coeffs, day, YEARLY_PERIOD));
            let mut h = 0.0;
            for (name, effect) in &self.holiday_effects {
                let known = self.spec.holidays.get(name).is_some_and(|d| d.contains(&date));
                let extra = extra_holidays.get(name).is_some_and(|d| d.contains(&date));
                if known || extra {
                    h += effect;
                }
            }
            out.holidays.push(h);
            let r: f64 = self
                .regressors
                .iter()
                .zip(&x)
                .map(|((_, coef, center), col)| coef * (col[i] - center))
                .sum();
            out.regressors.push(r);
        }
        Ok(out)
    }

    /// Components over the training window, regressors taken from `series`.
    pub fn training_components(&self, series: &DailySeries) -> Result<Components> {
        let exog = series.exog_table(0, series.len());
        self.components(0, self.n_train, &exog, &HolidayCalendar::new())
    }

    /// Forecast `horizon` days after the training window. The trend keeps
    /// the final segment's rate; the interval has constant width.
    pub fn forecast(
        &self,
        horizon: usize,
        future_exog: &ExogTable,
        future_holidays: &HolidayCalendar,
        alpha: f64,
    ) -> Result<ForecastResult> {
        self.forecast_from(self.n_train, horizon, future_exog, future_holidays, alpha)
    }

    /// Forecast starting at day index `origin` (>= training length).
    pub fn forecast_from(
        &self,
        origin: usize,
        horizon: usize,
        future_exog: &ExogTable,
        future_holidays: &HolidayCalendar,
        alpha: f64,
    ) -> Result<ForecastResult> {
        if horizon == 0 {
            return Err(ForecastError::Config("horizon must be >= 1".into()));
        }
        let z = z_value(alpha)?;
        let mean = self
            .components(origin, horizon, future_exog, future_holidays)?
            .total();
        let half = vec![z * self.residual_sigma; horizon];
        Ok(ForecastResult::from_half_widths(mean, &half))
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        doc.push("model", "decomposable");
        doc.push_f64("changepoint_prior_scale", self.spec.changepoint_prior_scale);
        doc.push_f64("seasonality_prior_scale", self.spec.seasonality_prior_scale);
        doc.push_usizes("n_changepoints", &[self.spec.n_changepoints]);
        doc.push_usizes("fourier_order_weekly", &[self.spec.fourier_order_weekly]);
        doc.push_usizes("fourier_order_yearly", &[self.spec.fourier_order_yearly]);
        doc.push("start_date", self.start_date.to_string());
        doc.push_usizes("n_train", &[self.n_train]);
        doc.push_f64("base_rate", self.base_rate);
        doc.push_f64("offset", self.offset);
        doc.push_f64s("delta", &self.delta);
        doc.push_usizes("changepoint_times", &self.changepoint_times);
        doc.push_f64s("weekly_coeffs", &self.weekly_coeffs);
        doc.push_f64s("yearly_coeffs", &self.yearly_coeffs);
        for (name, dates) in &self.spec.holidays {
            let ds: Vec<String> = dates.iter().map(|d| d.to_string()).collect();
            doc.push(format!("holiday_dates.{name}"), ds.join(" "));
        }
        for (name, e) in &self.holiday_effects {
            doc.push_f64(format!("holiday_effect.{name}"), *e);
        }
        doc.push("regressors", self.spec.extra_regressors.join(","));
        for (name, coef, center) in &self.regressors {
            doc.push_f64s(format!("regressor.{name}"), &[*coef, *center]);
        }
        doc.push_f64("residual_sigma", self.residual_sigma);
        doc
    }

    /// Reload from a report. In-sample fitted values are not persisted.
    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        if doc.get("model") != Some("decomposable") {
            return Err(ForecastError::Persist("not a decomposable report".into()));
        }
        let parse_date = |s: &str| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map_err(|e| ForecastError::Persist(format!("bad date '{s}': {e}")))
        };
        let mut holidays = HolidayCalendar::new();
        let mut holiday_effects = BTreeMap::new();
        let mut regressors = Vec::new();
        for (k, v) in doc.entries() {
            if let Some(name) = k.strip_prefix("holiday_dates.") {
                let dates = v.split_whitespace().map(parse_date).collect::<Result<BTreeSet<_>>>()?;
                holidays.insert(name.to_string(), dates);
            } else if let Some(name) = k.strip_prefix("holiday_effect.") {
                holiday_effects.insert(name.to_string(), doc.f64(k)?);
            } else if let Some(name) = k.strip_prefix("regressor.") {
                let v = doc.f64s(k)?;
                if v.len() != 2 {
                    return Err(ForecastError::Persist(format!("regressor '{name}' needs 2 values")));
                }
                regressors.push((name.to_string(), v[0], v[1]));
            }
        }
        let spec = DecomposableSpec {
            changepoint_prior_scale: doc.f64("changepoint_prior_scale")?,
            seasonality_prior_scale: doc.f64("seasonality_prior_scale")?,
            n_changepoints: doc.usize("n_changepoints")?,
            fourier_order_weekly: doc.usize("fourier_order_weekly")?,
            fourier_order_yearly: doc.usize("fourier_order_yearly")?,
            holidays,
            extra_regressors: doc.names("regressors")?,
        };
        let residual_sigma = doc.f64("residual_sigma")?;
        Ok(Self {
            spec,
            start_date: parse_date(doc.require("start_date")?)?,
            n_train: doc.usize("n_train")?,
            base_rate: doc.f64("base_rate")?,
            offset: doc.f64("offset")?,
            delta: doc.f64s("delta")?,
            changepoint_times: doc.usizes("changepoint_times")?,
            weekly_coeffs: doc.f64s("weekly_coeffs")?,
            yearly_coeffs: doc.f64s("yearly_coeffs")?,
            holiday_effects,
            regressors,
            residual_sigma,
            sigma_floored: residual_sigma <= SIGMA_FLOOR,
            fitted: Vec::new(),
        })
    }
}
