//! Model-agnostic fitting interface and walk-forward evaluation.

use chrono::NaiveDate;

use crate::decomposable::{fit_decomposable, DecomposableFit, DecomposableSpec, HolidayCalendar};
use crate::error::{ForecastError, Result};
use crate::forecast::{z_value, ForecastResult};
use crate::hybrid::{fit_hybrid, HybridFit, HybridSpec};
use crate::lstm::{fit_lstm, LstmFit, LstmSpec};
use crate::metrics::MetricSet;
use crate::sarimax::{fit_sarimax, SarimaxFit, SarimaxSpec};
use crate::series::{mean_std, DailySeries, ExogTable};

/// A trained model that can forecast from any history extending its
/// training data.
pub trait FittedModel: Send + Sync {
    fn forecast(
        &self,
        history: &DailySeries,
        future_exog: &ExogTable,
        horizon: usize,
        alpha: f64,
    ) -> Result<ForecastResult>;
}

/// A model configuration that can be trained on a series.
pub trait ModelSpec: Send + Sync {
    fn label(&self) -> String;
    fn fit(&self, train: &DailySeries, seed: u64) -> Result<Box<dyn FittedModel>>;
}

impl FittedModel for SarimaxFit {
    fn forecast(&self, history: &DailySeries, future_exog: &ExogTable, horizon: usize, alpha: f64) -> Result<ForecastResult> {
        self.condition_on(history)?.forecast(horizon, future_exog, alpha)
    }
}

impl ModelSpec for SarimaxSpec {
    fn label(&self) -> String {
        self.to_string()
    }

    fn fit(&self, train: &DailySeries, _seed: u64) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(fit_sarimax(train, self)?))
    }
}

impl FittedModel for DecomposableFit {
    fn forecast(&self, history: &DailySeries, future_exog: &ExogTable, horizon: usize, alpha: f64) -> Result<ForecastResult> {
        let origin = (history.end_date() - self.start_date).num_days() + 1;
        if origin < 1 {
            return Err(ForecastError::Input("history ends before the training start".into()));
        }
        self.forecast_from(origin as usize, horizon, future_exog, &HolidayCalendar::new(), alpha)
    }
}

impl ModelSpec for DecomposableSpec {
    fn label(&self) -> String {
        DecomposableSpec::label(self)
    }

    fn fit(&self, train: &DailySeries, _seed: u64) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(fit_decomposable(train, self)?))
    }
}

impl FittedModel for LstmFit {
    fn forecast(&self, history: &DailySeries, future_exog: &ExogTable, horizon: usize, alpha: f64) -> Result<ForecastResult> {
        LstmFit::forecast(self, history, future_exog, horizon, alpha)
    }
}

impl ModelSpec for LstmSpec {
    fn label(&self) -> String {
        LstmSpec::label(self)
    }

    fn fit(&self, train: &DailySeries, seed: u64) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(fit_lstm(train, &self.clone().with_seed(seed))?))
    }
}

impl FittedModel for HybridFit {
    fn forecast(&self, history: &DailySeries, future_exog: &ExogTable, horizon: usize, alpha: f64) -> Result<ForecastResult> {
        self.condition_on(history)?.forecast(horizon, future_exog, alpha)
    }
}

impl ModelSpec for HybridSpec {
    fn label(&self) -> String {
        HybridSpec::label(self)
    }

    fn fit(&self, train: &DailySeries, seed: u64) -> Result<Box<dyn FittedModel>> {
        let spec = HybridSpec {
            base: self.base.clone(),
            residual: self.residual.clone().with_seed(seed),
        };
        Ok(Box::new(fit_hybrid(train, &spec)?))
    }
}

/// `y_hat(T + h) = y(T + h - s * ceil(h / s))`. Intervals use the spread of
/// seasonal differences, widening with the number of cycles ahead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeasonalNaive {
    pub period: usize,
}

impl SeasonalNaive {
    pub fn new(period: usize) -> Self {
        Self { period }
    }
}

impl FittedModel for SeasonalNaive {
    fn forecast(&self, history: &DailySeries, _future_exog: &ExogTable, horizon: usize, alpha: f64) -> Result<ForecastResult> {
        let s = self.period;
        let y = history.values();
        let n = y.len();
        if s == 0 || n < s {
            return Err(ForecastError::Input(format!(
                "seasonal naive with period {s} needs at least {s} points, got {n}"
            )));
        }
        let z = z_value(alpha)?;
        let diffs: Vec<f64> = (s..n).map(|t| y[t] - y[t - s]).collect();
        let sd = if diffs.len() >= 2 { mean_std(&diffs).1 } else { 0.0 };
        let mut mean = Vec::with_capacity(horizon);
        let mut half = Vec::with_capacity(horizon);
        for h in 1..=horizon {
            let cycles = h.div_ceil(s);
            mean.push(y[n + h - s * cycles - 1]);
            half.push(z * sd * (cycles as f64).sqrt());
        }
        Ok(ForecastResult::from_half_widths(mean, &half))
    }
}

impl ModelSpec for SeasonalNaive {
    fn label(&self) -> String {
        format!("Seasonal naive (s={})", self.period)
    }

    fn fit(&self, _train: &DailySeries, _seed: u64) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(*self))
    }
}

/// Diagnostic stub that "forecasts" by reading the true future values of
/// a known series. Used to check evaluation plumbing.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub truth: DailySeries,
}

impl FittedModel for Oracle {
    fn forecast(&self, history: &DailySeries, _future_exog: &ExogTable, horizon: usize, _alpha: f64) -> Result<ForecastResult> {
        let start = (history.end_date() - self.truth.start_date()).num_days() + 1;
        let end = start + horizon as i64;
        if start < 0 || end as usize > self.truth.len() {
            return Err(ForecastError::Input("oracle asked for dates outside its series".into()));
        }
        Ok(ForecastResult::point(self.truth.values()[start as usize..end as usize].to_vec()))
    }
}

impl ModelSpec for Oracle {
    fn label(&self) -> String {
        "Oracle".into()
    }

    fn fit(&self, _train: &DailySeries, _seed: u64) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(self.clone()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    /// Index of the first forecast day.
    pub start: usize,
    pub start_date: NaiveDate,
    pub actual: Vec<f64>,
    pub forecast: ForecastResult,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub label: String,
    pub folds: Vec<FoldResult>,
    /// Metrics over the concatenated test points.
    pub pooled: MetricSet,
}

impl BacktestReport {
    /// Per-fold metrics averaged with equal weight.
    pub fn fold_average(&self) -> MetricSet {
        let k = self.folds.len() as f64;
        let sum = |f: fn(&MetricSet) -> f64| self.folds.iter().map(|x| f(&x.metrics)).sum::<f64>() / k;
        MetricSet {
            rmse: sum(|m| m.rmse),
            mae: sum(|m| m.mae),
            smape: sum(|m| m.smape),
        }
    }

    /// Tidy per-day rows: `date,fold,actual,mean,lower,upper`.
    pub fn daily_table(&self) -> String {
        let mut out = String::from("date,fold,actual,mean,lower,upper\n");
        for (k, f) in self.folds.iter().enumerate() {
            for h in 0..f.actual.len() {
                let date = f.start_date + chrono::Duration::days(h as i64);
                out.push_str(&format!(
                    "{date},{},{:?},{:?},{:?},{:?}\n",
                    k + 1,
                    f.actual[h],
                    f.forecast.mean[h],
                    f.forecast.lower[h],
                    f.forecast.upper[h]
                ));
            }
        }
        out
    }
}

/// Walk forward over the last `test_len` points in folds of `fold_len`:
/// each fold refits on everything before it (seed `seed + fold`) and
/// forecasts the fold with known future exogenous values.
pub fn walk_forward(
    spec: &dyn ModelSpec,
    series: &DailySeries,
    test_len: usize,
    fold_len: usize,
    seed: u64,
    alpha: f64,
) -> Result<BacktestReport> {
    if fold_len == 0 || test_len == 0 || !test_len.is_multiple_of(fold_len) {
        return Err(ForecastError::Config(format!(
            "test length {test_len} must be a positive multiple of fold length {fold_len}"
        )));
    }
    let n = series.len();
    if test_len >= n {
        return Err(ForecastError::Config(format!(
            "test length {test_len} leaves no history in a series of {n}"
        )));
    }
    let mut folds = Vec::with_capacity(test_len / fold_len);
    let mut all_actual = Vec::with_capacity(test_len);
    let mut all_pred = Vec::with_capacity(test_len);
    for k in 0..test_len / fold_len {
        let start = n - test_len + k * fold_len;
        let train = series.slice(0, start)?;
        let model = spec.fit(&train, seed.wrapping_add(k as u64))?;
        let exog = series.exog_table(start, start + fold_len);
        let forecast = model.forecast(&train, &exog, fold_len, alpha)?;
        let actual = series.values()[start..start + fold_len].to_vec();
        let metrics = MetricSet::compute(&actual, &forecast.mean)?;
        all_actual.extend_from_slice(&actual);
        all_pred.extend_from_slice(&forecast.mean);
        folds.push(FoldResult {
            start,
            start_date: series.date(start),
            actual,
            forecast,
            metrics,
        });
    }
    Ok(BacktestReport {
        label: spec.label(),
        folds,
        pooled: MetricSet::compute(&all_actual, &all_pred)?,
    })
}
