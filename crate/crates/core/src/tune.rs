//! Grid search scored by rolling-origin validation MSE.

use rayon::prelude::*;

use crate::backtest::ModelSpec;
use crate::decomposable::DecomposableSpec;
use crate::error::{ForecastError, Result};
use crate::lstm::LstmSpec;
use crate::metrics::mse;
use crate::sarimax::SarimaxSpec;
use crate::series::{DailySeries, SplitIndex};

/// Forecast horizon used for validation scoring (and the stride between
/// forecast origins).
pub const VALIDATION_HORIZON: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub label: String,
    /// Validation MSE, or the error that made the cell fail.
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub cells: Vec<GridCell>,
    /// Index of the winning configuration in declaration order.
    pub winner: usize,
}

impl GridSearchResult {
    pub fn winner_mse(&self) -> f64 {
        match self.cells[self.winner].outcome {
            Ok(m) => m,
            Err(_) => unreachable!("winner is always a successful cell"),
        }
    }

    /// Indices of successful cells, best first (ties keep declaration order).
    pub fn ranked(&self) -> Vec<usize> {
        let mut ok: Vec<(usize, f64)> = self
            .cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.outcome.as_ref().ok().map(|m| (i, *m)))
            .collect();
        ok.sort_by(|a, b| a.1.total_cmp(&b.1));
        ok.into_iter().map(|(i, _)| i).collect()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    /// `index,label,mse,error` rows.
    pub fn table(&self) -> String {
        let mut out = String::from("index,label,mse,error\n");
        for (i, c) in self.cells.iter().enumerate() {
            let label = c.label.replace(',', ";");
            match &c.outcome {
                Ok(m) => out.push_str(&format!("{i},\"{label}\",{m:?},\n")),
                Err(e) => out.push_str(&format!("{i},\"{label}\",,\"{}\"\n", e.replace('"', "'"))),
            }
        }
        out
    }
}

/// Fit on the training segment, then forecast the validation segment in
/// consecutive blocks of `horizon` days, each conditioned on all actuals
/// before it. Returns the MSE over the validation segment.
pub fn validation_mse(
    spec: &dyn ModelSpec,
    series: &DailySeries,
    split: SplitIndex,
    horizon: usize,
    seed: u64,
    alpha: f64,
) -> Result<f64> {
    if split.total_len != series.len() {
        return Err(ForecastError::Config(format!(
            "split is for length {}, series has {}",
            split.total_len,
            series.len()
        )));
    }
    let train = series.slice(0, split.train_end)?;
    let model = spec.fit(&train, seed)?;
    let mut actual = Vec::new();
    let mut pred = Vec::new();
    let mut origin = split.train_end;
    while origin < split.val_end {
        let h = horizon.min(split.val_end - origin);
        let history = series.slice(0, origin)?;
        let f = model.forecast(&history, &series.exog_table(origin, origin + h), h, alpha)?;
        actual.extend_from_slice(&series.values()[origin..origin + h]);
        pred.extend_from_slice(&f.mean);
        origin += h;
    }
    if pred.iter().any(|p| !p.is_finite()) {
        return Err(ForecastError::estimation("non-finite validation forecast"));
    }
    mse(&actual, &pred)
}

/// Evaluate every configuration on up to `jobs` threads. Results are kept
/// in declaration order; the lowest MSE wins and ties go to the earlier
/// configuration.
pub fn grid_search<S: ModelSpec>(
    grid: &[S],
    series: &DailySeries,
    split: SplitIndex,
    seed: u64,
    jobs: usize,
    alpha: f64,
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(ForecastError::Config("empty parameter grid".into()));
    }
    let eval = |spec: &S| GridCell {
        label: spec.label(),
        outcome: validation_mse(spec, series, split, VALIDATION_HORIZON, seed, alpha)
            .map_err(|e| e.to_string()),
    };
    let cells: Vec<GridCell> = if jobs <= 1 {
        grid.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ForecastError::Config(format!("cannot start {jobs} workers: {e}")))?;
        pool.install(|| grid.par_iter().map(eval).collect())
    };

    let mut winner: Option<(usize, f64)> = None;
    for (i, c) in cells.iter().enumerate() {
        if let Ok(m) = c.outcome {
            if winner.is_none_or(|(_, best)| m < best) {
                winner = Some((i, m));
            }
        }
    }
    match winner {
        Some((winner, _)) => Ok(GridSearchResult { cells, winner }),
        None => {
            let detail: Vec<String> = cells
                .iter()
                .take(5)
                .map(|c| format!("{}: {}", c.label, c.outcome.as_ref().unwrap_err()))
                .collect();
            Err(ForecastError::estimation(format!(
                "all {} configurations failed; first failures: {}",
                cells.len(),
                detail.join(" | ")
            )))
        }
    }
}

/// Axis values of a seasonal ARIMA grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SarimaAxes {
    pub p: Vec<usize>,
    pub d: Vec<usize>,
    pub q: Vec<usize>,
    pub seasonal_p: Vec<usize>,
    pub seasonal_d: Vec<usize>,
    pub seasonal_q: Vec<usize>,
    pub period: usize,
}

/// `p, q, P, Q` in `0..=3`, `d, D` in `{0, 1}`, weekly period.
impl Default for SarimaAxes {
    fn default() -> Self {
        Self {
            p: (0..=3).collect(),
            d: vec![0, 1],
            q: (0..=3).collect(),
            seasonal_p: (0..=3).collect(),
            seasonal_d: vec![0, 1],
            seasonal_q: (0..=3).collect(),
            period: 7,
        }
    }
}

/// Every order combination, `d` and `D` outermost.
pub fn sarima_grid(axes: &SarimaAxes, exog: &[String]) -> Vec<SarimaxSpec> {
    let mut out = Vec::new();
    for &d in &axes.d {
        for &big_d in &axes.seasonal_d {
            for &p in &axes.p {
                for &q in &axes.q {
                    for &big_p in &axes.seasonal_p {
                        for &big_q in &axes.seasonal_q {
                            out.push(
                                SarimaxSpec::new(p, d, q)
                                    .seasonal(big_p, big_d, big_q, axes.period)
                                    .with_exog(exog.iter().cloned()),
                            );
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn default_sarima_grid(exog: &[String]) -> Vec<SarimaxSpec> {
    sarima_grid(&SarimaAxes::default(), exog)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposableAxes {
    pub changepoint_prior_scale: Vec<f64>,
    pub seasonality_prior_scale: Vec<f64>,
}

impl Default for DecomposableAxes {
    fn default() -> Self {
        Self {
            changepoint_prior_scale: vec![0.001, 0.01, 0.1, 0.5],
            seasonality_prior_scale: vec![0.01, 0.1, 1.0, 10.0],
        }
    }
}

/// Changepoint scale x seasonality scale; other settings come from `base`.
pub fn decomposable_grid(axes: &DecomposableAxes, base: &DecomposableSpec) -> Vec<DecomposableSpec> {
    let mut out = Vec::new();
    for &cps in &axes.changepoint_prior_scale {
        for &sps in &axes.seasonality_prior_scale {
            out.push(base.clone().with_prior_scales(cps, sps));
        }
    }
    out
}

pub fn default_decomposable_grid(regressors: &[String]) -> Vec<DecomposableSpec> {
    let base = DecomposableSpec::default().with_regressors(regressors.iter().cloned());
    decomposable_grid(&DecomposableAxes::default(), &base)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmAxes {
    pub window: Vec<usize>,
    pub n_layers: Vec<usize>,
    pub hidden_dim: Vec<usize>,
}

impl Default for LstmAxes {
    fn default() -> Self {
        Self {
            window: vec![14, 28, 56],
            n_layers: vec![1, 2],
            hidden_dim: vec![16, 32, 64],
        }
    }
}

/// Window x layers x hidden size; other settings come from `base`.
pub fn lstm_grid(axes: &LstmAxes, base: &LstmSpec) -> Vec<LstmSpec> {
    let mut out = Vec::new();
    for &window in &axes.window {
        for &layers in &axes.n_layers {
            for &hidden in &axes.hidden_dim {
                out.push(LstmSpec {
                    window,
                    n_layers: layers,
                    hidden_dim: hidden,
                    ..base.clone()
                });
            }
        }
    }
    out
}

pub fn default_lstm_grid(exog: &[String], horizon: usize) -> Vec<LstmSpec> {
    let base = LstmSpec::new(28, 16, 1, horizon).with_exog(exog.iter().cloned());
    lstm_grid(&LstmAxes::default(), &base)
}
