//! Sample construction, Adam, early stopping and the fitted model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grad::sample_loss_and_gradient;
use super::{forward, nll_loss, LstmParams, LstmSpec};
use crate::error::{ForecastError, Result};
use crate::forecast::{z_value, ForecastResult};
use crate::series::{DailySeries, ExogTable, Scaler};

/// One standardized training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    /// Row-major `W x input_dim`, target in column 0.
    pub inputs: Vec<f64>,
    /// Row-major `horizon x n_exog`.
    pub future_exog: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Every `(window, horizon)` pair of a series: `L - W - H + 1` of them.
pub fn window_pairs(target: &[f64], exog: &[Vec<f64>], window: usize, horizon: usize) -> Vec<WindowSample> {
    let len = target.len();
    if window + horizon > len {
        return Vec::new();
    }
    (0..=len - window - horizon)
        .map(|s| {
            let mut inputs = Vec::with_capacity(window * (1 + exog.len()));
            for t in s..s + window {
                inputs.push(target[t]);
                inputs.extend(exog.iter().map(|c| c[t]));
            }
            let mut future_exog = Vec::with_capacity(horizon * exog.len());
            for t in s + window..s + window + horizon {
                future_exog.extend(exog.iter().map(|c| c[t]));
            }
            WindowSample {
                inputs,
                future_exog,
                targets: target[s + window..s + window + horizon].to_vec(),
            }
        })
        .collect()
}

/// Validation tail length: the larger of one horizon and 20% of the data.
pub fn validation_len(n: usize, horizon: usize) -> usize {
    horizon.max((0.2 * n as f64).ceil() as usize)
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(learning_rate: f64, n: usize) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    NoImprovement,
    Stop,
}

/// Stops once the monitored loss has not improved for `patience` epochs.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, loss: f64) -> StopDecision {
        if loss < self.best {
            self.best = loss;
            self.best_epoch = epoch;
            self.stale = 0;
            return StopDecision::Improved;
        }
        self.stale += 1;
        if self.stale >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::NoImprovement
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-term NLL over the epoch's mini-batches.
    pub train_nll: f64,
    /// Mean per-term NLL on the validation pairs after the epoch.
    pub val_nll: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Mean per-term NLL of `params` on `samples`.
pub fn mean_nll(params: &LstmParams, samples: &[WindowSample]) -> Result<f64> {
    let mut total = 0.0;
    let mut terms = 0usize;
    for s in samples {
        let (pred, sigma) = forward(params, &s.inputs, &s.future_exog, s.targets.len())?;
        total += nll_loss(&pred, &s.targets, sigma)?;
        terms += s.targets.len();
    }
    Ok(total / terms.max(1) as f64)
}

/// Mini-batch Adam on the mean per-term NLL with early stopping on the
/// validation pairs. Returns the parameters of the best validation epoch.
pub fn train(
    train: &[WindowSample],
    val: &[WindowSample],
    spec: &LstmSpec,
) -> Result<(LstmParams, TrainingTrace)> {
    spec.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(ForecastError::Config(
            "LSTM training needs at least one training and one validation pair".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut params = LstmParams::initialize(spec.shape(), &mut rng);
    let n = params.values().len();
    let mut adam = Adam::new(spec.learning_rate, n);
    let mut stopper = EarlyStopping::new(spec.patience);
    let mut best = params.clone();
    let mut trace = TrainingTrace::default();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grad = vec![0.0; n];

    for epoch in 1..=spec.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_terms = 0usize;
        for batch in order.chunks(spec.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut loss = 0.0;
            let mut terms = 0usize;
            for &i in batch {
                loss += sample_loss_and_gradient(&params, &train[i], &mut grad)?;
                terms += train[i].targets.len();
            }
            let scale = 1.0 / terms as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            adam.step(params.values_mut(), &grad);
            params.clamp_log_sigma();
            epoch_loss += loss;
            epoch_terms += terms;
        }
        if params.values().iter().any(|v| !v.is_finite()) {
            return Err(ForecastError::estimation(format!(
                "LSTM parameters became non-finite in epoch {epoch}"
            )));
        }
        let val_nll = mean_nll(&params, val)?;
        trace.epochs.push(EpochStats {
            epoch,
            train_nll: epoch_loss / epoch_terms as f64,
            val_nll,
        });
        match stopper.observe(epoch, val_nll) {
            StopDecision::Improved => best = params.clone(),
            StopDecision::NoImprovement => {}
            StopDecision::Stop => {
                trace.stopped_early = true;
                break;
            }
        }
    }
    trace.best_epoch = stopper.best_epoch();
    if trace.best_epoch == 0 {
        return Err(ForecastError::estimation("validation NLL was never finite"));
    }
    Ok((best, trace))
}

/// Trained LSTM together with the scalers fitted on its training segment.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmFit {
    pub spec: LstmSpec,
    pub params: LstmParams,
    pub target_scaler: Scaler,
    pub exog_scalers: Vec<Scaler>,
    /// Set when every training target had the same value.
    pub constant_target: Option<f64>,
    pub trace: TrainingTrace,
}

/// Standardize on the training segment and train.
pub fn fit_lstm(series: &DailySeries, spec: &LstmSpec) -> Result<LstmFit> {
    fit_lstm_with_scaler(series, spec, None)
}

/// As [`fit_lstm`], optionally with a caller-supplied target scaler.
pub fn fit_lstm_with_scaler(
    series: &DailySeries,
    spec: &LstmSpec,
    target_scaler: Option<Scaler>,
) -> Result<LstmFit> {
    spec.validate()?;
    let n = series.len();
    let (w, h) = (spec.window, spec.horizon);
    let val_len = validation_len(n, h);
    let n_train = n.saturating_sub(val_len);
    if n_train < w + h {
        return Err(ForecastError::Config(format!(
            "window {w} + horizon {h} exceeds the {n_train}-point training segment"
        )));
    }
    let y = series.values();
    let train_y = &y[..n_train];
    let constant_target = train_y
        .iter()
        .all(|v| *v == train_y[0])
        .then_some(train_y[0]);
    let target_scaler = target_scaler.unwrap_or_else(|| Scaler::fit_or_center(train_y).0);
    let raw_exog = series.exog_matrix(&spec.exog)?;
    let exog_scalers: Vec<Scaler> = raw_exog
        .iter()
        .map(|c| Scaler::fit_or_center(&c[..n_train]).0)
        .collect();
    let ys = target_scaler.apply(y);
    let xs: Vec<Vec<f64>> = raw_exog
        .iter()
        .zip(&exog_scalers)
        .map(|(c, s)| s.apply(c))
        .collect();

    let pairs = window_pairs(&ys, &xs, w, h);
    // Pair s predicts points s+W .. s+W+H.
    let split = n_train - w - h + 1;
    let train_pairs = &pairs[..split];
    let val_pairs: Vec<WindowSample> = pairs
        .iter()
        .enumerate()
        .filter(|(s, _)| s + w >= n_train)
        .map(|(_, p)| p.clone())
        .collect();
    let (params, trace) = train(train_pairs, &val_pairs, spec)?;
    Ok(LstmFit {
        spec: spec.clone(),
        params,
        target_scaler,
        exog_scalers,
        constant_target,
        trace,
    })
}

impl LstmFit {
    /// Noise scale in the target's original units.
    pub fn sigma(&self) -> f64 {
        self.params.sigma() * self.target_scaler.std
    }

    /// Forecast `horizon` days after the end of `history`.
    pub fn forecast(
        &self,
        history: &DailySeries,
        future_exog: &ExogTable,
        horizon: usize,
        alpha: f64,
    ) -> Result<ForecastResult> {
        if horizon == 0 {
            return Err(ForecastError::Config("horizon must be >= 1".into()));
        }
        let z = z_value(alpha)?;
        let w = self.spec.window;
        let n = history.len();
        if n < w {
            return Err(ForecastError::Input(format!(
                "LSTM needs {w} history points, got {n}"
            )));
        }
        let half = vec![z * self.sigma(); horizon];
        if let Some(c) = self.constant_target {
            return Ok(ForecastResult::from_half_widths(vec![c; horizon], &half));
        }
        let hist_x = history.exog_matrix(&self.spec.exog)?;
        let fut_x = future_exog.require(&self.spec.exog, horizon)?;
        let mut inputs = Vec::with_capacity(w * self.spec.input_dim());
        for t in n - w..n {
            inputs.push(self.target_scaler.apply_one(history.values()[t]));
            for (col, s) in hist_x.iter().zip(&self.exog_scalers) {
                inputs.push(s.apply_one(col[t]));
            }
        }
        let mut fut = Vec::with_capacity(horizon * self.exog_scalers.len());
        for k in 0..horizon {
            for (col, s) in fut_x.iter().zip(&self.exog_scalers) {
                fut.push(s.apply_one(col[k]));
            }
        }
        let (pred, _) = forward(&self.params, &inputs, &fut, horizon)?;
        Ok(ForecastResult::from_half_widths(self.target_scaler.invert(&pred), &half))
    }
}
