//! LSTM encoder-decoder with a trainable Gaussian noise scale.
//!
//! All parameters live in one flat vector; [`LstmShape`] describes the
//! tensor layout. Per layer and role the tensors are `w_ih` (4H x in),
//! `w_hh` (4H x H) and `bias` (4H), with gate rows ordered forget, input,
//! candidate, output. A linear head maps the top decoder state to one
//! value per step, followed by `log_sigma`.

mod checkpoint;
mod grad;
mod train;

use rand::Rng;
use rand_distr::Uniform;

use crate::error::{ForecastError, Result};

pub use grad::{forward_tape, loss_and_gradient, Tape};
pub use train::{
    fit_lstm, fit_lstm_with_scaler, mean_nll, train, validation_len, window_pairs, Adam,
    EarlyStopping, EpochStats, LstmFit, StopDecision, TrainingTrace, WindowSample,
};

pub const SIGMA_FLOOR: f64 = 1e-6;
const FORGET_BIAS: f64 = 1.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmSpec {
    pub window: usize,
    pub hidden_dim: usize,
    pub n_layers: usize,
    pub horizon: usize,
    /// Exogenous columns fed alongside the target; the encoder sees their
    /// history and each decoder step sees that day's known future value.
    pub exog: Vec<String>,
    pub learning_rate: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for LstmSpec {
    fn default() -> Self {
        Self {
            window: 28,
            hidden_dim: 16,
            n_layers: 1,
            horizon: 30,
            exog: Vec::new(),
            learning_rate: 0.01,
            patience: 10,
            max_epochs: 500,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl LstmSpec {
    pub fn new(window: usize, hidden_dim: usize, n_layers: usize, horizon: usize) -> Self {
        Self {
            window,
            hidden_dim,
            n_layers,
            horizon,
            ..Self::default()
        }
    }

    pub fn with_exog<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.exog = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn input_dim(&self) -> usize {
        1 + self.exog.len()
    }

    pub fn shape(&self) -> LstmShape {
        LstmShape {
            input_dim: self.input_dim(),
            hidden: self.hidden_dim,
            layers: self.n_layers,
        }
    }

    pub fn label(&self) -> String {
        let kind = if self.exog.is_empty() { "univariate" } else { "multivariate" };
        format!(
            "LSTM {kind} (window={}, layers={}, hidden={})",
            self.window, self.n_layers, self.hidden_dim
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.hidden_dim == 0 || self.n_layers == 0 || self.horizon == 0 {
            return Err(ForecastError::Config(
                "LSTM window, hidden_dim, n_layers and horizon must be >= 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0) || self.patience == 0 || self.max_epochs == 0 || self.batch_size == 0 {
            return Err(ForecastError::Config(
                "LSTM learning_rate, patience, max_epochs and batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Encoder,
    Decoder,
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::Encoder => "encoder",
            Role::Decoder => "decoder",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmShape {
    pub input_dim: usize,
    pub hidden: usize,
    pub layers: usize,
}

impl LstmShape {
    pub fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            self.hidden
        }
    }

    fn layer_len(&self, layer: usize) -> usize {
        let g = 4 * self.hidden;
        g * self.layer_input(layer) + g * self.hidden + g
    }

    fn role_len(&self) -> usize {
        (0..self.layers).map(|l| self.layer_len(l)).sum()
    }

    pub fn layer_offset(&self, role: Role, layer: usize) -> usize {
        let base = match role {
            Role::Encoder => 0,
            Role::Decoder => self.role_len(),
        };
        base + (0..layer).map(|l| self.layer_len(l)).sum::<usize>()
    }

    pub fn head_offset(&self) -> usize {
        2 * self.role_len()
    }

    pub fn log_sigma_index(&self) -> usize {
        self.head_offset() + self.hidden + 1
    }

    pub fn n_params(&self) -> usize {
        self.log_sigma_index() + 1
    }

    /// Named tensors in storage order.
    pub fn tensors(&self) -> Vec<TensorInfo> {
        let mut out = Vec::new();
        let g = 4 * self.hidden;
        for role in [Role::Encoder, Role::Decoder] {
            for l in 0..self.layers {
                let mut off = self.layer_offset(role, l);
                for (name, cols) in [("w_ih", self.layer_input(l)), ("w_hh", self.hidden), ("bias", 1)] {
                    out.push(TensorInfo {
                        name: format!("{}.{l}.{name}", role.name()),
                        rows: g,
                        cols,
                        offset: off,
                    });
                    off += g * cols;
                }
            }
        }
        let head = self.head_offset();
        out.push(TensorInfo { name: "head.w".into(), rows: 1, cols: self.hidden, offset: head });
        out.push(TensorInfo { name: "head.b".into(), rows: 1, cols: 1, offset: head + self.hidden });
        out.push(TensorInfo { name: "log_sigma".into(), rows: 1, cols: 1, offset: self.log_sigma_index() });
        out
    }
}

/// Borrowed weights of one LSTM layer.
#[derive(Debug, Clone, Copy)]
pub struct LayerView<'a> {
    pub w_ih: &'a [f64],
    pub w_hh: &'a [f64],
    pub bias: &'a [f64],
    pub input: usize,
    pub hidden: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    shape: LstmShape,
    values: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(shape: LstmShape) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.n_params()],
        }
    }

    pub fn from_values(shape: LstmShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.n_params() {
            return Err(ForecastError::Dimension(format!(
                "expected {} LSTM parameters, got {}",
                shape.n_params(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ForecastError::Input("LSTM parameters must be finite".into()));
        }
        Ok(Self { shape, values })
    }

    /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1, log_sigma 0.
    pub fn initialize<R: Rng>(shape: LstmShape, rng: &mut R) -> Self {
        let bound = 1.0 / (shape.hidden as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("valid bounds");
        let mut values: Vec<f64> = (0..shape.n_params()).map(|_| rng.sample(dist)).collect();
        for role in [Role::Encoder, Role::Decoder] {
            for l in 0..shape.layers {
                let g = 4 * shape.hidden;
                let bias = shape.layer_offset(role, l) + g * shape.layer_input(l) + g * shape.hidden;
                for v in &mut values[bias..bias + shape.hidden] {
                    *v = FORGET_BIAS;
                }
            }
        }
        values[shape.log_sigma_index()] = 0.0;
        Self { shape, values }
    }

    pub fn shape(&self) -> LstmShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn layer(&self, role: Role, layer: usize) -> LayerView<'_> {
        let s = self.shape;
        let g = 4 * s.hidden;
        let input = s.layer_input(layer);
        let off = s.layer_offset(role, layer);
        let hh = off + g * input;
        let b = hh + g * s.hidden;
        LayerView {
            w_ih: &self.values[off..hh],
            w_hh: &self.values[hh..b],
            bias: &self.values[b..b + g],
            input,
            hidden: s.hidden,
        }
    }

    pub fn head_w(&self) -> &[f64] {
        let h = self.shape.head_offset();
        &self.values[h..h + self.shape.hidden]
    }

    pub fn head_b(&self) -> f64 {
        self.values[self.shape.head_offset() + self.shape.hidden]
    }

    pub fn log_sigma(&self) -> f64 {
        self.values[self.shape.log_sigma_index()]
    }

    pub fn set_log_sigma(&mut self, v: f64) {
        let i = self.shape.log_sigma_index();
        self.values[i] = v;
    }

    /// Noise scale, never below [`SIGMA_FLOOR`].
    pub fn sigma(&self) -> f64 {
        self.log_sigma().exp().max(SIGMA_FLOOR)
    }

    pub(crate) fn clamp_log_sigma(&mut self) {
        let floor = SIGMA_FLOOR.ln();
        if self.log_sigma() < floor {
            self.set_log_sigma(floor);
        }
    }
}

/// Short-term (`h`) and long-term (`c`) memory of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activated gates `[f, i, g, o]` for one step, written into `out` (4H).
fn gates(x: &[f64], h_prev: &[f64], layer: &LayerView, out: &mut [f64]) {
    let (n_in, hid) = (layer.input, layer.hidden);
    for r in 0..4 * hid {
        let wi = &layer.w_ih[r * n_in..(r + 1) * n_in];
        let wh = &layer.w_hh[r * hid..(r + 1) * hid];
        let mut a = layer.bias[r];
        for j in 0..n_in {
            a += wi[j] * x[j];
        }
        for j in 0..hid {
            a += wh[j] * h_prev[j];
        }
        out[r] = if (2 * hid..3 * hid).contains(&r) { a.tanh() } else { sigmoid(a) };
    }
}

/// Advance `c`, `h` in place given activated gates.
fn apply_gates(gate: &[f64], c: &mut [f64], h: &mut [f64]) {
    let hid = c.len();
    for k in 0..hid {
        let (f, i, g, o) = (gate[k], gate[hid + k], gate[2 * hid + k], gate[3 * hid + k]);
        c[k] = f * c[k] + i * g;
        h[k] = o * c[k].tanh();
    }
}

/// One LSTM step: `c = f*c_prev + i*g`, `h = o*tanh(c)`.
pub fn lstm_cell_step(x: &[f64], state: &CellState, layer: &LayerView) -> Result<CellState> {
    if x.len() != layer.input || state.h.len() != layer.hidden || state.c.len() != layer.hidden {
        return Err(ForecastError::Dimension(format!(
            "cell expects input {} and state {}, got {} and {}/{}",
            layer.input,
            layer.hidden,
            x.len(),
            state.h.len(),
            state.c.len()
        )));
    }
    let mut g = vec![0.0; 4 * layer.hidden];
    gates(x, &state.h, layer, &mut g);
    let mut next = state.clone();
    apply_gates(&g, &mut next.c, &mut next.h);
    Ok(next)
}

fn check_sample_dims(shape: LstmShape, inputs: &[f64], future_exog: &[f64], horizon: usize) -> Result<usize> {
    let d = shape.input_dim;
    if inputs.is_empty() || !inputs.len().is_multiple_of(d) {
        return Err(ForecastError::Dimension(format!(
            "input window length {} is not a positive multiple of input_dim {d}",
            inputs.len()
        )));
    }
    if future_exog.len() != horizon * (d - 1) {
        return Err(ForecastError::Dimension(format!(
            "future exogenous block needs {} values, got {}",
            horizon * (d - 1),
            future_exog.len()
        )));
    }
    Ok(inputs.len() / d)
}

/// Encoder-decoder pass over one standardized sample.
///
/// `inputs` is the window as row-major `W x input_dim` with the target in
/// column 0; `future_exog` is `horizon x (input_dim - 1)`. Returns the
/// predicted means and sigma.
pub fn forward(
    params: &LstmParams,
    inputs: &[f64],
    future_exog: &[f64],
    horizon: usize,
) -> Result<(Vec<f64>, f64)> {
    let shape = params.shape();
    let window = check_sample_dims(shape, inputs, future_exog, horizon)?;
    let d = shape.input_dim;
    let hid = shape.hidden;
    let mut states: Vec<CellState> = (0..shape.layers).map(|_| CellState::zeros(hid)).collect();
    let mut gate = vec![0.0; 4 * hid];
    let mut below = Vec::with_capacity(hid.max(d));

    let mut run_step = |role: Role, x: &[f64], states: &mut Vec<CellState>| {
        below.clear();
        below.extend_from_slice(x);
        for (l, st) in states.iter_mut().enumerate() {
            let layer = params.layer(role, l);
            gates(&below, &st.h, &layer, &mut gate);
            apply_gates(&gate, &mut st.c, &mut st.h);
            below.clear();
            below.extend_from_slice(&st.h);
        }
    };

    for t in 0..window {
        run_step(Role::Encoder, &inputs[t * d..(t + 1) * d], &mut states);
    }
    let head_w = params.head_w();
    let head_b = params.head_b();
    let mut preds = Vec::with_capacity(horizon);
    let mut x = vec![0.0; d];
    let mut prev = inputs[(window - 1) * d];
    for k in 0..horizon {
        x[0] = prev;
        x[1..].copy_from_slice(&future_exog[k * (d - 1)..(k + 1) * (d - 1)]);
        run_step(Role::Decoder, &x, &mut states);
        let top = &states[shape.layers - 1].h;
        let p = head_b + head_w.iter().zip(top).map(|(w, h)| w * h).sum::<f64>();
        preds.push(p);
        prev = p;
    }
    Ok((preds, params.sigma()))
}

/// Summed Gaussian negative log-likelihood over all terms.
pub fn nll_loss(pred: &[f64], targets: &[f64], sigma: f64) -> Result<f64> {
    if pred.len() != targets.len() {
        return Err(ForecastError::Length(format!(
            "{} predictions for {} targets",
            pred.len(),
            targets.len()
        )));
    }
    if !(sigma > 0.0) {
        return Err(ForecastError::Input("sigma must be positive".into()));
    }
    let ls = sigma.ln();
    Ok(pred
        .iter()
        .zip(targets)
        .map(|(p, y)| ls + HALF_LN_2PI + (y - p).powi(2) / (2.0 * sigma * sigma))
        .sum())
}
