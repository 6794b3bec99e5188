//! Backpropagation through time for the encoder-decoder.
//!
//! The decoder feeds its own prediction into the next step, so the
//! gradient of step `k`'s prediction also collects the input gradient of
//! step `k + 1`.

use super::train::WindowSample;
use super::{apply_gates, check_sample_dims, gates, LstmParams, Role, HALF_LN_2PI};
use crate::error::Result;

#[derive(Debug, Clone)]
struct Record {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gates: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

/// Activations recorded by a forward pass, indexed `[step][layer]` with
/// encoder steps first.
#[derive(Debug, Clone)]
pub struct Tape {
    steps: Vec<Vec<Record>>,
    window: usize,
    pub preds: Vec<f64>,
}

impl Tape {
    /// Largest absolute hidden-state component seen anywhere.
    pub fn max_abs_hidden(&self) -> f64 {
        self.steps
            .iter()
            .flatten()
            .flat_map(|r| r.h.iter())
            .fold(0.0f64, |m, h| m.max(h.abs()))
    }
}

pub(super) fn record_forward(
    params: &LstmParams,
    inputs: &[f64],
    future_exog: &[f64],
    horizon: usize,
) -> Result<Tape> {
    let shape = params.shape();
    let window = check_sample_dims(shape, inputs, future_exog, horizon)?;
    let d = shape.input_dim;
    let hid = shape.hidden;
    let mut h: Vec<Vec<f64>> = vec![vec![0.0; hid]; shape.layers];
    let mut c: Vec<Vec<f64>> = vec![vec![0.0; hid]; shape.layers];
    let mut steps = Vec::with_capacity(window + horizon);

    let step = |role: Role, x: &[f64], h: &mut Vec<Vec<f64>>, c: &mut Vec<Vec<f64>>| {
        let mut recs = Vec::with_capacity(shape.layers);
        let mut below = x.to_vec();
        for l in 0..shape.layers {
            let layer = params.layer(role, l);
            let mut g = vec![0.0; 4 * hid];
            gates(&below, &h[l], &layer, &mut g);
            let (h_prev, c_prev) = (h[l].clone(), c[l].clone());
            apply_gates(&g, &mut c[l], &mut h[l]);
            recs.push(Record {
                x: below,
                h_prev,
                c_prev,
                gates: g,
                c: c[l].clone(),
                h: h[l].clone(),
            });
            below = h[l].clone();
        }
        recs
    };

    for t in 0..window {
        steps.push(step(Role::Encoder, &inputs[t * d..(t + 1) * d], &mut h, &mut c));
    }
    let head_w = params.head_w();
    let head_b = params.head_b();
    let mut preds = Vec::with_capacity(horizon);
    let mut prev = inputs[(window - 1) * d];
    for k in 0..horizon {
        let mut x = Vec::with_capacity(d);
        x.push(prev);
        x.extend_from_slice(&future_exog[k * (d - 1)..(k + 1) * (d - 1)]);
        steps.push(step(Role::Decoder, &x, &mut h, &mut c));
        let top = &h[shape.layers - 1];
        let p = head_b + head_w.iter().zip(top).map(|(w, v)| w * v).sum::<f64>();
        preds.push(p);
        prev = p;
    }
    Ok(Tape { steps, window, preds })
}

/// Backprop one cell. Accumulates weight gradients into `grad` at the
/// layer's offset; updates `dh`/`dc` to the previous-step gradients and
/// returns the gradient w.r.t. the cell input.
fn cell_backward(
    params: &LstmParams,
    role: Role,
    layer: usize,
    rec: &Record,
    dh: &mut [f64],
    dc: &mut [f64],
    grad: &mut [f64],
) -> Vec<f64> {
    let shape = params.shape();
    let hid = shape.hidden;
    let n_in = shape.layer_input(layer);
    let view = params.layer(role, layer);
    let mut da = vec![0.0; 4 * hid];
    for k in 0..hid {
        let (f, i, g, o) = (
            rec.gates[k],
            rec.gates[hid + k],
            rec.gates[2 * hid + k],
            rec.gates[3 * hid + k],
        );
        let tc = rec.c[k].tanh();
        let d_o = dh[k] * tc;
        let dck = dc[k] + dh[k] * o * (1.0 - tc * tc);
        da[k] = dck * rec.c_prev[k] * f * (1.0 - f);
        da[hid + k] = dck * g * i * (1.0 - i);
        da[2 * hid + k] = dck * i * (1.0 - g * g);
        da[3 * hid + k] = d_o * o * (1.0 - o);
        dc[k] = dck * f;
    }
    let off = shape.layer_offset(role, layer);
    let hh = off + 4 * hid * n_in;
    let b = hh + 4 * hid * hid;
    let mut dx = vec![0.0; n_in];
    let mut dh_prev = vec![0.0; hid];
    for (r, &a) in da.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let gi = &mut grad[off + r * n_in..off + (r + 1) * n_in];
        for j in 0..n_in {
            gi[j] += a * rec.x[j];
            dx[j] += view.w_ih[r * n_in + j] * a;
        }
        let gh = &mut grad[hh + r * hid..hh + (r + 1) * hid];
        for j in 0..hid {
            gh[j] += a * rec.h_prev[j];
            dh_prev[j] += view.w_hh[r * hid + j] * a;
        }
        grad[b + r] += a;
    }
    dh.copy_from_slice(&dh_prev);
    dx
}

/// Summed NLL of one sample; its gradient is added into `grad`.
pub(super) fn sample_loss_and_gradient(
    params: &LstmParams,
    sample: &WindowSample,
    grad: &mut [f64],
) -> Result<f64> {
    let shape = params.shape();
    let horizon = sample.targets.len();
    let tape = record_forward(params, &sample.inputs, &sample.future_exog, horizon)?;
    let ls = params.log_sigma();
    let sigma = params.sigma();
    let inv_var = 1.0 / (sigma * sigma);
    let sigma_active = ls.exp() >= super::SIGMA_FLOOR;

    let mut loss = 0.0;
    let mut d_ls = 0.0;
    for (p, y) in tape.preds.iter().zip(&sample.targets) {
        let e2 = (y - p).powi(2) * inv_var;
        loss += sigma.ln() + HALF_LN_2PI + 0.5 * e2;
        d_ls += 1.0 - e2;
    }
    if sigma_active {
        grad[shape.log_sigma_index()] += d_ls;
    }

    let hid = shape.hidden;
    let head = shape.head_offset();
    let head_w = params.head_w().to_vec();
    let mut dh: Vec<Vec<f64>> = vec![vec![0.0; hid]; shape.layers];
    let mut dc: Vec<Vec<f64>> = vec![vec![0.0; hid]; shape.layers];
    let mut d_feedback = 0.0;

    for k in (0..horizon).rev() {
        let recs = &tape.steps[tape.window + k];
        let dp = (tape.preds[k] - sample.targets[k]) * inv_var + d_feedback;
        let top = &recs[shape.layers - 1].h;
        for j in 0..hid {
            grad[head + j] += dp * top[j];
        }
        grad[head + hid] += dp;
        let mut from_above: Vec<f64> = head_w.iter().map(|w| w * dp).collect();
        for l in (0..shape.layers).rev() {
            for j in 0..hid {
                dh[l][j] += from_above[j];
            }
            from_above = cell_backward(params, Role::Decoder, l, &recs[l], &mut dh[l], &mut dc[l], grad);
        }
        // Input 0 of this step was the previous step's prediction.
        d_feedback = if k > 0 { from_above[0] } else { 0.0 };
    }
    for t in (0..tape.window).rev() {
        let recs = &tape.steps[t];
        let mut from_above: Option<Vec<f64>> = None;
        for l in (0..shape.layers).rev() {
            if let Some(v) = &from_above {
                for j in 0..hid {
                    dh[l][j] += v[j];
                }
            }
            from_above = Some(cell_backward(params, Role::Encoder, l, &recs[l], &mut dh[l], &mut dc[l], grad));
        }
    }
    Ok(loss)
}

/// Summed NLL over `samples` and its gradient w.r.t. every parameter.
pub fn loss_and_gradient(params: &LstmParams, samples: &[WindowSample]) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; params.values().len()];
    let mut loss = 0.0;
    for s in samples {
        loss += sample_loss_and_gradient(params, s, &mut grad)?;
    }
    Ok((loss, grad))
}

/// Forward pass that keeps the activations.
pub fn forward_tape(params: &LstmParams, sample: &WindowSample) -> Result<Tape> {
    record_forward(params, &sample.inputs, &sample.future_exog, sample.targets.len())
}
