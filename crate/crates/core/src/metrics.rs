//! Point-forecast accuracy metrics.

use serde::{Deserialize, Serialize};

use crate::error::{ForecastError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub rmse: f64,
    pub mae: f64,
    /// Symmetric MAPE in percent, within `[0, 200]`.
    pub smape: f64,
}

impl MetricSet {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        Ok(Self {
            rmse: rmse(actual, predicted)?,
            mae: mae(actual, predicted)?,
            smape: smape(actual, predicted)?,
        })
    }
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(ForecastError::Length(format!(
            "metrics need equal non-empty lengths, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    Ok(())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let sse: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok((sse / actual.len() as f64).sqrt())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let sae: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum();
    Ok(sae / actual.len() as f64)
}

/// A pair with `actual == predicted == 0` contributes 0.
pub fn smape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| {
            let denom = (a.abs() + p.abs()) / 2.0;
            if denom == 0.0 {
                0.0
            } else {
                (p - a).abs() / denom
            }
        })
        .sum();
    Ok(100.0 * total / actual.len() as f64)
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    rmse(actual, predicted).map(|r| r * r)
}

/// `model,rmse,mae,smape` table, one row per model.
pub fn metrics_table(rows: &[(String, MetricSet)]) -> String {
    let mut out = String::from("model,rmse,mae,smape\n");
    for (name, m) in rows {
        out.push_str(&format!("{name},{:.6},{:.6},{:.6}\n", m.rmse, m.mae, m.smape));
    }
    out
}
