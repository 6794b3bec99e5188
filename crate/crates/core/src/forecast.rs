//! Forecast output shared by all model families.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ForecastError, Result};

/// Default two-sided miscoverage: a 95% prediction interval.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Per-step mean and prediction interval bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ForecastResult {
    /// Symmetric interval `mean ± half_width`.
    pub fn from_half_widths(mean: Vec<f64>, half_widths: &[f64]) -> Self {
        debug_assert_eq!(mean.len(), half_widths.len());
        let lower = mean.iter().zip(half_widths).map(|(m, h)| m - h).collect();
        let upper = mean.iter().zip(half_widths).map(|(m, h)| m + h).collect();
        Self { mean, lower, upper }
    }

    /// Point forecast with a zero-width interval.
    pub fn point(mean: Vec<f64>) -> Self {
        Self {
            lower: mean.clone(),
            upper: mean.clone(),
            mean,
        }
    }

    pub fn horizon(&self) -> usize {
        self.mean.len()
    }

    pub fn half_widths(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| 0.5 * (u - l))
            .collect()
    }

    pub fn truncate(&mut self, horizon: usize) {
        self.mean.truncate(horizon);
        self.lower.truncate(horizon);
        self.upper.truncate(horizon);
    }
}

/// Standard normal quantile `z_{1-alpha/2}`.
pub fn z_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ForecastError::Config(format!(
            "coverage alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = Normal::standard();
    Ok(n.inverse_cdf(1.0 - alpha / 2.0))
}
