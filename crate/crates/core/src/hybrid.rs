//! Two-stage stack: SARIMA(X) on the target, a univariate LSTM on the
//! base model's in-sample residuals, forecasts summed.

use crate::error::{ForecastError, Result};
use crate::forecast::ForecastResult;
use crate::lstm::{fit_lstm_with_scaler, validation_len, LstmFit, LstmSpec};
use crate::persist::KvDoc;
use crate::sarimax::{fit_sarimax, SarimaxFit, SarimaxSpec};
use crate::series::{mean_std, DailySeries, ExogTable, Scaler};

#[derive(Debug, Clone, PartialEq)]
pub struct HybridSpec {
    pub base: SarimaxSpec,
    pub residual: LstmSpec,
}

impl HybridSpec {
    pub fn new(base: SarimaxSpec, residual: LstmSpec) -> Self {
        Self { base, residual }
    }

    pub fn label(&self) -> String {
        let base = if self.base.exog.is_empty() { "SARIMA" } else { "SARIMAX" };
        format!("Hybrid ({base}-LSTM)")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridFit {
    pub base: SarimaxFit,
    pub residual_model: LstmFit,
}

/// Residuals are scaled but not centered, so a zero network output maps
/// to a zero residual forecast.
fn residual_scaler(train_part: &[f64]) -> Scaler {
    let (_, std) = mean_std(train_part);
    let std = if std > 0.0 && std.is_finite() { std } else { 1.0 };
    Scaler { mean: 0.0, std }
}

pub fn fit_hybrid(series: &DailySeries, spec: &HybridSpec) -> Result<HybridFit> {
    if !spec.residual.exog.is_empty() {
        return Err(ForecastError::Config("the residual LSTM is univariate".into()));
    }
    let base = fit_sarimax(series, &spec.base).map_err(|e| e.in_stage("base"))?;
    let residuals = residual_history(&base)?;
    let n = residuals.len();
    let n_train = n.saturating_sub(validation_len(n, spec.residual.horizon)).max(2).min(n);
    let scaler = residual_scaler(&residuals.values()[..n_train]);
    let residual_model = fit_lstm_with_scaler(&residuals, &spec.residual, Some(scaler))
        .map_err(|e| e.in_stage("residual"))?;
    Ok(HybridFit { base, residual_model })
}

/// The base model's aligned residuals as a dated series.
fn residual_history(base: &SarimaxFit) -> Result<DailySeries> {
    let r = base.residual_series();
    let start = base.history().date(r.offset);
    DailySeries::new(start, r.values)
}

/// Sum of means; half-widths combined as independent variances.
pub fn combine(base: &ForecastResult, residual: &ForecastResult) -> Result<ForecastResult> {
    if base.horizon() != residual.horizon() {
        return Err(ForecastError::Length(format!(
            "stage horizons differ: {} vs {}",
            base.horizon(),
            residual.horizon()
        )));
    }
    let mean: Vec<f64> = base.mean.iter().zip(&residual.mean).map(|(a, b)| a + b).collect();
    let half: Vec<f64> = base
        .half_widths()
        .iter()
        .zip(residual.half_widths())
        .map(|(a, b)| a.hypot(b))
        .collect();
    Ok(ForecastResult::from_half_widths(mean, &half))
}

impl HybridFit {
    pub fn residual_scaler(&self) -> Scaler {
        self.residual_model.target_scaler
    }

    /// Re-anchor on a longer history without re-estimating either stage.
    pub fn condition_on(&self, history: &DailySeries) -> Result<Self> {
        Ok(Self {
            base: self.base.condition_on(history)?,
            residual_model: self.residual_model.clone(),
        })
    }

    /// Both stage forecasts, base first.
    pub fn stage_forecasts(
        &self,
        horizon: usize,
        future_exog: &ExogTable,
        alpha: f64,
    ) -> Result<(ForecastResult, ForecastResult)> {
        let base = self
            .base
            .forecast(horizon, future_exog, alpha)
            .map_err(|e| e.in_stage("base"))?;
        let residuals = residual_history(&self.base)?;
        let res = self
            .residual_model
            .forecast(&residuals, &ExogTable::new(), horizon, alpha)
            .map_err(|e| e.in_stage("residual"))?;
        Ok((base, res))
    }

    pub fn forecast(&self, horizon: usize, future_exog: &ExogTable, alpha: f64) -> Result<ForecastResult> {
        let (base, res) = self.stage_forecasts(horizon, future_exog, alpha)?;
        combine(&base, &res)
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        doc.push("model", "hybrid");
        doc.push_section("base", &self.base.to_kv());
        doc.push_section("residual", &self.residual_model.to_kv());
        doc
    }

    pub fn from_kv(doc: &KvDoc, history: &DailySeries) -> Result<Self> {
        if doc.get("model") != Some("hybrid") {
            return Err(ForecastError::Persist("not a hybrid manifest".into()));
        }
        Ok(Self {
            base: SarimaxFit::from_kv(&doc.section("base"), history)?,
            residual_model: LstmFit::from_kv(&doc.section("residual"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_sums_means_and_adds_variances() {
        let base = ForecastResult::from_half_widths(vec![10.0, 10.0], &[3.0, 3.0]);
        let res = ForecastResult::from_half_widths(vec![1.0, -1.0], &[4.0, 4.0]);
        let out = combine(&base, &res).unwrap();
        assert_eq!(out.mean, vec![11.0, 9.0]);
        assert_eq!(out.half_widths(), vec![5.0, 5.0]);
        assert!(combine(&base, &ForecastResult::point(vec![1.0])).is_err());
    }

    #[test]
    fn residual_scaler_does_not_center() {
        let s = residual_scaler(&[1.0, 3.0]);
        assert_eq!(s.mean, 0.0);
        assert_eq!(residual_scaler(&[0.0, 0.0]).std, 1.0);
    }
}
