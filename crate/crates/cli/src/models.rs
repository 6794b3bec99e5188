//! Family dispatch: building specs from config and persisting fitted models.

use fuelcast_core::backtest::Oracle;
use fuelcast_core::persist::KvDoc;
use fuelcast_core::{
    fit_decomposable, fit_hybrid, fit_lstm, fit_sarimax, DailySeries, DecomposableFit, ForecastError, FittedModel,
    HybridFit, HybridSpec, LstmFit, ModelSpec, SarimaxFit, SeasonalNaive,
};

use crate::config::{Family, RunConfig};
use crate::error::CliError;

/// The configured model as an evaluable spec. The oracle reads `truth`.
pub fn spec_for(cfg: &RunConfig, truth: &DailySeries) -> Box<dyn ModelSpec> {
    let m = &cfg.model;
    let (h, seed) = (cfg.run.horizon, cfg.run.seed);
    match m.family {
        Family::Sarimax => Box::new(m.sarimax()),
        Family::Decomposable => Box::new(m.decomposable()),
        Family::Lstm => Box::new(m.lstm(h, seed)),
        Family::Hybrid => Box::new(m.hybrid(h, seed)),
        Family::SeasonalNaive => Box::new(SeasonalNaive::new(m.period)),
        Family::Oracle => Box::new(Oracle { truth: truth.clone() }),
    }
}

#[derive(Debug, Clone)]
pub enum Fitted {
    Sarimax(SarimaxFit),
    Decomposable(DecomposableFit),
    Lstm(LstmFit),
    Hybrid(HybridFit),
    SeasonalNaive(SeasonalNaive),
}

impl Fitted {
    pub fn fit(cfg: &RunConfig, series: &DailySeries) -> Result<Self, CliError> {
        let m = &cfg.model;
        let (h, seed) = (cfg.run.horizon, cfg.run.seed);
        Ok(match m.family {
            Family::Sarimax => Fitted::Sarimax(fit_sarimax(series, &m.sarimax())?),
            Family::Decomposable => Fitted::Decomposable(fit_decomposable(series, &m.decomposable())?),
            Family::Lstm => Fitted::Lstm(fit_lstm(series, &m.lstm(h, seed))?),
            Family::Hybrid => Fitted::Hybrid(fit_hybrid(series, &m.hybrid(h, seed))?),
            Family::SeasonalNaive => Fitted::SeasonalNaive(SeasonalNaive::new(m.period)),
            Family::Oracle => {
                return Err(CliError::Config(
                    "the oracle reads future values and can only be used by backtest".into(),
                ))
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            Fitted::Sarimax(f) => f.spec.to_string(),
            Fitted::Decomposable(f) => f.spec.label(),
            Fitted::Lstm(f) => f.spec.label(),
            Fitted::Hybrid(f) => HybridSpec::new(f.base.spec.clone(), f.residual_model.spec.clone()).label(),
            Fitted::SeasonalNaive(s) => ModelSpec::label(s),
        }
    }

    pub fn as_model(&self) -> &dyn FittedModel {
        match self {
            Fitted::Sarimax(f) => f,
            Fitted::Decomposable(f) => f,
            Fitted::Lstm(f) => f,
            Fitted::Hybrid(f) => f,
            Fitted::SeasonalNaive(s) => s,
        }
    }

    pub fn to_kv(&self) -> KvDoc {
        match self {
            Fitted::Sarimax(f) => f.to_kv(),
            Fitted::Decomposable(f) => f.to_kv(),
            Fitted::Lstm(f) => f.to_kv(),
            Fitted::Hybrid(f) => f.to_kv(),
            Fitted::SeasonalNaive(s) => {
                let mut doc = KvDoc::new();
                doc.push("model", "seasonal_naive");
                doc.push_usizes("period", &[s.period]);
                doc
            }
        }
    }

    /// Models that carry state over their training data (SARIMAX and the
    /// hybrid) are re-anchored on `history`.
    pub fn from_kv(doc: &KvDoc, history: &DailySeries) -> Result<Self, CliError> {
        Ok(match doc.require("model")? {
            "sarimax" => Fitted::Sarimax(SarimaxFit::from_kv(doc, history)?),
            "decomposable" => Fitted::Decomposable(DecomposableFit::from_kv(doc)?),
            "lstm" => Fitted::Lstm(LstmFit::from_kv(doc)?),
            "hybrid" => Fitted::Hybrid(HybridFit::from_kv(doc, history)?),
            "seasonal_naive" => Fitted::SeasonalNaive(SeasonalNaive::new(doc.usize("period")?)),
            other => return Err(ForecastError::Persist(format!("unknown model kind '{other}'")).into()),
        })
    }
}
