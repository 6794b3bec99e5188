//! Daily demand forecasting: SARIMAX, a decomposable trend/seasonality
//! model, an LSTM encoder-decoder with a learned noise scale, residual
//! stacking, and walk-forward evaluation.

pub mod backtest;
pub mod decomposable;
pub mod error;
pub mod forecast;
pub mod hybrid;
pub mod io;
pub mod lstm;
pub mod metrics;
pub mod optim;
pub mod persist;
pub mod sarimax;
pub mod series;
pub mod synth;
pub mod tune;

pub use backtest::{walk_forward, BacktestReport, FittedModel, ModelSpec, SeasonalNaive};
pub use decomposable::{fit_decomposable, DecomposableFit, DecomposableSpec, HolidayCalendar};
pub use error::{ForecastError, Result};
pub use forecast::{z_value, ForecastResult, DEFAULT_ALPHA};
pub use hybrid::{fit_hybrid, HybridFit, HybridSpec};
pub use lstm::{fit_lstm, LstmFit, LstmParams, LstmSpec};
pub use metrics::MetricSet;
pub use sarimax::{fit_sarimax, SarimaxCoefficients, SarimaxFit, SarimaxSpec};
pub use series::{difference, undifference, DailySeries, ExogTable, Scaler, SplitIndex};
pub use synth::{generate, Profile, ScenarioSpec, Shock};
pub use tune::{grid_search, GridCell, GridSearchResult};
