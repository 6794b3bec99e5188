//! Error type shared by every model and harness in the crate.

use thiserror::Error;

/// Errors produced by ingestion, estimation, training and evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ForecastError {
    /// A sequence was too short for the requested operation.
    #[error("length error: {0}")]
    Length(String),

    /// Two shapes that must agree did not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid configuration or hyperparameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or invalid input data. `row` is 1-based and counts the
    /// header line when the error comes from a delimited file.
    #[error("data error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Data { row: Option<usize>, message: String },

    /// A series had zero variance where a scale was required.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// Missing or malformed model inputs at forecast time.
    #[error("input error: {0}")]
    Input(String),

    /// The estimator failed to produce a usable fit.
    #[error("estimation failure: {message}")]
    Estimation {
        message: String,
        /// Best objective value seen before giving up, when known.
        best_objective: Option<f64>,
        iterations: usize,
    },

    /// A persisted model or report could not be parsed.
    #[error("persistence error: {0}")]
    Persist(String),

    /// Error raised inside one stage of a composite model.
    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<ForecastError>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl ForecastError {
    pub fn data(row: Option<usize>, message: impl Into<String>) -> Self {
        ForecastError::Data {
            row,
            message: message.into(),
        }
    }

    pub fn estimation(message: impl Into<String>) -> Self {
        ForecastError::Estimation {
            message: message.into(),
            best_objective: None,
            iterations: 0,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        ForecastError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, unwrapping stage labels.
    pub fn root(&self) -> &ForecastError {
        match self {
            ForecastError::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for ForecastError {
    fn from(e: std::io::Error) -> Self {
        ForecastError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ForecastError>;
