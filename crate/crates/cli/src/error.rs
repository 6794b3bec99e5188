use fuelcast_core::ForecastError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Forecast(#[from] ForecastError),
}

impl CliError {
    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// Machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Forecast(e) => match e.root() {
                ForecastError::Config(_) => "config",
                ForecastError::Length(_) => "length",
                ForecastError::Dimension(_) => "dimension",
                ForecastError::Data { .. } => "data",
                ForecastError::DegenerateVariance(_) => "degenerate_variance",
                ForecastError::Input(_) => "input",
                ForecastError::Estimation { .. } => "estimation",
                ForecastError::Persist(_) => "persist",
                ForecastError::Io(_) => "io",
                ForecastError::Stage { .. } => unreachable!("root unwraps stages"),
            },
        }
    }

    /// 2: bad configuration, 3: bad data or files, 4: model could not be fit.
    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "config" => 2,
            "estimation" | "degenerate_variance" => 4,
            _ => 3,
        }
    }

    pub fn hint(&self) -> &'static str {
        match self.exit_code() {
            2 => "check the run configuration and --set overrides",
            4 => "the model could not be estimated on this data; try simpler orders or more history",
            _ => "check the input files and their format",
        }
    }
}
