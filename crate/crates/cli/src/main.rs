//! `fuelcast`: fit, forecast, evaluate and tune daily fuel-demand models.

mod commands;
mod config;
mod error;
mod models;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "fuelcast", version, about = "Daily fuel-demand forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set model.family=lstm`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Input CSV (sets data.path).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory (sets run.output_dir).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for grid search.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the configured model and save it.
    Fit(Common),
    /// Forecast beyond the end of the data.
    Forecast {
        #[command(flatten)]
        common: Common,
        /// Saved model to use instead of fitting.
        #[arg(long)]
        model: Option<PathBuf>,
        /// CSV of future regressor values (sets run.future).
        #[arg(long)]
        future: Option<PathBuf>,
    },
    /// Walk-forward evaluation over the test window.
    Backtest(Common),
    /// Grid search scored on the validation window.
    Tune(Common),
    /// Generate a synthetic scenario.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// flag_carrier, low_cost or airport_aggregate (sets scenario.profile).
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        n_days: Option<usize>,
    },
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        set: c.set.clone(),
        data: c.data.clone(),
        output: c.output.clone(),
        seed: c.seed,
        jobs: c.jobs,
        horizon: c.horizon,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(c) => commands::fit(&RunConfig::load(c.config.as_deref(), &overrides(&c))?),
        Command::Backtest(c) => commands::backtest(&RunConfig::load(c.config.as_deref(), &overrides(&c))?),
        Command::Tune(c) => commands::tune(&RunConfig::load(c.config.as_deref(), &overrides(&c))?),
        Command::Forecast { common, model, future } => {
            let mut o = overrides(&common);
            if let Some(f) = future {
                o.set.push(format!("run.future={}", toml_str(&f.display().to_string())));
            }
            commands::forecast(&RunConfig::load(common.config.as_deref(), &o)?, model.as_deref())
        }
        Command::Simulate { common, profile, n_days } => {
            let mut o = overrides(&common);
            // The seed picks the scenario draw here.
            if let Some(s) = o.seed.take() {
                o.set.push(format!("scenario.seed={s}"));
            }
            if let Some(p) = profile {
                o.set.push(format!("scenario.profile={}", toml_str(&p)));
            }
            if let Some(n) = n_days {
                o.set.push(format!("scenario.n_days={n}"));
            }
            commands::simulate(&RunConfig::load(common.config.as_deref(), &o)?)
        }
    }
}

fn toml_str(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!(
                "fuelcast: error kind={} code={} message={:?}",
                e.kind(),
                e.exit_code(),
                message
            );
            eprintln!("{}", e.hint());
            ExitCode::from(e.exit_code())
        }
    }
}
