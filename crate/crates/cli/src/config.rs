//! Run configuration: one TOML document, flag overrides on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use fuelcast_core::synth::{Profile, ScenarioSpec, Shock};
use fuelcast_core::tune::{DecomposableAxes, LstmAxes, SarimaAxes};
use fuelcast_core::{io, DailySeries, DecomposableSpec, HolidayCalendar, HybridSpec, LstmSpec, SarimaxSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default)]
    pub grid: GridConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub profile: String,
    #[serde(default = "default_n_days")]
    pub n_days: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exog_reliability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shock: Option<ShockConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_date: Option<NaiveDate>,
}

fn default_n_days() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockConfig {
    pub start: usize,
    pub duration: usize,
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Sarimax,
    Decomposable,
    Lstm,
    Hybrid,
    SeasonalNaive,
    Oracle,
}

/// Settings for every family; each family reads the fields it needs.
/// Hybrid models take their base orders from `order`/`seasonal_order`/`exog`
/// and their residual network from the LSTM fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: Family,
    pub exog: Vec<String>,
    pub order: [usize; 3],
    pub seasonal_order: [usize; 4],
    pub changepoint_prior_scale: f64,
    pub seasonality_prior_scale: f64,
    pub n_changepoints: usize,
    pub fourier_order_weekly: usize,
    pub fourier_order_yearly: usize,
    pub holidays: BTreeMap<String, Vec<NaiveDate>>,
    pub window: usize,
    pub hidden_dim: usize,
    pub n_layers: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub period: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let d = DecomposableSpec::default();
        let l = LstmSpec::default();
        Self {
            family: Family::Sarimax,
            exog: Vec::new(),
            order: [1, 0, 1],
            seasonal_order: [1, 0, 1, 7],
            changepoint_prior_scale: d.changepoint_prior_scale,
            seasonality_prior_scale: d.seasonality_prior_scale,
            n_changepoints: d.n_changepoints,
            fourier_order_weekly: d.fourier_order_weekly,
            fourier_order_yearly: d.fourier_order_yearly,
            holidays: BTreeMap::new(),
            window: l.window,
            hidden_dim: l.hidden_dim,
            n_layers: l.n_layers,
            learning_rate: l.learning_rate,
            patience: l.patience,
            max_epochs: l.max_epochs,
            batch_size: l.batch_size,
            period: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub horizon: usize,
    pub test_len: usize,
    pub fold_len: usize,
    /// Validation segment used by `tune`, placed just before the test window.
    pub val_len: usize,
    pub alpha: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub jobs: usize,
    /// Known-ahead exogenous values for `forecast`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub future: Option<PathBuf>,
    /// Add a seasonal-naive row to backtest tables.
    pub baseline: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            horizon: 30,
            test_len: 90,
            fold_len: 30,
            val_len: 90,
            alpha: fuelcast_core::DEFAULT_ALPHA,
            seed: 0,
            output_dir: PathBuf::from("out"),
            jobs: 1,
            future: None,
            baseline: false,
        }
    }
}

/// Optional grid axes; absent axes take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seasonal_p: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seasonal_d: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seasonal_q: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub changepoint_prior_scale: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seasonality_prior_scale: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_layers: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_dim: Option<Vec<usize>>,
}

impl GridConfig {
    pub fn sarima_axes(&self, period: usize) -> SarimaAxes {
        let d = SarimaAxes::default();
        SarimaAxes {
            p: self.p.clone().unwrap_or(d.p),
            d: self.d.clone().unwrap_or(d.d),
            q: self.q.clone().unwrap_or(d.q),
            seasonal_p: self.seasonal_p.clone().unwrap_or(d.seasonal_p),
            seasonal_d: self.seasonal_d.clone().unwrap_or(d.seasonal_d),
            seasonal_q: self.seasonal_q.clone().unwrap_or(d.seasonal_q),
            period,
        }
    }

    pub fn decomposable_axes(&self) -> DecomposableAxes {
        let d = DecomposableAxes::default();
        DecomposableAxes {
            changepoint_prior_scale: self.changepoint_prior_scale.clone().unwrap_or(d.changepoint_prior_scale),
            seasonality_prior_scale: self.seasonality_prior_scale.clone().unwrap_or(d.seasonality_prior_scale),
        }
    }

    pub fn lstm_axes(&self) -> LstmAxes {
        let d = LstmAxes::default();
        LstmAxes {
            window: self.window.clone().unwrap_or(d.window),
            n_layers: self.n_layers.clone().unwrap_or(d.n_layers),
            hidden_dim: self.hidden_dim.clone().unwrap_or(d.hidden_dim),
        }
    }
}

/// Flag values layered over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// `section.key=value` pairs; values parse as TOML, else as strings.
    pub set: Vec<String>,
    pub data: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub horizon: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {}", p.display(), e.message())))?
            }
            None => toml::Table::new(),
        };
        for item in &overrides.set {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{item}' is not key=value")))?;
            set_path(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        let mut put = |key: &str, v: toml::Value| set_path(&mut table, key, v);
        if let Some(d) = &overrides.data {
            put("data.path", toml::Value::String(d.display().to_string()))?;
        }
        if let Some(o) = &overrides.output {
            put("run.output_dir", toml::Value::String(o.display().to_string()))?;
        }
        if let Some(s) = overrides.seed {
            put("run.seed", toml::Value::Integer(s as i64))?;
        }
        if let Some(j) = overrides.jobs {
            put("run.jobs", toml::Value::Integer(j as i64))?;
        }
        if let Some(h) = overrides.horizon {
            put("run.horizon", toml::Value::Integer(h as i64))?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let r = &self.run;
        let bad = |m: String| Err(CliError::Config(m));
        if r.horizon == 0 {
            return bad("run.horizon must be >= 1".into());
        }
        if r.fold_len == 0 || r.test_len == 0 || !r.test_len.is_multiple_of(r.fold_len) {
            return bad(format!(
                "run.test_len ({}) must be a positive multiple of run.fold_len ({})",
                r.test_len, r.fold_len
            ));
        }
        if r.val_len == 0 {
            return bad("run.val_len must be >= 1".into());
        }
        if !(r.alpha > 0.0 && r.alpha < 1.0) {
            return bad(format!("run.alpha must lie in (0, 1), got {}", r.alpha));
        }
        if r.jobs == 0 {
            return bad("run.jobs must be >= 1".into());
        }
        if self.model.period == 0 {
            return bad("model.period must be >= 1".into());
        }
        Ok(())
    }

    /// SHA-256 over the canonical TOML form, ignoring settings that cannot
    /// change results (output directory, worker count).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.run.output_dir = PathBuf::new();
        canonical.run.jobs = 1;
        let text = toml::to_string(&canonical).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Exactly one data source must be given.
    pub fn load_series(&self) -> Result<DailySeries, CliError> {
        let series = match (&self.data, &self.scenario) {
            (Some(d), None) => io::read_series_path(&d.path)?,
            (None, Some(s)) => fuelcast_core::synth::generate(&s.to_spec()?)?,
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either [data] or [scenario], not both".into()))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "no data source: set [data] path (or --data) or a [scenario]".into(),
                ))
            }
        };
        for name in &self.model.exog {
            if series.exog_column(name).is_none() {
                return Err(CliError::Config(format!(
                    "model.exog names column '{name}', which the data lacks (has: {})",
                    series.exog_names().join(", ")
                )));
            }
        }
        Ok(series)
    }
}

impl ScenarioConfig {
    pub fn to_spec(&self) -> Result<ScenarioSpec, CliError> {
        let profile: Profile = self.profile.parse()?;
        let mut spec = ScenarioSpec::new(profile, self.n_days, self.seed);
        if let Some(r) = self.exog_reliability {
            spec = spec.with_reliability(r);
        }
        if let Some(s) = self.shock {
            spec = spec.with_shock(Shock {
                start: s.start,
                duration: s.duration,
                depth: s.depth,
            });
        }
        if let Some(d) = self.start_date {
            spec.start_date = d;
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl ModelConfig {
    pub fn sarimax(&self) -> SarimaxSpec {
        let [p, d, q] = self.order;
        let [sp, sd, sq, s] = self.seasonal_order;
        SarimaxSpec::new(p, d, q).seasonal(sp, sd, sq, s).with_exog(self.exog.iter().cloned())
    }

    pub fn decomposable(&self) -> DecomposableSpec {
        let holidays: HolidayCalendar = self
            .holidays
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().copied().collect()))
            .collect();
        DecomposableSpec {
            changepoint_prior_scale: self.changepoint_prior_scale,
            seasonality_prior_scale: self.seasonality_prior_scale,
            n_changepoints: self.n_changepoints,
            fourier_order_weekly: self.fourier_order_weekly,
            fourier_order_yearly: self.fourier_order_yearly,
            holidays,
            extra_regressors: self.exog.clone(),
        }
    }

    pub fn lstm(&self, horizon: usize, seed: u64) -> LstmSpec {
        LstmSpec {
            window: self.window,
            hidden_dim: self.hidden_dim,
            n_layers: self.n_layers,
            horizon,
            exog: self.exog.clone(),
            learning_rate: self.learning_rate,
            patience: self.patience,
            max_epochs: self.max_epochs,
            batch_size: self.batch_size,
            seed,
        }
    }

    pub fn hybrid(&self, horizon: usize, seed: u64) -> HybridSpec {
        let residual = LstmSpec {
            exog: Vec::new(),
            ..self.lstm(horizon, seed)
        };
        HybridSpec::new(self.sarimax(), residual)
    }

    pub fn adopt_sarimax(&mut self, s: &SarimaxSpec) {
        self.order = [s.p, s.d, s.q];
        self.seasonal_order = [s.seasonal_p, s.seasonal_d, s.seasonal_q, s.period];
    }

    pub fn adopt_decomposable(&mut self, s: &DecomposableSpec) {
        self.changepoint_prior_scale = s.changepoint_prior_scale;
        self.seasonality_prior_scale = s.seasonality_prior_scale;
    }

    pub fn adopt_lstm(&mut self, s: &LstmSpec) {
        self.window = s.window;
        self.n_layers = s.n_layers;
        self.hidden_dim = s.hidden_dim;
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| CliError::Config(format!("empty override key '{key}'")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override '{key}': '{p}' is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
