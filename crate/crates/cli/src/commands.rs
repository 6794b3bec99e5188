use std::fs;
use std::path::{Path, PathBuf};

use chrono::Duration;
use fuelcast_core::io::{fmt_f64, read_future_exog_path, write_series};
use fuelcast_core::persist::KvDoc;
use fuelcast_core::synth::generate;
use fuelcast_core::tune::{decomposable_grid, lstm_grid, sarima_grid};
use fuelcast_core::{
    grid_search, walk_forward, BacktestReport, DailySeries, ExogTable, ForecastError, GridSearchResult, HybridSpec,
    MetricSet, ModelSpec, SeasonalNaive, SplitIndex,
};
use serde_json::{json, Value};

use crate::config::{Family, RunConfig};
use crate::error::CliError;
use crate::models::{spec_for, Fitted};

/// Output directory whose files all carry the config hash.
struct Output {
    dir: PathBuf,
    hash: String,
}

impl Output {
    fn create(cfg: &RunConfig) -> Result<Self, CliError> {
        let dir = cfg.run.output_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, hash: cfg.hash() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let content = format!("# config_hash={}\n{body}", self.hash);
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    fn json(&self, name: &str, mut value: Value) -> Result<PathBuf, CliError> {
        if let Value::Object(map) = &mut value {
            map.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        let path = self.path(name);
        let body = serde_json::to_string_pretty(&value).expect("json serializes") + "\n";
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

pub fn fit(cfg: &RunConfig) -> Result<(), CliError> {
    let series = cfg.load_series()?;
    let fitted = Fitted::fit(cfg, &series)?;
    let out = Output::create(cfg)?;
    let doc = fitted.to_kv();
    let model = out.text("model.kv", &doc.render())?;
    // Tensor values stay in the model file; the report lists the rest.
    let params: serde_json::Map<String, Value> = doc
        .entries()
        .iter()
        .filter(|(k, _)| !k.starts_with("tensor.") && !k.starts_with("shape."))
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let report = out.json(
        "fit_report.json",
        json!({
            "label": fitted.label(),
            "n_train": series.len(),
            "start_date": series.start_date().to_string(),
            "end_date": series.end_date().to_string(),
            "parameters": params,
        }),
    )?;
    announce(&[model, report]);
    Ok(())
}

fn exog_used(fitted: &Fitted) -> Vec<String> {
    match fitted {
        Fitted::Sarimax(f) => f.spec.exog.clone(),
        Fitted::Decomposable(f) => f.spec.extra_regressors.clone(),
        Fitted::Lstm(f) => f.spec.exog.clone(),
        Fitted::Hybrid(f) => f.base.spec.exog.clone(),
        Fitted::SeasonalNaive(_) => Vec::new(),
    }
}

fn future_exog(cfg: &RunConfig, history: &DailySeries, needed: &[String]) -> Result<ExogTable, CliError> {
    let Some(path) = &cfg.run.future else {
        if needed.is_empty() {
            return Ok(ExogTable::new());
        }
        return Err(CliError::Config(format!(
            "the model uses regressors ({}); give their future values with run.future",
            needed.join(", ")
        )));
    };
    let (start, table) = read_future_exog_path(path)?;
    let expected = history.end_date() + Duration::days(1);
    if start != expected {
        return Err(ForecastError::data(
            Some(2),
            format!("future values start on {start}; the day after the history is {expected}"),
        )
        .into());
    }
    Ok(table)
}

/// Forecast from the end of the configured data, with a freshly fitted
/// model or one loaded from `model_path`.
pub fn forecast(cfg: &RunConfig, model_path: Option<&Path>) -> Result<(), CliError> {
    let series = cfg.load_series()?;
    let fitted = match model_path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Fitted::from_kv(&KvDoc::parse(&text)?, &series)?
        }
        None => Fitted::fit(cfg, &series)?,
    };
    let h = cfg.run.horizon;
    let exog = future_exog(cfg, &series, &exog_used(&fitted))?;
    let f = fitted.as_model().forecast(&series, &exog, h, cfg.run.alpha)?;
    let mut body = String::from("date,mean,lower,upper\n");
    for k in 0..h {
        let date = series.end_date() + Duration::days(k as i64 + 1);
        body.push_str(&format!(
            "{date},{},{},{}\n",
            fmt_f64(f.mean[k]),
            fmt_f64(f.lower[k]),
            fmt_f64(f.upper[k])
        ));
    }
    let out = Output::create(cfg)?;
    announce(&[out.text("forecast.csv", &body)?]);
    Ok(())
}

fn metrics_json(m: &MetricSet) -> Value {
    json!({ "rmse": m.rmse, "mae": m.mae, "smape": m.smape })
}

fn report_json(r: &BacktestReport) -> Value {
    let folds: Vec<Value> = r
        .folds
        .iter()
        .map(|f| {
            json!({
                "start_date": f.start_date.to_string(),
                "len": f.actual.len(),
                "metrics": metrics_json(&f.metrics),
            })
        })
        .collect();
    json!({
        "label": r.label,
        "pooled": metrics_json(&r.pooled),
        "fold_average": metrics_json(&r.fold_average()),
        "folds": folds,
    })
}

pub fn backtest(cfg: &RunConfig) -> Result<(), CliError> {
    let series = cfg.load_series()?;
    let r = &cfg.run;
    let spec = spec_for(cfg, &series);
    let main = walk_forward(spec.as_ref(), &series, r.test_len, r.fold_len, r.seed, r.alpha)?;
    let mut reports = vec![main];
    if r.baseline {
        let naive = SeasonalNaive::new(cfg.model.period);
        reports.push(walk_forward(&naive, &series, r.test_len, r.fold_len, r.seed, r.alpha)?);
    }
    let mut table = String::from("model,rmse,mae,smape\n");
    for rep in &reports {
        let m = &rep.pooled;
        table.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&rep.label),
            fmt_f64(m.rmse),
            fmt_f64(m.mae),
            fmt_f64(m.smape)
        ));
    }
    let out = Output::create(cfg)?;
    let json_reports: Vec<Value> = reports.iter().map(report_json).collect();
    let paths = [
        out.text("metrics.csv", &table)?,
        out.json(
            "metrics.json",
            json!({ "test_len": r.test_len, "fold_len": r.fold_len, "models": json_reports }),
        )?,
        out.text("daily.csv", &reports[0].daily_table())?,
    ];
    announce(&paths);
    for rep in &reports {
        println!(
            "{}: rmse {:.4} mae {:.4} smape {:.4}",
            rep.label, rep.pooled.rmse, rep.pooled.mae, rep.pooled.smape
        );
    }
    Ok(())
}

fn search<S: ModelSpec>(
    grid: &[S],
    cfg: &RunConfig,
    series: &DailySeries,
    split: SplitIndex,
) -> Result<GridSearchResult, CliError> {
    Ok(grid_search(grid, series, split, cfg.run.seed, cfg.run.jobs, cfg.run.alpha)?)
}

/// Grid search on the segment before the test window, scored on the
/// `val_len` days just before it.
pub fn tune(cfg: &RunConfig) -> Result<(), CliError> {
    let series = cfg.load_series()?;
    let r = &cfg.run;
    let n = series.len();
    if r.test_len + r.val_len >= n {
        return Err(CliError::Config(format!(
            "run.test_len + run.val_len ({}) leaves no training data in a series of {n}",
            r.test_len + r.val_len
        )));
    }
    let tuning = series.slice(0, n - r.test_len)?;
    let split = SplitIndex::from_tail(tuning.len(), r.val_len, 0)?;
    let m = &cfg.model;
    let mut winner_cfg = cfg.clone();
    let result = match m.family {
        Family::Sarimax => {
            let grid = sarima_grid(&cfg.grid.sarima_axes(m.period), &m.exog);
            let res = search(&grid, cfg, &tuning, split)?;
            winner_cfg.model.adopt_sarimax(&grid[res.winner]);
            res
        }
        Family::Decomposable => {
            let grid = decomposable_grid(&cfg.grid.decomposable_axes(), &m.decomposable());
            let res = search(&grid, cfg, &tuning, split)?;
            winner_cfg.model.adopt_decomposable(&grid[res.winner]);
            res
        }
        Family::Lstm => {
            let grid = lstm_grid(&cfg.grid.lstm_axes(), &m.lstm(r.horizon, r.seed));
            let res = search(&grid, cfg, &tuning, split)?;
            winner_cfg.model.adopt_lstm(&grid[res.winner]);
            res
        }
        Family::Hybrid => {
            let residual = m.hybrid(r.horizon, r.seed).residual;
            let grid: Vec<HybridSpec> = sarima_grid(&cfg.grid.sarima_axes(m.period), &m.exog)
                .into_iter()
                .map(|base| HybridSpec::new(base, residual.clone()))
                .collect();
            let res = search(&grid, cfg, &tuning, split)?;
            winner_cfg.model.adopt_sarimax(&grid[res.winner].base);
            res
        }
        Family::SeasonalNaive | Family::Oracle => {
            return Err(CliError::Config(format!("{:?} has no hyperparameters to tune", m.family)))
        }
    };
    let out = Output::create(cfg)?;
    let cells: Vec<Value> = result
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| match &c.outcome {
            Ok(mse) => json!({ "index": i, "label": c.label, "mse": mse }),
            Err(e) => json!({ "index": i, "label": c.label, "error": e }),
        })
        .collect();
    let w = &result.cells[result.winner];
    let paths = [
        out.text("tune.csv", &result.table())?,
        out.json(
            "tune.json",
            json!({
                "train_end": split.train_end,
                "val_end": split.val_end,
                "winner": { "index": result.winner, "label": w.label, "mse": result.winner_mse() },
                "failures": result.failures(),
                "cells": cells,
            }),
        )?,
        out.text("winner.toml", &winner_cfg.to_toml())?,
    ];
    announce(&paths);
    println!(
        "winner: {} (validation mse {:.4}, {} of {} cells failed)",
        w.label,
        result.winner_mse(),
        result.failures(),
        result.cells.len()
    );
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.data.is_some() {
        return Err(CliError::Config("simulate takes a [scenario], not [data]".into()));
    }
    let sc = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::Config("simulate needs a [scenario] section or --profile".into()))?;
    let spec = sc.to_spec()?;
    let series = generate(&spec)?;
    let out = Output::create(cfg)?;
    let path = out.path("series.csv");
    let comments = [
        format!("config_hash={}", out.hash),
        format!(
            "scenario profile={} seed={} n_days={} exog_reliability={}",
            spec.profile, spec.seed, spec.n_days, spec.exog_reliability
        ),
    ];
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_series(std::io::BufWriter::new(file), &series, &comments)?;
    announce(&[path]);
    Ok(())
}
