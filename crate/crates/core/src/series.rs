//! Daily series container, differencing, standardization and chronological
//! splitting.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{ForecastError, Result};

/// A named exogenous column aligned with the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogColumn {
    pub name: String,
    pub values: Vec<f64>,
}

/// Named exogenous columns of equal length, used for future (known ahead)
/// regressor values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExogTable {
    columns: Vec<ExogColumn>,
}

impl ExogTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.columns.push(ExogColumn {
            name: name.into(),
            values,
        });
        self
    }

    pub fn columns(&self) -> &[ExogColumn] {
        &self.columns
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Columns for `names`, each truncated to `rows`. Errors when a column is
    /// missing or shorter than `rows`.
    pub fn require(&self, names: &[String], rows: usize) -> Result<Vec<Vec<f64>>> {
        names
            .iter()
            .map(|name| {
                let col = self.column(name).ok_or_else(|| {
                    ForecastError::Input(format!("missing future exogenous column '{name}'"))
                })?;
                if col.len() < rows {
                    return Err(ForecastError::Input(format!(
                        "future exogenous column '{name}' has {} rows, {rows} required",
                        col.len()
                    )));
                }
                Ok(col[..rows].to_vec())
            })
            .collect()
    }
}

/// Daily demand observations on a gap-free calendar grid, with optional
/// exogenous columns of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    start_date: NaiveDate,
    values: Vec<f64>,
    exog: Vec<ExogColumn>,
}

impl DailySeries {
    pub fn new(start_date: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(ForecastError::Length("series must have at least one value".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ForecastError::data(None, format!("non-finite value at index {i}")));
        }
        Ok(Self {
            start_date,
            values,
            exog: Vec::new(),
        })
    }

    /// Series starting at an arbitrary fixed date, for synthetic and test data.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(default_start(), values)
    }

    pub fn with_exog(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != self.values.len() {
            return Err(ForecastError::Dimension(format!(
                "exogenous column '{name}' has length {}, target has {}",
                values.len(),
                self.values.len()
            )));
        }
        if self.exog.iter().any(|c| c.name == name) {
            return Err(ForecastError::data(None, format!("duplicate column '{name}'")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ForecastError::data(
                None,
                format!("non-finite value in '{name}' at index {i}"),
            ));
        }
        self.exog.push(ExogColumn { name, values });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn date(&self, index: usize) -> NaiveDate {
        self.start_date + Duration::days(index as i64)
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date(self.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exog(&self) -> &[ExogColumn] {
        &self.exog
    }

    pub fn exog_names(&self) -> Vec<String> {
        self.exog.iter().map(|c| c.name.clone()).collect()
    }

    pub fn exog_column(&self, name: &str) -> Option<&[f64]> {
        self.exog
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Columns for `names` in the given order.
    pub fn exog_matrix(&self, names: &[String]) -> Result<Vec<Vec<f64>>> {
        names
            .iter()
            .map(|n| {
                self.exog_column(n)
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| ForecastError::Input(format!("missing exogenous column '{n}'")))
            })
            .collect()
    }

    /// Sub-series over `[start, end)`, dates shifted accordingly.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(ForecastError::Length(format!(
                "invalid slice [{start}, {end}) of series with length {}",
                self.len()
            )));
        }
        Ok(Self {
            start_date: self.date(start),
            values: self.values[start..end].to_vec(),
            exog: self
                .exog
                .iter()
                .map(|c| ExogColumn {
                    name: c.name.clone(),
                    values: c.values[start..end].to_vec(),
                })
                .collect(),
        })
    }

    /// Exogenous rows `[start, end)` as a table, all columns.
    pub fn exog_table(&self, start: usize, end: usize) -> ExogTable {
        let end = end.min(self.len());
        let start = start.min(end);
        ExogTable {
            columns: self
                .exog
                .iter()
                .map(|c| ExogColumn {
                    name: c.name.clone(),
                    values: c.values[start..end].to_vec(),
                })
                .collect(),
        }
    }

    /// Same target, keeping only the named exogenous columns.
    pub fn select_exog(&self, names: &[String]) -> Result<Self> {
        let exog = names
            .iter()
            .map(|n| {
                self.exog
                    .iter()
                    .find(|c| &c.name == n)
                    .cloned()
                    .ok_or_else(|| ForecastError::Input(format!("missing exogenous column '{n}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            start_date: self.start_date,
            values: self.values.clone(),
            exog,
        })
    }

    /// Same dates and exogenous columns with a replaced target.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.start_date, values)?;
        for c in &self.exog {
            out = out.with_exog(c.name.clone(), c.values.clone())?;
        }
        Ok(out)
    }
}

pub(crate) fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date")
}

/// Lag-`lag` difference: `out[k] = series[k + lag] - series[k]`.
pub fn difference(series: &[f64], lag: usize) -> Result<Vec<f64>> {
    if lag == 0 {
        return Err(ForecastError::Config("difference lag must be >= 1".into()));
    }
    if series.len() <= lag {
        return Err(ForecastError::Length(format!(
            "series of length {} too short for lag {lag}",
            series.len()
        )));
    }
    Ok(series
        .iter()
        .skip(lag)
        .zip(series)
        .map(|(a, b)| a - b)
        .collect())
}

/// Inverse of [`difference`]: rebuilds the series from its first `lag`
/// values by cumulative summation at stride `lag`.
pub fn undifference(diffed: &[f64], initial_values: &[f64], lag: usize) -> Result<Vec<f64>> {
    if lag == 0 {
        return Err(ForecastError::Config("difference lag must be >= 1".into()));
    }
    if initial_values.len() != lag {
        return Err(ForecastError::Dimension(format!(
            "expected {lag} initial values, got {}",
            initial_values.len()
        )));
    }
    let mut out = Vec::with_capacity(diffed.len() + lag);
    out.extend_from_slice(initial_values);
    for (k, d) in diffed.iter().enumerate() {
        out.push(out[k] + d);
    }
    Ok(out)
}

/// Apply `d` ordinary and `big_d` seasonal differences.
pub fn difference_orders(series: &[f64], d: usize, big_d: usize, period: usize) -> Result<Vec<f64>> {
    let mut out = series.to_vec();
    for _ in 0..d {
        out = difference(&out, 1)?;
    }
    for _ in 0..big_d {
        out = difference(&out, period)?;
    }
    Ok(out)
}

/// Z-score transform for one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: f64,
    pub std: f64,
}

impl Scaler {
    /// Fit on a sample using the n-1 variance denominator.
    pub fn fit(series: &[f64]) -> Result<Self> {
        if series.len() < 2 {
            return Err(ForecastError::Length("scaler needs at least two values".into()));
        }
        let (mean, std) = mean_std(series);
        if std <= 0.0 || !std.is_finite() {
            return Err(ForecastError::DegenerateVariance(
                "cannot standardize a constant series".into(),
            ));
        }
        Ok(Self { mean, std })
    }

    /// Like [`Scaler::fit`], but a constant column falls back to centering
    /// only (unit scale). The flag reports whether the fallback was used.
    pub fn fit_or_center(series: &[f64]) -> (Self, bool) {
        match Self::fit(series) {
            Ok(s) => (s, false),
            Err(_) => {
                let mean = if series.is_empty() {
                    0.0
                } else {
                    series.iter().sum::<f64>() / series.len() as f64
                };
                (Self { mean, std: 1.0 }, true)
            }
        }
    }

    pub fn apply_one(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn invert_one(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }

    pub fn apply(&self, series: &[f64]) -> Vec<f64> {
        series.iter().map(|&x| self.apply_one(x)).collect()
    }

    pub fn invert(&self, series: &[f64]) -> Vec<f64> {
        series.iter().map(|&z| self.invert_one(z)).collect()
    }
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Chronological train / validation / test boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndex {
    /// Exclusive end of the training segment.
    pub train_end: usize,
    /// Exclusive end of the validation segment.
    pub val_end: usize,
    pub total_len: usize,
}

impl SplitIndex {
    pub fn new(train_end: usize, val_end: usize, total_len: usize) -> Result<Self> {
        if !(0 < train_end && train_end < val_end && val_end <= total_len) {
            return Err(ForecastError::Config(format!(
                "invalid split: need 0 < {train_end} < {val_end} <= {total_len}"
            )));
        }
        Ok(Self {
            train_end,
            val_end,
            total_len,
        })
    }

    /// Fractional split; every segment must be non-empty.
    pub fn from_fractions(len: usize, train_frac: f64, val_frac: f64) -> Result<Self> {
        if !(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0) {
            return Err(ForecastError::Config(format!(
                "split fractions must be positive and sum below 1 (got {train_frac} + {val_frac})"
            )));
        }
        let train_end = (len as f64 * train_frac).round() as usize;
        let val_end = (len as f64 * (train_frac + val_frac)).round() as usize;
        if train_end == 0 || val_end <= train_end || val_end >= len {
            return Err(ForecastError::Config(format!(
                "split of length {len} leaves an empty segment ({train_end}, {val_end})"
            )));
        }
        Self::new(train_end, val_end, len)
    }

    /// Split that reserves exactly `test_len` trailing points for testing
    /// and `val_len` before them for validation.
    pub fn from_tail(len: usize, val_len: usize, test_len: usize) -> Result<Self> {
        let val_end = len.saturating_sub(test_len);
        let train_end = val_end.saturating_sub(val_len);
        Self::new(train_end, val_end, len)
    }

    pub fn test_len(&self) -> usize {
        self.total_len - self.val_end
    }
}

/// Chronological split of a series by fractions.
pub fn split(series: &DailySeries, train_frac: f64, val_frac: f64) -> Result<SplitIndex> {
    SplitIndex::from_fractions(series.len(), train_frac, val_frac)
}
