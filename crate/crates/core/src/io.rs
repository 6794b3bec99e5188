//! Delimited table ingestion and export.
//!
//! Format: header `date,volume[,exog1,...]`, ISO-8601 dates, one row per
//! consecutive day, plain decimal numbers. Lines starting with `#` are
//! comments (used for provenance headers).

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{ForecastError, Result};
use crate::series::{DailySeries, ExogTable};

pub fn read_series_path(path: impl AsRef<Path>) -> Result<DailySeries> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| {
        ForecastError::Io(format!("{}: {e}", path.as_ref().display()))
    })?;
    read_series(file)
}

pub fn read_series<R: Read>(reader: R) -> Result<DailySeries> {
    let table = read_table(reader, true)?;
    let mut series = DailySeries::new(table.start, table.target)?;
    for (name, col) in table.names.into_iter().zip(table.columns) {
        series = series.with_exog(name, col)?;
    }
    Ok(series)
}

/// Read known-ahead exogenous values: header `date,<column>...`, one row
/// per consecutive day. Returns the first date and the columns.
pub fn read_future_exog<R: Read>(reader: R) -> Result<(NaiveDate, ExogTable)> {
    let table = read_table(reader, false)?;
    let mut exog = ExogTable::new();
    for (name, col) in table.names.into_iter().zip(table.columns) {
        exog = exog.with_column(name, col);
    }
    Ok((table.start, exog))
}

pub fn read_future_exog_path(path: impl AsRef<Path>) -> Result<(NaiveDate, ExogTable)> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| {
        ForecastError::Io(format!("{}: {e}", path.as_ref().display()))
    })?;
    read_future_exog(file)
}

struct RawTable {
    start: NaiveDate,
    target: Vec<f64>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

fn read_table<R: Read>(reader: R, with_target: bool) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr
        .headers()
        .map_err(|e| ForecastError::data(Some(1), e.to_string()))?
        .clone();
    let header_line = header.position().map(|p| p.line() as usize).unwrap_or(1);
    let first = usize::from(with_target) + 1;
    let header_ok = !header.is_empty()
        && header[0].eq_ignore_ascii_case("date")
        && (!with_target || (header.len() >= 2 && header[1].eq_ignore_ascii_case("volume")));
    if !header_ok {
        let expected = if with_target { "'date,volume'" } else { "'date'" };
        return Err(ForecastError::data(Some(header_line), format!("header must start with {expected}")));
    }
    let names: Vec<String> = header.iter().skip(first).map(str::to_string).collect();

    let mut start: Option<NaiveDate> = None;
    let mut prev: Option<NaiveDate> = None;
    let mut target = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];

    for record in rdr.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize);
            ForecastError::data(row, e.to_string())
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != header.len() {
            return Err(ForecastError::data(
                Some(row),
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            ForecastError::data(Some(row), format!("bad date '{}': {e}", &record[0]))
        })?;
        if let Some(p) = prev {
            let gap = (date - p).num_days();
            if gap != 1 {
                let msg = if gap <= 0 {
                    format!("date {date} is duplicated or out of order")
                } else {
                    format!("missing {} day(s) before {date}", gap - 1)
                };
                return Err(ForecastError::data(Some(row), msg));
            }
        }
        start.get_or_insert(date);
        prev = Some(date);
        if with_target {
            target.push(parse_number(&record[1], row, "volume")?);
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.push(parse_number(&record[j + first], row, &names[j])?);
        }
    }

    let start = start.ok_or_else(|| ForecastError::data(None, "table has no data rows"))?;
    Ok(RawTable { start, target, names, columns })
}

fn parse_number(field: &str, row: usize, column: &str) -> Result<f64> {
    let ok_chars = field
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    let v: f64 = if ok_chars && !field.is_empty() {
        field.parse().map_err(|_| {
            ForecastError::data(Some(row), format!("bad number '{field}' in column '{column}'"))
        })?
    } else {
        return Err(ForecastError::data(
            Some(row),
            format!("bad number '{field}' in column '{column}'"),
        ));
    };
    if !v.is_finite() {
        return Err(ForecastError::data(
            Some(row),
            format!("non-finite value in column '{column}'"),
        ));
    }
    Ok(v)
}

/// Write a series in the ingestion format. `comments` become `# ` lines.
pub fn write_series<W: Write>(mut writer: W, series: &DailySeries, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(writer, "# {c}")?;
    }
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string(), "volume".to_string()];
    header.extend(series.exog_names());
    wtr.write_record(&header).map_err(csv_err)?;
    for t in 0..series.len() {
        let mut row = vec![series.date(t).format("%Y-%m-%d").to_string(), fmt_f64(series.values()[t])];
        row.extend(series.exog().iter().map(|c| fmt_f64(c.values[t])));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_series_path(path: impl AsRef<Path>, series: &DailySeries, comments: &[String]) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_series(std::io::BufWriter::new(file), series, comments)
}

/// Shortest decimal representation that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_err(e: csv::Error) -> ForecastError {
    ForecastError::Io(e.to_string())
}
