//! Plain-text `key = value` documents used for model reports and
//! checkpoints. Floats are written in shortest round-trip form so a
//! document parses back to bit-identical values.

use std::fmt::Write as _;

use crate::error::{ForecastError, Result};
use crate::io::fmt_f64;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDoc {
    entries: Vec<(String, String)>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ForecastError::Persist(format!("line {}: expected 'key = value'", i + 1))
            })?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn push_f64s(&mut self, key: impl Into<String>, values: &[f64]) {
        let s = values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ");
        self.push(key, s);
    }

    pub fn push_usizes(&mut self, key: impl Into<String>, values: &[usize]) {
        let s = values.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        self.push(key, s);
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| ForecastError::Persist(format!("missing key '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        v.parse()
            .map_err(|_| ForecastError::Persist(format!("key '{key}': bad number '{v}'")))
    }

    pub fn f64s(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.require(key)?;
        v.split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| ForecastError::Persist(format!("key '{key}': bad number '{t}'")))
            })
            .collect()
    }

    pub fn usizes(&self, key: &str) -> Result<Vec<usize>> {
        let v = self.require(key)?;
        v.split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| ForecastError::Persist(format!("key '{key}': bad integer '{t}'")))
            })
            .collect()
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.usizes(key)?;
        match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(ForecastError::Persist(format!("key '{key}': expected one integer"))),
        }
    }

    /// Comma separated list of names; empty value means no names.
    pub fn names(&self, key: &str) -> Result<Vec<String>> {
        let v = self.require(key)?;
        Ok(v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect())
    }

    /// Append every entry of `other` under `prefix.`.
    pub fn push_section(&mut self, prefix: &str, other: &KvDoc) {
        for (k, v) in &other.entries {
            self.push(format!("{prefix}.{k}"), v.clone());
        }
    }

    /// Entries under `prefix.`, with the prefix removed.
    pub fn section(&self, prefix: &str) -> KvDoc {
        let lead = format!("{prefix}.");
        let entries = self
            .entries
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(&lead).map(|k| (k.to_string(), v.clone())))
            .collect();
        KvDoc { entries }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip_exactly() {
        let vals = [0.1, 1.0 / 3.0, -1e-300, 123_456_789.123_456_78, f64::MIN_POSITIVE];
        let mut d = KvDoc::new();
        d.push_f64s("x", &vals);
        d.push("names", "a, b");
        let back = KvDoc::parse(&d.render()).unwrap();
        let got = back.f64s("x").unwrap();
        for (a, b) in vals.iter().zip(got) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.names("names").unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn sections_nest_and_split() {
        let mut inner = KvDoc::new();
        inner.push("model", "x");
        let mut outer = KvDoc::new();
        outer.push("model", "pair");
        outer.push_section("left", &inner);
        assert_eq!(outer.get("left.model"), Some("x"));
        assert_eq!(outer.section("left"), inner);
        assert!(outer.section("right").entries().is_empty());
    }

    #[test]
    fn missing_key() {
        let d = KvDoc::parse("# c\na = 1\n").unwrap();
        assert!(matches!(d.f64("b"), Err(ForecastError::Persist(_))));
        assert!(KvDoc::parse("novalue\n").is_err());
    }
}
