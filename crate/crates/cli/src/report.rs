//! Report envelope and its three renderings.
//!
//! JSON reports are deterministic: keys come out sorted (serde_json maps are
//! ordered) and floats use the shortest round-trip form. The only
//! run-dependent field is `generated_at`, written only under `--timestamp`.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ladderlab::{DressingSpec, C64};
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Run parameters after flags and scenario are merged.
#[derive(Debug, Clone, Serialize)]
pub struct Effective {
    pub tol: f64,
    pub seed: Option<u64>,
    pub dim: usize,
    pub dressing: DressingSpec,
    pub cond_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub model: String,
    pub effective: Effective,
    pub passed: bool,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    /// Main table, for CSV and human output.
    #[serde(skip)]
    pub table: Table,
    /// Headline numbers for human output.
    #[serde(skip)]
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &'static str, model: impl Into<String>, effective: Effective) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            model: model.into(),
            effective,
            passed: true,
            result: Value::Null,
            generated_at: None,
            table: Table::default(),
            summary: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn stamp(&mut self) {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        self.generated_at = Some(now);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.table.to_csv(),
            Format::Human => self.to_human(),
        }
    }

    fn to_human(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut out = format!("ladderlab {} ({}): {verdict}\n", self.command, self.model);
        let e = &self.effective;
        out.push_str(&format!("  dim {}, tol {:e}, cond_bound {:.4}, dressing {}\n", e.dim, e.tol, e.cond_bound, e.dressing));
        for (k, v) in &self.summary {
            out.push_str(&format!("  {k}: {v}\n"));
        }
        if let Some(t) = self.generated_at {
            out.push_str(&format!("  generated_at: {t}\n"));
        }
        if !self.table.rows.is_empty() {
            out.push('\n');
            out.push_str(&self.table.to_aligned());
        }
        out
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.render(format);
        match out {
            Some(path) => fs::write(path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).map_err(|e| CliError::config(format!("cannot write stdout: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let line = |cells: &[String]| cells.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(",");
        let mut out = line(&self.headers);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    fn to_aligned(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| self.rows.iter().map(|r| r[c].len()).chain([self.headers[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            format!("{}\n", padded.join("  ").trim_end())
        };
        let mut out = line(&self.headers);
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// Shortest round-trip text of a double; exponent form for very small or
/// very large magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn re_im(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report parts serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let eff = Effective { tol: 1e-10, seed: Some(3), dim: 8, dressing: DressingSpec::Identity, cond_bound: 1.0 };
        let mut r = Report::new("spectrum", "quon", eff);
        r.table = Table::new(&["n", "label"]);
        r.table.push(vec!["0".into(), "a,b".into()]);
        r
    }

    #[test]
    fn csv_quotes_separators() {
        assert_eq!(sample().render(Format::Csv), "n,label\n0,\"a,b\"\n");
    }

    #[test]
    fn json_carries_schema_version_and_no_timestamp_by_default() {
        let v: Value = serde_json::from_str(&sample().render(Format::Json)).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert!(v.get("generated_at").is_none());
        let mut stamped = sample();
        stamped.stamp();
        let v: Value = serde_json::from_str(&stamped.render(Format::Json)).unwrap();
        assert!(v["generated_at"].is_u64());
    }

    #[test]
    fn rendering_is_repeatable() {
        assert_eq!(sample().render(Format::Json), sample().render(Format::Json));
        assert!(sample().render(Format::Human).contains("PASS"));
    }
}
