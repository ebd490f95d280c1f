//! Tables, verdicts and the JSON report document.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{FamilyConfig, SCHEMA_VERSION};
use crate::CliError;

/// Floats in CSV carry 17 significant digits, enough to round-trip.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// A named table of floating point columns.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<String>) -> Self {
        Table {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Appends `re_<name>` and `im_<name>` columns.
pub fn complex_columns(cols: &mut Vec<String>, name: &str) {
    cols.push(format!("re_{name}"));
    cols.push(format!("im_{name}"));
}

pub fn push_complex(row: &mut Vec<f64>, v: Complex64) {
    row.push(v.re);
    row.push(v.im);
}

pub fn cjson(v: Complex64) -> Value {
    json!([v.re, v.im])
}

/// A named invariant and whether it held.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: Option<FamilyConfig>,
    pub tables: Vec<Table>,
    pub results: serde_json::Map<String, Value>,
    pub verdicts: Vec<Verdict>,
    /// Rows that could not be evaluated.
    pub aborted: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(command: &str, config: Option<FamilyConfig>) -> Self {
        Report {
            command: command.to_string(),
            config,
            tables: Vec::new(),
            results: serde_json::Map::new(),
            verdicts: Vec::new(),
            aborted: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict::new(name, pass, detail));
    }

    pub fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }

    pub fn failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.pass).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "versions": {
                "periodlab": env!("CARGO_PKG_VERSION"),
            },
            "config": self.config,
            "tables": self.tables,
            "results": self.results,
            "verdicts": self.verdicts,
            "aborted": self.aborted,
            "wall_clock_seconds": self.wall_clock_seconds,
        })
    }

    /// Writes every table as `<name>.csv` and the full document as
    /// `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Config(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        for t in &self.tables {
            std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()).map_err(io)?;
        }
        let doc = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        std::fs::write(dir.join("report.json"), doc + "\n").map_err(io)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.replace('.', "").len(), 17);
        }
    }

    #[test]
    fn csv_layout() {
        let mut cols = vec!["eps_abs".to_string()];
        complex_columns(&mut cols, "z");
        let mut t = Table::new("rows", cols);
        let mut row = vec![0.5];
        push_complex(&mut row, Complex64::new(1.0, -2.0));
        t.push(row);
        assert_eq!(
            t.to_csv(),
            "eps_abs,re_z,im_z\n5.0000000000000000e-1,1.0000000000000000e0,-2.0000000000000000e0\n"
        );
    }
}
