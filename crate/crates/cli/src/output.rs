//! Report rendering: JSON with fixed 17-significant-digit floats and CSV tables.

use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Number, Value};
use supsob::profile::fmt_sig17;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// A CSV file: header plus preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            file: file.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
    }
}

/// Float cell.
pub fn num(x: f64) -> String {
    fmt_sig17(x)
}

/// Result of one subcommand before it is written out.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub name: String,
    pub pass: bool,
    pub report: Value,
    pub tables: Vec<Table>,
}

impl Artifacts {
    pub fn new(name: impl Into<String>, pass: bool, report: impl Serialize) -> Self {
        Self {
            name: name.into(),
            pass,
            report: serde_json::to_value(report).expect("reports serialize"),
            tables: Vec::new(),
        }
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }

    /// The JSON document: schema version, command, effective config, verdict and report.
    pub fn document(&self, command: &str, cfg: &RunConfig) -> String {
        render(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": cfg,
            "pass": self.pass,
            "report": self.report,
        }))
    }

    /// Write `<name>.json` and the tables into `dir`.
    pub fn write(&self, dir: &Path, command: &str, cfg: &RunConfig) -> CliResult<String> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let doc = self.document(command, cfg);
        let path = dir.join(format!("{}.json", self.name));
        std::fs::write(&path, &doc).map_err(|e| CliError::io(&path, e))?;
        for t in &self.tables {
            let path = dir.join(&t.file);
            std::fs::write(&path, t.render()).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(doc)
    }
}

/// Rewrite every non-integer number with 17 significant digits.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("finite float");
            Value::Number(Number::from_str(&fmt_sig17(x)).expect("formatted float parses"))
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        Value::Object(o) => {
            Value::Object(o.iter().map(|(k, x)| (k.clone(), canonical(x))).collect())
        }
        other => other.clone(),
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(v)).expect("values serialize");
    s.push('\n');
    s
}

/// `{"schema_version", "error": {module, operation, diagnostic}}`.
pub fn error_document(err: &CliError) -> String {
    let (module, operation) = err.origin();
    render(&json!({
        "schema_version": SCHEMA_VERSION,
        "error": {
            "module": module,
            "operation": operation,
            "diagnostic": err.to_string(),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_get_seventeen_digits_and_integers_stay() {
        let s = render(&json!({"a": 0.1, "b": 3, "c": [1.0, -2.5e-300], "d": null}));
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"b\": 3"), "{s}");
        assert!(s.contains("-2.5000000000000000e-300"), "{s}");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new("x.csv", &["iter", "value", "grad_norm"]);
        t.push(vec!["0".into(), num(1.5), num(0.25)]);
        assert_eq!(
            t.render(),
            "iter,value,grad_norm\n0,1.5000000000000000e0,2.5000000000000000e-1\n"
        );
    }
}
