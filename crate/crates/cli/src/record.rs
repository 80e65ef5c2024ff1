//! Result records and their CSV / JSON encodings.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    /// CSV text: floats with 17 significant digits in scientific notation.
    pub fn to_csv(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format!("{x:.16e}"),
            Value::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        // JSON has no spelling for non-finite numbers
        if x.is_finite() {
            Value::Float(x)
        } else {
            Value::Text(x.to_string())
        }
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

/// What a subcommand produces before the run metadata is attached.
#[derive(Clone, Debug, Default)]
pub struct Output {
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// Set when the run completed but a check missed its tolerance; the
    /// record is still written.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub schema_version: u32,
    pub experiment: String,
    pub subcommand: String,
    /// Every config assignment, so the run can be repeated from the record.
    pub input: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

/// Stable identifier: subcommand plus a digest of the sorted input.
pub fn experiment_id(subcommand: &str, input: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    h.update(subcommand.as_bytes());
    for (k, v) in input {
        h.update(b"\n");
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
    }
    let digest = h.finalize();
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("{subcommand}-{hex}")
}

impl Record {
    pub fn new(subcommand: &str, input: BTreeMap<String, String>, output: Output) -> Self {
        Record {
            schema_version: SCHEMA_VERSION,
            experiment: experiment_id(subcommand, &input),
            subcommand: subcommand.to_string(),
            input,
            tables: output.tables,
            summary: output.summary,
            warnings: output.warnings,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map(|s| s + "\n").map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: Record = serde_json::from_str(text).map_err(|e| CliError::Io(format!("invalid record: {e}")))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(CliError::Io(format!("unsupported schema version {}", r.schema_version)));
        }
        Ok(r)
    }

    /// Writes the first table to `out` and every other table, the summary
    /// and the input echo to `<stem>.<name>.csv` beside it. Returns the
    /// paths written.
    pub fn write_csv(&self, out: &Path) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        let mut extra = Vec::new();
        for (k, t) in self.tables.iter().enumerate() {
            let path = if k == 0 { out.to_path_buf() } else { sibling(out, &t.name, "csv") };
            write_table(&path, &t.columns, &t.rows)?;
            written.push(path);
        }
        if !self.summary.is_empty() {
            extra.push((
                "summary",
                self.summary.iter().map(|(k, v)| vec![Value::from(k.as_str()), v.clone()]).collect(),
            ));
        }
        let mut input = vec![
            vec![Value::from("experiment"), Value::from(self.experiment.as_str())],
            vec![Value::from("schema_version"), Value::Int(self.schema_version as i64)],
        ];
        input.extend(self.input.iter().map(|(k, v)| vec![Value::from(k.as_str()), Value::from(v.as_str())]));
        extra.push(("input", input));
        if !self.warnings.is_empty() {
            extra.push((
                "warnings",
                self.warnings.iter().map(|w| vec![Value::from("warning"), Value::from(w.as_str())]).collect(),
            ));
        }
        for (name, rows) in extra {
            let path = sibling(out, name, "csv");
            write_table(&path, &["key".to_string(), "value".to_string()], &rows)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_table(path: &Path, columns: &[String], rows: &[Vec<Value>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(columns).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(Value::to_csv)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// `dir/stem.name.ext` next to `out`.
pub fn sibling(out: &Path, name: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{name}.{ext}"))
}
