//! `RunReport` and its JSON / CSV projections.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub max_deviation: Option<f64>,
    pub runtime_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// A table: header plus rows of already-formatted cells.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub artifacts: BTreeMap<String, Value>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self { schema_version: Some(SCHEMA_VERSION), command: Some(command.into()), ..Default::default() }
    }

    pub fn param(&mut self, k: &str, v: impl Serialize) {
        self.parameters.insert(k.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn artifact(&mut self, k: &str, v: impl Serialize) {
        self.artifacts.insert(k.into(), serde_json::to_value(v).expect("serializable"));
    }

    /// Records a check; non-finite deviations count as failures.
    pub fn check(&mut self, name: &str, dev: Option<f64>, tol: f64, runtime_ms: Option<u64>) {
        let (status, max_deviation, detail) = match dev {
            Some(d) if d.is_finite() => (if d <= tol { Status::Pass } else { Status::Fail }, Some(d), None),
            Some(d) => (Status::Fail, None, Some(format!("deviation {d}"))),
            None => (Status::Pass, None, None),
        };
        self.checks.push(CheckResult { name: name.into(), status, max_deviation, runtime_ms, detail });
    }

    pub fn check_bool(&mut self, name: &str, ok: bool, detail: Option<String>, runtime_ms: Option<u64>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(CheckResult { name: name.into(), status, max_deviation: None, runtime_ms, detail });
    }

    pub fn error(&mut self, name: &str, e: impl fmt::Display) {
        self.checks.push(CheckResult {
            name: name.into(),
            status: Status::Error,
            max_deviation: None,
            runtime_ms: None,
            detail: Some(e.to_string()),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }
}

#[derive(Debug)]
pub struct EmitError(pub String);

impl fmt::Display for EmitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// JSON for every report; CSV only when the report carries a table.
pub fn emit(r: &RunReport, format: Format) -> Result<Vec<u8>, EmitError> {
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(r).map_err(|e| EmitError(e.to_string()))?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => {
            let t = r
                .table
                .as_ref()
                .ok_or_else(|| EmitError(format!("{} has no tabular payload for csv", r.command.as_deref().unwrap_or("report"))))?;
            let mut w = csv::Writer::from_writer(vec![]);
            w.write_record(&t.header).map_err(|e| EmitError(e.to_string()))?;
            for row in &t.rows {
                w.write_record(row).map_err(|e| EmitError(e.to_string()))?;
            }
            w.into_inner().map_err(|e| EmitError(e.to_string()))
        }
    }
}
