use std::collections::BTreeMap;
use std::path::Path;

use chern_yamabe::solver::TraceRow;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

/// A reported number together with the tolerance it was checked against and the
/// module that produced it.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Quantity {
    pub value: Value,
    pub tolerance: Option<f64>,
    pub module: &'static str,
    /// Present when the quantity is a pass/fail check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ToleranceFailure,
}

/// JSON report of one run. Apart from `timestamp` it depends only on the config.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub timestamp: u64,
    pub status: Status,
    pub config: RunConfig,
    pub provenance: BTreeMap<String, Value>,
    pub quantities: BTreeMap<String, Quantity>,
    pub details: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, config: RunConfig) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "chern-yamabe",
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp,
            status: Status::Ok,
            config,
            provenance: BTreeMap::new(),
            quantities: BTreeMap::new(),
            details: BTreeMap::new(),
            warnings: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn quantity(&mut self, name: &str, value: impl Into<Value>, tolerance: Option<f64>, module: &'static str) {
        self.quantities.insert(
            name.into(),
            Quantity {
                value: value.into(),
                tolerance,
                module,
                pass: None,
            },
        );
    }

    /// Records a check `value ≤ tolerance` (or an exact check when `tolerance` is `None`).
    pub fn check(&mut self, name: &str, value: impl Into<Value>, tolerance: Option<f64>, module: &'static str, pass: bool) {
        if !pass {
            self.status = Status::ToleranceFailure;
        }
        self.quantities.insert(
            name.into(),
            Quantity {
                value: value.into(),
                tolerance,
                module,
                pass: Some(pass),
            },
        );
    }

    pub fn detail(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("detail serializes");
        self.details.insert(name.into(), v);
    }

    pub fn provenance(&mut self, name: &str, value: impl Into<Value>) {
        self.provenance.insert(name.into(), value.into());
    }

    pub fn fail(&mut self, warning: String) {
        self.status = Status::ToleranceFailure;
        self.warnings.push(warning);
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::ToleranceFailure => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with the timestamp zeroed, for byte-level comparisons.
    pub fn to_json_without_timestamp(&self) -> String {
        Self { timestamp: 0, ..self.clone() }.to_json()
    }
}

/// JSON has no representation for NaN or infinities; they are reported as strings.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(format!("{x}"))
    }
}

/// Column order of solver and flow traces.
pub const TRACE_COLUMNS: [&str; 7] = ["t", "residual", "f_sup", "functional", "lower_margin", "upper_margin", "iterations"];

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output {
        path: path.display().to_string(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    w.write_record(TRACE_COLUMNS).map_err(|e| io(e.into()))?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            format!("{:e}", r.t),
            format!("{:e}", r.residual),
            format!("{:e}", r.f_sup),
            opt(r.functional),
            opt(r.lower_margin),
            opt(r.upper_margin),
            r.iterations.to_string(),
        ])
        .map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}

/// Writes a CSV with the given header and string rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output {
        path: path.display().to_string(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    w.write_record(header).map_err(|e| io(e.into()))?;
    for r in rows {
        w.write_record(r).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}
