use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest round-trip form; plain notation in a readable range,
/// exponent notation outside it.
pub fn fmt_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    PreconditionViolated,
    Informational,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::PreconditionViolated => "precondition-violated",
            Status::Informational => "informational",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub experiment: String,
    pub params: Vec<(&'static str, Cell)>,
    pub measured: f64,
    /// `Cell::Empty` for experiments without an analytic bound.
    pub bound: Cell,
    pub error: f64,
    pub status: Status,
    pub runtime_ms: u64,
}

impl ReportRow {
    pub fn new(experiment: impl Into<String>, measured: f64) -> Self {
        Self {
            experiment: experiment.into(),
            params: Vec::new(),
            measured,
            bound: Cell::Empty,
            error: 0.0,
            status: Status::Informational,
            runtime_ms: 0,
        }
    }

    pub fn param(mut self, name: &'static str, value: impl Into<Cell>) -> Self {
        self.params.push((name, value.into()));
        self
    }

    pub fn bound(mut self, bound: impl Into<Cell>) -> Self {
        self.bound = bound.into();
        self
    }

    pub fn error(mut self, error: f64) -> Self {
        self.error = error;
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn runtime(mut self, ms: u64) -> Self {
        self.runtime_ms = ms;
        self
    }
}

pub struct Report {
    pub command: &'static str,
    pub rows: Vec<ReportRow>,
    pub timestamp: bool,
}

impl Report {
    pub fn new(command: &'static str, timestamp: bool) -> Self {
        Self { command, rows: Vec::new(), timestamp }
    }

    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Fail)
    }

    /// Parameter column names in first-seen order across all rows.
    fn param_columns(&self) -> Vec<&'static str> {
        let mut cols: Vec<&'static str> = Vec::new();
        for r in &self.rows {
            for (name, _) in &r.params {
                if !cols.contains(name) {
                    cols.push(name);
                }
            }
        }
        cols
    }

    fn runtime(&self, row: &ReportRow) -> u64 {
        if self.timestamp {
            row.runtime_ms
        } else {
            0
        }
    }

    pub fn to_csv(&self) -> String {
        let cols = self.param_columns();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["experiment"];
        header.extend(&cols);
        header.extend(["measured", "bound", "error", "status", "runtime_ms"]);
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.experiment.clone()];
            for c in &cols {
                let cell = r.params.iter().find(|(n, _)| n == c).map(|(_, v)| v.render()).unwrap_or_default();
                rec.push(cell);
            }
            rec.push(fmt_float(r.measured));
            rec.push(r.bound.render());
            rec.push(fmt_float(r.error));
            rec.push(r.status.as_str().into());
            rec.push(self.runtime(r).to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut params = Map::new();
                for (n, v) in &r.params {
                    params.insert((*n).into(), v.to_json());
                }
                json!({
                    "experiment": r.experiment,
                    "params": params,
                    "measured": r.measured,
                    "bound": r.bound.to_json(),
                    "error": r.error,
                    "status": r.status.as_str(),
                    "runtime_ms": self.runtime(r),
                })
            })
            .collect();
        let mut doc = json!({ "command": self.command, "rows": rows });
        if self.timestamp {
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            doc["generated_unix"] = json!(now);
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes to `path`, or to stdout when no path is given.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> std::io::Result<()> {
        let body = self.render(format);
        match path {
            Some(p) => std::fs::write(p, body),
            None => std::io::stdout().lock().write_all(body.as_bytes()),
        }
    }
}
