//! Verdict reports and their JSON / text rendering.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use ssdb_core::{ExtReal, SsdbError, Tolerance};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Core(#[from] SsdbError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Io(_) => "IoError",
            CliError::Inconsistent(_) => "InconsistentResults",
            CliError::Core(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    True = 0,
    False = 1,
    Error = 2,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceDoc {
    pub abs: f64,
    pub rank: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub verdict: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Vec<f64>>,
    pub residuals: BTreeMap<String, Value>,
    pub seed: u64,
    pub tolerance: ToleranceDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub data: Map<String, Value>,
    #[serde(skip)]
    pub exit: Exit,
}

impl Report {
    pub fn new(command: &str, digest: String, seed: u64, tol: Tolerance) -> Self {
        Report {
            command: command.to_string(),
            inputs_digest: digest,
            verdict: Value::Null,
            witnesses: Vec::new(),
            residuals: BTreeMap::new(),
            seed,
            tolerance: ToleranceDoc { abs: tol.abs, rank: tol.rank },
            error: None,
            message: None,
            data: Map::new(),
            exit: Exit::True,
        }
    }

    pub fn failed(command: &str, digest: String, seed: u64, tol: Tolerance, err: &CliError) -> Self {
        let mut r = Report::new(command, digest, seed, tol);
        r.error = Some(err.kind().to_string());
        r.message = Some(err.to_string());
        r.exit = Exit::Error;
        r
    }

    pub fn set_verdict(&mut self, verdict: bool) {
        self.verdict = Value::Bool(verdict);
        self.exit = if verdict { Exit::True } else { Exit::False };
    }

    pub fn set_label(&mut self, label: &str, success: bool) {
        self.verdict = Value::String(label.to_string());
        self.exit = if success { Exit::True } else { Exit::False };
    }

    pub fn witness(&mut self, v: &DVector<f64>) {
        self.witnesses.push(v.iter().copied().collect());
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), number(value));
    }

    pub fn put(&mut self, key: &str, value: Value) {
        self.data.insert(key.to_string(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One `key: value` line per top-level field.
    pub fn to_text(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        if let Value::Object(map) = value {
            for (key, v) in map {
                match v {
                    Value::String(s) => out.push_str(&format!("{key}: {s}\n")),
                    Value::Object(inner) if !inner.is_empty() => {
                        out.push_str(&format!("{key}:\n"));
                        for (k, x) in inner {
                            out.push_str(&format!("  {k}: {x}\n"));
                        }
                    }
                    other => out.push_str(&format!("{key}: {other}\n")),
                }
            }
        }
        out
    }
}

/// Finite reals as JSON numbers; infinities and NaN as strings.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("+inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn ext(x: ExtReal) -> Value {
    number(x.to_f64())
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|&x| number(x)).collect())
}

/// Columns of `m` as a list of vectors.
pub fn columns(m: &DMatrix<f64>) -> Value {
    Value::Array(m.column_iter().map(|c| vector(&c.into_owned())).collect())
}
