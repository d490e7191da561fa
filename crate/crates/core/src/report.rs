//! Verification records, run reports and CSV traces.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Version of the config and report formats.
pub const SCHEMA_VERSION: u32 = 1;

/// One verified quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub observed: Value,
    /// `None` for exact comparisons.
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Passes when `|observed - expected| <= tolerance`.
    pub fn within(name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            expected: expected.into(),
            observed: observed.into(),
            tolerance: Some(tolerance),
            pass: (observed - expected).abs() <= tolerance,
        }
    }

    /// Passes when `observed <= bound`.
    pub fn at_most(name: impl Into<String>, bound: f64, observed: f64) -> Self {
        Check {
            name: name.into(),
            expected: Value::String(format!("<= {bound:e}")),
            observed: observed.into(),
            tolerance: Some(bound),
            pass: observed <= bound,
        }
    }

    /// Passes when the two serialize identically.
    pub fn exact<E: Serialize, O: Serialize>(name: impl Into<String>, expected: E, observed: O) -> Self {
        let expected = serde_json::to_value(expected).unwrap_or(Value::Null);
        let observed = serde_json::to_value(observed).unwrap_or(Value::Null);
        Check {
            name: name.into(),
            pass: expected == observed,
            expected,
            observed,
            tolerance: None,
        }
    }

    /// A record whose verdict was decided by the caller.
    pub fn verdict(name: impl Into<String>, expected: impl Into<Value>, observed: impl Into<Value>, pass: bool) -> Self {
        Check {
            name: name.into(),
            expected: expected.into(),
            observed: observed.into(),
            tolerance: None,
            pass,
        }
    }

    /// A failed record for a computation that returned an error.
    pub fn failure(name: impl Into<String>, err: &Error) -> Self {
        Check::verdict(name, "no error", err.to_string(), false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub version: String,
    /// Unix seconds; the only field that differs between identical runs.
    pub timestamp: u64,
}

impl Metadata {
    pub fn now(seed: Option<u64>) -> Self {
        Metadata {
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Plot-ready table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(columns: &[&str]) -> Self {
        Trace {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub experiment: String,
    /// True iff every check passed.
    pub pass: bool,
    pub checks: Vec<Check>,
    pub metadata: Metadata,
    pub certificates: Vec<Value>,
    pub trace: Option<Trace>,
}

impl RunReport {
    pub fn new(experiment: impl Into<String>, checks: Vec<Check>, seed: Option<u64>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            checks,
            metadata: Metadata::now(seed),
            certificates: Vec::new(),
            trace: None,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes the report's trace as RFC-4180 CSV with a header row.
pub fn emit_trace(report: &RunReport, path: &Path) -> Result<()> {
    let trace = report
        .trace
        .as_ref()
        .ok_or_else(|| Error::Domain(format!("experiment {} produced no trace", report.experiment)))?;
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(&trace.columns).map_err(|e| Error::Io(e.to_string()))?;
    for row in &trace.rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_requires_every_check() {
        let ok = Check::within("a", 1.0, 1.0 + 1e-13, 1e-12);
        let bad = Check::within("b", 1.0, 1.1, 1e-12);
        assert!(RunReport::new("trk", vec![ok.clone()], None).pass);
        assert!(!RunReport::new("trk", vec![ok, bad], None).pass);
        assert!(!RunReport::new("trk", vec![], None).pass);
    }

    #[test]
    fn exact_check_compares_serialized_values() {
        assert!(Check::exact("p", "odd", "odd").pass);
        assert!(!Check::exact("p", 1, -1).pass);
    }

    #[test]
    fn trace_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = RunReport::new("covariance", vec![], Some(1));
        let mut t = Trace::new(&["samples", "estimate"]);
        t.rows.push(vec![1000.0, 0.5]);
        r.trace = Some(t);
        let path = dir.path().join("t.csv");
        emit_trace(&r, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "samples,estimate\n1000.0,0.5\n");

        r.trace = Some(Trace::new(&["level", "sum", "deviation"]));
        emit_trace(&r, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "level,sum,deviation\n");

        r.trace = None;
        assert!(emit_trace(&r, &path).is_err());
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let mut r = RunReport::new("trk", vec![], None);
        r.trace = Some(Trace::new(&["level"]));
        assert!(emit_trace(&r, Path::new("/nonexistent-dir/x.csv")).is_err());
    }
}
