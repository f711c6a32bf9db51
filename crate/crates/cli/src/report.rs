//! Versioned report records and their serialisation.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};

pub const SCHEMA: &str = "chernlab-report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// How `measured` is compared with `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    AtLeast,
    Above,
    Equal,
}

impl Comparison {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Comparison::Below => measured < threshold,
            Comparison::AtLeast => measured >= threshold,
            Comparison::Above => measured > threshold,
            Comparison::Equal => measured == threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub anchor: &'static str,
    pub status: Status,
    /// `None` when the check could not run; `error` then says why.
    pub measured: Option<f64>,
    pub threshold: f64,
    pub comparison: Comparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Record {
    pub fn new(
        name: impl Into<String>,
        anchor: &'static str,
        measured: f64,
        comparison: Comparison,
        threshold: f64,
    ) -> Record {
        let ok = measured.is_finite() && comparison.holds(measured, threshold);
        Record {
            name: name.into(),
            anchor,
            status: if ok { Status::Pass } else { Status::Fail },
            measured: Some(measured),
            threshold,
            comparison,
            error: None,
            details: Value::Null,
        }
    }

    pub fn below(name: impl Into<String>, anchor: &'static str, measured: f64, threshold: f64) -> Record {
        Record::new(name, anchor, measured, Comparison::Below, threshold)
    }

    pub fn at_least(name: impl Into<String>, anchor: &'static str, measured: f64, threshold: f64) -> Record {
        Record::new(name, anchor, measured, Comparison::AtLeast, threshold)
    }

    pub fn above(name: impl Into<String>, anchor: &'static str, measured: f64, threshold: f64) -> Record {
        Record::new(name, anchor, measured, Comparison::Above, threshold)
    }

    pub fn equal(name: impl Into<String>, anchor: &'static str, measured: usize, expected: usize) -> Record {
        Record::new(name, anchor, measured as f64, Comparison::Equal, expected as f64)
    }

    /// A failed record for a check that raised an engine error.
    pub fn failed(
        name: impl Into<String>,
        anchor: &'static str,
        comparison: Comparison,
        threshold: f64,
        error: impl ToString,
    ) -> Record {
        Record {
            name: name.into(),
            anchor,
            status: Status::Fail,
            measured: None,
            threshold,
            comparison,
            error: Some(error.to_string()),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Record {
        self.details = details;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub passed: bool,
    pub records: Vec<Record>,
    /// Command-specific payload (holonomy matrices, trajectory summary, ...).
    #[serde(skip_serializing_if = "Value::is_null")]
    pub artifacts: Value,
}

impl Report {
    pub fn new(command: impl Into<String>, config: &RunConfig, records: Vec<Record>, artifacts: Value) -> Report {
        let versions = BTreeMap::from([("chernlab", env!("CARGO_PKG_VERSION")), ("schema", SCHEMA)]);
        Report {
            schema: SCHEMA,
            command: command.into(),
            config: config.clone(),
            versions,
            passed: !records.is_empty() && records.iter().all(Record::passed),
            records,
            artifacts,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serialises");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
        }
    }

    /// One line per record; the configuration is not included.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,anchor,status,measured,comparison,threshold\n");
        for r in &self.records {
            let measured = r.measured.map(|m| format!("{m:e}")).unwrap_or_default();
            let status = if r.passed() { "pass" } else { "fail" };
            let comparison = serde_json::to_value(r.comparison).unwrap();
            out.push_str(&format!(
                "{},{},{},{},{},{:e}\n",
                csv_field(&r.name),
                r.anchor,
                status,
                measured,
                comparison.as_str().unwrap(),
                r.threshold
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Record::below("a", "x", 1e-7, 1e-6).passed());
        assert!(!Record::below("a", "x", 1e-6, 1e-6).passed());
        assert!(!Record::below("a", "x", f64::NAN, 1e-6).passed());
        assert!(Record::at_least("a", "x", -1e-12, -1e-9).passed());
        assert!(Record::equal("a", "x", 2, 2).passed());
        assert!(!Record::equal("a", "x", 1, 2).passed());
        assert!(!Record::failed("a", "x", Comparison::Below, 1.0, "boom").passed());
    }

    #[test]
    fn empty_report_fails() {
        let cfg = RunConfig::with_seed(1);
        assert!(!Report::new("x", &cfg, vec![], Value::Null).passed);
        let r = Report::new("x", &cfg, vec![Record::below("a", "x", 0.0, 1.0)], Value::Null);
        assert!(r.passed);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("a,x,pass,0e0,below,"));
        assert_eq!(csv_field("m(a=1,b=2)"), "\"m(a=1,b=2)\"");
    }
}
