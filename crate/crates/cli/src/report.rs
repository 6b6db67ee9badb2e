//! Run reports and their JSON-lines / CSV renderings.

use std::collections::HashSet;
use std::io::{self, Write};

use serde_json::{json, Map, Value};

/// One named check inside a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// The measured quantity the tolerance is compared against.
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub detail: Map<String, Value>,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: Some(tolerance),
            pass: value <= tolerance,
            detail: Map::new(),
        }
    }

    /// Passes when `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: Some(bound),
            pass: value >= bound,
            detail: Map::new(),
        }
    }

    /// A recorded value with an explicit verdict.
    pub fn verdict(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: None,
            pass,
            detail: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.detail.insert(key.to_string(), v.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub suite: &'static str,
    pub seed: u64,
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub wall_time: f64,
    pub timestamp: Option<u64>,
}

impl RunReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.failed() == 0
    }

    /// Names of checks that appear more than once.
    pub fn duplicate_names(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.checks
            .iter()
            .filter(|c| !seen.insert(c.name.as_str()))
            .map(|c| c.name.as_str())
            .collect()
    }

    fn header(&self, with_time: bool) -> Value {
        let mut v = json!({
            "kind": "header",
            "suite": self.suite,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "parameters": self.parameters,
        });
        if let (true, Some(ts)) = (with_time, self.timestamp) {
            v["timestamp"] = json!(ts);
        }
        v
    }

    fn check_line(&self, index: usize, c: &Check) -> Value {
        json!({
            "kind": "check",
            "suite": self.suite,
            "index": index,
            "name": c.name,
            "value": c.value,
            "tolerance": c.tolerance,
            "pass": c.pass,
            "detail": c.detail,
        })
    }

    fn summary(&self, with_time: bool) -> Value {
        let mut v = json!({
            "kind": "summary",
            "suite": self.suite,
            "checks": self.checks.len(),
            "failed": self.failed(),
            "pass": self.passed(),
        });
        if with_time {
            v["wall_time_s"] = json!(self.wall_time);
        }
        v
    }

    /// Header line, one line per check, summary line.
    pub fn write_jsonl<W: Write>(&self, out: &mut W, with_time: bool) -> io::Result<()> {
        writeln!(out, "{}", self.header(with_time))?;
        for (i, c) in self.checks.iter().enumerate() {
            writeln!(out, "{}", self.check_line(i, c))?;
        }
        writeln!(out, "{}", self.summary(with_time))
    }

    /// Flat table of the checks; details and the summary are dropped.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["suite", "index", "name", "value", "tolerance", "pass"])?;
        for (i, c) in self.checks.iter().enumerate() {
            w.write_record([
                self.suite.to_string(),
                i.to_string(),
                c.name.clone(),
                format!("{:e}", c.value),
                c.tolerance.map(|t| format!("{t:e}")).unwrap_or_default(),
                c.pass.to_string(),
            ])?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> RunReport {
        RunReport {
            suite: "demo",
            seed: 3,
            parameters: json!({"n": 1}),
            checks: vec![
                Check::at_most("a", 1e-9, 1e-8).with("x", 2.0),
                Check::at_least("b", 1.0, 1.9),
            ],
            wall_time: 0.5,
            timestamp: Some(17),
        }
    }

    #[test]
    fn verdicts() {
        let r = report();
        assert_eq!(r.failed(), 1);
        assert!(!r.passed());
        assert!(r.duplicate_names().is_empty());
    }

    #[test]
    fn jsonl_lines_and_time_suppression() {
        let mut buf = Vec::new();
        report().write_jsonl(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0]["kind"], "header");
        assert!(lines[0].get("timestamp").is_none());
        assert_eq!(lines[1]["detail"]["x"], 2.0);
        assert_eq!(lines[3]["failed"], 1);
        assert!(lines[3].get("wall_time_s").is_none());
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        report().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().ends_with(",false"));
    }
}
