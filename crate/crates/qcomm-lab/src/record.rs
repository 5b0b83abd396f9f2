//! Run records, the JSON-lines log and table output.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;
use crate::error::{LabError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Result of one suite. Everything here is a pure function of the config and
/// the suite seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    /// What the suite audits, also used as the CSV `audits` column.
    pub audits: String,
    pub seed: u64,
    pub metrics: BTreeMap<String, Value>,
    pub checks: BTreeMap<String, bool>,
}

impl SuiteReport {
    pub fn new(suite: &str, audits: &str, seed: u64) -> Self {
        Self {
            suite: suite.to_string(),
            audits: audits.to_string(),
            seed,
            metrics: BTreeMap::new(),
            checks: BTreeMap::new(),
        }
    }

    pub fn metric<T: Serialize>(&mut self, name: &str, value: T) {
        let v = serde_json::to_value(value).expect("metric serializes");
        self.metrics.insert(name.to_string(), v);
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
    }

    pub fn pass(&self) -> bool {
        self.checks.values().all(|&ok| ok)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.as_str()).collect()
    }
}

/// The deterministic part of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub subcommand: String,
    pub seed: u64,
    pub config: Config,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
}

impl Outcome {
    pub fn new(subcommand: &str, seed: u64, config: Config, suites: Vec<SuiteReport>) -> Self {
        let pass = suites.iter().all(SuiteReport::pass);
        Self {
            subcommand: subcommand.to_string(),
            seed,
            config,
            suites,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes") + "\n"
    }

    /// One row per metric and check.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let out = |e: csv::Error| LabError::Output(e.to_string());
        w.write_record(["suite", "audits", "entry", "name", "value"]).map_err(out)?;
        for s in &self.suites {
            for (k, v) in &s.metrics {
                let value = match v {
                    Value::String(t) => t.clone(),
                    other => other.to_string(),
                };
                w.write_record([&s.suite, &s.audits, "metric", k, &value]).map_err(out)?;
            }
            for (k, ok) in &s.checks {
                let value = if *ok { "pass" } else { "fail" };
                w.write_record([s.suite.as_str(), &s.audits, "check", k, value]).map_err(out)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| LabError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LabError::Output(e.to_string()))
    }
}

/// One line of the run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub timestamp: String,
    pub elapsed_ms: u64,
    pub jobs: usize,
    pub outcome: Outcome,
}

impl RunRecord {
    pub fn new(outcome: Outcome, elapsed_ms: u64, jobs: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            elapsed_ms,
            jobs,
            outcome,
        }
    }

    /// Appends the record as one JSON line, holding an exclusive lock on the
    /// log while writing.
    pub fn append_to(&self, path: &Path) -> Result<()> {
        let mut line = serde_json::to_string(self).map_err(|e| LabError::Output(e.to_string()))?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        f.lock()?;
        f.write_all(line.as_bytes())?;
        f.flush()?;
        f.unlock()?;
        Ok(())
    }
}

pub fn read_log(path: &Path) -> Result<Vec<RunRecord>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| LabError::Output(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome() -> Outcome {
        let mut s = SuiteReport::new("demo", "a, quoted \"thing\"", 7);
        s.metric("x", 0.1 + 0.2);
        s.metric("label", "1/3");
        s.check("ok", true);
        Outcome::new("demo", 1, Config::default(), vec![s])
    }

    #[test]
    fn csv_quotes_fields() {
        let text = outcome().to_csv().unwrap();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(&rows[0][1], "a, quoted \"thing\"");
        assert_eq!(&rows[1][4], "0.30000000000000004");
        assert_eq!(&rows[2][4], "pass");
    }

    #[test]
    fn log_appends_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let rec = RunRecord::new(outcome(), 3, 1);
        rec.append_to(&path).unwrap();
        rec.append_to(&path).unwrap();
        let back = read_log(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], rec);
        assert_eq!(back[1].schema_version, SCHEMA_VERSION);
    }

    #[test]
    fn pass_requires_every_check() {
        let mut o = outcome();
        assert!(o.pass);
        o.suites[0].check("bad", false);
        assert_eq!(o.suites[0].failed_checks(), vec!["bad"]);
        assert!(!Outcome::new("demo", 1, Config::default(), o.suites).pass);
    }
}
