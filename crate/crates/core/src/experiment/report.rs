//! The `report.json` envelope.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::config::ExperimentConfig;
use super::suite::Check;
use crate::{Error, Result};

pub const REPORT_SCHEMA: &str = "meandimlab-report/v1";
pub const REPORT_FILE: &str = "report.json";

/// One line per check, `PASS id: statement (checked, violations)`.
pub fn summary_lines(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {} ({} checked, {} violations)",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.statement,
                c.checked,
                c.violations
            )
        })
        .collect()
}

/// A command's results. Every field except `timestamp` is a function of the
/// configuration; object keys are written in sorted order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub lines: Vec<String>,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Report {
    pub fn new(command: &str, config: &ExperimentConfig, passed: bool, checks: &[Check], results: impl Serialize) -> Result<Self> {
        let results = serde_json::to_value(results).map_err(|e| Error::Invariant {
            stage: "report".into(),
            detail: e.to_string(),
        })?;
        Ok(Self {
            schema: REPORT_SCHEMA.into(),
            command: command.into(),
            config: config.clone(),
            passed,
            lines: summary_lines(checks),
            results,
            timestamp: None,
        })
    }

    /// Seconds since the Unix epoch, the one nondeterministic field.
    pub fn stamped(mut self) -> Self {
        self.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Invariant {
            stage: "report".into(),
            detail: e.to_string(),
        })?;
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::Invariant {
            stage: "report".into(),
            detail: e.to_string(),
        })?;
        text.push('\n');
        Ok(text)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(REPORT_FILE);
        std::fs::write(&path, self.to_json()?).map_err(|e| Error::Invariant {
            stage: "report".into(),
            detail: format!("cannot write {}: {e}", path.display()),
        })
    }
}

/// `report.json` text with the timestamp removed, for comparing runs.
pub fn strip_timestamp(text: &str) -> Result<String> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("timestamp");
    }
    serde_json::to_string_pretty(&value).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_is_the_only_difference() {
        let cfg = ExperimentConfig::default();
        let mut c = Check::new("demo", "a statement");
        c.checked = 3;
        let a = Report::new("verify", &cfg, true, &[c.clone()], serde_json::json!({"z": 1, "a": [1.5]})).unwrap();
        let b = a.clone().stamped();
        assert_ne!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(
            strip_timestamp(&a.to_json().unwrap()).unwrap(),
            strip_timestamp(&b.to_json().unwrap()).unwrap()
        );
        assert!(a.to_json().unwrap().contains("PASS demo: a statement (3 checked, 0 violations)"));
    }
}
