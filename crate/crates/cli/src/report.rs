//! Report records and atomic, deterministic report files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub requirement: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), passed: value <= limit, value, requirement: format!("<= {limit:e}") }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            passed: (value - target).abs() <= tol,
            value,
            requirement: format!("{target} +/- {tol:e}"),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool, value: f64, requirement: impl Into<String>) -> Self {
        Check { name: name.into(), passed, value, requirement: requirement.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub details: BTreeMap<String, serde_json::Value>,
    /// Extra CSV table, written instead of the checks table in CSV mode.
    #[serde(skip)]
    pub table: Option<String>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Report {
            command: config.command.name().into(),
            seed: config.seed,
            passed: true,
            config: config.clone(),
            checks: Vec::new(),
            details: BTreeMap::new(),
            table: None,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> Result<(), CliError> {
        self.details.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn checks_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "passed", "value", "requirement"]).map_err(csv_err)?;
        for c in &self.checks {
            w.write_record([c.name.clone(), c.passed.to_string(), c.value.to_string(), c.requirement.clone()])
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Writes `<command>-<seed>.json` (always) and `<command>-<seed>.csv` in
    /// CSV mode, plus `<command>-<seed>-failures.json` when a check failed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let stem = format!("{}-{}", self.command, self.seed);
        let mut written = vec![write_atomic(dir, &format!("{stem}.json"), &(serde_json::to_string_pretty(self)? + "\n"))?];
        if self.config.format == Format::Csv {
            let table = match &self.table {
                Some(t) => t.clone(),
                None => self.checks_csv()?,
            };
            written.push(write_atomic(dir, &format!("{stem}.csv"), &table)?);
        }
        if !self.passed {
            let manifest = serde_json::json!({
                "command": self.command,
                "seed": self.seed,
                "failures": self.failures(),
            });
            written.push(write_atomic(dir, &format!("{stem}-failures.json"), &(serde_json::to_string_pretty(&manifest)? + "\n"))?);
        }
        Ok(written)
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Write to a temporary file in `dir`, then rename over `name`.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(io(&tmp))?;
    fs::rename(&tmp, &target).map_err(io(&target))?;
    Ok(target)
}
