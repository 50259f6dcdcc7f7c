//! Report records and file emission.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

/// A named PASS/FAIL verdict with free-form details.
#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl Suite {
    pub fn new(name: impl Into<String>, pass: bool, detail: Value) -> Self {
        Self { name: name.into(), pass, detail }
    }
}

/// An in-memory CSV file.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub bytes: Vec<u8>,
}

impl Table {
    /// Serializes flat records; the header comes from the field names.
    pub fn from_records<R: Serialize>(file: &str, rows: &[R]) -> anyhow::Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        Ok(Self { file: file.into(), bytes: w.into_inner()? })
    }

    /// Writes an explicit header and rows of numbers. Empty cells stand for
    /// missing values.
    pub fn from_rows(file: &str, header: &[String], rows: &[Vec<Option<String>>]) -> anyhow::Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|c| c.as_deref().unwrap_or("")))?;
        }
        Ok(Self { file: file.into(), bytes: w.into_inner()? })
    }
}

/// Everything one subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub suites: Vec<Suite>,
    /// Command-specific JSON payload.
    pub data: Value,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), suites: Vec::new(), data: json!({}), tables: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.suites.iter().all(|s| s.pass)
    }

    pub fn push(&mut self, name: impl Into<String>, pass: bool, detail: Value) {
        self.suites.push(Suite::new(name, pass, detail));
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> anyhow::Result<()> {
        self.data[key] = serde_json::to_value(value)?;
        Ok(())
    }

    /// The JSON report: command, seed, inline config, verdicts and data.
    pub fn report(&self, config: &Value, seed: u64) -> Value {
        json!({
            "command": self.command,
            "seed": seed,
            "config": config,
            "pass": self.pass(),
            "suites": self.suites,
            "data": self.data,
        })
    }

    pub fn write(&self, dir: &Path, config: &Value, seed: u64, json_name: Option<&str>, csv_name: Option<&str>) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (i, t) in self.tables.iter().enumerate() {
            let name = if i == 0 { csv_name.unwrap_or(&t.file) } else { &t.file };
            let path = dir.join(name);
            std::fs::write(&path, &t.bytes).with_context(|| format!("cannot write {}", path.display()))?;
        }
        let default_json = format!("{}.json", self.command);
        let path = dir.join(json_name.unwrap_or(&default_json));
        let text = serde_json::to_string_pretty(&self.report(config, seed))? + "\n";
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    /// One line per suite, for the terminal.
    pub fn summary_lines(&self) -> Vec<String> {
        self.suites
            .iter()
            .map(|s| format!("{:<4} {}/{}", if s.pass { "PASS" } else { "FAIL" }, self.command, s.name))
            .collect()
    }
}

pub fn num(x: f64) -> Option<String> {
    Some(x.to_string())
}
