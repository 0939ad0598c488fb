use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::output::Table;

/// Summary of one experiment run: what ran, with which settings and seed,
/// the headline numbers and every emitted table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub kind: String,
    pub seed: u64,
    /// Settings snapshot. The library stores the pipeline's own parameters;
    /// the CLI replaces it with the fully resolved run configuration.
    pub config: Value,
    pub summary: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub duration_s: f64,
}

impl ExperimentRecord {
    pub(crate) fn new(kind: &str, seed: u64, config: &impl Serialize) -> Result<Self> {
        Ok(ExperimentRecord {
            kind: kind.to_string(),
            seed,
            config: serde_json::to_value(config)?,
            summary: BTreeMap::new(),
            tables: Vec::new(),
            duration_s: 0.0,
        })
    }

    pub(crate) fn finish(mut self, started: Instant) -> Self {
        self.duration_s = started.elapsed().as_secs_f64();
        self
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.insert(key.to_string(), v);
    }

    /// Numeric summary entry.
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
