use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::fit::DecayFit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    #[serde(flatten)]
    pub fit: DecayFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    /// Acceptance criteria this run serves.
    pub criteria: Vec<u32>,
    pub checks: Vec<Check>,
    pub fits: Vec<FitRecord>,
    pub values: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    /// Excluded from the determinism contract.
    pub wall_time_s: f64,
    pub version: String,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, criteria: Vec<u32>) -> Self {
        Self {
            config,
            criteria,
            checks: Vec::new(),
            fits: Vec::new(),
            values: BTreeMap::new(),
            artifacts: Vec::new(),
            wall_time_s: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn fit(&mut self, name: &str, fit: DecayFit) {
        self.fits.push(FitRecord {
            name: name.to_string(),
            fit,
        });
    }

    pub fn value(&mut self, name: &str, v: f64) {
        self.values.insert(name.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}
