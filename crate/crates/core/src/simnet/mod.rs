//! Deterministic in-memory network: role state machines exchange messages over a [`Bus`]
//! that logs every delivery and lets an adversary drop, modify or inject traffic.

pub mod adversary;
pub mod analysis;
mod bus;
mod config;
mod scenarios;

use std::collections::BTreeMap;

use serde::Serialize;

pub use bus::{Adversary, Bus, Disposition, NoAdversary, SimEvent, Transcript};
pub use config::{AdversarySpec, ConfirmVariant, GroupSpec, MitmMode, ScenarioId, SimConfig};

use crate::costmodel::CostLedger;
use crate::error::Result;

/// Result of one scenario run. `passed` holds iff every listed property holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioVerdict {
    pub scenario: String,
    pub seed: u64,
    pub passed: bool,
    pub outcome: String,
    pub properties: BTreeMap<String, bool>,
    pub observations: BTreeMap<String, serde_json::Value>,
    pub costs: BTreeMap<String, CostLedger>,
    pub notes: Vec<String>,
}

impl ScenarioVerdict {
    pub fn property(&self, name: &str) -> Option<bool> {
        self.properties.get(name).copied()
    }

    pub fn observation(&self, name: &str) -> Option<&serde_json::Value> {
        self.observations.get(name)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("verdict serializes");
        out.push('\n');
        out
    }
}

/// Runs the scenario named in `config`.
pub fn run_scenario(config: &SimConfig) -> Result<(Transcript, ScenarioVerdict)> {
    let id = config.scenario_id()?;
    let run = scenarios::run(id, config)?;
    let passed = !run.report.properties.is_empty() && run.report.properties.values().all(|v| *v);
    let verdict = ScenarioVerdict {
        scenario: id.as_str().to_string(),
        seed: config.seed,
        passed,
        outcome: run.report.outcome,
        properties: run.report.properties,
        observations: run.report.observations,
        costs: run.costs,
        notes: run.report.notes,
    };
    Ok((run.transcript, verdict))
}
