use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::algebra::Profile;
use crate::error::{Error, Result};
use crate::protocol::DEFAULT_RETRY_LIMIT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioId {
    HonestGmConfirm,
    HonestPeerConfirm,
    KeyAgreement,
    HandoverGm,
    HandoverPeer,
    RefreshCycle,
    Eavesdrop,
    Replay,
    Mitm,
    NodeCompromise,
    DosFlood,
    DosCorruptShare,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 12] = [
        ScenarioId::HonestGmConfirm,
        ScenarioId::HonestPeerConfirm,
        ScenarioId::KeyAgreement,
        ScenarioId::HandoverGm,
        ScenarioId::HandoverPeer,
        ScenarioId::RefreshCycle,
        ScenarioId::Eavesdrop,
        ScenarioId::Replay,
        ScenarioId::Mitm,
        ScenarioId::NodeCompromise,
        ScenarioId::DosFlood,
        ScenarioId::DosCorruptShare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::HonestGmConfirm => "honest-gm-confirm",
            ScenarioId::HonestPeerConfirm => "honest-peer-confirm",
            ScenarioId::KeyAgreement => "key-agreement",
            ScenarioId::HandoverGm => "handover-gm",
            ScenarioId::HandoverPeer => "handover-peer",
            ScenarioId::RefreshCycle => "refresh-cycle",
            ScenarioId::Eavesdrop => "eavesdrop",
            ScenarioId::Replay => "replay",
            ScenarioId::Mitm => "mitm",
            ScenarioId::NodeCompromise => "node-compromise",
            ScenarioId::DosFlood => "dos-flood",
            ScenarioId::DosCorruptShare => "dos-corrupt-share",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfirmVariant {
    Gm,
    #[default]
    Peer,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MitmMode {
    #[default]
    Passive,
    Substitute,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub id: u32,
    pub t: usize,
    pub n: usize,
    /// First x value; defaults to a disjoint block per group.
    pub x_offset: Option<u64>,
    pub capacity: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    /// Informational; the scenario decides which adversary runs.
    pub kind: Option<String>,
    /// Member ids the adversary focuses on.
    #[serde(default)]
    pub targets: Vec<String>,
    /// Replay: refresh credentials between the capture and the replay.
    #[serde(default)]
    pub refresh: bool,
    /// Replay: inject within the capture round, ahead of the genuine announce.
    #[serde(default)]
    pub race: bool,
    #[serde(default)]
    pub mode: MitmMode,
    #[serde(default = "default_flood")]
    pub flood_per_sender: u64,
    #[serde(default = "default_budget")]
    pub budget_per_member: u64,
}

fn default_flood() -> u64 {
    3
}

fn default_budget() -> u64 {
    4
}

impl Default for AdversarySpec {
    fn default() -> Self {
        Self {
            kind: None,
            targets: Vec::new(),
            refresh: false,
            race: false,
            mode: MitmMode::default(),
            flood_per_sender: default_flood(),
            budget_per_member: default_budget(),
        }
    }
}

fn default_profile() -> Profile {
    Profile::Demo
}

fn default_retry() -> u32 {
    DEFAULT_RETRY_LIMIT
}

/// Everything a run depends on. Equal configs give byte-identical outputs.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub scenario: String,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    #[serde(default = "default_retry")]
    pub retry_limit: u32,
    #[serde(rename = "group")]
    pub groups: Vec<GroupSpec>,
    /// Members of the first group taking part (m); defaults to all n.
    pub participants: Option<usize>,
    #[serde(default)]
    pub confirm: ConfirmVariant,
    /// Peer-led hand-over: host-group points the host member uses, its own included.
    pub host_announces: Option<usize>,
    /// Hand-over: the visitor guesses its share instead of holding a real one.
    #[serde(default)]
    pub forged_visitor: bool,
    pub adversary: Option<AdversarySpec>,
}

impl SimConfig {
    pub fn scenario_id(&self) -> Result<ScenarioId> {
        self.scenario.parse()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Minimal config for `scenario` with one group.
    pub fn single_group(scenario: ScenarioId, seed: u64, t: usize, n: usize) -> Self {
        Self {
            seed,
            scenario: scenario.as_str().to_string(),
            profile: default_profile(),
            retry_limit: default_retry(),
            groups: vec![GroupSpec { id: 1, t, n, x_offset: None, capacity: None }],
            participants: None,
            confirm: ConfirmVariant::default(),
            host_announces: None,
            forged_visitor: false,
            adversary: None,
        }
    }

    pub fn adversary_spec(&self) -> AdversarySpec {
        self.adversary.clone().unwrap_or_default()
    }
}
