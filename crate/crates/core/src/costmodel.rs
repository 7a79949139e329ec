//! Operation counting and the member-side cost comparison in T_mul,q units.
//!
//! One elliptic-curve scalar multiplication (T_EM) is weighted as 29 multiplications in a
//! 1024-bit field, each worth 41 multiplications in a 160-bit field. Hashes, symmetric
//! operations and raw field multiplications are counted but carry no weight.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MUL_P_PER_EM: u64 = 29;
pub const MUL_Q_PER_MUL_P: u64 = 41;
pub const MUL_Q_PER_EM: u64 = MUL_P_PER_EM * MUL_Q_PER_MUL_P;

/// Thread-local tallies bumped by the arithmetic and hash primitives.
pub mod meter {
    use std::cell::Cell;

    use super::CostCounters;

    thread_local! {
        static FIELD_MULS: Cell<u64> = const { Cell::new(0) };
        static HASHES: Cell<u64> = const { Cell::new(0) };
    }

    pub(crate) fn tick_field_mul() {
        FIELD_MULS.with(|c| c.set(c.get() + 1));
    }

    pub(crate) fn tick_hash() {
        HASHES.with(|c| c.set(c.get() + 1));
    }

    /// Captures the tallies at creation; `stop` returns the difference.
    #[derive(Debug)]
    pub struct Meter {
        field_muls: u64,
        hashes: u64,
    }

    impl Meter {
        pub fn start() -> Self {
            Self { field_muls: FIELD_MULS.with(Cell::get), hashes: HASHES.with(Cell::get) }
        }

        pub fn stop(self) -> CostCounters {
            CostCounters {
                field_mults: FIELD_MULS.with(Cell::get) - self.field_muls,
                hash_calls: HASHES.with(Cell::get) - self.hashes,
                ..CostCounters::default()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostCounters {
    pub ec_scalar_mults: u64,
    pub pairings: u64,
    pub field_mults: u64,
    pub hash_calls: u64,
}

impl CostCounters {
    /// Weighted cost; only scalar multiplications carry weight.
    pub fn to_mul_q(&self) -> u64 {
        self.ec_scalar_mults * MUL_Q_PER_EM
    }
}

impl AddAssign for CostCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.ec_scalar_mults += rhs.ec_scalar_mults;
        self.pairings += rhs.pairings;
        self.field_mults += rhs.field_mults;
        self.hash_calls += rhs.hash_calls;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Producing the member's own public share.
    Confirmation,
    /// Work done as the confirmation point for others.
    Verification,
    KeyAgreement,
    Handover,
    Refresh,
}

/// Per-phase counters owned by one role.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostLedger {
    phases: BTreeMap<Phase, CostCounters>,
}

impl CostLedger {
    pub fn charge(&mut self, phase: Phase, counters: CostCounters) {
        *self.phases.entry(phase).or_default() += counters;
    }

    pub fn phase(&self, phase: Phase) -> CostCounters {
        self.phases.get(&phase).copied().unwrap_or_default()
    }

    pub fn total(&self) -> CostCounters {
        let mut total = CostCounters::default();
        for c in self.phases.values() {
            total += *c;
        }
        total
    }

    pub fn reset(&mut self) {
        self.phases.clear();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Proposed,
    Chien,
    Harn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub scheme: Scheme,
    pub m: u64,
    pub cost: u64,
}

impl CostReport {
    pub fn for_scheme(scheme: Scheme, m: u64) -> Self {
        let cost = match scheme {
            Scheme::Proposed => member_cost_proposed(m),
            Scheme::Chien => member_cost_chien(m),
            Scheme::Harn => member_cost_harn(m),
        };
        Self { scheme, m, cost }
    }
}

/// One T_EM per member regardless of group size.
pub fn member_cost_proposed(_m: u64) -> u64 {
    MUL_Q_PER_EM
}

pub fn member_cost_chien(m: u64) -> u64 {
    7 * m + 6785
}

pub fn member_cost_harn(m: u64) -> u64 {
    45 * m + 1418
}

/// CSV `m,proposed,chien,harn` for `m` in `[m_min, m_max]` stepping by `step`, LF endings.
pub fn emit_comparison(m_min: u64, m_max: u64, step: u64) -> Result<String> {
    if step == 0 {
        return Err(Error::Config("step must be positive".into()));
    }
    if m_min > m_max {
        return Err(Error::Config(format!("m range inverted: {m_min} > {m_max}")));
    }
    let mut csv = String::from("m,proposed,chien,harn\n");
    let mut m = m_min;
    while m <= m_max {
        writeln!(
            csv,
            "{m},{},{},{}",
            member_cost_proposed(m),
            member_cost_chien(m),
            member_cost_harn(m)
        )
        .expect("writing to String");
        m = match m.checked_add(step) {
            Some(next) => next,
            None => break,
        };
    }
    Ok(csv)
}
