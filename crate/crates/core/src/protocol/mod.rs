//! Group manager and member role state machines.
//!
//! A group manager (GM) samples a master polynomial and hands each member `(x_i, f(x_i))`.
//! Members prove membership by broadcasting `f(x_i)·P`; the GM checks each point
//! individually, while any member can check the aggregate `Σ λ_i f(x_i)·P = Q`. Pairwise keys
//! come from `e(y_i y_j P, Q)`, the master secret is recovered by exchanging encrypted shares,
//! and members roam between groups whose GMs have exchanged polynomials.

mod driver;
mod gm;
mod member;
pub mod message;

pub use driver::{
    broadcast_announces, run_gm_confirmation, run_group_key_agreement, run_pairwise_keys,
    run_peer_confirmation, Channel, DirectChannel,
};
pub use gm::{exchange_polynomials, gm_initialize, GmState};
pub use member::{peer_confirm, MemberState};
pub use message::{Address, ConfirmResult, MessageKind, ProtocolMessage, Verdict};

use crate::algebra::{CurveParams, CurvePoint, FieldElement};
use crate::cryptoprims::hash;
use crate::error::{Error, Result};
use crate::ids::{GroupId, MemberId};
use crate::pairing::PairingEngine;
use crate::sss::Share;

pub const DEFAULT_RETRY_LIMIT: u32 = 3;

/// What a GM publishes once per epoch.
#[derive(Clone, Debug)]
pub struct GroupPublicParams {
    pub group_id: GroupId,
    pub curve: CurveParams,
    pub pairing: PairingEngine,
    pub generator: CurvePoint,
    /// `Q = s·P`.
    pub q: CurvePoint,
    /// `H(encode(s))`.
    pub secret_digest: [u8; 32],
    pub threshold: usize,
    pub epoch: u64,
}

impl GroupPublicParams {
    pub fn digest_matches(&self, candidate: &FieldElement) -> bool {
        hash(&candidate.to_bytes()) == self.secret_digest
    }
}

/// A member's private credential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Credential {
    pub share: Share,
    pub id: MemberId,
    pub group: GroupId,
    pub epoch: u64,
}

/// The block of x values a GM may hand out: `start, start + 1, …, start + capacity − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XRange {
    pub start: u64,
    pub capacity: u64,
}

impl XRange {
    /// Disjoint ranges: group number `index` (0-based) gets `[1 + index·capacity, …]`.
    pub fn disjoint(index: u64, capacity: u64) -> Self {
        Self { start: 1 + index * capacity, capacity }
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= self.start && x < self.start + self.capacity
    }

    fn validate(&self, group: GroupId, order: u64) -> Result<()> {
        if self.start == 0 || self.capacity == 0 || self.start.saturating_add(self.capacity) > order {
            return Err(Error::CapacityExceeded(group.0));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GroupConfig {
    pub group_id: GroupId,
    pub threshold: usize,
    pub size: usize,
    pub x_range: XRange,
    /// Fixed master secret; random when `None`.
    pub secret: Option<u64>,
}

/// KDF context `stage ‖ 0 ‖ min(a, b) ‖ 0 ‖ max(a, b)`; symmetric in the two parties.
pub(crate) fn key_context(stage: &str, a: &str, b: &str) -> Vec<u8> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut ctx = Vec::with_capacity(stage.len() + lo.len() + hi.len() + 2);
    ctx.extend_from_slice(stage.as_bytes());
    ctx.push(0);
    ctx.extend_from_slice(lo.as_bytes());
    ctx.push(0);
    ctx.extend_from_slice(hi.as_bytes());
    ctx
}

pub(crate) mod stage {
    pub const PAIRWISE: &str = "pairwise";
    pub const REFRESH: &str = "refresh";
    pub const GM_CHANNEL: &str = "gm-channel";
    pub const HANDOVER_GM: &str = "handover-gm";
    pub const HANDOVER_PEER: &str = "handover-peer";
}

/// `x ‖ y` at scalar width.
pub(crate) fn encode_share(share: &Share) -> Vec<u8> {
    let mut out = share.x.to_bytes();
    out.extend(share.y.to_bytes());
    out
}

pub(crate) fn decode_share(curve: &CurveParams, bytes: &[u8]) -> Result<Share> {
    let fr = curve.scalar_field();
    let w = fr.byte_len();
    if bytes.len() != 2 * w {
        return Err(Error::MalformedPayload("share has wrong width".into()));
    }
    Ok(Share { x: fr.decode(&bytes[..w])?, y: fr.decode(&bytes[w..])? })
}
