//! Round drivers that move messages between role state machines through a [`Channel`].

use rand::RngCore;

use super::{Address, ConfirmResult, GmState, MemberState, ProtocolMessage};
use crate::algebra::FieldElement;
use crate::error::{Error, Result};

/// Carries one message to one recipient and returns what that recipient actually receives
/// (nothing, the message, a modified copy, or extra injected messages).
pub trait Channel {
    fn carry(&mut self, msg: ProtocolMessage, to: &Address) -> Vec<ProtocolMessage>;
}

/// Lossless channel.
#[derive(Debug, Default)]
pub struct DirectChannel;

impl Channel for DirectChannel {
    fn carry(&mut self, msg: ProtocolMessage, _to: &Address) -> Vec<ProtocolMessage> {
        vec![msg]
    }
}

/// Every member announces to every other member and to its GM. Returns the announces the GM
/// received, in delivery order.
pub fn broadcast_announces(members: &mut [MemberState], channel: &mut dyn Channel) -> Result<Vec<ProtocolMessage>> {
    let Some(first) = members.first() else {
        return Ok(Vec::new());
    };
    let gm = Address::Gm(first.group_id());
    let mut at_gm = Vec::new();
    for i in 0..members.len() {
        let msg = members[i].announce()?;
        for j in 0..members.len() {
            if i == j {
                continue;
            }
            let to = members[j].address();
            for delivered in channel.carry(msg.clone(), &to) {
                // Stale or malformed announces are simply not recorded.
                let _ = members[j].observe_announce(&delivered);
            }
        }
        at_gm.extend(channel.carry(msg, &gm));
    }
    Ok(at_gm)
}

fn publish_result(result: &ConfirmResult, sender: Address, epoch: u64, members: &[MemberState], channel: &mut dyn Channel) {
    let msg = result.into_message(sender, epoch);
    for m in members {
        channel.carry(msg.clone(), &m.address());
    }
}

/// GM-led confirmation: the GM checks each announce against its polynomial.
pub fn run_gm_confirmation(gm: &GmState, members: &mut [MemberState], channel: &mut dyn Channel) -> Result<ConfirmResult> {
    let announces = broadcast_announces(members, channel)?;
    let result = gm.confirm(&announces);
    publish_result(&result, gm.address(), gm.epoch(), members, channel);
    Ok(result)
}

/// Peer-led confirmation with `members[confirmer]` as the confirmation point.
pub fn run_peer_confirmation(
    members: &mut [MemberState],
    confirmer: usize,
    channel: &mut dyn Channel,
) -> Result<ConfirmResult> {
    if confirmer >= members.len() {
        return Err(Error::InvalidOperand("confirmer index out of range"));
    }
    broadcast_announces(members, channel)?;
    let result = members[confirmer].confirm_peers()?;
    let sender = members[confirmer].address();
    let epoch = members[confirmer].params().epoch;
    publish_result(&result, sender, epoch, members, channel);
    Ok(result)
}

/// Every ordered pair derives its pairwise key from the peer's observed announce.
pub fn run_pairwise_keys(members: &mut [MemberState]) -> Result<()> {
    let ids: Vec<_> = members.iter().map(|m| m.id().clone()).collect();
    for member in members.iter_mut() {
        for peer in &ids {
            if peer == member.id() {
                continue;
            }
            let share = member
                .known_public_shares()
                .get(peer)
                .cloned()
                .ok_or_else(|| Error::UnknownMember(peer.to_string()))?;
            member.establish_pairwise_key(&share)?;
        }
    }
    Ok(())
}

/// Exchanges encrypted shares and recovers `s`, repeating up to `retry_limit` rounds while
/// any member fails. Returns each member's final outcome.
pub fn run_group_key_agreement<R: RngCore>(
    members: &mut [MemberState],
    channel: &mut dyn Channel,
    retry_limit: u32,
    rng: &mut R,
) -> Vec<Result<FieldElement>> {
    let mut outcomes: Vec<Result<FieldElement>> = vec![Err(Error::KeyAgreementFailed); members.len()];
    for _ in 0..retry_limit.max(1) {
        for m in members.iter_mut() {
            m.reset_key_agreement();
        }
        for i in 0..members.len() {
            for j in 0..members.len() {
                if i == j {
                    continue;
                }
                let peer = members[j].id().clone();
                let Ok(msg) = members[i].enc_share_for(&peer, rng) else { continue };
                for delivered in channel.carry(msg, &Address::Member(peer)) {
                    // A share that fails authentication is excluded.
                    let _ = members[j].receive_enc_share(&delivered);
                }
            }
        }
        outcomes = members.iter_mut().map(MemberState::recover_group_key).collect();
        if outcomes.iter().all(Result::is_ok) {
            break;
        }
    }
    outcomes
}
