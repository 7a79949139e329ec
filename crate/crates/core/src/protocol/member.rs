use std::collections::BTreeMap;

use rand::RngCore;

use super::message::{
    open_sealed, sealed_message, Announce, CredentialUpdate, HandoverRequest, MessageKind,
    PeerGrant,
};
use super::{
    decode_share, encode_share, key_context, stage, Address, ConfirmResult, Credential,
    GroupPublicParams, ProtocolMessage, Verdict,
};
use crate::algebra::{CurvePoint, FieldElement};
use crate::costmodel::meter::Meter;
use crate::costmodel::{CostCounters, CostLedger, Phase};
use crate::cryptoprims::{decrypt, encrypt, kdf, kdf_from_secret, SymmetricKey};
use crate::error::{Error, Result};
use crate::ids::{GroupId, MemberId};
use crate::pairing::GtElement;
use crate::sss::{interpolate_in_exponent, interpolate_secret, PublicShare, Share};

/// Aggregate check `Σ λ_i·(f(x_i)·P) = Q`. All-or-nothing: on failure every announce is
/// `Unattributed`.
pub fn peer_confirm(params: &GroupPublicParams, shares: &[PublicShare]) -> Result<ConfirmResult> {
    if shares.len() < params.threshold {
        return Err(Error::InsufficientShares { needed: params.threshold, have: shares.len() });
    }
    let accepted = interpolate_in_exponent(&params.curve, shares)? == params.q;
    let verdict = if accepted { Verdict::Valid } else { Verdict::Unattributed };
    Ok(ConfirmResult { accepted, verdicts: shares.iter().map(|s| (s.id.clone(), verdict)).collect() })
}

/// One member's view of the protocol.
#[derive(Debug)]
pub struct MemberState {
    credential: Credential,
    params: GroupPublicParams,
    announce: Option<CurvePoint>,
    known_public_shares: BTreeMap<MemberId, PublicShare>,
    session_keys: BTreeMap<MemberId, SymmetricKey>,
    received_shares: BTreeMap<MemberId, Share>,
    group_key: Option<FieldElement>,
    /// Credentials `g(x_i)` for partner groups, issued by the home GM.
    roaming: BTreeMap<GroupId, Share>,
    /// Master secrets of host groups obtained by hand-over.
    foreign_keys: BTreeMap<GroupId, FieldElement>,
    costs: CostLedger,
}

impl MemberState {
    pub fn new(credential: Credential, params: GroupPublicParams) -> Self {
        Self {
            credential,
            params,
            announce: None,
            known_public_shares: BTreeMap::new(),
            session_keys: BTreeMap::new(),
            received_shares: BTreeMap::new(),
            group_key: None,
            roaming: BTreeMap::new(),
            foreign_keys: BTreeMap::new(),
            costs: CostLedger::default(),
        }
    }

    pub fn id(&self) -> &MemberId {
        &self.credential.id
    }

    pub fn address(&self) -> Address {
        Address::Member(self.credential.id.clone())
    }

    pub fn group_id(&self) -> GroupId {
        self.credential.group
    }

    pub fn credential(&self) -> &Credential {
        &self.credential
    }

    pub fn params(&self) -> &GroupPublicParams {
        &self.params
    }

    pub fn group_key(&self) -> Option<FieldElement> {
        self.group_key
    }

    pub fn foreign_key(&self, group: GroupId) -> Option<FieldElement> {
        self.foreign_keys.get(&group).copied()
    }

    pub fn costs(&self) -> &CostLedger {
        &self.costs
    }

    pub fn known_public_shares(&self) -> &BTreeMap<MemberId, PublicShare> {
        &self.known_public_shares
    }

    pub fn session_key(&self, peer: &MemberId) -> Option<&SymmetricKey> {
        self.session_keys.get(peer)
    }

    /// Runs `op`, charging `ems` scalar multiplications, `pairings` pairings and whatever
    /// field multiplications and hashes it performs to `phase`.
    fn charged<T>(&mut self, phase: Phase, ems: u64, pairings: u64, op: impl FnOnce(&Self) -> T) -> T {
        let meter = Meter::start();
        let out = op(self);
        let mut counters = meter.stop();
        counters += CostCounters { ec_scalar_mults: ems, pairings, ..CostCounters::default() };
        self.costs.charge(phase, counters);
        out
    }

    fn check_current(&self) -> Result<()> {
        if self.credential.epoch != self.params.epoch {
            return Err(Error::StaleCredential {
                credential: self.credential.epoch,
                current: self.params.epoch,
            });
        }
        Ok(())
    }

    /// `(x_i, f(x_i)·P, ID_i)`. Computed once per epoch.
    pub fn public_share(&mut self) -> Result<PublicShare> {
        self.check_current()?;
        let point = match self.announce {
            Some(point) => point,
            None => {
                let point = self.charged(Phase::Confirmation, 1, 0, |me| {
                    me.params.curve.mul_generator(&me.credential.share.y)
                });
                self.announce = Some(point);
                point
            }
        };
        Ok(PublicShare { x: self.credential.share.x, point, id: self.credential.id.clone() })
    }

    pub fn announce(&mut self) -> Result<ProtocolMessage> {
        let share = self.public_share()?;
        Ok(Announce { x: share.x, point: share.point, id: share.id }.into_message(self.params.epoch))
    }

    /// Records a peer's announce. The first announce per id is kept.
    pub fn observe_announce(&mut self, msg: &ProtocolMessage) -> Result<()> {
        if msg.epoch != self.params.epoch {
            return Err(Error::StaleCredential { credential: msg.epoch, current: self.params.epoch });
        }
        let announce = Announce::decode(msg, &self.params.curve)?;
        if announce.id != self.credential.id {
            self.known_public_shares.entry(announce.id.clone()).or_insert(PublicShare {
                x: announce.x,
                point: announce.point,
                id: announce.id,
            });
        }
        Ok(())
    }

    /// Acts as the confirmation point over its own share plus every observed announce.
    pub fn confirm_peers(&mut self) -> Result<ConfirmResult> {
        let mut shares = vec![self.public_share()?];
        shares.extend(self.known_public_shares.values().cloned());
        let ems = shares.len() as u64;
        self.charged(Phase::Verification, ems, 0, |me| peer_confirm(&me.params, &shares))
    }

    /// `K = kdf(e(y_i·(y_j·P), Q))`, bound to both ids.
    pub fn establish_pairwise_key(&mut self, peer: &PublicShare) -> Result<SymmetricKey> {
        let key = self.charged(Phase::KeyAgreement, 1, 1, |me| -> Result<SymmetricKey> {
            let z = me.shared_pairing(&peer.point, &me.params.q, me.credential.share.y)?;
            Ok(kdf(&z, &key_context(stage::PAIRWISE, me.id().as_str(), peer.id.as_str())))
        })?;
        self.session_keys.insert(peer.id.clone(), key.clone());
        Ok(key)
    }

    fn shared_pairing(&self, point: &CurvePoint, q: &CurvePoint, scalar: FieldElement) -> Result<GtElement> {
        if !self.params.curve.in_subgroup(point) {
            return Err(Error::NotInSubgroup);
        }
        self.params.pairing.pair(&point.scalar_mul(scalar.value() as u128), q)
    }

    /// `E_K[x_i ‖ f(x_i)]` for one peer.
    pub fn enc_share_for<R: RngCore>(&self, peer: &MemberId, rng: &mut R) -> Result<ProtocolMessage> {
        let key = self.session_keys.get(peer).ok_or_else(|| Error::MissingSessionKey(peer.to_string()))?;
        let ciphertext = encrypt(key, &encode_share(&self.credential.share), rng);
        Ok(sealed_message(
            MessageKind::EncShare,
            self.address(),
            Address::Member(peer.clone()),
            self.params.epoch,
            &ciphertext,
        ))
    }

    /// Decrypts a peer's share. A share whose `x` disagrees with the peer's announce is
    /// rejected.
    pub fn receive_enc_share(&mut self, msg: &ProtocolMessage) -> Result<()> {
        let sender = msg.sender_member()?.clone();
        let key = self.session_keys.get(&sender).ok_or_else(|| Error::MissingSessionKey(sender.to_string()))?;
        let plaintext = decrypt(key, &open_sealed(msg, MessageKind::EncShare)?)?;
        let share = decode_share(&self.params.curve, &plaintext)?;
        if let Some(known) = self.known_public_shares.get(&sender) {
            if known.x != share.x {
                return Err(Error::MalformedPayload(format!("share from {sender} has the wrong x")));
            }
        }
        self.received_shares.insert(sender, share);
        Ok(())
    }

    /// Interpolates `s'` from its own and the received shares and checks `H(s') = H(s)`.
    pub fn recover_group_key(&mut self) -> Result<FieldElement> {
        let mut shares = vec![self.credential.share];
        shares.extend(self.received_shares.values().copied());
        if shares.len() < self.params.threshold {
            return Err(Error::InsufficientShares { needed: self.params.threshold, have: shares.len() });
        }
        let candidate = self.charged(Phase::KeyAgreement, 0, 0, |_| interpolate_secret(&shares))?;
        if !self.params.digest_matches(&candidate) {
            return Err(Error::KeyAgreementFailed);
        }
        self.group_key = Some(candidate);
        Ok(candidate)
    }

    /// Drops received shares before a retried round.
    pub fn reset_key_agreement(&mut self) {
        self.received_shares.clear();
    }

    /// Installs a refreshed credential, decrypted with the current master secret.
    pub fn apply_credential_update(&mut self, msg: &ProtocolMessage, new_params: &GroupPublicParams) -> Result<()> {
        let s = self.group_key.ok_or(Error::MissingGroupKey)?;
        let update = CredentialUpdate::decode(msg)?;
        if update.group != self.credential.group || update.epoch != new_params.epoch {
            return Err(Error::MalformedPayload("credential update for another group or epoch".into()));
        }
        let gm = Address::Gm(self.credential.group).to_string();
        let key = kdf_from_secret(&s, &key_context(stage::REFRESH, self.id().as_str(), &gm));
        let share = self.charged(Phase::Refresh, 0, 0, |me| -> Result<Share> {
            decode_share(&me.params.curve, &decrypt(&key, &update.ciphertext)?)
        })?;
        self.credential.share = share;
        self.credential.epoch = update.epoch;
        self.params = new_params.clone();
        self.announce = None;
        self.known_public_shares.clear();
        self.session_keys.clear();
        self.received_shares.clear();
        self.group_key = None;
        Ok(())
    }

    /// `(x_i, f(x_i)·P₂)` to the host GM.
    pub fn handover_request_gm(&mut self, host: &GroupPublicParams) -> Result<ProtocolMessage> {
        self.check_current()?;
        let point = self.charged(Phase::Handover, 1, 0, |me| {
            host.generator.scalar_mul(me.credential.share.y.value() as u128)
        });
        Ok(HandoverRequest { x: self.credential.share.x, point, home: self.group_id(), target: host.group_id }
            .into_message(MessageKind::HandoverRequestGm, self.address(), Address::Gm(host.group_id), host.epoch))
    }

    /// Opens the host GM's grant with `kdf(e(f(x_i)·Q₂, Q₂))` and checks `H(s₂)`.
    pub fn accept_handover_grant(&mut self, msg: &ProtocolMessage, host: &GroupPublicParams) -> Result<FieldElement> {
        let ciphertext = open_sealed(msg, MessageKind::HandoverGrant)?;
        let gm = Address::Gm(host.group_id).to_string();
        let y = self.credential.share.y;
        let key = self.charged(Phase::Handover, 1, 1, |me| -> Result<SymmetricKey> {
            let z = me.shared_pairing(&host.q, &host.q, y)?;
            Ok(kdf(&z, &key_context(stage::HANDOVER_GM, me.id().as_str(), &gm)))
        })?;
        self.install_foreign_key(host, &decrypt(&key, &ciphertext)?)
    }

    fn install_foreign_key(&mut self, host: &GroupPublicParams, plaintext: &[u8]) -> Result<FieldElement> {
        let s2 = host.curve.scalar_field().decode(plaintext)?;
        if !host.digest_matches(&s2) {
            return Err(Error::KeyAgreementFailed);
        }
        self.foreign_keys.insert(host.group_id, s2);
        Ok(s2)
    }

    /// Asks the home GM for `g(x_i)` in `target`.
    pub fn request_roaming_credential(&mut self, target: GroupId) -> Result<ProtocolMessage> {
        let share = self.public_share()?;
        Ok(HandoverRequest { x: share.x, point: share.point, home: self.group_id(), target }.into_message(
            MessageKind::HandoverRequestGm,
            self.address(),
            Address::Gm(self.group_id()),
            self.params.epoch,
        ))
    }

    /// Opens the home GM's `CredentialUpdate` with `kdf(e(f(x_i)·Q₁, Q₁))`.
    pub fn accept_roaming_credential(&mut self, msg: &ProtocolMessage) -> Result<GroupId> {
        let update = CredentialUpdate::decode(msg)?;
        if msg.sender != Address::Gm(self.group_id()) || update.group == self.group_id() {
            return Err(Error::MalformedPayload("roaming credential must come from the home GM".into()));
        }
        let gm = Address::Gm(self.group_id()).to_string();
        let y = self.credential.share.y;
        let key = self.charged(Phase::Handover, 1, 1, |me| -> Result<SymmetricKey> {
            let z = me.shared_pairing(&me.params.q, &me.params.q, y)?;
            Ok(kdf(&z, &key_context(stage::GM_CHANNEL, me.id().as_str(), &gm)))
        })?;
        let share = decode_share(&self.params.curve, &decrypt(&key, &update.ciphertext)?)?;
        if share.x != self.credential.share.x {
            return Err(Error::MalformedPayload("roaming credential for another x".into()));
        }
        self.roaming.insert(update.group, share);
        Ok(update.group)
    }

    /// Installs a roaming share directly. Used to model forged visitors.
    pub fn set_roaming_share(&mut self, group: GroupId, share: Share) {
        self.roaming.insert(group, share);
    }

    /// `(x_i, g(x_i)·P₂)` to a host member.
    pub fn handover_request_peer(&mut self, host: &GroupPublicParams, to: &MemberId) -> Result<ProtocolMessage> {
        let share = *self.roaming.get(&host.group_id).ok_or(Error::NoRoamingAgreement(host.group_id.0))?;
        let point = self.charged(Phase::Handover, 1, 0, |_| host.generator.scalar_mul(share.y.value() as u128));
        Ok(HandoverRequest { x: share.x, point, home: self.group_id(), target: host.group_id }.into_message(
            MessageKind::HandoverRequestPeer,
            self.address(),
            Address::Member(to.clone()),
            host.epoch,
        ))
    }

    /// Host side of the peer-led hand-over: checks `Σ λ·g(x)P₂ = Q₂` over the host announces,
    /// its own share and the visitor's point, then sends `s₂` under `kdf(e(g(x_j)·g(x_i)P₂, Q₂))`.
    pub fn handle_handover_peer<R: RngCore>(
        &mut self,
        msg: &ProtocolMessage,
        host_announces: &[PublicShare],
        rng: &mut R,
    ) -> Result<ProtocolMessage> {
        let visitor = msg.sender_member()?.clone();
        if msg.kind != MessageKind::HandoverRequestPeer {
            return Err(Error::MalformedPayload(format!("{} is not a peer hand-over request", msg.kind)));
        }
        let request = HandoverRequest::decode(msg, &self.params.curve)?;
        if request.target != self.group_id() {
            return Err(Error::HandoverRejected);
        }
        let s2 = self.group_key.ok_or(Error::MissingGroupKey)?;
        let own = self.public_share()?;
        let mut points: Vec<PublicShare> =
            host_announces.iter().filter(|s| s.id != own.id && s.id != visitor).cloned().collect();
        points.push(own.clone());
        points.push(PublicShare { x: request.x, point: request.point, id: visitor.clone() });
        if points.len() < self.params.threshold {
            return Err(Error::InsufficientShares { needed: self.params.threshold, have: points.len() });
        }
        let ems = points.len() as u64;
        let combined = self.charged(Phase::Handover, ems, 0, |me| interpolate_in_exponent(&me.params.curve, &points))?;
        if combined != self.params.q {
            return Err(Error::HandoverRejected);
        }
        let y = self.credential.share.y;
        let key = self.charged(Phase::Handover, 1, 1, |me| -> Result<SymmetricKey> {
            let z = me.shared_pairing(&request.point, &me.params.q, y)?;
            Ok(kdf(&z, &key_context(stage::HANDOVER_PEER, visitor.as_str(), me.id().as_str())))
        })?;
        let ciphertext = encrypt(&key, &s2.to_bytes(), rng);
        Ok(PeerGrant { x: own.x, point: own.point, id: own.id, ciphertext }
            .into_message(Address::Member(visitor), self.params.epoch))
    }

    /// Opens a host member's grant with `kdf(e(g(x_i)·g(x_j)P₂, Q₂))` and checks `H(s₂)`.
    pub fn accept_peer_grant(&mut self, msg: &ProtocolMessage, host: &GroupPublicParams) -> Result<FieldElement> {
        let grant = PeerGrant::decode(msg, &host.curve)?;
        let share = *self.roaming.get(&host.group_id).ok_or(Error::NoRoamingAgreement(host.group_id.0))?;
        let key = self.charged(Phase::Handover, 1, 1, |me| -> Result<SymmetricKey> {
            let z = me.shared_pairing(&grant.point, &host.q, share.y)?;
            Ok(kdf(&z, &key_context(stage::HANDOVER_PEER, me.id().as_str(), grant.id.as_str())))
        })?;
        self.install_foreign_key(host, &decrypt(&key, &grant.ciphertext)?)
    }
}
