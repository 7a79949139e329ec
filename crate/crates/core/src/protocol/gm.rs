use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore};

use super::message::{
    sealed_message, Announce, CredentialUpdate, HandoverRequest, MessageKind,
};
use super::{
    encode_share, key_context, stage, Address, ConfirmResult, Credential, GroupConfig,
    GroupPublicParams, ProtocolMessage, Verdict, XRange,
};
use crate::algebra::{CurveParams, FieldElement};
use crate::cryptoprims::{encrypt, hash, kdf, kdf_from_secret};
use crate::error::{Error, Result};
use crate::ids::{GroupId, MemberId};
use crate::pairing::PairingEngine;
use crate::sss::{issue_share, sample_polynomial, MasterPolynomial};

/// Group manager state. Holds the master polynomial and never shares it except with other
/// GMs through [`exchange_polynomials`].
#[derive(Debug)]
pub struct GmState {
    group_id: GroupId,
    poly: MasterPolynomial,
    roster: BTreeMap<MemberId, Credential>,
    params: GroupPublicParams,
    epoch: u64,
    peer_polynomials: BTreeMap<GroupId, MasterPolynomial>,
    x_range: XRange,
    cursor: u64,
}

pub fn gm_initialize<R: RngCore>(
    config: &GroupConfig,
    curve: CurveParams,
    rng: &mut R,
) -> Result<(GmState, GroupPublicParams, Vec<Credential>)> {
    let GroupConfig { group_id, threshold: t, size: n, x_range, secret } = *config;
    if t == 0 || t > n {
        return Err(Error::InvalidThreshold(format!("need 1 ≤ t ≤ n, got t = {t}, n = {n}")));
    }
    x_range.validate(group_id, curve.order())?;
    if n as u64 > x_range.capacity {
        return Err(Error::CapacityExceeded(group_id.0));
    }
    let pairing = PairingEngine::new(curve)?;
    let fr = curve.scalar_field();
    let s = match secret {
        Some(s) => fr.element(s),
        None => fr.element(rng.gen_range(1..curve.order())),
    };
    let poly = sample_polynomial(t, s, rng)?;
    let params = GroupPublicParams {
        group_id,
        curve,
        pairing,
        generator: curve.generator(),
        q: curve.mul_generator(&s),
        secret_digest: hash(&s.to_bytes()),
        threshold: t,
        epoch: 0,
    };
    let mut gm = GmState {
        group_id,
        poly,
        roster: BTreeMap::new(),
        params: params.clone(),
        epoch: 0,
        peer_polynomials: BTreeMap::new(),
        x_range,
        cursor: 0,
    };
    let ids: Vec<MemberId> = (1..=n).map(|k| MemberId::for_member(group_id, k)).collect();
    let credentials = gm.issue_roster(&ids)?;
    Ok((gm, params, credentials))
}

/// Each GM learns the other's polynomial (modelled as a trusted out-of-band channel).
pub fn exchange_polynomials(a: &mut GmState, b: &mut GmState) {
    a.peer_polynomials.insert(b.group_id, b.poly.clone());
    b.peer_polynomials.insert(a.group_id, a.poly.clone());
}

impl GmState {
    pub fn group_id(&self) -> GroupId {
        self.group_id
    }

    pub fn address(&self) -> Address {
        Address::Gm(self.group_id)
    }

    pub fn params(&self) -> &GroupPublicParams {
        &self.params
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// The current master secret `s`.
    pub fn secret(&self) -> FieldElement {
        self.poly.secret()
    }

    pub fn roster(&self) -> &BTreeMap<MemberId, Credential> {
        &self.roster
    }

    pub fn x_range(&self) -> XRange {
        self.x_range
    }

    pub fn has_roaming_agreement(&self, group: GroupId) -> bool {
        self.peer_polynomials.contains_key(&group)
    }

    fn issue_roster(&mut self, ids: &[MemberId]) -> Result<Vec<Credential>> {
        let fr = self.params.curve.scalar_field();
        let mut roster = BTreeMap::new();
        let mut issued = Vec::with_capacity(ids.len());
        for id in ids {
            let x = self.x_range.start + self.cursor;
            self.cursor = (self.cursor + 1) % self.x_range.capacity;
            let share = issue_share(&self.poly, fr.element(x))?;
            let credential = Credential { share, id: id.clone(), group: self.group_id, epoch: self.epoch };
            roster.insert(id.clone(), credential.clone());
            issued.push(credential);
        }
        self.roster = roster;
        Ok(issued)
    }

    fn expected_point(&self, credential: &Credential) -> crate::algebra::CurvePoint {
        self.params.curve.mul_generator(&credential.share.y)
    }

    /// Checks every announce against `f(x_i)·P`. The first announce per id is judged; later
    /// ones are marked `Duplicate` and ignored. Accepted iff every judged announce is valid
    /// and at least `t` are.
    pub fn confirm(&self, announces: &[ProtocolMessage]) -> ConfirmResult {
        let mut seen = BTreeSet::new();
        let mut verdicts = Vec::with_capacity(announces.len());
        for msg in announces {
            let Ok(announce) = Announce::decode(msg, &self.params.curve) else {
                let id = msg.sender_member().cloned().unwrap_or_else(|_| {
                    MemberId::new(msg.sender.to_string()).expect("address renders printable")
                });
                verdicts.push((id, Verdict::Malformed));
                continue;
            };
            let id = announce.id.clone();
            if !seen.insert(id.clone()) {
                verdicts.push((id, Verdict::Duplicate));
                continue;
            }
            let verdict = match self.roster.get(&id) {
                None => Verdict::UnknownMember,
                Some(_) if msg.epoch != self.epoch => Verdict::Stale,
                Some(c) if c.share.x != announce.x || self.expected_point(c) != announce.point => {
                    Verdict::Forged
                }
                Some(_) => Verdict::Valid,
            };
            verdicts.push((id, verdict));
        }
        let judged: Vec<Verdict> =
            verdicts.iter().map(|(_, v)| *v).filter(|v| *v != Verdict::Duplicate).collect();
        let valid = judged.iter().filter(|v| **v == Verdict::Valid).count();
        let accepted = valid == judged.len() && valid >= self.params.threshold;
        ConfirmResult { accepted, verdicts }
    }

    /// Samples a new polynomial, reissues every credential encrypted under the old master
    /// secret, and advances the epoch. Returns the new public parameters and one
    /// `CredentialUpdate` per member.
    pub fn refresh_credentials<R: RngCore>(
        &mut self,
        group_key_confirmed: bool,
        rng: &mut R,
    ) -> Result<(GroupPublicParams, Vec<ProtocolMessage>)> {
        if !group_key_confirmed {
            return Err(Error::MissingGroupKey);
        }
        let old_secret = self.poly.secret();
        let fr = self.params.curve.scalar_field();
        let s_new = fr.element(rng.gen_range(1..self.params.curve.order()));
        self.poly = sample_polynomial(self.params.threshold, s_new, rng)?;
        self.epoch += 1;
        self.params.q = self.params.curve.mul_generator(&s_new);
        self.params.secret_digest = hash(&s_new.to_bytes());
        self.params.epoch = self.epoch;
        let ids: Vec<MemberId> = self.roster.keys().cloned().collect();
        let credentials = self.issue_roster(&ids)?;
        let messages = credentials
            .iter()
            .map(|c| {
                let ctx = key_context(stage::REFRESH, c.id.as_str(), &self.address().to_string());
                let key = kdf_from_secret(&old_secret, &ctx);
                CredentialUpdate {
                    group: self.group_id,
                    epoch: self.epoch,
                    ciphertext: encrypt(&key, &encode_share(&c.share), rng),
                }
                .into_message(self.address(), Address::Member(c.id.clone()), self.epoch)
            })
            .collect();
        Ok((self.params.clone(), messages))
    }

    /// Serves a `HandoverRequestGm`.
    ///
    /// If this GM hosts `target`, the visitor's point is checked against its home
    /// polynomial and the master secret is returned under `kdf(e(s·f(x_i)P, Q))`
    /// (a `HandoverGrant`). If this GM is the visitor's home and `target` is a partner group,
    /// the visitor is checked against this group's polynomial and receives `g(x_i)` for the
    /// target group as a `CredentialUpdate` under `kdf(e(s·f(x_i)P, Q))`.
    pub fn handle_handover_request<R: RngCore>(
        &self,
        msg: &ProtocolMessage,
        rng: &mut R,
    ) -> Result<ProtocolMessage> {
        if msg.kind != MessageKind::HandoverRequestGm {
            return Err(Error::MalformedPayload(format!("{} is not a GM hand-over request", msg.kind)));
        }
        let visitor = msg.sender_member()?.clone();
        let request = HandoverRequest::decode(msg, &self.params.curve)?;
        let curve = &self.params.curve;
        let derive_key = |stage_name: &str| -> Result<_> {
            let z = self.params.pairing.pair(
                &request.point.scalar_mul(self.poly.secret().value() as u128),
                &self.params.q,
            )?;
            Ok(kdf(&z, &key_context(stage_name, visitor.as_str(), &self.address().to_string())))
        };
        if request.target == self.group_id && request.home != self.group_id {
            let home_poly = self
                .peer_polynomials
                .get(&request.home)
                .ok_or(Error::NoRoamingAgreement(request.home.0))?;
            if curve.mul_generator(&home_poly.evaluate(&request.x)?) != request.point {
                return Err(Error::HandoverRejected);
            }
            let key = derive_key(stage::HANDOVER_GM)?;
            let sealed = encrypt(&key, &self.poly.secret().to_bytes(), rng);
            return Ok(sealed_message(
                MessageKind::HandoverGrant,
                self.address(),
                Address::Member(visitor),
                self.epoch,
                &sealed,
            ));
        }
        if request.home == self.group_id && request.target != self.group_id {
            let member = self.roster.get(&visitor).ok_or_else(|| Error::UnknownMember(visitor.to_string()))?;
            if member.share.x != request.x || self.expected_point(member) != request.point {
                return Err(Error::HandoverRejected);
            }
            let target_poly = self
                .peer_polynomials
                .get(&request.target)
                .ok_or(Error::NoRoamingAgreement(request.target.0))?;
            let roaming = issue_share(target_poly, request.x)?;
            let key = derive_key(stage::GM_CHANNEL)?;
            return Ok(CredentialUpdate {
                group: request.target,
                epoch: self.epoch,
                ciphertext: encrypt(&key, &encode_share(&roaming), rng),
            }
            .into_message(self.address(), Address::Member(visitor), self.epoch));
        }
        Err(Error::NoRoamingAgreement(request.home.0))
    }
}
