use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::adversary::{
    CompromiseAdversary, CorruptShareAdversary, FloodAdversary, ReplayAdversary, SubstitutionAdversary,
};
use super::analysis::{linear_strategy_search, public_candidate_search, toy_discrete_log};
use super::bus::{Adversary, Bus, NoAdversary, Transcript};
use super::config::{ConfirmVariant, MitmMode, ScenarioId, SimConfig};
use crate::algebra::{CurveParams, FieldElement};
use crate::costmodel::{CostLedger, Phase};
use crate::cryptoprims::{decrypt, kdf};
use crate::error::{Error, Result};
use crate::ids::{GroupId, MemberId};
use crate::protocol::message::{open_sealed, Announce};
use crate::protocol::{
    broadcast_announces, exchange_polynomials, gm_initialize, key_context, run_gm_confirmation,
    run_group_key_agreement, run_pairwise_keys, run_peer_confirmation, stage, Address, Channel,
    ConfirmResult, GmState, GroupConfig, MemberState, MessageKind, Verdict, XRange,
};
use crate::sss::Share;

/// Subgroups at most this large count as toy scale.
const TOY_ORDER: u64 = 64;
const LINEAR_INSTANCES: usize = 20;

#[derive(Default)]
pub(super) struct Report {
    pub outcome: String,
    pub properties: BTreeMap<String, bool>,
    pub observations: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
}

impl Report {
    fn prop(&mut self, name: &str, holds: bool) {
        self.properties.insert(name.to_string(), holds);
    }

    fn obs(&mut self, name: &str, value: impl Serialize) {
        self.observations.insert(name.to_string(), serde_json::to_value(value).expect("observation serializes"));
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

pub(super) struct Run {
    pub transcript: Transcript,
    pub report: Report,
    pub costs: BTreeMap<String, CostLedger>,
}

struct World {
    curve: CurveParams,
    rng: ChaCha20Rng,
    gms: Vec<GmState>,
    groups: Vec<Vec<MemberState>>,
}

fn build_world(config: &SimConfig) -> Result<World> {
    if config.groups.is_empty() {
        return Err(Error::Config("at least one [[group]] is required".into()));
    }
    let ids: BTreeSet<u32> = config.groups.iter().map(|g| g.id).collect();
    if ids.len() != config.groups.len() {
        return Err(Error::Config("group ids must be distinct".into()));
    }
    let curve = CurveParams::from_profile(config.profile);
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let default_capacity = ((curve.order() - 1) / config.groups.len() as u64).min(64);
    let mut gms = Vec::new();
    let mut groups = Vec::new();
    for (index, spec) in config.groups.iter().enumerate() {
        let capacity = spec.capacity.unwrap_or(default_capacity);
        let x_range = XRange { start: spec.x_offset.unwrap_or(1 + index as u64 * default_capacity), capacity };
        let group = GroupConfig { group_id: GroupId(spec.id), threshold: spec.t, size: spec.n, x_range, secret: None };
        let (gm, params, creds) = gm_initialize(&group, curve, &mut rng)?;
        groups.push(creds.into_iter().map(|c| MemberState::new(c, params.clone())).collect());
        gms.push(gm);
    }
    Ok(World { curve, rng, gms, groups })
}

impl World {
    /// The first `m` members of group 0 in a seeded delivery order.
    fn participants(&mut self, config: &SimConfig) -> Result<Vec<MemberState>> {
        let n = self.groups[0].len();
        let m = config.participants.unwrap_or(n);
        if m == 0 || m > n {
            return Err(Error::Config(format!("participants must be in 1..={n}, got {m}")));
        }
        let mut members: Vec<MemberState> = self.groups[0].drain(..m).collect();
        members.shuffle(&mut self.rng);
        Ok(members)
    }

    fn need_two_groups(&self) -> Result<()> {
        if self.gms.len() < 2 {
            return Err(Error::Config("hand-over scenarios need two [[group]] entries".into()));
        }
        Ok(())
    }
}

fn costs_of<'a>(members: impl IntoIterator<Item = &'a MemberState>) -> BTreeMap<String, CostLedger> {
    members.into_iter().map(|m| (m.id().to_string(), m.costs().clone())).collect()
}

fn one_em_each(members: &[MemberState]) -> bool {
    members.iter().all(|m| m.costs().phase(Phase::Confirmation).ec_scalar_mults == 1)
}

fn move_to_front(members: &mut [MemberState], id: &MemberId) -> Result<()> {
    let pos = members.iter().position(|m| m.id() == id).ok_or_else(|| Error::UnknownMember(id.to_string()))?;
    members[..=pos].rotate_right(1);
    Ok(())
}

fn target_or(config: &SimConfig, index: usize, fallback: &MemberId) -> Result<MemberId> {
    match config.adversary_spec().targets.get(index) {
        Some(t) => MemberId::new(t.clone()),
        None => Ok(fallback.clone()),
    }
}

fn confirm(
    variant: ConfirmVariant,
    gm: &GmState,
    members: &mut [MemberState],
    channel: &mut dyn Channel,
    report: &mut Report,
) -> Option<ConfirmResult> {
    let result = match variant {
        ConfirmVariant::Gm => run_gm_confirmation(gm, members, channel),
        ConfirmVariant::Peer => run_peer_confirmation(members, 0, channel),
    };
    match result {
        Ok(r) => Some(r),
        Err(e) => {
            report.note(format!("confirmation failed: {e}"));
            None
        }
    }
}

/// Pairwise keys followed by group key agreement.
fn agree(
    members: &mut [MemberState],
    channel: &mut dyn Channel,
    retry_limit: u32,
    rng: &mut ChaCha20Rng,
) -> Vec<Result<FieldElement>> {
    if let Err(e) = run_pairwise_keys(members) {
        return vec![Err(e); members.len()];
    }
    run_group_key_agreement(members, channel, retry_limit, rng)
}

fn all_recover(outcomes: &[Result<FieldElement>], secret: FieldElement) -> bool {
    outcomes.iter().all(|o| o.as_ref() == Ok(&secret))
}

pub(super) fn run(id: ScenarioId, config: &SimConfig) -> Result<Run> {
    match id {
        ScenarioId::HonestGmConfirm => honest_confirm(config, ConfirmVariant::Gm),
        ScenarioId::HonestPeerConfirm => honest_confirm(config, ConfirmVariant::Peer),
        ScenarioId::KeyAgreement => key_agreement(config),
        ScenarioId::HandoverGm => handover_gm(config),
        ScenarioId::HandoverPeer => handover_peer(config),
        ScenarioId::RefreshCycle => refresh_cycle(config),
        ScenarioId::Eavesdrop => passive(config, false),
        ScenarioId::Mitm => match config.adversary_spec().mode {
            MitmMode::Passive => passive(config, true),
            MitmMode::Substitute => substitution(config),
        },
        ScenarioId::Replay => replay(config),
        ScenarioId::NodeCompromise => node_compromise(config),
        ScenarioId::DosFlood => dos_flood(config),
        ScenarioId::DosCorruptShare => dos_corrupt_share(config),
    }
}

fn honest_confirm(config: &SimConfig, variant: ConfirmVariant) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    let mut bus = Bus::new(NoAdversary);
    let mut report = Report::default();
    let result = confirm(variant, &world.gms[0], &mut members, &mut bus, &mut report);
    let accepted = result.as_ref().is_some_and(|r| r.accepted);
    let all_valid = result.as_ref().is_some_and(|r| {
        r.verdicts.len() == members.len() && r.verdicts.iter().all(|(_, v)| *v == Verdict::Valid)
    });
    report.prop("Accepted", accepted);
    report.prop("AllMembersAuthenticated", all_valid);
    report.prop("OneMultiplicationPerMember", one_em_each(&members));
    report.outcome = if accepted { "Accepted" } else { "Rejected" }.into();
    if let Some(r) = result {
        report.obs("verdicts", &r.verdicts);
    }
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}

fn key_agreement(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    let mut bus = Bus::new(NoAdversary);
    let mut report = Report::default();
    let result = confirm(config.confirm, &world.gms[0], &mut members, &mut bus, &mut report);
    let confirmed = result.is_some_and(|r| r.accepted);
    report.prop("Confirmed", confirmed);
    let secret = world.gms[0].secret();
    let outcomes = if confirmed { agree(&mut members, &mut bus, config.retry_limit, &mut world.rng) } else { Vec::new() };
    let recovered = confirmed && all_recover(&outcomes, secret);
    report.prop("MasterKeyRecovered", recovered);
    report.prop(
        "DigestMatches",
        recovered && members.iter().all(|m| m.group_key().is_some_and(|k| m.params().digest_matches(&k))),
    );
    report.prop("OneMultiplicationPerMember", one_em_each(&members));
    for (m, o) in members.iter().zip(&outcomes) {
        if let Err(e) = o {
            report.note(format!("{}: {e}", m.id()));
        }
    }
    report.outcome = if recovered { "MasterKeyRecovered" } else { "KeyAgreementFailed" }.into();
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}

/// Both groups authenticate and agree on their keys, and the GMs exchange polynomials.
fn two_group_setup<A: Adversary>(config: &SimConfig, world: &mut World, bus: &mut Bus<A>) -> Result<()> {
    world.need_two_groups()?;
    for g in 0..2 {
        let mut report = Report::default();
        let members = &mut world.groups[g];
        let ok = confirm(ConfirmVariant::Peer, &world.gms[g], members, bus, &mut report).is_some_and(|r| r.accepted);
        let secret = world.gms[g].secret();
        if !ok || !all_recover(&agree(members, bus, config.retry_limit, &mut world.rng), secret) {
            return Err(Error::KeyAgreementFailed);
        }
    }
    let (a, b) = world.gms.split_at_mut(1);
    exchange_polynomials(&mut a[0], &mut b[0]);
    Ok(())
}

fn forge_visitor(world: &mut World, visitor: &mut MemberState) {
    let mut credential = visitor.credential().clone();
    let fr = world.curve.scalar_field();
    credential.share.y = credential.share.y + fr.element(world.rng.gen_range(1..fr.modulus()));
    *visitor = MemberState::new(credential, visitor.params().clone());
}

fn handover_gm(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut bus = Bus::new(NoAdversary);
    two_group_setup(config, &mut world, &mut bus)?;
    let mut report = Report::default();
    let host = world.gms[1].params().clone();
    let mut visitor = world.groups[0].remove(0);
    if config.forged_visitor {
        forge_visitor(&mut world, &mut visitor);
    }
    let before = visitor.costs().phase(Phase::Handover);
    let gm_addr = world.gms[1].address();
    let mut obtained = None;
    let mut rejection = None;
    for request in bus.carry(visitor.handover_request_gm(&host)?, &gm_addr) {
        match world.gms[1].handle_handover_request(&request, &mut world.rng) {
            Ok(grant) => {
                for g in bus.carry(grant, &visitor.address()) {
                    obtained = visitor.accept_handover_grant(&g, &host).ok();
                }
            }
            Err(e) => rejection = Some(e),
        }
    }
    let spent = visitor.costs().phase(Phase::Handover).ec_scalar_mults - before.ec_scalar_mults;
    report.obs("visitor_scalar_mults", spent);
    if config.forged_visitor {
        let rejected = rejection == Some(Error::HandoverRejected);
        report.prop("HandoverRejected", rejected);
        report.prop("NoSecretDelivered", obtained.is_none());
        report.outcome = if rejected { "HandoverRejected" } else { "HandoverAccepted" }.into();
    } else {
        let delivered = obtained == Some(world.gms[1].secret());
        report.prop("HostSecretDelivered", delivered);
        report.prop("DigestMatches", obtained.is_some_and(|s| host.digest_matches(&s)));
        if let Some(e) = rejection {
            report.note(format!("host GM refused: {e}"));
        }
        report.outcome = if delivered { "HostSecretDelivered" } else { "HandoverFailed" }.into();
    }
    let mut everyone: Vec<&MemberState> = vec![&visitor];
    everyone.extend(world.groups[1].iter());
    Ok(Run { costs: costs_of(everyone), transcript: bus.into_transcript(), report })
}

fn handover_peer(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut bus = Bus::new(NoAdversary);
    two_group_setup(config, &mut world, &mut bus)?;
    let mut report = Report::default();
    let host = world.gms[1].params().clone();
    let home_group = world.gms[0].group_id();
    let mut visitor = world.groups[0].remove(0);
    if config.forged_visitor {
        let fr = world.curve.scalar_field();
        let guess = Share { x: visitor.credential().share.x, y: fr.element(world.rng.gen_range(0..fr.modulus())) };
        visitor.set_roaming_share(host.group_id, guess);
    } else {
        let home_gm = Address::Gm(home_group);
        for request in bus.carry(visitor.request_roaming_credential(host.group_id)?, &home_gm) {
            let update = world.gms[0].handle_handover_request(&request, &mut world.rng)?;
            for u in bus.carry(update, &visitor.address()) {
                visitor.accept_roaming_credential(&u)?;
            }
        }
    }
    let wanted = config.host_announces.unwrap_or(host.threshold.saturating_sub(1)).max(1);
    let host_member = &mut world.groups[1][0];
    let others: Vec<_> = host_member.known_public_shares().values().take(wanted - 1).cloned().collect();
    report.obs("host_points", others.len() + 1);
    let mut obtained = None;
    let mut rejection = None;
    let to = host_member.address();
    let request = visitor.handover_request_peer(&host, &host_member.id().clone())?;
    for req in bus.carry(request, &to) {
        match host_member.handle_handover_peer(&req, &others, &mut world.rng) {
            Ok(grant) => {
                for g in bus.carry(grant, &visitor.address()) {
                    obtained = visitor.accept_peer_grant(&g, &host).ok();
                }
            }
            Err(e) => rejection = Some(e),
        }
    }
    if config.forged_visitor {
        let rejected = rejection == Some(Error::HandoverRejected);
        report.prop("HandoverRejected", rejected);
        report.prop("NoSecretDelivered", obtained.is_none());
        report.outcome = if rejected { "HandoverRejected" } else { "HandoverAccepted" }.into();
    } else {
        let delivered = obtained == Some(world.gms[1].secret());
        report.prop("HostSecretDelivered", delivered);
        report.prop("DigestMatches", obtained.is_some_and(|s| host.digest_matches(&s)));
        if let Some(e) = rejection {
            report.note(format!("host member refused: {e}"));
        }
        report.outcome = if delivered { "HostSecretDelivered" } else { "HandoverFailed" }.into();
    }
    let mut everyone: Vec<&MemberState> = vec![&visitor];
    everyone.extend(world.groups[1].iter());
    Ok(Run { costs: costs_of(everyone), transcript: bus.into_transcript(), report })
}

fn refresh_cycle(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = std::mem::take(&mut world.groups[0]);
    members.shuffle(&mut world.rng);
    let mut bus = Bus::new(NoAdversary);
    let mut report = Report::default();
    let old_secret = world.gms[0].secret();
    let first = confirm(config.confirm, &world.gms[0], &mut members, &mut bus, &mut report).is_some_and(|r| r.accepted);
    let first_ok = first && all_recover(&agree(&mut members, &mut bus, config.retry_limit, &mut world.rng), old_secret);
    report.prop("FirstRoundCompleted", first_ok);
    let captured: Vec<_> = members.iter_mut().map(|m| m.announce()).collect::<Result<_>>()?;

    let (new_params, updates) = world.gms[0].refresh_credentials(first_ok, &mut world.rng)?;
    let mut applied = 0;
    for update in updates {
        let to = update.receiver.clone();
        for delivered in bus.carry(update, &to) {
            if let Some(m) = members.iter_mut().find(|m| m.address() == to) {
                applied += usize::from(m.apply_credential_update(&delivered, &new_params).is_ok());
            }
        }
    }
    report.prop("EpochAdvanced", world.gms[0].epoch() == 1 && new_params.epoch == 1);
    report.prop("UpdatesApplied", applied == members.len());
    report.prop("MasterSecretChanged", world.gms[0].secret() != old_secret);
    let replay = world.gms[0].confirm(&captured);
    report.prop("OldAnnouncesRejected", replay.verdicts.iter().all(|(_, v)| *v == Verdict::Stale));

    let second = run_gm_confirmation(&world.gms[0], &mut members, &mut bus)?.accepted;
    report.prop("ReconfirmedAfterRefresh", second);
    let secret = world.gms[0].secret();
    let recovered = second && all_recover(&agree(&mut members, &mut bus, config.retry_limit, &mut world.rng), secret);
    report.prop("NewMasterKeyRecovered", recovered);
    report.outcome = if recovered { "RefreshCompleted" } else { "RefreshFailed" }.into();
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}

/// Honest key agreement watched by a passive adversary, followed by every extraction
/// attempt available from the transcript.
fn passive(config: &SimConfig, relay: bool) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    let mut bus = Bus::new(NoAdversary);
    let mut report = Report::default();
    let ok = confirm(config.confirm, &world.gms[0], &mut members, &mut bus, &mut report).is_some_and(|r| r.accepted);
    let secret = world.gms[0].secret();
    let recovered = ok && all_recover(&agree(&mut members, &mut bus, config.retry_limit, &mut world.rng), secret);
    report.prop("MasterKeyRecovered", recovered);
    if relay {
        report.note("adversary relays every message unchanged");
    }

    let params = world.gms[0].params().clone();
    let transcript = bus.into_transcript();
    let mut secrets: Vec<Vec<u8>> = vec![secret.to_bytes()];
    for m in &members {
        secrets.push(m.credential().share.y.to_bytes());
        for peer in &members {
            if let Some(k) = m.session_key(peer.id()) {
                secrets.push(k.as_bytes().to_vec());
            }
        }
    }
    let clean = transcript.delivered().all(|e| {
        e.message.cleartext_fields().map_or(true, |fields| {
            fields.iter().all(|f| secrets.iter().all(|s| !f.windows(s.len()).any(|w| w == s.as_slice())))
        })
    });
    if world.curve.order() <= TOY_ORDER {
        // One-byte scalars collide with point bytes by chance.
        report.obs("NoSecretInCleartext", clean);
    } else {
        report.prop("NoSecretInCleartext", clean);
    }

    let candidates = public_candidate_search(&transcript, &params.pairing, &params.q)?;
    report.obs("links_attacked", candidates.links);
    report.obs("candidates_per_link", candidates.candidates_per_link);
    report.obs("candidate_decryptions", candidates.decryptions);
    let extracted = if world.curve.order() <= TOY_ORDER {
        let linear = linear_strategy_search(&world.curve, LINEAR_INSTANCES, &mut world.rng)?;
        report.obs("linear_strategies", linear.strategies);
        report.obs("linear_instances", linear.instances);
        report.obs("universal_linear_strategies", linear.universal);
        report.prop("NoUniversalLinearStrategy", linear.universal == 0);
        report.obs("ToyDiscreteLogRecoversKey", toy_dl_decrypts(&transcript, &world.curve, &params)?);
        report.note("toy subgroup: structural candidates can hit a key by chance; universality is the property");
        linear.universal > 0
    } else {
        report.prop("NoPublicCandidateDecrypts", candidates.decryptions == 0 && candidates.links > 0);
        candidates.decryptions > 0
    };
    report.outcome = if extracted { "ExtractionSucceeded" } else { "ExtractionFailed" }.into();
    Ok(Run { costs: costs_of(&members), transcript, report })
}

/// Solves the discrete log of one announce by brute force and opens that member's EncShares.
fn toy_dl_decrypts(transcript: &Transcript, curve: &CurveParams, params: &crate::protocol::GroupPublicParams) -> Result<bool> {
    let mut points = BTreeMap::new();
    for e in transcript.of_kind(MessageKind::PublicShareAnnounce) {
        if let Ok(a) = Announce::decode(&e.message, curve) {
            points.entry(a.id).or_insert(a.point);
        }
    }
    for e in transcript.of_kind(MessageKind::EncShare) {
        let (Address::Member(from), Address::Member(to)) = (&e.message.sender, &e.to) else { continue };
        let (Some(a), Some(b)) = (points.get(from), points.get(to)) else { continue };
        let Some(alpha) = toy_discrete_log(curve, a) else { continue };
        let z = params.pairing.pair(&b.scalar_mul(alpha as u128), &params.q)?;
        let key = kdf(&z, &key_context(stage::PAIRWISE, from.as_str(), to.as_str()));
        let ct = open_sealed(&e.message, MessageKind::EncShare)?;
        return Ok(decrypt(&key, &ct).is_ok());
    }
    Ok(false)
}

fn substitution(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    if members.len() < 2 {
        return Err(Error::Config("man-in-the-middle needs two participants".into()));
    }
    let left = target_or(config, 0, members[0].id())?;
    let right = target_or(config, 1, members[1].id())?;
    move_to_front(&mut members, &left)?;
    let params = world.gms[0].params().clone();
    let adversary = SubstitutionAdversary::new(left.clone(), right.clone(), world.curve, params.q, world.rng.gen())?;
    let mut bus = Bus::new(adversary);
    let mut report = Report::default();
    let confirmed = confirm(ConfirmVariant::Peer, &world.gms[0], &mut members, &mut bus, &mut report)
        .is_some_and(|r| r.accepted);
    report.prop("ConfirmationPassedAtHonestConfirmer", confirmed);
    let outcomes = agree(&mut members, &mut bus, config.retry_limit, &mut world.rng);
    let victim = members.iter().position(|m| *m.id() == right).expect("right is a participant");
    report.prop("DigestCheckFailedAtVictim", outcomes[victim].is_err());
    for (m, o) in members.iter().zip(&outcomes) {
        if let Err(e) = o {
            report.note(format!("{}: {e}", m.id()));
        }
    }
    let exposed = bus.adversary.exposed == Some(members[victim].credential().share);
    report.obs("VictimShareExposed", exposed);
    if exposed {
        report.note("the substituted link let the adversary open the victim's EncShare on that link");
    }
    report.outcome = "KeyAgreementDisrupted".into();
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}

fn replay(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    let spec = config.adversary_spec();
    let target = target_or(config, 0, members.last().expect("nonempty").id())?;
    let mut bus = Bus::new(ReplayAdversary::new(target.clone(), spec.race));
    let mut report = Report::default();
    let gm_addr = world.gms[0].address();

    let first = run_gm_confirmation(&world.gms[0], &mut members, &mut bus)?;
    if spec.race {
        let as_member = first.verdict_of(&target) == Some(Verdict::Valid)
            && first.verdicts.iter().any(|(id, v)| *id == target && *v == Verdict::Duplicate);
        report.prop("ReplayAcceptedAsMember", as_member);
        report.obs("verdicts", &first.verdicts);
        report.note("the injected copy reached the GM first; the genuine announce was ignored as a duplicate");
        report.outcome = if as_member { "ReplayAccepted" } else { "ReplayRejected" }.into();
        return Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report });
    }
    let captured = bus.adversary.captured.clone().ok_or(Error::UnknownMember(target.to_string()))?;
    if spec.refresh {
        let secret = world.gms[0].secret();
        let agreed = all_recover(&agree(&mut members, &mut bus, config.retry_limit, &mut world.rng), secret);
        let (new_params, updates) = world.gms[0].refresh_credentials(agreed, &mut world.rng)?;
        for update in updates {
            let to = update.receiver.clone();
            for delivered in bus.carry(update, &to) {
                if let Some(m) = members.iter_mut().find(|m| m.address() == to) {
                    m.apply_credential_update(&delivered, &new_params)?;
                }
            }
        }
    }
    // Next round: the target stays silent and the adversary speaks first.
    let injected = bus.inject(captured, &gm_addr);
    let pos = members.iter().position(|m| *m.id() == target).ok_or_else(|| Error::UnknownMember(target.to_string()))?;
    let absent = members.remove(pos);
    let mut at_gm = vec![injected];
    at_gm.extend(broadcast_announces(&mut members, &mut bus)?);
    let second = world.gms[0].confirm(&at_gm);
    members.insert(pos, absent);
    let verdict = second.verdict_of(&target);
    report.obs("replayed_verdict", verdict);
    report.obs("epoch", world.gms[0].epoch());
    let accepted = verdict == Some(Verdict::Valid);
    if spec.refresh {
        report.prop("ReplayRejected", !accepted);
    } else {
        report.prop("VulnerabilityReproduced", accepted);
    }
    report.outcome = if accepted { "ReplayAccepted" } else { "ReplayRejected" }.into();
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}

fn node_compromise(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    let target = target_or(config, 0, members.last().expect("nonempty").id())?;
    let pos = members.iter().position(|m| *m.id() == target).ok_or_else(|| Error::UnknownMember(target.to_string()))?;
    // The adversary reads the node's credential and takes its place.
    let stolen = members[pos].credential().clone();
    members[pos] = MemberState::new(stolen, world.gms[0].params().clone());
    let mut bus = Bus::new(CompromiseAdversary { stolen: target.clone() });
    let mut report = Report::default();
    let result = confirm(config.confirm, &world.gms[0], &mut members, &mut bus, &mut report);
    let authenticated = result.as_ref().is_some_and(|r| {
        r.accepted && r.verdicts.iter().any(|(id, v)| *id == target && *v == Verdict::Valid)
    });
    report.prop("AdversaryAuthenticated", authenticated);
    let secret = world.gms[0].secret();
    let outcomes = if authenticated { agree(&mut members, &mut bus, config.retry_limit, &mut world.rng) } else { Vec::new() };
    let stole_key = outcomes.get(pos).is_some_and(|o| o.as_ref() == Ok(&secret));
    report.prop("AdversaryRecoversMasterKey", stole_key);
    report.prop("VulnerabilityReproduced", authenticated && stole_key);
    report.note("no defence against a compromised node is claimed");
    report.outcome = if authenticated { "AdversaryAuthenticated" } else { "AdversaryRejected" }.into();
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}

fn dos_flood(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    let spec = config.adversary_spec();
    let confirmer = world.gms[0].address();
    let mut bus = Bus::new(FloodAdversary { confirmer: confirmer.clone(), copies: spec.flood_per_sender.max(1) });
    let mut report = Report::default();
    let budget = spec.budget_per_member * members.len() as u64;
    bus.reset_arrivals();
    let announces = broadcast_announces(&mut members, &mut bus)?;
    let arrivals = bus.arrivals(&confirmer);
    report.obs("arrivals_at_confirmation_point", arrivals);
    report.obs("budget", budget);
    let aborted = arrivals > budget;
    report.prop("RoundAborted", aborted);
    if !aborted {
        let result = world.gms[0].confirm(&announces);
        report.obs("accepted_despite_flood", result.accepted);
        report.note("flood stayed within the budget; the round was not locked");
    }
    report.outcome = if aborted { "RoundAborted" } else { "RoundCompleted" }.into();
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}

fn dos_corrupt_share(config: &SimConfig) -> Result<Run> {
    let mut world = build_world(config)?;
    let mut members = world.participants(config)?;
    if members.len() < 2 {
        return Err(Error::Config("corrupt-share needs two participants".into()));
    }
    let fr = world.curve.scalar_field();
    let forged = Announce {
        x: fr.element(world.curve.order() - 1),
        point: world.curve.mul_generator(&fr.element(world.rng.gen_range(1..fr.modulus()))),
        id: MemberId::new("outsider")?,
    };
    let adversary = CorruptShareAdversary {
        trigger: members[1].id().clone(),
        confirmer: members[0].address(),
        forged,
        injections: 0,
    };
    let mut bus = Bus::new(adversary);
    let mut report = Report::default();
    let mut failed = 0;
    let mut succeeded = false;
    for _ in 0..config.retry_limit.max(1) {
        match run_peer_confirmation(&mut members, 0, &mut bus) {
            Ok(r) if r.accepted => {
                succeeded = true;
                break;
            }
            _ => failed += 1,
        }
    }
    report.obs("rounds_failed", failed);
    report.obs("injections", bus.adversary.injections);
    report.prop("DeniedByDos", !succeeded && failed == config.retry_limit.max(1));
    report.note("no defence: the aggregate check cannot tell which announce is bad");
    report.outcome = if succeeded { "Accepted" } else { "DeniedByDos" }.into();
    Ok(Run { costs: costs_of(&members), transcript: bus.into_transcript(), report })
}
