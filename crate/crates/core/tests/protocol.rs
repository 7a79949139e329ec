use gka_core::algebra::{CurveParams, Profile};
use gka_core::costmodel::{Phase, MUL_Q_PER_EM};
use gka_core::ids::{GroupId, MemberId};
use gka_core::protocol::message::Announce;
use gka_core::protocol::{
    broadcast_announces, exchange_polynomials, gm_initialize, peer_confirm, run_gm_confirmation,
    run_group_key_agreement, run_pairwise_keys, run_peer_confirmation, Address, Channel,
    DirectChannel, GmState, GroupConfig, MemberState, MessageKind, ProtocolMessage, Verdict, XRange,
};
use gka_core::sss::Share;
use gka_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn group(id: u32, t: usize, n: usize, x_range: XRange, curve: CurveParams, rng: &mut ChaCha20Rng) -> (GmState, Vec<MemberState>) {
    let config = GroupConfig { group_id: GroupId(id), threshold: t, size: n, x_range, secret: None };
    let (gm, params, creds) = gm_initialize(&config, curve, rng).unwrap();
    let members = creds.into_iter().map(|c| MemberState::new(c, params.clone())).collect();
    (gm, members)
}

fn demo_group(t: usize, n: usize, seed: u64) -> (GmState, Vec<MemberState>, ChaCha20Rng) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (gm, members) = group(1, t, n, XRange::disjoint(0, 64), CurveParams::from_profile(Profile::Demo), &mut rng);
    (gm, members, rng)
}

/// Records everything and optionally corrupts one EncShare link.
#[derive(Default)]
struct Recorder {
    log: Vec<ProtocolMessage>,
    corrupt: Option<(Address, Address)>,
}

impl Channel for Recorder {
    fn carry(&mut self, mut msg: ProtocolMessage, to: &Address) -> Vec<ProtocolMessage> {
        if msg.kind == MessageKind::EncShare && self.corrupt.as_ref() == Some(&(msg.sender.clone(), to.clone())) {
            let last = msg.payload.len() - 1;
            msg.payload[last] ^= 1;
        }
        self.log.push(msg.clone());
        vec![msg]
    }
}

fn agree(members: &mut [MemberState], channel: &mut dyn Channel, rng: &mut ChaCha20Rng) {
    run_peer_confirmation(members, 0, channel).unwrap();
    run_pairwise_keys(members).unwrap();
    for outcome in run_group_key_agreement(members, channel, 3, rng) {
        outcome.unwrap();
    }
}

#[test]
fn gm_confirmation_accepts_honest_and_names_forger() {
    let (gm, mut members, _) = demo_group(3, 5, 1);
    let result = run_gm_confirmation(&gm, &mut members, &mut DirectChannel).unwrap();
    assert!(result.accepted);
    assert!(result.verdicts.iter().all(|(_, v)| *v == Verdict::Valid));

    let curve = gm.params().curve;
    let mut announces: Vec<_> = members.iter_mut().map(|m| m.announce().unwrap()).collect();
    let forged = Announce::decode(&announces[2], &gm.params().curve).unwrap();
    let victim = forged.id.clone();
    announces[2] = Announce { point: forged.point.add(&curve.generator()).unwrap(), ..forged }.into_message(0);
    let result = gm.confirm(&announces);
    assert!(!result.accepted);
    assert_eq!(result.forgers(), vec![&victim]);
}

#[test]
fn gm_confirmation_flags_unknown_members() {
    let (gm, mut members, _) = demo_group(2, 3, 2);
    let mut announces: Vec<_> = members.iter_mut().map(|m| m.announce().unwrap()).collect();
    let stranger = MemberId::new("stranger").unwrap();
    announces.push(
        Announce { x: gm.params().curve.scalar_field().element(99), point: gm.params().q, id: stranger.clone() }
            .into_message(0),
    );
    let result = gm.confirm(&announces);
    assert!(!result.accepted);
    assert_eq!(result.verdict_of(&stranger), Some(Verdict::UnknownMember));
}

#[test]
fn peer_confirmation_thresholds() {
    let (_, mut members, _) = demo_group(3, 5, 3);
    let shares: Vec<_> = members.iter_mut().map(|m| m.public_share().unwrap()).collect();
    let params = members[0].params().clone();
    assert!(peer_confirm(&params, &shares[..3]).unwrap().accepted);
    assert!(peer_confirm(&params, &shares).unwrap().accepted);
    assert_eq!(
        peer_confirm(&params, &shares[..2]).unwrap_err(),
        Error::InsufficientShares { needed: 3, have: 2 }
    );
    let mut dup = shares[..3].to_vec();
    dup[1].x = dup[0].x;
    assert!(matches!(peer_confirm(&params, &dup), Err(Error::DuplicateShareX(_))));
}

#[test]
fn tampering_any_announce_flips_peer_confirm() {
    let (_, mut members, _) = demo_group(3, 5, 4);
    let shares: Vec<_> = members.iter_mut().map(|m| m.public_share().unwrap()).collect();
    let params = members[0].params().clone();
    for j in 0..shares.len() {
        let mut tampered = shares.clone();
        tampered[j].point = tampered[j].point.add(&params.generator).unwrap();
        let result = peer_confirm(&params, &tampered).unwrap();
        assert!(!result.accepted);
        assert!(result.verdicts.iter().all(|(_, v)| *v == Verdict::Unattributed));
    }
}

#[test]
fn announce_costs_one_multiplication_and_is_deterministic() {
    let (_, mut members, _) = demo_group(3, 4, 5);
    let a = members[0].announce().unwrap();
    let b = members[0].announce().unwrap();
    assert_eq!(a, b);
    let counted = members[0].costs().phase(Phase::Confirmation);
    assert_eq!(counted.ec_scalar_mults, 1);
    assert_eq!(counted.to_mul_q(), MUL_Q_PER_EM);
    assert_eq!(MUL_Q_PER_EM, 1189);
}

#[test]
fn stale_credentials_cannot_announce() {
    let (mut gm, mut members, mut rng) = demo_group(2, 3, 6);
    agree(&mut members, &mut DirectChannel, &mut rng);
    let (new_params, _) = gm.refresh_credentials(true, &mut rng).unwrap();
    let mut stale = MemberState::new(members[0].credential().clone(), new_params);
    assert_eq!(stale.announce().unwrap_err(), Error::StaleCredential { credential: 0, current: 1 });
}

#[test]
fn pairwise_keys_agree_and_differ_per_pair() {
    let (_, mut members, _) = demo_group(2, 3, 7);
    broadcast_announces(&mut members, &mut DirectChannel).unwrap();
    run_pairwise_keys(&mut members).unwrap();
    let ids: Vec<_> = members.iter().map(|m| m.id().clone()).collect();
    let mut keys = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let kij = members[i].session_key(&ids[j]).unwrap();
            let kji = members[j].session_key(&ids[i]).unwrap();
            assert_eq!(kij, kji);
            assert!(!kij.is_weak());
            keys.push(kij.as_bytes().to_vec());
        }
    }
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 3);
    let ka = members[0].costs().phase(Phase::KeyAgreement);
    assert_eq!((ka.ec_scalar_mults, ka.pairings), (2, 2));
}

#[test]
fn honest_key_agreement_recovers_master_secret() {
    let (gm, mut members, mut rng) = demo_group(3, 3, 8);
    agree(&mut members, &mut DirectChannel, &mut rng);
    assert!(members.iter().all(|m| m.group_key() == Some(gm.secret())));
}

#[test]
fn corrupted_share_is_fatal_only_at_threshold() {
    for (n, expect_ok) in [(3, false), (4, true)] {
        let (gm, mut members, mut rng) = demo_group(3, n, 9);
        let mut channel = Recorder {
            corrupt: Some((members[0].address(), members[1].address())),
            ..Recorder::default()
        };
        run_peer_confirmation(&mut members, 0, &mut channel).unwrap();
        run_pairwise_keys(&mut members).unwrap();
        let outcomes = run_group_key_agreement(&mut members, &mut channel, 3, &mut rng);
        if expect_ok {
            assert!(outcomes.iter().all(|o| o.as_ref() == Ok(&gm.secret())));
        } else {
            assert_eq!(outcomes[1], Err(Error::InsufficientShares { needed: 3, have: 2 }));
            assert_eq!(outcomes[0], Ok(gm.secret()));
        }
    }
}

#[test]
fn refresh_rejects_replay_and_supports_new_round() {
    let (mut gm, mut members, mut rng) = demo_group(2, 3, 10);
    agree(&mut members, &mut DirectChannel, &mut rng);
    let captured: Vec<_> = members.iter_mut().map(|m| m.announce().unwrap()).collect();
    assert!(gm.confirm(&captured).accepted);

    let (new_params, updates) = gm.refresh_credentials(true, &mut rng).unwrap();
    for (m, update) in members.iter_mut().zip(&updates) {
        assert_eq!(update.receiver, m.address());
        m.apply_credential_update(update, &new_params).unwrap();
    }
    let replay = gm.confirm(&captured);
    assert!(!replay.accepted);
    assert!(replay.verdicts.iter().all(|(_, v)| *v == Verdict::Stale));

    // Re-stamped with the new epoch the old points still fail.
    let restamped: Vec<_> = captured.iter().cloned().map(|mut m| { m.epoch = 1; m }).collect();
    assert_eq!(gm.confirm(&restamped).forgers().len(), 3);

    assert!(run_gm_confirmation(&gm, &mut members, &mut DirectChannel).unwrap().accepted);
    run_pairwise_keys(&mut members).unwrap();
    for outcome in run_group_key_agreement(&mut members, &mut DirectChannel, 3, &mut rng) {
        assert_eq!(outcome, Ok(gm.secret()));
    }
}

#[test]
fn refresh_update_needs_current_master_secret() {
    let (mut gm, mut members, mut rng) = demo_group(2, 3, 11);
    let (new_params, updates) = gm.refresh_credentials(true, &mut rng).unwrap();
    assert_eq!(members[0].apply_credential_update(&updates[0], &new_params).unwrap_err(), Error::MissingGroupKey);
}

struct TwoGroups {
    gm1: GmState,
    gm2: GmState,
    g1: Vec<MemberState>,
    g2: Vec<MemberState>,
    rng: ChaCha20Rng,
}

fn two_groups(t2: usize, n2: usize, host_range: XRange, seed: u64) -> TwoGroups {
    let curve = CurveParams::from_profile(Profile::Demo);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut gm1, mut g1) = group(1, 2, 3, XRange::disjoint(0, 16), curve, &mut rng);
    let (mut gm2, mut g2) = group(2, t2, n2, host_range, curve, &mut rng);
    exchange_polynomials(&mut gm1, &mut gm2);
    agree(&mut g1, &mut DirectChannel, &mut rng);
    agree(&mut g2, &mut DirectChannel, &mut rng);
    TwoGroups { gm1, gm2, g1, g2, rng }
}

#[test]
fn gm_led_handover_delivers_host_secret() {
    let TwoGroups { gm2, mut g1, mut rng, .. } = two_groups(3, 4, XRange::disjoint(1, 16), 12);
    let host = gm2.params().clone();
    let request = g1[0].handover_request_gm(&host).unwrap();
    let grant = gm2.handle_handover_request(&request, &mut rng).unwrap();
    assert_eq!(grant.kind, MessageKind::HandoverGrant);
    assert_eq!(g1[0].accept_handover_grant(&grant, &host).unwrap(), gm2.secret());
    assert_eq!(g1[0].foreign_key(GroupId(2)), Some(gm2.secret()));
    assert_eq!(g1[0].costs().phase(Phase::Handover).ec_scalar_mults, 2);
}

#[test]
fn gm_led_handover_rejects_forgery_and_strangers() {
    let curve = CurveParams::from_profile(Profile::Demo);
    let TwoGroups { gm2, g1, mut rng, .. } = two_groups(3, 4, XRange::disjoint(1, 16), 13);
    let host = gm2.params().clone();
    let mut cred = g1[0].credential().clone();
    cred.share.y = cred.share.y + curve.scalar_field().one();
    let mut forger = MemberState::new(cred, g1[0].params().clone());
    let request = forger.handover_request_gm(&host).unwrap();
    assert_eq!(gm2.handle_handover_request(&request, &mut rng).unwrap_err(), Error::HandoverRejected);

    let (gm3, mut g3) = group(3, 2, 2, XRange::disjoint(2, 16), curve, &mut rng);
    let _ = gm3;
    let request = g3[0].handover_request_gm(&host).unwrap();
    assert_eq!(gm2.handle_handover_request(&request, &mut rng).unwrap_err(), Error::NoRoamingAgreement(3));
}

#[test]
fn peer_led_handover_delivers_host_secret() {
    let TwoGroups { gm1, gm2, mut g1, mut g2, mut rng } = two_groups(3, 4, XRange::disjoint(1, 16), 14);
    let host = gm2.params().clone();
    let request = g1[0].request_roaming_credential(GroupId(2)).unwrap();
    let update = gm1.handle_handover_request(&request, &mut rng).unwrap();
    assert_eq!(update.kind, MessageKind::CredentialUpdate);
    assert_eq!(g1[0].accept_roaming_credential(&update).unwrap(), GroupId(2));

    let host_id = g2[0].id().clone();
    let request = g1[0].handover_request_peer(&host, &host_id).unwrap();
    // t − 1 = 2 points: the host's own share plus one other announce.
    let others: Vec<_> = g2[0].known_public_shares().values().take(1).cloned().collect();
    let grant = g2[0].handle_handover_peer(&request, &others, &mut rng).unwrap();
    assert_eq!(g1[0].accept_peer_grant(&grant, &host).unwrap(), gm2.secret());

    let too_few = g2[0].handle_handover_peer(&request, &[], &mut rng).unwrap_err();
    assert_eq!(too_few, Error::InsufficientShares { needed: 3, have: 2 });
}

#[test]
fn peer_led_handover_rejects_guessed_share() {
    let TwoGroups { gm2, mut g1, mut g2, mut rng, .. } = two_groups(3, 4, XRange::disjoint(1, 16), 15);
    let host = gm2.params().clone();
    let fr = host.curve.scalar_field();
    let x = g1[0].credential().share.x;
    g1[0].set_roaming_share(GroupId(2), Share { x, y: fr.element(12345) });
    let request = g1[0].handover_request_peer(&host, &g2[1].id().clone()).unwrap();
    let others: Vec<_> = g2[1].known_public_shares().values().cloned().collect();
    assert_eq!(g2[1].handle_handover_peer(&request, &others, &mut rng).unwrap_err(), Error::HandoverRejected);
}

#[test]
fn peer_led_handover_detects_x_collision() {
    // Host range starts at 1 and overlaps group 1.
    let TwoGroups { gm1, gm2, mut g1, mut g2, mut rng } = two_groups(3, 4, XRange::disjoint(0, 16), 16);
    let host = gm2.params().clone();
    let request = g1[0].request_roaming_credential(GroupId(2)).unwrap();
    let update = gm1.handle_handover_request(&request, &mut rng).unwrap();
    g1[0].accept_roaming_credential(&update).unwrap();
    let request = g1[0].handover_request_peer(&host, &g2[1].id().clone()).unwrap();
    // g1[0] and g2[0] both hold x = 1.
    let colliding: Vec<_> = g2[1].known_public_shares().values().cloned().collect();
    assert_eq!(
        g2[1].handle_handover_peer(&request, &colliding, &mut rng).unwrap_err(),
        Error::DuplicateShareX(1)
    );
}

#[test]
fn transcripts_never_carry_secrets_in_cleartext() {
    let (gm, mut members, mut rng) = demo_group(3, 4, 17);
    let mut channel = Recorder::default();
    agree(&mut members, &mut channel, &mut rng);
    run_gm_confirmation(&gm, &mut members, &mut channel).unwrap();
    let mut secrets: Vec<Vec<u8>> = vec![gm.secret().to_bytes()];
    for m in &members {
        secrets.push(m.credential().share.y.to_bytes());
        for peer in &members {
            if let Some(k) = m.session_key(peer.id()) {
                secrets.push(k.as_bytes().to_vec());
            }
        }
    }
    assert!(!channel.log.is_empty());
    for msg in &channel.log {
        for field in msg.cleartext_fields().unwrap() {
            for secret in &secrets {
                assert!(!field.windows(secret.len()).any(|w| w == secret.as_slice()), "{:?} leaks", msg.kind);
            }
        }
    }
}
