//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gka_core::algebra::{CurveParams, FieldParams, Profile};
use gka_core::costmodel::{emit_comparison, member_cost_chien, member_cost_harn, member_cost_proposed, Phase, MUL_Q_PER_EM};
use gka_core::ids::GroupId;
use gka_core::pairing::{gt_pow, PairingEngine};
use gka_core::protocol::message::Announce;
use gka_core::protocol::{gm_initialize, peer_confirm, GroupConfig, MemberState, Verdict, XRange};
use gka_core::simnet::analysis::{consistent_polynomials, partial_credential_attack};
use gka_core::simnet::{run_scenario, AdversarySpec, ConfirmVariant, GroupSpec, ScenarioId, ScenarioVerdict, SimConfig};
use gka_core::sss::Share;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(config: &SimConfig) -> Result<ScenarioVerdict, String> {
    run_scenario(config).map(|(_, v)| v).map_err(|e| format!("{} seed {}: {e}", config.scenario, config.seed))
}

fn expect_property(v: &ScenarioVerdict, name: &str) -> Result<(), String> {
    ensure(v.property(name) == Some(true), || format!("{} seed {}: {name} is {:?}", v.scenario, v.seed, v.property(name)))
}

fn two_groups(scenario: ScenarioId, seed: u64, t: usize, n: usize) -> SimConfig {
    let mut c = SimConfig::single_group(scenario, seed, t, n);
    c.groups.push(GroupSpec { id: 2, t, n, x_offset: None, capacity: None });
    c
}

fn cost_table() -> Outcome {
    for m in 0..=10_000 {
        ensure(member_cost_proposed(m) == 1189, || format!("proposed({m})"))?;
        ensure(member_cost_chien(m) == 7 * m + 6785, || format!("chien({m})"))?;
        ensure(member_cost_harn(m) == 45 * m + 1418, || format!("harn({m})"))?;
    }
    let csv = emit_comparison(100, 300, 2).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = csv.lines().collect();
    ensure(rows[0] == "m,proposed,chien,harn", || format!("header {}", rows[0]))?;
    ensure(rows[1] == "100,1189,7485,5918", || format!("m = 100 row {}", rows[1]))?;
    ensure(rows.last() == Some(&"300,1189,8885,14918"), || format!("m = 300 row {:?}", rows.last()))?;
    ensure(rows.len() == 102, || format!("{} rows", rows.len()))?;
    Ok(format!("{} rows, spot rows m = 100 and m = 300 exact", rows.len() - 1))
}

fn one_multiplication() -> Outcome {
    let mut checked = 0;
    for n in 2..=6 {
        for t in 1..=n {
            for m in t..=n {
                for (scenario, variant) in [(ScenarioId::HonestGmConfirm, ConfirmVariant::Gm), (ScenarioId::HonestPeerConfirm, ConfirmVariant::Peer)] {
                    let mut c = SimConfig::single_group(scenario, 1, t, n);
                    c.participants = Some(m);
                    c.confirm = variant;
                    let v = run(&c)?;
                    ensure(v.passed, || format!("{scenario} t = {t} m = {m} n = {n} not accepted"))?;
                    ensure(v.costs.len() == m, || format!("{scenario}: {} cost ledgers for m = {m}", v.costs.len()))?;
                    for (id, ledger) in &v.costs {
                        let own = ledger.phase(Phase::Confirmation);
                        ensure(own.ec_scalar_mults == 1 && own.to_mul_q() == MUL_Q_PER_EM, || {
                            format!("{scenario} t = {t} m = {m} n = {n}: {id} spent {} EM", own.ec_scalar_mults)
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} member runs at exactly 1 EM = {MUL_Q_PER_EM} T_mul,q"))
}

fn honest_grid() -> Outcome {
    let mut runs = 0;
    for seed in [1, 2, 3] {
        for n in 1..=6 {
            for t in 1..=n {
                for m in t..=n {
                    for scenario in [ScenarioId::HonestGmConfirm, ScenarioId::HonestPeerConfirm, ScenarioId::KeyAgreement] {
                        let mut c = SimConfig::single_group(scenario, seed, t, n);
                        c.participants = Some(m);
                        let v = run(&c)?;
                        ensure(v.passed, || format!("{scenario} seed {seed} t = {t} m = {m} n = {n}: {}", v.outcome))?;
                        if scenario == ScenarioId::KeyAgreement {
                            expect_property(&v, "MasterKeyRecovered")?;
                            expect_property(&v, "DigestMatches")?;
                        }
                        runs += 1;
                    }
                    for scenario in [ScenarioId::HandoverGm, ScenarioId::HandoverPeer] {
                        let mut c = two_groups(scenario, seed, t, n);
                        c.host_announces = Some((m - 1).max(1));
                        let v = run(&c)?;
                        expect_property(&v, "HostSecretDelivered")?;
                        expect_property(&v, "DigestMatches")?;
                        runs += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{runs} honest runs over t ≤ m ≤ n ≤ 6, seeds 1..=3, demo profile"))
}

fn pairing_correctness() -> Outcome {
    let curve = CurveParams::from_profile(Profile::Toy43);
    let engine = PairingEngine::new(curve).map_err(|e| e.to_string())?;
    let g = curve.generator();
    let base = engine.pair(&g, &g).map_err(|e| e.to_string())?;
    ensure(!base.is_one(), || "e(P, P) = 1 on toy43".into())?;
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let r = curve.order();
    for _ in 0..100 {
        let (a, b) = (rng.gen_range(0..r), rng.gen_range(0..r));
        let lhs = engine.pair(&g.scalar_mul(a as u128), &g.scalar_mul(b as u128)).map_err(|e| e.to_string())?;
        ensure(lhs == gt_pow(&base, (a * b % r) as u128), || format!("bilinearity fails at a = {a}, b = {b}"))?;
    }
    let toy23 = CurveParams::from_profile(Profile::Toy23);
    let engine23 = PairingEngine::new(toy23).map_err(|e| e.to_string())?;
    let points = common::subgroup_points(&toy23);
    ensure(points.len() == 3, || format!("toy23 subgroup has {} points", points.len()))?;
    for a in &points {
        for b in &points {
            let fast = engine23.pair(a, b).map_err(|e| e.to_string())?.value();
            ensure(fast == common::naive_tate(&toy23, a, b), || format!("oracle disagrees at {a:?}, {b:?}"))?;
        }
    }
    Ok(format!("100 bilinear pairs on toy43, {} oracle pairs on toy23", points.len() * points.len()))
}

fn perfect_secrecy() -> Outcome {
    let f = FieldParams::new(11).expect("11 is prime");
    let mut pairs = 0;
    for x1 in 1..11 {
        for x2 in x1 + 1..11 {
            for y1 in 0..11 {
                for y2 in [0, 3, 7, 10] {
                    let shares = [Share { x: f.element(x1), y: f.element(y1) }, Share { x: f.element(x2), y: f.element(y2) }];
                    let counts = consistent_polynomials(f, 3, &shares);
                    ensure(counts == vec![1; 11], || format!("shares ({x1}, {y1}), ({x2}, {y2}) give {counts:?}"))?;
                    pairs += 1;
                }
            }
        }
    }
    let secrecy = format!("{pairs} share pairs leave all 11 secrets with one completing polynomial each");

    let curve = CurveParams::from_profile(Profile::Toy43);
    let mut passing = Vec::new();
    let mut attempts = 0;
    for seed in [1, 2, 3] {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let config = GroupConfig { group_id: GroupId(1), threshold: 3, size: 5, x_range: XRange::disjoint(0, 10), secret: None };
        let (gm, _, creds) = gm_initialize(&config, curve, &mut rng).map_err(|e| e.to_string())?;
        for target in 2..creds.len() {
            let report = partial_credential_attack(&gm, &creds[..2], &creds[target]).map_err(|e| e.to_string())?;
            attempts += report.candidates;
            if report.passing_peer > 0 || report.interpolated_point_passes_peer {
                passing.push(format!(
                    "seed {seed} target {}: {} of {} completions pass, interpolated forgery passes = {}",
                    creds[target].id, report.passing_peer, report.candidates, report.interpolated_point_passes_peer
                ));
            }
        }
    }
    ensure(passing.is_empty(), || format!("{secrecy}; but {} of {attempts} tried completions pass peer_confirm ({})", passing.len(), passing[0]))?;
    Ok(format!("{secrecy}; no completion passes peer_confirm"))
}

fn tamper_soundness() -> Outcome {
    let mut cases = 0;
    let curve = CurveParams::from_profile(Profile::Demo);
    for n in 1..=6 {
        for t in 1..=n {
            let mut rng = ChaCha20Rng::seed_from_u64((n * 10 + t) as u64);
            let config = GroupConfig { group_id: GroupId(1), threshold: t, size: n, x_range: XRange::disjoint(0, 64), secret: None };
            let (gm, params, creds) = gm_initialize(&config, curve, &mut rng).map_err(|e| e.to_string())?;
            let mut members: Vec<MemberState> = creds.into_iter().map(|c| MemberState::new(c, params.clone())).collect();
            let shares: Vec<_> = members.iter_mut().map(|m| m.public_share()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            ensure(peer_confirm(&params, &shares).is_ok_and(|r| r.accepted), || format!("honest t = {t} n = {n} rejected"))?;
            for j in 0..n {
                for delta in [1u128, 2, curve.order() as u128 - 1] {
                    let mut tampered = shares.clone();
                    tampered[j].point = tampered[j].point.add(&params.generator.scalar_mul(delta)).map_err(|e| e.to_string())?;
                    let peer = peer_confirm(&params, &tampered).map_err(|e| e.to_string())?;
                    ensure(!peer.accepted, || format!("peer accepts tampering at {j} (t = {t}, n = {n}, δ = {delta})"))?;
                    let msgs: Vec<_> = tampered
                        .iter()
                        .map(|s| Announce { x: s.x, point: s.point, id: s.id.clone() }.into_message(params.epoch))
                        .collect();
                    let gm_view = gm.confirm(&msgs);
                    ensure(!gm_view.accepted, || format!("GM accepts tampering at {j} (t = {t}, n = {n})"))?;
                    for (k, s) in tampered.iter().enumerate() {
                        let expected = if k == j { Verdict::Forged } else { Verdict::Valid };
                        ensure(gm_view.verdict_of(&s.id) == Some(expected), || {
                            format!("GM verdict for {} is {:?} with forger at {j} (t = {t}, n = {n})", s.id, gm_view.verdict_of(&s.id))
                        })?;
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} tamperings rejected by peers and attributed by the GM"))
}

fn deterministic(c: &SimConfig) -> Result<ScenarioVerdict, String> {
    let (t1, v1) = run_scenario(c).map_err(|e| e.to_string())?;
    let (t2, v2) = run_scenario(c).map_err(|e| e.to_string())?;
    ensure(t1.to_jsonl() == t2.to_jsonl() && v1.to_json() == v2.to_json(), || format!("{} seed {} not deterministic", c.scenario, c.seed))?;
    Ok(v1)
}

fn vulnerability_matrix() -> Outcome {
    let mut runs = 0;
    for seed in [1, 2, 3] {
        let mut replay = SimConfig::single_group(ScenarioId::Replay, seed, 2, 4);
        replay.adversary = Some(AdversarySpec::default());
        let v = deterministic(&replay)?;
        expect_property(&v, "VulnerabilityReproduced")?;
        ensure(v.outcome == "ReplayAccepted", || format!("replay without refresh: {}", v.outcome))?;
        replay.adversary = Some(AdversarySpec { refresh: true, ..Default::default() });
        let v = deterministic(&replay)?;
        expect_property(&v, "ReplayRejected")?;
        ensure(v.outcome == "ReplayRejected", || format!("replay after refresh: {}", v.outcome))?;

        for profile in [Profile::Demo, Profile::Toy43] {
            let mut mitm = SimConfig::single_group(ScenarioId::Mitm, seed, 2, 3);
            mitm.profile = profile;
            let v = deterministic(&mitm)?;
            ensure(v.passed && v.outcome == "ExtractionFailed", || format!("passive mitm on {}: {} {:?}", profile.name(), v.outcome, v.properties))?;
        }

        let mut dos = SimConfig::single_group(ScenarioId::DosCorruptShare, seed, 3, 4);
        dos.retry_limit = 3;
        let v = deterministic(&dos)?;
        ensure(v.outcome == "DeniedByDos", || format!("corrupt-share: {}", v.outcome))?;
        ensure(v.observation("rounds_failed") == Some(&serde_json::json!(3)), || format!("rounds_failed {:?}", v.observation("rounds_failed")))?;

        let v = deterministic(&SimConfig::single_group(ScenarioId::NodeCompromise, seed, 3, 4))?;
        expect_property(&v, "AdversaryAuthenticated")?;
        runs += 6;
    }
    Ok(format!("{runs} adversarial runs, each repeated byte-identically"))
}

fn determinism() -> Outcome {
    let mut runs = 0;
    for seed in [1, 7] {
        for scenario in ScenarioId::ALL {
            let c = match scenario {
                ScenarioId::HandoverGm | ScenarioId::HandoverPeer => two_groups(scenario, seed, 2, 4),
                _ => SimConfig::single_group(scenario, seed, 2, 4),
            };
            deterministic(&c)?;
            runs += 1;
        }
    }
    Ok(format!("{runs} scenario runs byte-identical on repeat"))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: "1", name: "cost table", limit: secs(1), check: cost_table },
        Criterion { id: "2", name: "one multiplication per member", limit: secs(5), check: one_multiplication },
        Criterion { id: "3", name: "honest runs", limit: secs(60), check: honest_grid },
        Criterion { id: "4", name: "pairing correctness", limit: secs(10), check: pairing_correctness },
        Criterion { id: "5", name: "perfect secrecy", limit: secs(10), check: perfect_secrecy },
        Criterion { id: "6", name: "tamper soundness", limit: secs(10), check: tamper_soundness },
        Criterion { id: "7", name: "vulnerability matrix", limit: secs(30), check: vulnerability_matrix },
        Criterion { id: "8", name: "determinism", limit: None, check: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({}): {detail} [{elapsed:.2?}]", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({}): {why} [{elapsed:.2?}]", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
