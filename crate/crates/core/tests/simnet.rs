use gka_core::algebra::Profile;
use gka_core::simnet::{run_scenario, AdversarySpec, GroupSpec, MitmMode, ScenarioId, SimConfig};
use gka_core::Error;

fn one(scenario: ScenarioId, seed: u64, t: usize, n: usize) -> SimConfig {
    SimConfig::single_group(scenario, seed, t, n)
}

fn two(scenario: ScenarioId, seed: u64) -> SimConfig {
    let mut c = one(scenario, seed, 2, 3);
    c.groups.push(GroupSpec { id: 2, t: 3, n: 4, x_offset: None, capacity: None });
    c
}

fn with_adversary(mut c: SimConfig, spec: AdversarySpec) -> SimConfig {
    c.adversary = Some(spec);
    c
}

#[test]
fn honest_peer_confirm_with_subset_of_members() {
    let mut c = one(ScenarioId::HonestPeerConfirm, 1, 3, 5);
    c.participants = Some(4);
    let (transcript, v) = run_scenario(&c).unwrap();
    assert!(v.passed, "{v:?}");
    assert_eq!(v.outcome, "Accepted");
    assert_eq!(v.costs.len(), 4);
    assert!(!transcript.events().is_empty());
    let steps: Vec<u64> = transcript.events().iter().map(|e| e.step).collect();
    assert!(steps.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn below_threshold_is_rejected() {
    let mut c = one(ScenarioId::HonestPeerConfirm, 1, 3, 5);
    c.participants = Some(2);
    let (_, v) = run_scenario(&c).unwrap();
    assert!(!v.passed);
    assert_eq!(v.outcome, "Rejected");
}

#[test]
fn honest_scenarios_pass() {
    for scenario in [ScenarioId::HonestGmConfirm, ScenarioId::KeyAgreement, ScenarioId::RefreshCycle, ScenarioId::Eavesdrop] {
        let (_, v) = run_scenario(&one(scenario, 3, 3, 5)).unwrap();
        assert!(v.passed, "{scenario}: {v:?}");
    }
    let (_, v) = run_scenario(&one(ScenarioId::KeyAgreement, 3, 3, 5)).unwrap();
    assert_eq!(v.property("MasterKeyRecovered"), Some(true));
}

#[test]
fn handovers_deliver_and_reject_forgeries() {
    for scenario in [ScenarioId::HandoverGm, ScenarioId::HandoverPeer] {
        let (_, v) = run_scenario(&two(scenario, 4)).unwrap();
        assert!(v.passed, "{scenario}: {v:?}");
        assert_eq!(v.outcome, "HostSecretDelivered");
        let mut forged = two(scenario, 4);
        forged.forged_visitor = true;
        let (_, v) = run_scenario(&forged).unwrap();
        assert!(v.passed, "{scenario}: {v:?}");
        assert_eq!(v.outcome, "HandoverRejected");
    }
    let (_, v) = run_scenario(&two(ScenarioId::HandoverGm, 4)).unwrap();
    assert_eq!(v.observation("visitor_scalar_mults"), Some(&serde_json::json!(2)));
}

#[test]
fn handover_needs_two_groups() {
    assert!(matches!(run_scenario(&one(ScenarioId::HandoverGm, 1, 2, 3)), Err(Error::Config(_))));
}

#[test]
fn replay_matrix() {
    let base = one(ScenarioId::Replay, 5, 2, 4);
    let (_, v) = run_scenario(&with_adversary(base.clone(), AdversarySpec::default())).unwrap();
    assert_eq!(v.property("VulnerabilityReproduced"), Some(true));
    assert_eq!(v.outcome, "ReplayAccepted");
    let (_, v) = run_scenario(&with_adversary(base.clone(), AdversarySpec { refresh: true, ..Default::default() })).unwrap();
    assert_eq!(v.property("ReplayRejected"), Some(true));
    assert!(v.passed);
    let (_, v) = run_scenario(&with_adversary(base, AdversarySpec { race: true, ..Default::default() })).unwrap();
    assert_eq!(v.property("ReplayAcceptedAsMember"), Some(true));
}

#[test]
fn mitm_passive_fails_and_substitution_disrupts() {
    let (_, v) = run_scenario(&one(ScenarioId::Mitm, 6, 2, 3)).unwrap();
    assert!(v.passed, "{v:?}");
    assert_eq!(v.outcome, "ExtractionFailed");
    assert_eq!(v.observation("candidate_decryptions"), Some(&serde_json::json!(0)));

    let mut toy = one(ScenarioId::Mitm, 6, 2, 3);
    toy.profile = Profile::Toy43;
    let (_, v) = run_scenario(&toy).unwrap();
    assert!(v.passed, "{v:?}");
    assert_eq!(v.property("NoUniversalLinearStrategy"), Some(true));
    assert_eq!(v.observation("ToyDiscreteLogRecoversKey"), Some(&serde_json::json!(true)));

    let active = with_adversary(one(ScenarioId::Mitm, 6, 3, 4), AdversarySpec { mode: MitmMode::Substitute, ..Default::default() });
    let (transcript, v) = run_scenario(&active).unwrap();
    assert!(v.passed, "{v:?}");
    assert_eq!(v.observation("VictimShareExposed"), Some(&serde_json::json!(true)));
    assert!(transcript.to_jsonl().contains("\"disposition\":\"modified\""));
}

#[test]
fn node_compromise_authenticates() {
    let (transcript, v) = run_scenario(&one(ScenarioId::NodeCompromise, 7, 3, 4)).unwrap();
    assert!(v.passed, "{v:?}");
    assert_eq!(v.outcome, "AdversaryAuthenticated");
    assert!(transcript.to_jsonl().contains("\"disposition\":\"injected\""));
}

#[test]
fn dos_scenarios() {
    let (_, v) = run_scenario(&one(ScenarioId::DosCorruptShare, 8, 3, 4)).unwrap();
    assert!(v.passed, "{v:?}");
    assert_eq!(v.outcome, "DeniedByDos");
    assert_eq!(v.observation("rounds_failed"), Some(&serde_json::json!(3)));

    let flood = AdversarySpec { flood_per_sender: 3, budget_per_member: 2, ..Default::default() };
    let (_, v) = run_scenario(&with_adversary(one(ScenarioId::DosFlood, 8, 3, 5), flood)).unwrap();
    assert_eq!(v.outcome, "RoundAborted");
    assert_eq!(v.observation("arrivals_at_confirmation_point"), Some(&serde_json::json!(15)));
    let (_, v) = run_scenario(&one(ScenarioId::DosFlood, 8, 3, 5)).unwrap();
    assert_eq!(v.outcome, "RoundCompleted");
    assert!(!v.passed);
}

#[test]
fn runs_are_deterministic() {
    for scenario in ScenarioId::ALL {
        let c = if matches!(scenario, ScenarioId::HandoverGm | ScenarioId::HandoverPeer) { two(scenario, 9) } else { one(scenario, 9, 2, 4) };
        let (t1, v1) = run_scenario(&c).unwrap();
        let (t2, v2) = run_scenario(&c).unwrap();
        assert_eq!(t1.to_jsonl(), t2.to_jsonl(), "{scenario}");
        assert_eq!(v1.to_json(), v2.to_json(), "{scenario}");
    }
}

#[test]
fn unknown_scenario_is_an_error() {
    let mut c = one(ScenarioId::KeyAgreement, 1, 2, 3);
    c.scenario = "warp".into();
    assert_eq!(run_scenario(&c).unwrap_err(), Error::UnknownScenario("warp".into()));
}
