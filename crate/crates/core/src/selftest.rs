//! Fixed-seed invariant suites run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::algebra::{CurveParams, CurvePoint, FieldParams, Fp2Element, Profile};
use crate::pairing::{gt_pow, PairingEngine};
use crate::simnet::{run_scenario, GroupSpec, ScenarioId, SimConfig};
use crate::simnet::analysis::consistent_polynomials;
use crate::sss::{interpolate_in_exponent, interpolate_secret, issue_share, sample_polynomial, PublicShare, Share};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        Self { name, checks: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_all() -> Vec<SuiteReport> {
    vec![algebra(), pairing(), sss(), end_to_end()]
}

fn algebra() -> SuiteReport {
    let mut s = SuiteReport::new("algebra");
    let f = FieldParams::new(23).expect("23 is prime");
    let all: Vec<_> = (0..23).map(|v| f.element(v)).collect();
    for &a in &all {
        if !a.is_zero() {
            s.check(a * a.inv().expect("nonzero") == f.one(), || format!("inverse of {a:?}"));
        }
        for &b in &all {
            s.check(a + b == b + a && a * b == b * a, || format!("commutativity at {a:?}, {b:?}"));
            for &c in all.iter().step_by(5) {
                s.check(a * (b + c) == a * b + a * c, || format!("distributivity at {a:?}, {b:?}, {c:?}"));
            }
        }
    }
    let imag = Fp2Element::imaginary_unit(f);
    s.check(imag * imag == -Fp2Element::one(f), || "i² ≠ −1".into());
    for profile in [Profile::Toy23, Profile::Toy43, Profile::Toy59] {
        let curve = CurveParams::from_profile(profile);
        let g = curve.generator();
        s.check(!g.is_identity() && g.scalar_mul(curve.order() as u128).is_identity(), || {
            format!("{} generator order", profile.name())
        });
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (a, b) = (rng.gen_range(0..curve.order()) as u128, rng.gen_range(0..curve.order()) as u128);
            let sum = g.scalar_mul(a).add(&g.scalar_mul(b)).unwrap_or(CurvePoint::Identity);
            s.check(sum == g.scalar_mul(a + b), || format!("{} scalar additivity", profile.name()));
        }
    }
    s
}

fn pairing() -> SuiteReport {
    let mut s = SuiteReport::new("pairing");
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for profile in [Profile::Toy43, Profile::Demo] {
        let curve = CurveParams::from_profile(profile);
        let Ok(engine) = PairingEngine::new(curve) else {
            s.check(false, || format!("{} pairing is degenerate", profile.name()));
            continue;
        };
        let g = curve.generator();
        let base = engine.pair(&g, &g).expect("generator in subgroup");
        s.check(!base.is_one(), || format!("{} e(P, P) = 1", profile.name()));
        for _ in 0..50 {
            let r = curve.order();
            let (a, b) = (rng.gen_range(1..r), rng.gen_range(1..r));
            let lhs = engine.pair(&g.scalar_mul(a as u128), &g.scalar_mul(b as u128));
            let rhs = gt_pow(&base, (a as u128 * b as u128) % r as u128);
            s.check(lhs.as_ref().ok() == Some(&rhs), || format!("{} bilinearity at a = {a}, b = {b}", profile.name()));
        }
    }
    s
}

fn sss() -> SuiteReport {
    let mut s = SuiteReport::new("sss");
    let f7 = FieldParams::new(7).expect("7 is prime");
    let shares = [Share { x: f7.element(1), y: f7.element(5) }, Share { x: f7.element(3), y: f7.element(2) }];
    s.check(interpolate_secret(&shares) == Ok(f7.element(3)), || "f = 3 + 2x from (1, 5), (3, 2)".into());

    let curve = CurveParams::from_profile(Profile::Demo);
    let fr = curve.scalar_field();
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    for t in 1..=4usize {
        let secret = fr.element(rng.gen_range(0..fr.modulus()));
        let poly = sample_polynomial(t, secret, &mut rng).expect("t ≥ 1");
        let issued: Vec<Share> = (1..=5).map(|x| issue_share(&poly, fr.element(x)).expect("x ≠ 0")).collect();
        for mask in 1u32..(1 << issued.len()) {
            let subset: Vec<Share> = issued.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| *s).collect();
            if subset.len() >= t {
                s.check(interpolate_secret(&subset) == Ok(secret), || format!("t = {t}, subset {mask:b}"));
            }
        }
        let public: Vec<PublicShare> = issued[..t]
            .iter()
            .map(|sh| PublicShare { x: sh.x, point: curve.mul_generator(&sh.y), id: crate::ids::MemberId::for_member(crate::ids::GroupId(1), sh.x.value() as usize) })
            .collect();
        s.check(interpolate_in_exponent(&curve, &public) == Ok(curve.mul_generator(&secret)), || format!("exponent recombination at t = {t}"));
    }

    let f11 = FieldParams::new(11).expect("11 is prime");
    for (x1, x2) in [(1, 2), (3, 7), (5, 10)] {
        let two = [Share { x: f11.element(x1), y: f11.element(4) }, Share { x: f11.element(x2), y: f11.element(9) }];
        s.check(consistent_polynomials(f11, 3, &two) == vec![1; 11], || format!("perfect secrecy at x = {x1}, {x2}"));
    }
    s
}

fn end_to_end() -> SuiteReport {
    let mut s = SuiteReport::new("end-to-end");
    for seed in [1, 2] {
        for scenario in [ScenarioId::HonestGmConfirm, ScenarioId::HonestPeerConfirm, ScenarioId::KeyAgreement, ScenarioId::RefreshCycle] {
            let config = SimConfig::single_group(scenario, seed, 3, 5);
            let ok = run_scenario(&config).is_ok_and(|(_, v)| v.passed);
            s.check(ok, || format!("{scenario} seed {seed}"));
        }
        for scenario in [ScenarioId::HandoverGm, ScenarioId::HandoverPeer] {
            let mut config = SimConfig::single_group(scenario, seed, 2, 3);
            config.groups.push(GroupSpec { id: 2, t: 3, n: 4, x_offset: None, capacity: None });
            let ok = run_scenario(&config).is_ok_and(|(_, v)| v.passed);
            s.check(ok, || format!("{scenario} seed {seed}"));
        }
    }
    s
}
