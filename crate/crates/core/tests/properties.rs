use gka_core::algebra::{CurveParams, FieldParams, Profile};
use gka_core::ids::{GroupId, MemberId};
use gka_core::pairing::{gt_pow, PairingEngine};
use gka_core::sss::{interpolate_in_exponent, interpolate_secret, issue_share, lagrange_coefficient, sample_polynomial, PublicShare, Share};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const DEMO_P: u64 = 2147482867;

fn demo() -> CurveParams {
    CurveParams::from_profile(Profile::Demo)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in 0..DEMO_P, b in 0..DEMO_P, c in 0..DEMO_P) {
        let f = FieldParams::new(DEMO_P).unwrap();
        let (a, b, c) = (f.element(a), f.element(b), f.element(c));
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a - a, f.zero());
        if !a.is_zero() {
            prop_assert_eq!(a * a.inv().unwrap(), f.one());
            prop_assert_eq!(a.pow(DEMO_P as u128 - 1), f.one());
        }
    }

    #[test]
    fn any_t_shares_recover_the_secret(seed in any::<u64>(), t in 1usize..=5, extra in 0usize..=3, skip in 0usize..8) {
        let fr = demo().scalar_field();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let secret = fr.element(seed % fr.modulus());
        let poly = sample_polynomial(t, secret, &mut rng).unwrap();
        let n = t + extra;
        let shares: Vec<Share> = (1..=n as u64).map(|x| issue_share(&poly, fr.element(x * 7 + 1)).unwrap()).collect();
        let start = skip % (extra + 1);
        let subset = &shares[start..start + t];
        prop_assert_eq!(interpolate_secret(subset).unwrap(), secret);
        let xs: Vec<_> = subset.iter().map(|s| s.x).collect();
        let sum = (0..t).fold(fr.zero(), |acc, i| acc + lagrange_coefficient(&xs, i).unwrap());
        prop_assert_eq!(sum, fr.one());
    }

    #[test]
    fn exponent_interpolation_reaches_q(seed in any::<u64>(), t in 1usize..=4) {
        let curve = demo();
        let fr = curve.scalar_field();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let secret = fr.element(seed % fr.modulus());
        let poly = sample_polynomial(t, secret, &mut rng).unwrap();
        let public: Vec<PublicShare> = (1..=t as u64)
            .map(|x| {
                let s = issue_share(&poly, fr.element(x)).unwrap();
                PublicShare { x: s.x, point: curve.mul_generator(&s.y), id: MemberId::for_member(GroupId(1), x as usize) }
            })
            .collect();
        prop_assert_eq!(interpolate_in_exponent(&curve, &public).unwrap(), curve.mul_generator(&secret));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairing_is_bilinear_on_demo_curve(a in 1u64..536870717, b in 1u64..536870717) {
        let curve = demo();
        let engine = PairingEngine::new(curve).unwrap();
        let g = curve.generator();
        let base = engine.pair(&g, &g).unwrap();
        let r = curve.order() as u128;
        let lhs = engine.pair(&g.scalar_mul(a as u128), &g.scalar_mul(b as u128)).unwrap();
        prop_assert_eq!(lhs, gt_pow(&base, a as u128 * b as u128 % r));
        let swapped = engine.pair(&g.scalar_mul(b as u128), &g.scalar_mul(a as u128)).unwrap();
        prop_assert_eq!(lhs, swapped);
    }
}
