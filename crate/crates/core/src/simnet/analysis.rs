//! Brute-force adversary analyses used by the attack scenarios and the acceptance suite.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore};

use super::bus::Transcript;
use crate::algebra::{CurveParams, CurvePoint, FieldElement, FieldParams};
use crate::cryptoprims::{decrypt, kdf};
use crate::error::{Error, Result};
use crate::ids::MemberId;
use crate::pairing::{GtElement, PairingEngine};
use crate::protocol::message::{open_sealed, Announce};
use crate::protocol::{key_context, peer_confirm, stage, Address, Credential, GmState, MessageKind, Verdict};
use crate::sss::{interpolate_points_at, PublicShare, Share};

/// For each candidate secret σ, the number of polynomials of degree < `t` over `field`
/// that pass through `shares` and have `f(0) = σ`. Exhaustive over all |F|^t polynomials.
pub fn consistent_polynomials(field: FieldParams, t: usize, shares: &[Share]) -> Vec<u64> {
    let q = field.modulus();
    let mut counts = vec![0u64; q as usize];
    let total = q.pow(t as u32);
    let mut coeffs = vec![field.zero(); t];
    for code in 0..total {
        let mut c = code;
        for slot in coeffs.iter_mut() {
            *slot = field.element(c % q);
            c /= q;
        }
        let eval = |x: FieldElement| coeffs.iter().rev().fold(field.zero(), |acc, a| acc * x + *a);
        if shares.iter().all(|s| eval(s.x) == s.y) {
            counts[coeffs[0].value() as usize] += 1;
        }
    }
    counts
}

/// What an adversary holding `t − 1` real credentials can do against one further member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletionReport {
    /// Candidate values `y*` tried for the missing member (all of F_r).
    pub candidates: u64,
    /// `y*` for which `t − 1` stolen shares plus `(x*, y*·P)` pass the aggregate check.
    pub passing_peer: u64,
    /// `y*` for which the GM accepts `(x*, y*·P)` as the member.
    pub passing_gm: u64,
    /// `Σ L_k(x*)·y_k·P + L_0(x*)·Q`, built without any search.
    pub interpolated_point_passes_gm: bool,
    pub interpolated_point_passes_peer: bool,
}

/// Enumerates every completion `y*` of the stolen credentials for `target`'s public `x`.
pub fn partial_credential_attack(gm: &GmState, stolen: &[Credential], target: &Credential) -> Result<CompletionReport> {
    let params = gm.params();
    let curve = params.curve;
    let fr = curve.scalar_field();
    let stolen_public: Vec<PublicShare> = stolen
        .iter()
        .map(|c| PublicShare { x: c.share.x, point: curve.mul_generator(&c.share.y), id: c.id.clone() })
        .collect();
    let gm_accepts = |point: CurvePoint| {
        let msg = Announce { x: target.share.x, point, id: target.id.clone() }.into_message(params.epoch);
        gm.confirm(&[msg]).verdict_of(&target.id) == Some(Verdict::Valid)
    };
    let peer_accepts = |point: CurvePoint| -> Result<bool> {
        let mut shares = stolen_public.clone();
        shares.push(PublicShare { x: target.share.x, point, id: target.id.clone() });
        Ok(peer_confirm(params, &shares)?.accepted)
    };
    let mut report = CompletionReport {
        candidates: curve.order(),
        passing_peer: 0,
        passing_gm: 0,
        interpolated_point_passes_gm: false,
        interpolated_point_passes_peer: false,
    };
    let mut point = CurvePoint::Identity;
    for _ in 0..curve.order() {
        report.passing_peer += u64::from(peer_accepts(point)?);
        report.passing_gm += u64::from(gm_accepts(point));
        point = point.add(&params.generator)?;
    }
    let mut known: Vec<(FieldElement, CurvePoint)> = vec![(fr.zero(), params.q)];
    known.extend(stolen_public.iter().map(|s| (s.x, s.point)));
    let forged = interpolate_points_at(&curve, &known, target.share.x)?;
    report.interpolated_point_passes_gm = gm_accepts(forged);
    report.interpolated_point_passes_peer = peer_accepts(forged)?;
    Ok(report)
}

/// `Σ_{i∈S} points_i` for every nonempty subset S.
pub fn subset_sums(points: &[CurvePoint]) -> Result<Vec<CurvePoint>> {
    let mut sums = Vec::with_capacity((1 << points.len()) - 1);
    for mask in 1u32..(1 << points.len()) {
        let mut acc = CurvePoint::Identity;
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                acc = acc.add(p)?;
            }
        }
        sums.push(acc);
    }
    Ok(sums)
}

/// Outcome of trying every structural key candidate against captured EncShares.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateReport {
    pub links: u64,
    pub candidates_per_link: u64,
    pub decryptions: u64,
}

/// For every captured EncShare from U_i to U_j, tries `kdf(e(U, V))` for all `U, V` that are
/// subset sums of `{P, Q, A_i, A_j}` (the announces as seen on the wire).
pub fn public_candidate_search(transcript: &Transcript, pairing: &PairingEngine, q: &CurvePoint) -> Result<CandidateReport> {
    let curve = *pairing.curve();
    let mut announces: BTreeMap<MemberId, CurvePoint> = BTreeMap::new();
    for e in transcript.of_kind(MessageKind::PublicShareAnnounce) {
        if let Ok(a) = Announce::decode(&e.message, &curve) {
            announces.entry(a.id).or_insert(a.point);
        }
    }
    let mut seen = BTreeSet::new();
    let mut report = CandidateReport::default();
    for e in transcript.of_kind(MessageKind::EncShare) {
        let (Address::Member(from), Address::Member(to)) = (&e.message.sender, &e.to) else { continue };
        if !seen.insert((from.clone(), to.clone(), e.message.payload.clone())) {
            continue;
        }
        let (Some(a), Some(b)) = (announces.get(from), announces.get(to)) else { continue };
        let ct = open_sealed(&e.message, MessageKind::EncShare)?;
        let sums = subset_sums(&[curve.generator(), *q, *a, *b])?;
        let ctx = key_context(stage::PAIRWISE, from.as_str(), to.as_str());
        let mut candidates: BTreeMap<Vec<u8>, GtElement> = BTreeMap::new();
        for u in &sums {
            for v in &sums {
                let z = pairing.pair(u, v)?;
                candidates.insert(z.to_bytes(), z);
            }
        }
        report.links += 1;
        report.candidates_per_link = report.candidates_per_link.max(candidates.len() as u64);
        for z in candidates.values() {
            if decrypt(&kdf(z, &ctx), &ct).is_ok() {
                report.decryptions += 1;
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearStrategyReport {
    pub strategies: u64,
    pub instances: usize,
    /// Strategies that produced the pairwise key on every instance.
    pub universal: u64,
}

/// Over `instances` random sessions `(A = αP, B = βP, Q = sP)` with key `e(αβP, Q)`, counts
/// the strategies `e(aA + bB + cQ + dP, V)`, `V ∈ {P, Q, A, B}`, `a, b, c, d ∈ F_r`, that hit
/// the key every time. Exhaustive; meant for r of a few dozen at most.
pub fn linear_strategy_search<R: RngCore>(curve: &CurveParams, instances: usize, rng: &mut R) -> Result<LinearStrategyReport> {
    let r = curve.order();
    if r > 64 {
        return Err(Error::InvalidOperand("linear strategy search needs a toy subgroup"));
    }
    let pairing = PairingEngine::new(*curve)?;
    let p = curve.generator();
    let subgroup: Vec<CurvePoint> = (0..r).map(|k| p.scalar_mul(k as u128)).collect();
    struct Instance {
        multiples: [Vec<CurvePoint>; 4],
        table: Vec<[GtElement; 4]>,
        key: GtElement,
    }
    let mut sessions = Vec::with_capacity(instances);
    for _ in 0..instances {
        let (alpha, beta, s) = (rng.gen_range(1..r), rng.gen_range(1..r), rng.gen_range(1..r));
        let (a, b, q) = (p.scalar_mul(alpha as u128), p.scalar_mul(beta as u128), p.scalar_mul(s as u128));
        let key = pairing.pair(&b.scalar_mul(alpha as u128), &q)?;
        let vs = [p, q, a, b];
        let table = subgroup
            .iter()
            .map(|u| -> Result<[GtElement; 4]> {
                Ok([pairing.pair(u, &vs[0])?, pairing.pair(u, &vs[1])?, pairing.pair(u, &vs[2])?, pairing.pair(u, &vs[3])?])
            })
            .collect::<Result<_>>()?;
        let mult = |base: CurvePoint| (0..r).map(|k| base.scalar_mul(k as u128)).collect::<Vec<_>>();
        sessions.push(Instance { multiples: [mult(a), mult(b), mult(q), mult(p)], table, key });
    }
    let index_of = |pt: &CurvePoint| subgroup.iter().position(|s| s == pt).expect("sum stays in the subgroup");
    let mut universal = 0;
    for code in 0..r.pow(4) {
        let coeffs = [code % r, code / r % r, code / (r * r) % r, code / (r * r * r)];
        let mut alive = [true; 4];
        for inst in &sessions {
            let mut u = CurvePoint::Identity;
            for (m, c) in inst.multiples.iter().zip(coeffs) {
                u = u.add(&m[c as usize])?;
            }
            let row = &inst.table[index_of(&u)];
            for (v, live) in alive.iter_mut().enumerate() {
                *live &= row[v] == inst.key;
            }
            if !alive.iter().any(|x| *x) {
                break;
            }
        }
        universal += alive.iter().filter(|x| **x).count() as u64;
    }
    Ok(LinearStrategyReport { strategies: 4 * r.pow(4), instances, universal })
}

/// Brute-force discrete log of `point` to base P. Only feasible for toy subgroups.
pub fn toy_discrete_log(curve: &CurveParams, point: &CurvePoint) -> Option<u64> {
    let mut acc = CurvePoint::Identity;
    for k in 0..curve.order().min(1 << 20) {
        if acc == *point {
            return Some(k);
        }
        acc = acc.add(&curve.generator()).ok()?;
    }
    None
}
