#![allow(dead_code)]

//! Brute-force oracles, kept separate from the library's own code paths.

use gka_core::algebra::{CurveParams, CurvePoint, FieldParams, Fp2Element};

/// Every point of y² = x³ + x over F_p by exhaustive search.
pub fn enumerate_points(p: u64) -> Vec<CurvePoint> {
    let f = FieldParams::new(p).unwrap();
    let mut pts = vec![CurvePoint::Identity];
    for x in 0..p {
        for y in 0..p {
            if (y * y) % p == (x * x % p * x + x) % p {
                pts.push(CurvePoint::new(f.element(x), f.element(y)).unwrap());
            }
        }
    }
    pts
}

/// The order-r subgroup, found by testing every point.
pub fn subgroup_points(curve: &CurveParams) -> Vec<CurvePoint> {
    let r = curve.order();
    enumerate_points(curve.field().modulus())
        .into_iter()
        .filter(|pt| {
            let mut acc = CurvePoint::Identity;
            for _ in 0..r {
                acc = acc.add(pt).unwrap();
            }
            acc.is_identity()
        })
        .collect()
}

/// Affine point over F_p² with its own naive group law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum P2 {
    O,
    A(Fp2Element, Fp2Element),
}

fn lift(pt: &CurvePoint) -> P2 {
    match pt.coordinates() {
        None => P2::O,
        Some((x, y)) => P2::A(Fp2Element::from_base(x), Fp2Element::from_base(y)),
    }
}

fn distort(pt: &CurvePoint) -> P2 {
    match pt.coordinates() {
        None => P2::O,
        Some((x, y)) => P2::A(
            Fp2Element::from_base(-x),
            Fp2Element::new(x.params().zero(), y).unwrap(),
        ),
    }
}

fn slope(t: P2, u: P2) -> Option<Fp2Element> {
    let (P2::A(tx, ty), P2::A(ux, uy)) = (t, u) else { return None };
    let f = tx.params();
    if tx == ux {
        if ty != uy || ty.is_zero() {
            return None;
        }
        let three = Fp2Element::from_base(f.element(3));
        let one = Fp2Element::one(f);
        Some((three * tx * tx + one) * (ty + ty).inv().unwrap())
    } else {
        Some((uy - ty) * (ux - tx).inv().unwrap())
    }
}

fn add(t: P2, u: P2) -> P2 {
    match (t, u) {
        (P2::O, q) | (q, P2::O) => q,
        (P2::A(tx, ty), P2::A(ux, _)) => match slope(t, u) {
            None => P2::O,
            Some(l) => {
                let x3 = l * l - tx - ux;
                P2::A(x3, l * (tx - x3) - ty)
            }
        },
    }
}

/// Value at `at` of the line through `t`, `u` (vertical when `u = −t`).
fn line(t: P2, u: P2, at: P2) -> Fp2Element {
    let P2::A(ax, ay) = at else { panic!("evaluation at infinity") };
    let P2::A(tx, ty) = t else { return Fp2Element::one(ax.params()) };
    match slope(t, u) {
        Some(l) => ay - ty - l * (ax - tx),
        None => ax - tx,
    }
}

fn vertical(r: P2, at: P2) -> Fp2Element {
    let P2::A(ax, _) = at else { panic!("evaluation at infinity") };
    match r {
        P2::O => Fp2Element::one(ax.params()),
        P2::A(rx, _) => ax - rx,
    }
}

/// `f_{r,A}(at)` built one point at a time: `f_{i+1} = f_i · ℓ_{iA,A} / v_{(i+1)A}`, so
/// div(f_i) = i(A) − (iA) − (i−1)(O) at every step.
fn miller_linear(a: P2, r: u64, at: P2) -> Fp2Element {
    let P2::A(ax, _) = at else { panic!() };
    let mut f = Fp2Element::one(ax.params());
    let mut t = a;
    for _ in 1..r {
        let next = add(t, a);
        f = f * line(t, a, at) * vertical(next, at).inv().unwrap();
        t = next;
    }
    assert_eq!(t, P2::O);
    f
}

/// Reduced Tate pairing with final exponent applied by repeated multiplication.
pub fn naive_tate(curve: &CurveParams, a: &CurvePoint, b: &CurvePoint) -> Fp2Element {
    let field = curve.field();
    if a.is_identity() || b.is_identity() {
        return Fp2Element::one(field);
    }
    let p = field.modulus() as u128;
    let f = miller_linear(lift(a), curve.order(), distort(b));
    let exponent = (p * p - 1) / curve.order() as u128;
    let mut acc = Fp2Element::one(field);
    for _ in 0..exponent {
        acc = acc * f;
    }
    acc
}

/// Weil pairing `(−1)^r f_{r,A}(φB) / f_{r,φB}(A)`.
pub fn naive_weil(curve: &CurveParams, a: &CurvePoint, b: &CurvePoint) -> Fp2Element {
    let field = curve.field();
    if a.is_identity() || b.is_identity() {
        return Fp2Element::one(field);
    }
    let (la, db) = (lift(a), distort(b));
    let r = curve.order();
    let value = miller_linear(la, r, db) * miller_linear(db, r, la).inv().unwrap();
    if r % 2 == 1 {
        -value
    } else {
        value
    }
}
