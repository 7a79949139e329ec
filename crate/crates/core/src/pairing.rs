//! Symmetric reduced Tate pairing on y² = x³ + x.
//!
//! `pair(A, B) = f_{r,A}(φ(B))^((p² − 1)/r)` where `φ(x, y) = (−x, i·y)` is the distortion
//! map into E(F_p²). Vertical lines take values in F_p* at φ(B) and vanish under the final
//! exponentiation, so the Miller loop skips them.

use crate::algebra::{CurveParams, CurvePoint, FieldParams, Fp2Element};
use crate::error::{Error, Result};

/// A point of E(F_p²), produced only by the distortion map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fp2Point {
    Identity,
    Affine { x: Fp2Element, y: Fp2Element },
}

impl Fp2Point {
    pub fn is_on_curve(&self) -> bool {
        match self {
            Fp2Point::Identity => true,
            Fp2Point::Affine { x, y } => y.square() == x.square() * *x + *x,
        }
    }
}

/// `(x, y) ↦ (−x, i·y)`.
pub fn distortion_map(point: &CurvePoint) -> Fp2Point {
    match point.coordinates() {
        None => Fp2Point::Identity,
        Some((x, y)) => {
            let zero = x.params().zero();
            Fp2Point::Affine {
                x: Fp2Element::from_base(-x),
                y: Fp2Element::new(zero, y).expect("same field"),
            }
        }
    }
}

/// Element of the order-r subgroup of F_p²*.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GtElement(Fp2Element);

impl GtElement {
    pub fn one(field: FieldParams) -> Self {
        GtElement(Fp2Element::one(field))
    }

    pub fn value(&self) -> Fp2Element {
        self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn mul(&self, other: &Self) -> Self {
        GtElement(self.0 * other.0)
    }

    pub fn inverse(&self) -> Self {
        // Order-r elements have norm 1, so the inverse is the conjugate.
        GtElement(self.0.conjugate())
    }

    /// `c0 ‖ c1` fixed-width big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.to_bytes()
    }
}

/// `z^k` in F_p².
pub fn gt_pow(z: &GtElement, k: u128) -> GtElement {
    GtElement(z.0.pow(k))
}

/// Pairing over one configured curve.
#[derive(Clone, Copy, Debug)]
pub struct PairingEngine {
    curve: CurveParams,
}

impl PairingEngine {
    /// Fails if the pairing is degenerate on the curve's generator.
    pub fn new(curve: CurveParams) -> Result<Self> {
        let engine = Self { curve };
        let g = curve.generator();
        if engine.pair(&g, &g)?.is_one() {
            return Err(Error::InvalidCurve("pairing degenerate on generator".into()));
        }
        Ok(engine)
    }

    pub fn curve(&self) -> &CurveParams {
        &self.curve
    }

    pub fn pair(&self, a: &CurvePoint, b: &CurvePoint) -> Result<GtElement> {
        if !self.curve.in_subgroup(a) || !self.curve.in_subgroup(b) {
            return Err(Error::NotInSubgroup);
        }
        let field = self.curve.field();
        let (Some(_), Fp2Point::Affine { x, y }) = (a.coordinates(), distortion_map(b)) else {
            return Ok(GtElement::one(field));
        };
        let f = self.miller_loop(a, x, y)?;
        Ok(self.final_exponentiation(f))
    }

    fn miller_loop(&self, a: &CurvePoint, ex: Fp2Element, ey: Fp2Element) -> Result<Fp2Element> {
        let order = self.curve.order();
        let mut f = Fp2Element::one(self.curve.field());
        let mut t = *a;
        for bit in (0..63 - order.leading_zeros()).rev() {
            f = f.square() * line_value(&t, &t, ex, ey)?;
            t = t.double();
            if (order >> bit) & 1 == 1 {
                f = f * line_value(&t, a, ex, ey)?;
                t = t.add(a)?;
            }
        }
        debug_assert!(t.is_identity(), "r·A must be the identity");
        Ok(f)
    }

    fn final_exponentiation(&self, f: Fp2Element) -> GtElement {
        // f^(p−1) = conj(f)/f, then raise to (p + 1)/r.
        let easy = f.conjugate() * f.inv().expect("Miller value is nonzero");
        GtElement(easy.pow(self.curve.cofactor() as u128))
    }
}

/// Line through `t` and `u` (tangent when equal) evaluated at `(ex, ey)`.
/// Vertical lines return 1.
fn line_value(t: &CurvePoint, u: &CurvePoint, ex: Fp2Element, ey: Fp2Element) -> Result<Fp2Element> {
    let (Some((tx, ty)), Some((ux, uy))) = (t.coordinates(), u.coordinates()) else {
        return Ok(Fp2Element::one(ex.params()));
    };
    let slope = if tx == ux {
        if ty != uy || ty.is_zero() {
            return Ok(Fp2Element::one(ex.params()));
        }
        let f = tx.params();
        (f.element(3) * tx.square() + f.one()) * (ty + ty).inv()?
    } else {
        (uy - ty) * (ux - tx).inv()?
    };
    let value = ey - Fp2Element::from_base(ty) - (ex - Fp2Element::from_base(tx)).scale(slope);
    if value.is_zero() {
        return Err(Error::MillerDegenerate);
    }
    Ok(value)
}
