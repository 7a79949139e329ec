//! Shamir sharing over the scalar field F_r and Lagrange recombination, both on scalars
//! and on curve points ("in the exponent").

use std::collections::BTreeSet;

use rand::{Rng, RngCore};

use crate::algebra::{CurveParams, CurvePoint, FieldElement, FieldParams};
use crate::error::{Error, Result};
use crate::ids::MemberId;

/// `f(x) = a₀ + a₁x + … + a_{t−1}x^{t−1}` with `a₀ = s`.
#[derive(Clone, PartialEq, Eq)]
pub struct MasterPolynomial {
    coefficients: Vec<FieldElement>,
}

impl std::fmt::Debug for MasterPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MasterPolynomial(t = {}, ..)", self.coefficients.len())
    }
}

impl MasterPolynomial {
    pub fn from_coefficients(coefficients: Vec<FieldElement>) -> Result<Self> {
        let Some(first) = coefficients.first() else {
            return Err(Error::InvalidThreshold("t must be at least 1".into()));
        };
        if coefficients.iter().any(|c| c.params() != first.params()) {
            return Err(Error::ParamsMismatch);
        }
        Ok(Self { coefficients })
    }

    pub fn threshold(&self) -> usize {
        self.coefficients.len()
    }

    pub fn secret(&self) -> FieldElement {
        self.coefficients[0]
    }

    pub fn field(&self) -> FieldParams {
        self.coefficients[0].params()
    }

    pub fn coefficients(&self) -> &[FieldElement] {
        &self.coefficients
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: &FieldElement) -> Result<FieldElement> {
        let mut acc = self.field().zero();
        for c in self.coefficients.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c)?;
        }
        Ok(acc)
    }
}

/// Samples `a₁..a_{t−1}` uniformly with `a₀ = secret`.
pub fn sample_polynomial<R: RngCore>(
    t: usize,
    secret: FieldElement,
    rng: &mut R,
) -> Result<MasterPolynomial> {
    if t == 0 {
        return Err(Error::InvalidThreshold("t must be at least 1".into()));
    }
    let field = secret.params();
    let mut coefficients = Vec::with_capacity(t);
    coefficients.push(secret);
    for _ in 1..t {
        coefficients.push(field.element(rng.gen_range(0..field.modulus())));
    }
    Ok(MasterPolynomial { coefficients })
}

/// A member's `(x_i, f(x_i))`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Share {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl std::fmt::Debug for Share {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Share {{ x: {}, y: <redacted> }}", self.x)
    }
}

/// `(x_i, f(x_i)·P, ID_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicShare {
    pub x: FieldElement,
    pub point: CurvePoint,
    pub id: MemberId,
}

pub fn issue_share(poly: &MasterPolynomial, x: FieldElement) -> Result<Share> {
    if x.is_zero() {
        return Err(Error::ReservedEvaluationPoint);
    }
    Ok(Share { x, y: poly.evaluate(&x)? })
}

fn check_distinct(xs: &[FieldElement]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for x in xs {
        if !seen.insert(x.value()) {
            return Err(Error::DuplicateShareX(x.value()));
        }
    }
    Ok(())
}

fn check_nonzero(xs: &[FieldElement]) -> Result<()> {
    if xs.iter().any(FieldElement::is_zero) {
        return Err(Error::ReservedEvaluationPoint);
    }
    Ok(())
}

/// Lagrange basis polynomial `L_i(at) = Π_{r≠i} (at − x_r)/(x_i − x_r)`.
pub fn lagrange_basis_at(xs: &[FieldElement], i: usize, at: FieldElement) -> Result<FieldElement> {
    check_distinct(xs)?;
    let xi = *xs.get(i).ok_or(Error::InvalidOperand("index out of range"))?;
    let mut num = at.params().one();
    let mut den = at.params().one();
    for (r, xr) in xs.iter().enumerate() {
        if r != i {
            num = num.checked_mul(&at.checked_sub(xr)?)?;
            den = den.checked_mul(&xi.checked_sub(xr)?)?;
        }
    }
    num.checked_div(&den)
}

/// `λ_i = Π_{r≠i} (−x_r)/(x_i − x_r)`, the weight of share `i` when recovering `f(0)`.
pub fn lagrange_coefficient(xs: &[FieldElement], i: usize) -> Result<FieldElement> {
    check_nonzero(xs)?;
    let zero = xs.first().ok_or(Error::InvalidOperand("empty share set"))?.params().zero();
    lagrange_basis_at(xs, i, zero)
}

fn lagrange_coefficients(xs: &[FieldElement]) -> Result<Vec<FieldElement>> {
    check_nonzero(xs)?;
    check_distinct(xs)?;
    (0..xs.len()).map(|i| lagrange_coefficient(xs, i)).collect()
}

/// `Σ λ_i·y_i`.
pub fn interpolate_secret(shares: &[Share]) -> Result<FieldElement> {
    let first = shares.first().ok_or(Error::InsufficientShares { needed: 1, have: 0 })?;
    let xs: Vec<FieldElement> = shares.iter().map(|s| s.x).collect();
    let lambdas = lagrange_coefficients(&xs)?;
    let mut acc = first.y.params().zero();
    for (share, lambda) in shares.iter().zip(lambdas) {
        acc = acc.checked_add(&lambda.checked_mul(&share.y)?)?;
    }
    Ok(acc)
}

/// `Σ L_i(at)·point_i` over arbitrary (not necessarily nonzero) abscissae.
pub fn interpolate_points_at(
    curve: &CurveParams,
    points: &[(FieldElement, CurvePoint)],
    at: FieldElement,
) -> Result<CurvePoint> {
    if points.is_empty() {
        return Err(Error::InsufficientShares { needed: 1, have: 0 });
    }
    if points.iter().any(|(_, pt)| !curve.in_subgroup(pt)) {
        return Err(Error::NotInSubgroup);
    }
    let xs: Vec<FieldElement> = points.iter().map(|(x, _)| *x).collect();
    check_distinct(&xs)?;
    let mut acc = CurvePoint::Identity;
    for (i, (_, point)) in points.iter().enumerate() {
        let weight = lagrange_basis_at(&xs, i, at)?;
        acc = acc.add(&point.scalar_mul(weight.value() as u128))?;
    }
    Ok(acc)
}

/// `Σ λ_i·(f(x_i)·P)`, equal to `Q = s·P` for ≥ t valid public shares.
pub fn interpolate_in_exponent(curve: &CurveParams, shares: &[PublicShare]) -> Result<CurvePoint> {
    let xs: Vec<FieldElement> = shares.iter().map(|s| s.x).collect();
    check_nonzero(&xs)?;
    let points: Vec<(FieldElement, CurvePoint)> = shares.iter().map(|s| (s.x, s.point)).collect();
    interpolate_points_at(curve, &points, curve.scalar_field().zero())
}
