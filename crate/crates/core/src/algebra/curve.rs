use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::field::{is_prime, FieldElement, FieldParams};
use crate::error::{Error, Result};

const GENERATOR_ATTEMPTS: usize = 64;

/// A point on y² = x³ + x, affine or the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Identity,
    Affine { x: FieldElement, y: FieldElement },
}

impl CurvePoint {
    /// Builds an affine point, checking the curve equation.
    pub fn new(x: FieldElement, y: FieldElement) -> Result<Self> {
        if x.params() != y.params() {
            return Err(Error::ParamsMismatch);
        }
        let point = CurvePoint::Affine { x, y };
        if !point.is_on_curve() {
            return Err(Error::NotOnCurve);
        }
        Ok(point)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, CurvePoint::Identity)
    }

    pub fn is_on_curve(&self) -> bool {
        match self {
            CurvePoint::Identity => true,
            CurvePoint::Affine { x, y } => y.square() == x.square() * *x + *x,
        }
    }

    pub fn coordinates(&self) -> Option<(FieldElement, FieldElement)> {
        match self {
            CurvePoint::Identity => None,
            CurvePoint::Affine { x, y } => Some((*x, *y)),
        }
    }

    pub fn negate(&self) -> Self {
        match self {
            CurvePoint::Identity => CurvePoint::Identity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x: *x, y: -*y },
        }
    }

    pub fn double(&self) -> Self {
        match self {
            CurvePoint::Identity => CurvePoint::Identity,
            CurvePoint::Affine { x, y } => {
                if y.is_zero() {
                    return CurvePoint::Identity;
                }
                let f = x.params();
                let three_x2_plus_1 = f.element(3) * x.square() + f.one();
                let slope = three_x2_plus_1 * (*y + *y).inv().expect("y is nonzero");
                let x3 = slope.square() - *x - *x;
                let y3 = slope * (*x - x3) - *y;
                CurvePoint::Affine { x: x3, y: y3 }
            }
        }
    }

    /// Group law. Identity is neutral.
    pub fn add(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (CurvePoint::Identity, q) => Ok(*q),
            (p, CurvePoint::Identity) => Ok(*p),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                if x1.params() != x2.params() {
                    return Err(Error::ParamsMismatch);
                }
                if x1 == x2 {
                    if *y1 == -*y2 {
                        return Ok(CurvePoint::Identity);
                    }
                    return Ok(self.double());
                }
                let slope = (*y2 - *y1) * (*x2 - *x1).inv().expect("x1 != x2");
                let x3 = slope.square() - *x1 - *x2;
                let y3 = slope * (*x1 - x3) - *y1;
                Ok(CurvePoint::Affine { x: x3, y: y3 })
            }
        }
    }

    /// Left-to-right double-and-add.
    pub fn scalar_mul(&self, k: u128) -> Self {
        let mut acc = CurvePoint::Identity;
        if k == 0 || self.is_identity() {
            return acc;
        }
        for bit in (0..128 - k.leading_zeros()).rev() {
            acc = acc.double();
            if (k >> bit) & 1 == 1 {
                acc = acc.add(self).expect("same curve");
            }
        }
        acc
    }

    /// `0x00` for identity, else `0x04 ‖ x ‖ y` at the field's fixed width.
    pub fn encode(&self) -> Vec<u8> {
        match self {
            CurvePoint::Identity => vec![0x00],
            CurvePoint::Affine { x, y } => {
                let mut out = vec![0x04];
                out.extend(x.to_bytes());
                out.extend(y.to_bytes());
                out
            }
        }
    }

    pub fn decode(field: FieldParams, bytes: &[u8]) -> Result<Self> {
        match bytes.first() {
            Some(0x00) if bytes.len() == 1 => Ok(CurvePoint::Identity),
            Some(0x04) if bytes.len() == 1 + 2 * field.byte_len() => {
                let w = field.byte_len();
                let x = field.decode(&bytes[1..1 + w])?;
                let y = field.decode(&bytes[1 + w..])?;
                CurvePoint::new(x, y)
            }
            _ => Err(Error::MalformedPayload("bad point encoding".into())),
        }
    }
}

impl fmt::Debug for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Identity => write!(f, "O"),
            CurvePoint::Affine { x, y } => write!(f, "({}, {})", x.value(), y.value()),
        }
    }
}

/// Draws a uniformly random affine point (p ≡ 3 mod 4 assumed).
pub fn random_point<R: RngCore>(field: FieldParams, rng: &mut R) -> CurvePoint {
    loop {
        let x = field.element(rng.gen_range(0..field.modulus()));
        let rhs = x.square() * x + x;
        if let Some(y) = rhs.sqrt() {
            let y = if rng.gen::<bool>() { -y } else { y };
            return CurvePoint::Affine { x, y };
        }
    }
}

/// Returns `h·A` for random points `A` until it lands on a point of order exactly `r`.
pub fn find_subgroup_generator<R: RngCore>(
    field: FieldParams,
    order: u64,
    cofactor: u64,
    rng: &mut R,
) -> Result<CurvePoint> {
    if (order as u128) * (cofactor as u128) != field.modulus() as u128 + 1 {
        return Err(Error::InvalidCurve(format!(
            "h·r = {}·{} differs from p + 1 = {}",
            cofactor,
            order,
            field.modulus() as u128 + 1
        )));
    }
    for _ in 0..GENERATOR_ATTEMPTS {
        let candidate = random_point(field, rng).scalar_mul(cofactor as u128);
        if !candidate.is_identity() && candidate.scalar_mul(order as u128).is_identity() {
            return Ok(candidate);
        }
    }
    Err(Error::GeneratorSearchFailed(order))
}

/// The supersingular curve y² = x³ + x over F_p together with its order-r subgroup.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CurveParams {
    field: FieldParams,
    order: u64,
    cofactor: u64,
    generator: CurvePoint,
}

impl CurveParams {
    /// Validates `p ≡ 3 mod 4`, `r` prime with `r | p + 1` and `r ∤ p − 1`, then picks a
    /// generator using `rng`.
    pub fn new<R: RngCore>(p: u64, order: u64, rng: &mut R) -> Result<Self> {
        let field = FieldParams::new(p)?;
        if p % 4 != 3 {
            return Err(Error::InvalidCurve(format!("p = {p} is not 3 mod 4")));
        }
        if order < 3 || !is_prime(order) {
            return Err(Error::InvalidCurve(format!("r = {order} is not an odd prime")));
        }
        if (p as u128 + 1) % order as u128 != 0 {
            return Err(Error::InvalidCurve(format!("r = {order} does not divide p + 1")));
        }
        if (p - 1) % order == 0 {
            return Err(Error::InvalidCurve(format!("r = {order} divides p − 1")));
        }
        let cofactor = ((p as u128 + 1) / order as u128) as u64;
        let generator = find_subgroup_generator(field, order, cofactor, rng)?;
        Ok(Self { field, order, cofactor, generator })
    }

    pub fn from_profile(profile: Profile) -> Self {
        let (p, r) = profile.primes();
        let mut rng = ChaCha20Rng::seed_from_u64(0x6b61_2d67_656e);
        CurveParams::new(p, r, &mut rng).expect("built-in profile is valid")
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    /// Prime order r of the subgroup.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn cofactor(&self) -> u64 {
        self.cofactor
    }

    pub fn generator(&self) -> CurvePoint {
        self.generator
    }

    /// F_r, where shares and secrets live.
    pub fn scalar_field(&self) -> FieldParams {
        FieldParams::new(self.order).expect("order checked prime")
    }

    pub fn point(&self, x: u64, y: u64) -> Result<CurvePoint> {
        CurvePoint::new(self.field.element(x), self.field.element(y))
    }

    pub fn contains(&self, point: &CurvePoint) -> bool {
        match point {
            CurvePoint::Identity => true,
            CurvePoint::Affine { x, .. } => x.params() == self.field && point.is_on_curve(),
        }
    }

    pub fn in_subgroup(&self, point: &CurvePoint) -> bool {
        self.contains(point) && point.scalar_mul(self.order as u128).is_identity()
    }

    /// Scalar multiple of the generator by a scalar-field element.
    pub fn mul_generator(&self, k: &FieldElement) -> CurvePoint {
        self.generator.scalar_mul(k.value() as u128)
    }

    pub fn decode_point(&self, bytes: &[u8]) -> Result<CurvePoint> {
        CurvePoint::decode(self.field, bytes)
    }
}

/// Built-in parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// p = 23, r = 3.
    Toy23,
    /// p = 43, r = 11.
    Toy43,
    /// p = 59, r = 5.
    Toy59,
    /// 31-bit p = 2147482867, r = 536870717.
    Demo,
}

impl Profile {
    pub fn primes(self) -> (u64, u64) {
        match self {
            Profile::Toy23 => (23, 3),
            Profile::Toy43 => (43, 11),
            Profile::Toy59 => (59, 5),
            Profile::Demo => (2_147_482_867, 536_870_717),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Toy23 => "toy23",
            Profile::Toy43 => "toy43",
            Profile::Toy59 => "toy59",
            Profile::Demo => "demo",
        }
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toy23" => Ok(Profile::Toy23),
            "toy43" => Ok(Profile::Toy43),
            "toy59" => Ok(Profile::Toy59),
            "demo" => Ok(Profile::Demo),
            other => Err(Error::Config(format!("unknown curve profile {other:?}"))),
        }
    }
}
