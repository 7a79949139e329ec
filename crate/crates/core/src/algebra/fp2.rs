use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::field::{FieldElement, FieldParams};
use crate::error::{Error, Result};

/// `c0 + c1·i` in F_p² = F_p[i]/(i² + 1). Requires p ≡ 3 mod 4.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp2Element {
    pub c0: FieldElement,
    pub c1: FieldElement,
}

impl Fp2Element {
    pub fn new(c0: FieldElement, c1: FieldElement) -> Result<Self> {
        if c0.params() != c1.params() {
            return Err(Error::ParamsMismatch);
        }
        Ok(Self { c0, c1 })
    }

    pub fn from_base(c0: FieldElement) -> Self {
        Self { c0, c1: c0.params().zero() }
    }

    pub fn zero(params: FieldParams) -> Self {
        Self { c0: params.zero(), c1: params.zero() }
    }

    pub fn one(params: FieldParams) -> Self {
        Self { c0: params.one(), c1: params.zero() }
    }

    /// The element `i`.
    pub fn imaginary_unit(params: FieldParams) -> Self {
        Self { c0: params.zero(), c1: params.one() }
    }

    pub fn params(&self) -> FieldParams {
        self.c0.params()
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.c0.is_one() && self.c1.is_zero()
    }

    /// Frobenius: (c0 + c1·i)^p = c0 − c1·i.
    pub fn conjugate(&self) -> Self {
        Self { c0: self.c0, c1: -self.c1 }
    }

    pub fn square(&self) -> Self {
        // (a + bi)² = (a + b)(a − b) + 2ab·i
        let ab = self.c0 * self.c1;
        Self { c0: (self.c0 + self.c1) * (self.c0 - self.c1), c1: ab + ab }
    }

    pub fn scale(&self, k: FieldElement) -> Self {
        Self { c0: self.c0 * k, c1: self.c1 * k }
    }

    /// Inverse through the norm c0² + c1².
    pub fn inv(&self) -> Result<Self> {
        let norm = self.c0.square() + self.c1.square();
        let norm_inv = norm.inv().map_err(|_| Error::InvalidOperand("inverse of zero in F_p²"))?;
        Ok(self.conjugate().scale(norm_inv))
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut base = *self;
        let mut acc = Self::one(self.params());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    /// `c0 ‖ c1`, each fixed-width big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.c0.to_bytes();
        out.extend(self.c1.to_bytes());
        out
    }

    pub fn decode(params: FieldParams, bytes: &[u8]) -> Result<Self> {
        let w = params.byte_len();
        if bytes.len() != 2 * w {
            return Err(Error::MalformedPayload("F_p² element has wrong width".into()));
        }
        Ok(Self { c0: params.decode(&bytes[..w])?, c1: params.decode(&bytes[w..])? })
    }
}

impl fmt::Debug for Fp2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i (mod {})", self.c0.value(), self.c1.value(), self.params().modulus())
    }
}

impl Add for Fp2Element {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { c0: self.c0 + rhs.c0, c1: self.c1 + rhs.c1 }
    }
}

impl Sub for Fp2Element {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { c0: self.c0 - rhs.c0, c1: self.c1 - rhs.c1 }
    }
}

impl Mul for Fp2Element {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        // Karatsuba with i² = −1.
        let a = self.c0 * rhs.c0;
        let b = self.c1 * rhs.c1;
        let cross = (self.c0 + self.c1) * (rhs.c0 + rhs.c1);
        Self { c0: a - b, c1: cross - a - b }
    }
}

impl Neg for Fp2Element {
    type Output = Self;
    fn neg(self) -> Self {
        Self { c0: -self.c0, c1: -self.c1 }
    }
}
