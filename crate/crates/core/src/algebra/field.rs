use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::costmodel::meter;
use crate::error::{Error, Result};

/// Modulus of a prime field. Always an odd prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldParams {
    p: u64,
}

impl FieldParams {
    /// Checks that `p` is an odd prime below 2^63.
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p % 2 == 0 || p >= 1 << 63 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn bits(&self) -> u32 {
        64 - self.p.leading_zeros()
    }

    /// Width of the fixed big-endian encoding of one element.
    pub fn byte_len(&self) -> usize {
        self.bits().div_ceil(8) as usize
    }

    /// Reduces `v` into the field.
    pub fn element(&self, v: u64) -> FieldElement {
        FieldElement { value: v % self.p, params: *self }
    }

    /// Maps a signed integer into the field.
    pub fn element_signed(&self, v: i64) -> FieldElement {
        let p = self.p as i128;
        let r = (v as i128).rem_euclid(p);
        FieldElement { value: r as u64, params: *self }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// Decodes a fixed-width big-endian element, rejecting non-canonical values.
    pub fn decode(&self, bytes: &[u8]) -> Result<FieldElement> {
        if bytes.len() != self.byte_len() {
            return Err(Error::MalformedPayload(format!(
                "field element needs {} bytes, got {}",
                self.byte_len(),
                bytes.len()
            )));
        }
        let value = bytes.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b));
        if value >= self.p {
            return Err(Error::MalformedPayload("field element not reduced".into()));
        }
        Ok(FieldElement { value, params: *self })
    }
}

/// Primality by trial division, switching to deterministic Miller-Rabin above 2^40.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    if n < 1 << 40 {
        let mut d = 41u64;
        while d * d <= n {
            if n % d == 0 || n % (d + 2) == 0 {
                return false;
            }
            d += 6;
        }
        return true;
    }
    miller_rabin(n)
}

fn miller_rabin(n: u64) -> bool {
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    // These bases are deterministic for every n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An element of F_p, always fully reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    params: FieldParams,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_one(&self) -> bool {
        self.value == 1
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.params != other.params {
            return Err(Error::ParamsMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let p = self.params.p;
        let (s, overflow) = self.value.overflowing_add(other.value);
        let s = if overflow || s >= p { s.wrapping_sub(p) } else { s };
        Ok(Self { value: s, params: self.params })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let p = self.params.p;
        let value = if self.value >= other.value {
            self.value - other.value
        } else {
            p - (other.value - self.value)
        };
        Ok(Self { value, params: self.params })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        meter::tick_field_mul();
        let p = self.params.p as u128;
        let value = ((self.value as u128 * other.value as u128) % p) as u64;
        Ok(Self { value, params: self.params })
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::InvalidOperand("inverse of zero"));
        }
        let p = self.params.p as i128;
        let (mut r0, mut r1) = (p, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Self { value: t0.rem_euclid(p) as u64, params: self.params })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.checked_mul(&other.inv()?)
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut base = *self;
        let mut acc = self.params.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    /// Euler's criterion. Zero counts as a square.
    pub fn is_square(&self) -> bool {
        self.is_zero() || self.pow(((self.params.p - 1) / 2) as u128).is_one()
    }

    /// Square root for p ≡ 3 mod 4, or `None` for non-residues.
    pub fn sqrt(&self) -> Option<Self> {
        debug_assert_eq!(self.params.p % 4, 3);
        let root = self.pow(((self.params.p + 1) / 4) as u128);
        (root.square() == *self).then_some(root)
    }

    /// Fixed-width big-endian encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let width = self.params.byte_len();
        self.value.to_be_bytes()[8 - width..].to_vec()
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.params.p)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on mismatched moduli; the checked_* methods report it.
impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("field moduli differ")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(&rhs).expect("field moduli differ")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs).expect("field moduli differ")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        let value = if self.value == 0 { 0 } else { self.params.p - self.value };
        Self { value, params: self.params }
    }
}
