//! Arithmetic in F_p, F_p² and the curve y² = x³ + x over F_p.
//!
//! All values are small `Copy` types carrying their modulus, so mixing elements of
//! different fields is detected at run time and reported as [`Error::ParamsMismatch`].
//!
//! [`Error::ParamsMismatch`]: crate::Error::ParamsMismatch

mod curve;
mod field;
mod fp2;

pub use curve::{find_subgroup_generator, random_point, CurveParams, CurvePoint, Profile};
pub use field::{is_prime, FieldElement, FieldParams};
pub use fp2::Fp2Element;
