//! Group authentication, group key agreement and inter-group hand-over built on Shamir
//! sharing and a symmetric pairing, with a deterministic simulator for adversary
//! experiments and an operation-count cost model.

pub mod algebra;
pub mod costmodel;
pub mod cryptoprims;
mod error;
pub mod ids;
pub mod pairing;
pub mod protocol;
pub mod selftest;
pub mod simnet;
pub mod sss;

pub use error::{Error, Result};
