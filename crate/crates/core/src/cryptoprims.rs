//! SHA-256, key derivation from pairing values, and a hash-based authenticated cipher.
//!
//! The cipher is a SHA-256 counter-mode keystream with a truncated SHA-256 MAC over
//! `nonce ‖ body`. It exists so every byte on the wire is reproducible from one hash
//! primitive; it is not a production AEAD.

use std::fmt;

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::algebra::FieldElement;
use crate::costmodel::meter;
use crate::error::{Error, Result};
use crate::pairing::GtElement;

pub const KDF_DOMAIN: &[u8] = b"GKA-KDF-v1";
pub const SECRET_KDF_DOMAIN: &[u8] = b"GKA-SECRET-KDF-v1";
pub const NONCE_LEN: usize = 16;
pub const TAG_LEN: usize = 16;

pub fn hash(data: &[u8]) -> [u8; 32] {
    hash_parts(&[data])
}

/// SHA-256 over the plain concatenation of `parts`.
pub fn hash_parts(parts: &[&[u8]]) -> [u8; 32] {
    meter::tick_hash();
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    hasher.finalize().into()
}

/// 32-byte key. `Debug` never prints the bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey {
    bytes: [u8; 32],
    weak: bool,
}

impl SymmetricKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.bytes
    }

    /// Derived from the identity of G_T.
    pub fn is_weak(&self) -> bool {
        self.weak
    }
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricKey(<redacted>{})", if self.weak { ", weak" } else { "" })
    }
}

/// `SHA-256("GKA-KDF-v1" ‖ context ‖ encode(z))`.
pub fn kdf(z: &GtElement, context: &[u8]) -> SymmetricKey {
    SymmetricKey { bytes: hash_parts(&[KDF_DOMAIN, context, &z.to_bytes()]), weak: z.is_one() }
}

/// `SHA-256("GKA-SECRET-KDF-v1" ‖ encode(s) ‖ context)`, keyed by a recovered master secret.
pub fn kdf_from_secret(secret: &FieldElement, context: &[u8]) -> SymmetricKey {
    SymmetricKey {
        bytes: hash_parts(&[SECRET_KDF_DOMAIN, &secret.to_bytes(), context]),
        weak: false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub nonce: [u8; NONCE_LEN],
    pub body: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

impl Ciphertext {
    /// `nonce ‖ body ‖ tag`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_LEN + self.body.len() + TAG_LEN);
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.body);
        out.extend_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < NONCE_LEN + TAG_LEN {
            return Err(Error::MalformedPayload("ciphertext shorter than nonce and tag".into()));
        }
        let (nonce, rest) = bytes.split_at(NONCE_LEN);
        let (body, tag) = rest.split_at(rest.len() - TAG_LEN);
        Ok(Self {
            nonce: nonce.try_into().expect("split at NONCE_LEN"),
            body: body.to_vec(),
            tag: tag.try_into().expect("split at TAG_LEN"),
        })
    }
}

fn apply_keystream(key: &SymmetricKey, nonce: &[u8; NONCE_LEN], data: &mut [u8]) {
    for (counter, chunk) in data.chunks_mut(32).enumerate() {
        let block = hash_parts(&[key.as_bytes(), b"enc", nonce, &(counter as u64).to_be_bytes()]);
        for (byte, k) in chunk.iter_mut().zip(block) {
            *byte ^= k;
        }
    }
}

fn mac(key: &SymmetricKey, nonce: &[u8; NONCE_LEN], body: &[u8]) -> [u8; TAG_LEN] {
    let full = hash_parts(&[key.as_bytes(), b"mac", nonce, body]);
    full[..TAG_LEN].try_into().expect("digest is 32 bytes")
}

pub fn encrypt<R: RngCore>(key: &SymmetricKey, plaintext: &[u8], rng: &mut R) -> Ciphertext {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    encrypt_with_nonce(key, plaintext, nonce)
}

pub fn encrypt_with_nonce(key: &SymmetricKey, plaintext: &[u8], nonce: [u8; NONCE_LEN]) -> Ciphertext {
    let mut body = plaintext.to_vec();
    apply_keystream(key, &nonce, &mut body);
    let tag = mac(key, &nonce, &body);
    Ciphertext { nonce, body, tag }
}

/// Verifies the tag before releasing any plaintext.
pub fn decrypt(key: &SymmetricKey, ciphertext: &Ciphertext) -> Result<Vec<u8>> {
    let expected = mac(key, &ciphertext.nonce, &ciphertext.body);
    let diff = expected.iter().zip(ciphertext.tag.iter()).fold(0u8, |acc, (a, b)| acc | (a ^ b));
    if diff != 0 {
        return Err(Error::AuthenticationFailed);
    }
    let mut plaintext = ciphertext.body.clone();
    apply_keystream(key, &ciphertext.nonce, &mut plaintext);
    Ok(plaintext)
}
