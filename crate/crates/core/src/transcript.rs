//! Fiat-Shamir transcript.
//!
//! The state is a SHA-256 chain: each absorption hashes the previous state
//! together with a length-prefixed label and length-prefixed data. Challenges
//! are `hash_to_scalar(state || label)` and are absorbed back into the state, so
//! every challenge depends on everything that came before it.

use crate::algebra::{encode_g1, encode_scalar, hash_to_scalar, Scalar, G1};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct Transcript {
    state: [u8; 32],
    challenges: Vec<(&'static str, Scalar)>,
}

impl Transcript {
    pub fn new(domain: &'static [u8]) -> Self {
        let mut t = Self {
            state: [0u8; 32],
            challenges: Vec::new(),
        };
        t.append_message(b"dom-sep", domain);
        t
    }

    pub fn append_message(&mut self, label: &[u8], data: &[u8]) {
        let mut h = Sha256::new();
        h.update(b"colcp/absorb");
        h.update(self.state);
        h.update((label.len() as u32).to_le_bytes());
        h.update(label);
        h.update((data.len() as u64).to_le_bytes());
        h.update(data);
        self.state = h.finalize().into();
    }

    pub fn append_u64(&mut self, label: &[u8], v: u64) {
        self.append_message(label, &v.to_le_bytes());
    }

    pub fn append_scalar(&mut self, label: &[u8], s: &Scalar) {
        self.append_message(label, &encode_scalar(s));
    }

    pub fn append_point(&mut self, label: &[u8], p: &G1) {
        self.append_message(label, &encode_g1(p));
    }

    /// Derives a nonzero challenge and binds it into the state.
    pub fn challenge_scalar(&mut self, label: &'static str) -> Scalar {
        let mut input = Vec::with_capacity(32 + label.len());
        input.extend_from_slice(&self.state);
        input.extend_from_slice(label.as_bytes());
        let c = hash_to_scalar(&input);
        self.append_scalar(b"challenge", &c);
        self.challenges.push((label, c));
        c
    }

    pub fn state(&self) -> [u8; 32] {
        self.state
    }

    /// Every challenge drawn so far, in order.
    pub fn challenges(&self) -> &[(&'static str, Scalar)] {
        &self.challenges
    }

    pub fn challenge(&self, label: &str) -> Option<Scalar> {
        self.challenges
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, c)| *c)
    }
}
