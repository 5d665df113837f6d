//! Collaborative commit-and-prove toolkit over BLS12-381.

pub mod algebra;
pub mod bulletproofs;
pub mod circuit;
pub mod cli;
pub mod compose;
pub mod cplink;
pub mod error;
pub mod ipa;
pub mod mpc;
pub mod pedersen;
pub mod session;
pub mod transcript;
pub mod transport;

pub use error::{Error, Result};
