//! Pauli manipulation detection codes and the machinery around them: finite
//! fields, stabilizer codes, dense simulation, erasure list decoding,
//! approximate error correction and small authentication protocols.

pub mod bits;
pub mod error;
pub mod galois;
pub mod aqec;
pub mod auth;
pub mod densesim;
pub mod pmd;
pub mod ptc;
pub mod qlde;
pub mod symplectic;

pub use error::{Error, Result};
