//! Pauli operators in symplectic form, stabilizer codes and Clifford encoders.

mod circuit;
mod code;
mod encoder;
mod pauli;

pub use circuit::{Circuit, Gate};
pub use code::{css_from_classical, StabilizerCode, BRUTE_FORCE_QUBITS};
pub use encoder::{standard_form_encoder, PivotRule};
pub use pauli::{commutes, mask_product, pauli_mul, symplectic_product, PauliOperator};
