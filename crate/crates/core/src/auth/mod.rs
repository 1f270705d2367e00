//! Keyless authentication over qubit-wise channels: a classical
//! non-malleable code carries a Pauli one-time pad key, the pad hides an
//! encoding into a manipulation detection code inside a stabilizer code, and
//! the receiver rejects anything that leaves the code space.

mod nm;
mod packing;
mod rate1;
mod third;
mod twirl;
mod twise;

pub use nm::{
    fit_tampering, nm_search, nm_verify, BitTamper, NmCode, NmReport, NmSearchResult, SimulatorFit, TamperFunction,
    MAX_NM_CODEWORD_BITS, MAX_NM_MESSAGE_BITS,
};
pub use packing::{
    normalizer_l1_mass, normalizer_mass, packing_report, stabilizer_mass, stabilizer_packing_exponent, PackingReport,
    MAX_PACKING_QUBITS,
};
pub use twirl::{
    apply_superoperator_2x2, choi_from_superoperator, conjugation_superoperator, eta_classify, explicit_twirl_choi,
    pauli_decompose_channel, pauli_superoperator, replacement_superoperator, superoperator, twirl_channel,
    twirl_probabilities, EtaPauliReport, PAULI_LABELS,
};
pub use twise::{twise_pad, TwisePad};
pub use third::{
    pad_matrix, pad_operator, product_code_overlap, AcceptedMass, QubitwiseAttack, ThirdAttackReport, ThirdDecoding,
    ThirdEncoding, ThirdProtocol, MAX_EXPLICIT_KEY_QUBITS, MAX_THIRD_QUBITS,
};
pub use rate1::{
    BlockRejectionReport, Rate1Decoding, Rate1Encoding, Rate1Protocol, Rate1Report, MAX_RATE1_BLOCK, MAX_RATE1_BRANCHES,
    MAX_RATE1_PAIRS, MAX_RATE1_QUBITS,
};
