//! Approximate erasure correction: a manipulation detection code inside an
//! outer stabilizer code, decoded by syndrome measurement, erasure list
//! decoding and a cascade of controlled authentications.
//!
//! Register layout is `[message | PMD ancilla | key | outer ancilla | flags | reference]`.
//! After the outer decoder the PMD register occupies the first
//! `pmd.total_qubits()` qubits of the code register.

mod adversary;
mod decode;
mod harness;

pub use adversary::{apply_adversary, AdversaryBranch, AdversaryMode, ErasureAdversary, TaggedBranch};
pub use decode::{apply_cascade, cascade_unitary, list_decode_branch, MAX_DENSE_CASCADE_QUBITS};
pub use harness::{direct_fidelity, erasure_harness, fidelity_bound, HarnessReport};

use crate::bits::BitVec;
use crate::densesim::{c, check_qubits, DenseState, Matrix};
use crate::error::{Error, Result};
use crate::pmd::{measure_pmd_epsilon, PmdCode};
use crate::ptc::SweepMode;
use crate::symplectic::{standard_form_encoder, Circuit, PivotRule, StabilizerCode};
use harness::SyndromeTable;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Tolerance of the isometry contract checked at construction.
const ISOMETRY_TOL: f64 = 1e-10;

/// Syndrome tables keyed by (erased qubits, syndrome).
type TableCache = Mutex<HashMap<(Vec<usize>, u64), Arc<SyndromeTable>>>;

pub struct ComposedCode {
    pmd: PmdCode,
    outer: StabilizerCode,
    outer_enc: Circuit,
    outer_dec: Circuit,
    epsilon: OnceLock<f64>,
    tables: TableCache,
}

impl std::fmt::Debug for ComposedCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComposedCode")
            .field("pmd_qubits", &self.pmd.total_qubits())
            .field("outer", &self.outer.to_text())
            .finish()
    }
}

/// Places `pmd` inside `outer`, whose message register must hold the whole PMD register.
pub fn compose(pmd: PmdCode, outer: StabilizerCode) -> Result<ComposedCode> {
    ComposedCode::new(pmd, outer)
}

impl ComposedCode {
    pub fn new(pmd: PmdCode, outer: StabilizerCode) -> Result<Self> {
        if outer.k() != pmd.total_qubits() {
            return Err(Error::Invalid(format!(
                "outer code carries {} qubits, the PMD register has {}",
                outer.k(),
                pmd.total_qubits()
            )));
        }
        check_qubits(outer.n(), "composed code")?;
        let outer_enc = standard_form_encoder(&outer, PivotRule::Lowest)?;
        let outer_dec = outer_enc.inverse();
        let code = ComposedCode {
            pmd,
            outer,
            outer_enc,
            outer_dec,
            epsilon: OnceLock::new(),
            tables: Mutex::new(HashMap::new()),
        };
        let b = code.isometry()?;
        let d = b.ncols();
        if (b.adjoint() * &b - Matrix::identity(d, d)).norm() > ISOMETRY_TOL {
            return Err(Error::Invariant("composed encoder is not an isometry".into()));
        }
        Ok(code)
    }

    pub fn pmd(&self) -> &PmdCode {
        &self.pmd
    }

    pub fn outer(&self) -> &StabilizerCode {
        &self.outer
    }

    pub fn outer_encoder(&self) -> &Circuit {
        &self.outer_enc
    }

    pub fn outer_decoder(&self) -> &Circuit {
        &self.outer_dec
    }

    /// Physical qubits of the code register.
    pub fn n(&self) -> usize {
        self.outer.n()
    }

    pub fn message_qubits(&self) -> usize {
        self.pmd.message_qubits()
    }

    /// Encodes the first `k` qubits of `state`; the remaining qubits move to
    /// the end, after the code register.
    pub fn encode(&self, state: &DenseState) -> Result<DenseState> {
        let k = self.message_qubits();
        if state.n() < k {
            return Err(Error::SizeMismatch(state.n(), k));
        }
        let mut out = state.insert_zero(k, self.n() - k)?;
        self.pmd.apply_encoder(&mut out, 0)?;
        out.apply_circuit_at(&self.outer_enc, 0)?;
        Ok(out)
    }

    /// `2^n × 2^k` encoding isometry.
    pub fn isometry(&self) -> Result<Matrix> {
        let k = self.message_qubits();
        let mut m = Matrix::zeros(1 << self.n(), 1 << k);
        for msg in 0..1usize << k {
            let s = self.encode(&DenseState::basis(k, msg)?)?;
            m.set_column(msg, &s.to_matrix().column(0));
        }
        Ok(m)
    }

    /// Projects the code register (qubits `0..n`) onto the syndrome-`s`
    /// eigenspace of the outer generators.
    pub fn project_syndrome(&self, state: &mut DenseState, s: &BitVec) -> Result<()> {
        if s.len() != self.outer.r() {
            return Err(Error::SizeMismatch(s.len(), self.outer.r()));
        }
        for (j, g) in self.outer.generators().iter().enumerate() {
            let mut flipped = state.clone();
            flipped.apply_pauli_at(g, 0)?;
            let sign = if s.get(j) { -1.0 } else { 1.0 };
            state.add_scaled(c(sign, 0.0), &flipped);
            state.scale(c(0.5, 0.0));
        }
        Ok(())
    }

    /// Exhaustively measured PMD error, computed once.
    pub fn epsilon(&self) -> Result<f64> {
        if let Some(&e) = self.epsilon.get() {
            return Ok(e);
        }
        let e = measure_pmd_epsilon(&self.pmd, SweepMode::Exhaustive)?.value;
        Ok(*self.epsilon.get_or_init(|| e))
    }

    pub(crate) fn table(&self, support: &[usize], s: &BitVec) -> Result<Arc<SyndromeTable>> {
        let key = (support.to_vec(), s.to_mask());
        if let Some(t) = self.tables.lock().expect("table cache").get(&key) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(SyndromeTable::build(self, support, s)?);
        self.tables
            .lock()
            .expect("table cache")
            .insert(key, Arc::clone(&t));
        Ok(t)
    }
}
