use super::adversary::{apply_adversary, erase_piece, ErasureAdversary};
use super::decode::{apply_cascade, list_decode_branch, ZERO_WEIGHT};
use super::ComposedCode;
use crate::bits::BitVec;
use crate::densesim::{entanglement_fidelity, Branch, DenseState, Matrix};
use crate::error::{Error, Result};
use crate::pmd::BOUND_TOLERANCE;
use crate::qlde::{erasure_list_decode, ErasurePattern};
use num_complex::Complex64;
use serde::Serialize;

/// Relative residual allowed when expressing a post-measurement state in the
/// span of the corrected code states.
const SPAN_TOL: f64 = 1e-8;

/// Relative norm below which a corrected code state counts as dependent on earlier ones.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnessReport {
    /// Entanglement fidelity of decode ∘ adversary ∘ encode.
    pub fidelity: f64,
    /// Measured PMD error.
    pub epsilon: f64,
    /// Longest candidate list met on a branch of nonzero weight.
    pub list_size: usize,
    /// `1 - 3·ε^{1/2}·L^{3/4}`.
    pub bound: f64,
    /// Total output weight, 1 for a trace preserving pipeline.
    pub weight: f64,
    /// Branches of nonzero weight after syndrome measurement.
    pub branches: usize,
    pub pass: bool,
}

/// `1 - 3·ε^{1/2}·L^{3/4}`.
pub fn fidelity_bound(epsilon: f64, list_size: usize) -> f64 {
    1.0 - 3.0 * epsilon.sqrt() * (list_size as f64).powf(0.75)
}

/// Orthonormal basis of the corrected code states `E_i Enc|m⟩` for one
/// `(erased set, syndrome)` pair, with the image of each basis vector under
/// the cascade.
pub(crate) struct SyndromeTable {
    list_len: usize,
    basis: Matrix,
    images: Matrix,
}

impl SyndromeTable {
    pub(crate) fn build(code: &ComposedCode, support: &[usize], s: &BitVec) -> Result<Self> {
        let n = code.n();
        let k = code.message_qubits();
        let erased = ErasurePattern::new(n, support.to_vec())?;
        let list = erasure_list_decode(code.outer(), &erased, s)?;
        if list.is_empty() {
            return Err(Error::Invariant(format!(
                "syndrome {s} has nonzero weight but no correction on {support:?}"
            )));
        }
        let l = list.len();
        let mut basis: Vec<Matrix> = Vec::new();
        let mut images: Vec<Matrix> = Vec::new();
        for e in list.entries() {
            for m in 0..1usize << k {
                let mut v = code.encode(&DenseState::basis(k, m)?)?;
                v.apply_pauli_at(e, 0)?;
                let mut w = v.insert_zero(n, l)?;
                apply_cascade(code, list.entries(), &mut w, n)?;
                let (mut v, mut w) = (v.to_matrix(), w.to_matrix());
                let scale = v.norm();
                // Gram-Schmidt run twice; the cascade is linear, so the image
                // follows the same combination.
                for _ in 0..2 {
                    for (b, img) in basis.iter().zip(&images) {
                        let coeff = b.dotc(&v);
                        v -= b * coeff;
                        w -= img * coeff;
                    }
                }
                let norm = v.norm();
                if norm > RANK_TOL * scale {
                    let inv = Complex64::new(1.0 / norm, 0.0);
                    basis.push(v * inv);
                    images.push(w * inv);
                }
            }
        }
        Ok(SyndromeTable {
            list_len: l,
            basis: Matrix::from_columns(&basis.iter().map(|b| b.column(0)).collect::<Vec<_>>()),
            images: Matrix::from_columns(&images.iter().map(|b| b.column(0)).collect::<Vec<_>>()),
        })
    }
}

/// Exact entanglement fidelity of the full pipeline against `adv`.
///
/// The cascade is linear, so on each `(erased set, syndrome)` pair it is
/// evaluated once on the corrected code states and reused: every
/// post-measurement state is expanded in that span (the expansion is checked
/// to be exact) and mapped through the stored images.
pub fn erasure_harness(code: &ComposedCode, adv: &ErasureAdversary) -> Result<HarnessReport> {
    if adv.n() != code.n() {
        return Err(Error::SizeMismatch(adv.n(), code.n()));
    }
    let n = code.n();
    let k = code.message_qubits();
    let d = 1usize << k;
    let r = code.outer().r();
    let encoded: Vec<DenseState> = (0..d)
        .map(|m| code.encode(&DenseState::basis(k, m)?))
        .collect::<Result<_>>()?;
    let mut fidelity = 0.0;
    let mut weight = 0.0;
    let mut list_size = 0;
    let mut branches = 0;
    for b in adv.branches() {
        let t = b.support().len();
        // Per message, the erased pieces in a fixed (e, b) order.
        let pieces: Vec<Vec<DenseState>> = encoded
            .iter()
            .map(|psi| {
                let mut hit = psi.clone();
                hit.apply_local(b.op(), b.support())?;
                Ok(erase_unnormalized(&hit, b.support()))
            })
            .collect::<Result<_>>()?;
        for piece in 0..1usize << (2 * t) {
            for s in 0..1u64 << r {
                let s = BitVec::from_mask(r, s);
                let mut projected = Vec::with_capacity(d);
                let mut norm = 0.0;
                for per_msg in &pieces {
                    let mut p = per_msg[piece].clone();
                    code.project_syndrome(&mut p, &s)?;
                    norm += p.norm_sqr();
                    projected.push(p);
                }
                if norm < ZERO_WEIGHT {
                    continue;
                }
                let table = code.table(b.support(), &s)?;
                let l = table.list_len;
                list_size = list_size.max(l);
                branches += 1;
                let junk = n + l - k;
                let mut sums = vec![Complex64::new(0.0, 0.0); 1 << junk];
                for (m, p) in projected.iter().enumerate() {
                    let pv = p.to_matrix();
                    let coeffs = table.basis.adjoint() * &pv;
                    let residual = (&table.basis * &coeffs - &pv).norm();
                    if residual > SPAN_TOL * pv.norm().max(1.0) {
                        return Err(Error::Invariant(format!(
                            "post-measurement state leaves the corrected span (residual {residual:e})"
                        )));
                    }
                    let out = &table.images * coeffs;
                    weight += out.norm_squared() / d as f64;
                    for (j, sum) in sums.iter_mut().enumerate() {
                        *sum += out[((m << junk) | j, 0)];
                    }
                }
                fidelity += sums.iter().map(|z| z.norm_sqr()).sum::<f64>() / (d * d) as f64;
            }
        }
    }
    let epsilon = code.epsilon()?;
    let bound = fidelity_bound(epsilon, list_size.max(1));
    Ok(HarnessReport {
        fidelity,
        epsilon,
        list_size,
        bound,
        weight,
        branches,
        pass: fidelity >= bound - BOUND_TOLERANCE,
    })
}

/// `2^{-|S|/2} |b⟩⟨e|_S ψ` for every `(e, b)`, zero pieces included.
fn erase_unnormalized(state: &DenseState, support: &[usize]) -> Vec<DenseState> {
    let t = support.len();
    let mut out = Vec::with_capacity(1 << (2 * t));
    for e in 0..1usize << t {
        for b in 0..1usize << t {
            out.push(erase_piece(state, support, e, b));
        }
    }
    out
}

/// Entanglement fidelity computed by running every branch through the full
/// state path with the reference attached. Slower than `erasure_harness`;
/// used to cross-check it.
pub fn direct_fidelity(code: &ComposedCode, adv: &ErasureAdversary) -> Result<f64> {
    let k = code.message_qubits();
    entanglement_fidelity(k, |phi| {
        let enc = code.encode(&phi)?;
        let tagged = apply_adversary(&[Branch { weight: 1.0, state: enc }], adv)?;
        let mut out = Vec::new();
        for t in tagged {
            let b = Branch {
                weight: t.weight,
                state: t.state,
            };
            out.extend(list_decode_branch(code, &b, &t.erased)?);
        }
        Ok(out)
    })
}
