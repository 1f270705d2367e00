use super::ComposedCode;
use crate::bits::BitVec;
use crate::densesim::{c, check_qubits, Branch, DenseState, Matrix};
use crate::error::{Error, Result};
use crate::qlde::{erasure_list_decode, ErasurePattern};
use crate::symplectic::{pauli_mul, Gate, PauliOperator};

/// Largest code register plus flags for which the cascade is built as a dense matrix.
pub const MAX_DENSE_CASCADE_QUBITS: usize = 10;

/// Squared norm below which a syndrome outcome is treated as impossible.
pub(crate) const ZERO_WEIGHT: f64 = 1e-14;

/// Coherent correction over the candidate list `list`.
///
/// Flags occupy `flags_at..flags_at + list.len()` and must start in `|0⟩`.
/// The first candidate is undone and the outer code decoded; then, for each
/// candidate in turn, the PMD register is authenticated into a fresh flag.
/// While no flag has fired the register is moved from one candidate's
/// correction to the next; once one fires, every later flag is set as well.
/// A branch accepted at candidate `i` ends with flags `0^{i} 1^{L-i}`.
pub fn apply_cascade(code: &ComposedCode, list: &[PauliOperator], state: &mut DenseState, flags_at: usize) -> Result<()> {
    let l = list.len();
    if l == 0 {
        return Err(Error::Invalid("empty correction list".into()));
    }
    if flags_at < code.n() || flags_at + l > state.n() {
        return Err(Error::Invalid(format!(
            "flags {flags_at}..{} do not fit after the code register",
            flags_at + l
        )));
    }
    let pmd = code.pmd();
    state.apply_pauli_at(&list[0].adjoint(), 0)?;
    state.apply_circuit_at(code.outer_decoder(), 0)?;
    pmd.apply_auth(state, 0, flags_at)?;
    for i in 0..l {
        let flag = flags_at + i;
        if i > 0 {
            // Removing the previous flag shifts this one down by one.
            state.on_subspace(flag - 1, false, |sub| pmd.apply_auth(sub, 0, flag - 1))?;
            state.on_subspace(flag - 1, true, |sub| sub.apply_gate(Gate::X(flag - 1)))?;
        }
        if i + 1 < l {
            let step = code
                .outer_decoder()
                .conjugate(&pauli_mul(&list[i + 1].adjoint(), &list[i])?)?;
            state.on_subspace(flag, false, |sub| sub.apply_pauli_at(&step, 0))?;
        }
    }
    Ok(())
}

/// Dense unitary of the cascade on `[code register | L flags]`.
pub fn cascade_unitary(code: &ComposedCode, list: &[PauliOperator]) -> Result<Matrix> {
    let total = code.n() + list.len();
    if total > MAX_DENSE_CASCADE_QUBITS {
        return Err(Error::SizeGuard(format!(
            "dense cascade on {total} qubits (limit {MAX_DENSE_CASCADE_QUBITS})"
        )));
    }
    check_qubits(total, "operator")?;
    let dim = 1usize << total;
    let mut m = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = DenseState::basis(total, col)?;
        apply_cascade(code, list, &mut s, code.n())?;
        m.set_column(col, &s.to_matrix().column(0));
    }
    Ok(m)
}

/// Measures the outer syndrome of `branch` exactly, list decodes each
/// outcome for the erased set and runs the cascade.
///
/// Output branches live on `[code register | L flags | rest]`, where `rest`
/// are the qubits of the input after the code register.
pub fn list_decode_branch(code: &ComposedCode, branch: &Branch, erased: &ErasurePattern) -> Result<Vec<Branch>> {
    let n = code.n();
    if branch.state.n() < n {
        return Err(Error::SizeMismatch(branch.state.n(), n));
    }
    let r = code.outer().r();
    let mut out = Vec::new();
    for s in 0..1u64 << r {
        let s = BitVec::from_mask(r, s);
        let mut post = branch.state.clone();
        code.project_syndrome(&mut post, &s)?;
        let w = post.norm_sqr();
        if w < ZERO_WEIGHT {
            continue;
        }
        let list = erasure_list_decode(code.outer(), erased, &s)?;
        if list.is_empty() {
            return Err(Error::Invariant(format!(
                "syndrome {s} has probability {w:e} but no correction on {:?}",
                erased.erased()
            )));
        }
        post.scale(c(1.0 / w.sqrt(), 0.0));
        let mut post = post.insert_zero(n, list.len())?;
        apply_cascade(code, list.entries(), &mut post, n)?;
        out.push(Branch {
            weight: branch.weight * w,
            state: post,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aqec::tests::small_code;

    #[test]
    fn cascade_is_unitary() {
        let code = small_code();
        for erased in [vec![0], vec![2], vec![1, 4]] {
            let pat = ErasurePattern::new(6, erased).unwrap();
            for s in 0..8 {
                let list = erasure_list_decode(code.outer(), &pat, &BitVec::from_mask(3, s)).unwrap();
                if list.is_empty() || code.n() + list.len() > MAX_DENSE_CASCADE_QUBITS {
                    continue;
                }
                let u = cascade_unitary(&code, list.entries()).unwrap();
                let dim = u.nrows();
                assert!((u.adjoint() * &u - Matrix::identity(dim, dim)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn no_error_recovers_the_message_with_the_first_flag() {
        let code = small_code();
        let pat = ErasurePattern::new(6, vec![]).unwrap();
        for m in 0..2 {
            let enc = code.encode(&DenseState::basis(1, m).unwrap()).unwrap();
            let out = list_decode_branch(&code, &Branch { weight: 1.0, state: enc }, &pat).unwrap();
            assert_eq!(out.len(), 1);
            // Message on qubit 0, every ancilla zero, the single flag set.
            let want = DenseState::basis(7, (m << 6) | 1).unwrap();
            assert!((out[0].weight - 1.0).abs() < 1e-12);
            assert!(out[0].state.inner(&want).norm() > 1.0 - 1e-10);
        }
    }
}
