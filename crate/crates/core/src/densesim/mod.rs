//! Dense complex simulation used as ground truth for the algebraic layers.

mod channel;
mod density;
mod state;

pub use channel::{apply_channel, random_unitary, single_qubit_paulis, QuantumChannel};
pub(crate) use channel::{matrix_from_rows, matrix_to_rows};
pub use density::{DensityMatrix, MAX_DENSITY_QUBITS};
pub use state::{Branch, DenseState};
pub(crate) use state::phase_power;

use crate::error::{Error, Result};
use crate::symplectic::{standard_form_encoder, Circuit, PauliOperator, PivotRule, StabilizerCode};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Matrix = DMatrix<Complex64>;

pub const DEFAULT_MAX_QUBITS: usize = 14;

/// Largest operator dimension handled by a full singular value decomposition.
pub const SVD_DIM_LIMIT: usize = 512;

/// Qubit guard for dense objects; `PMDKIT_MAX_QUBITS` overrides the default.
pub fn max_qubits() -> usize {
    std::env::var("PMDKIT_MAX_QUBITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

pub fn check_qubits(n: usize, what: &str) -> Result<()> {
    let limit = max_qubits();
    if n > limit {
        return Err(Error::SizeGuard(format!(
            "dense {what} on {n} qubits (limit {limit})"
        )));
    }
    Ok(())
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_matrix(p: &PauliOperator) -> Result<Matrix> {
    let n = p.n();
    check_qubits(n, "operator")?;
    let dim = 1usize << n;
    let mut xm = 0;
    let mut zm = 0;
    for q in 0..n {
        let bit = 1 << (n - 1 - q);
        if p.x().get(q) {
            xm |= bit;
        }
        if p.z().get(q) {
            zm |= bit;
        }
    }
    let ph = phase_power(p.phase());
    let mut m = Matrix::zeros(dim, dim);
    for b in 0..dim {
        let sign = if (b & zm).count_ones() & 1 == 1 { -ph } else { ph };
        m[(b ^ xm, b)] = sign;
    }
    Ok(m)
}

/// Unitary of a Clifford circuit, built column by column.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Matrix> {
    let n = circuit.n();
    check_qubits(n, "operator")?;
    let dim = 1usize << n;
    let mut m = Matrix::zeros(dim, dim);
    for b in 0..dim {
        let mut s = DenseState::basis(n, b)?;
        s.apply_circuit(circuit)?;
        m.set_column(b, &s.to_matrix().column(0));
    }
    Ok(m)
}

/// Isometry `m ↦ U(|m⟩ ⊗ |0^r⟩)` from the standard-form encoder.
pub fn codespace_isometry(code: &StabilizerCode) -> Result<Matrix> {
    let u = standard_form_encoder(code, PivotRule::Lowest)?;
    encoder_isometry(&u, code.k())
}

/// Isometry obtained by feeding `|m⟩ ⊗ |0…0⟩` through `u`, with `k` message qubits.
pub fn encoder_isometry(u: &Circuit, k: usize) -> Result<Matrix> {
    let n = u.n();
    check_qubits(n, "operator")?;
    let mut m = Matrix::zeros(1 << n, 1 << k);
    for msg in 0..1usize << k {
        let mut s = DenseState::basis(n, msg << (n - k))?;
        s.apply_circuit(u)?;
        m.set_column(msg, &s.to_matrix().column(0));
    }
    Ok(m)
}

/// `2^{-r} Σ_{σ ∈ S} σ`, the projector onto the code space.
pub fn stabilizer_projector(code: &StabilizerCode) -> Result<Matrix> {
    check_qubits(code.n(), "operator")?;
    let dim = 1usize << code.n();
    let mut acc = Matrix::zeros(dim, dim);
    for s in code.stabilizer_group()? {
        acc += pauli_matrix(&s)?;
    }
    Ok(acc / c((1u64 << code.r()) as f64, 0.0))
}

/// Largest singular value: full decomposition up to `SVD_DIM_LIMIT`, power
/// iteration on `M†M` above.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) <= SVD_DIM_LIMIT {
        return m.clone().singular_values().max();
    }
    power_iteration_norm(m, 1e-13, 100_000)
}

pub(crate) fn power_iteration_norm(m: &Matrix, tol: f64, max_iter: usize) -> f64 {
    let cols = m.ncols();
    // Deterministic start vector with no special alignment.
    let mut v = DMatrix::from_fn(cols, 1, |i, _| c(1.0 + (i as f64 * 0.618).sin() * 0.5, 0.0));
    v /= c(v.norm(), 0.0);
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let w = m.adjoint() * (m * &v);
        let lambda = w.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        v = w / c(lambda, 0.0);
        if (lambda - prev).abs() <= tol * lambda {
            return lambda.sqrt();
        }
        prev = lambda;
    }
    prev.sqrt()
}

/// Entanglement fidelity `⟨Φ|(N ⊗ I)(Φ)|Φ⟩` of a pipeline on `k` message qubits.
///
/// `pipeline` receives a state on `[message | reference]` and returns weighted
/// branches on `[message | workspace | reference]`.
pub fn entanglement_fidelity<F>(k: usize, pipeline: F) -> Result<f64>
where
    F: FnOnce(DenseState) -> Result<Vec<Branch>>,
{
    let phi = DenseState::max_entangled(k)?;
    let branches = pipeline(phi)?;
    let mut total = 0.0;
    for b in &branches {
        if b.state.n() < 2 * k {
            return Err(Error::Invalid("pipeline dropped the reference".into()));
        }
        total += b.weight * b.state.max_entangled_overlap(k) / b.state.norm_sqr();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).norm() < tol
    }

    #[test]
    fn isometry_matches_group_projector() {
        for gens in [
            vec!["XXXX", "ZZZZ"],
            vec!["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"],
            vec!["YYI", "ZZZ"],
        ] {
            let code = StabilizerCode::from_strings(&gens).unwrap();
            let b = codespace_isometry(&code).unwrap();
            let proj = stabilizer_projector(&code).unwrap();
            let k = 1 << code.k();
            assert!(is_close(&(b.adjoint() * &b), &Matrix::identity(k, k), 1e-10));
            assert!(is_close(&(&b * b.adjoint()), &proj, 1e-10), "{gens:?}");
            assert!(is_close(&(&proj * &b), &b, 1e-10));
        }
    }

    #[test]
    fn gate_conjugation_matches_dense_matrices() {
        use crate::symplectic::Gate;
        let gates = [
            Gate::H(1),
            Gate::S(0),
            Gate::X(2),
            Gate::Z(1),
            Gate::Cnot(2, 0),
            Gate::Cz(0, 1),
        ];
        for g in gates {
            let u = circuit_unitary(&Circuit::from_gates(3, vec![g]).unwrap()).unwrap();
            for x in 0..8u64 {
                for z in 0..8u64 {
                    let p = PauliOperator::from_masks(3, x, z);
                    let mut q = p.clone();
                    g.conjugate(&mut q);
                    let lhs = &u * pauli_matrix(&p).unwrap() * u.adjoint();
                    assert!(is_close(&lhs, &pauli_matrix(&q).unwrap(), 1e-12), "{g} {p}");
                }
            }
        }
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let m = Matrix::from_fn(6, 4, |i, j| c((i * 3 + j) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0));
        let svd = m.clone().singular_values().max();
        assert!((power_iteration_norm(&m, 1e-14, 100_000) - svd).abs() < 1e-8);
    }

    #[test]
    fn guard_rejects_large_registers() {
        assert!(matches!(DenseState::zero(max_qubits() + 1), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn dephasing_fidelity() {
        for p in [0.0, 0.1, 0.5, 1.0] {
            let ch = QuantumChannel::dephasing(p).unwrap();
            let f = entanglement_fidelity(1, |phi| {
                apply_channel(&[Branch { weight: 1.0, state: phi }], &ch)
            })
            .unwrap();
            assert!((f - (1.0 - p / 2.0)).abs() < 1e-12);
        }
    }
}
