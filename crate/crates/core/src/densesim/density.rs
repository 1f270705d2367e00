use super::state::apply_local_slice;
use super::{c, DenseState, Matrix, QuantumChannel};
use crate::error::{Error, Result};
use crate::symplectic::PauliOperator;

/// Dense density matrices are only built up to this many qubits.
pub const MAX_DENSITY_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    mat: Matrix,
}

impl DensityMatrix {
    pub fn from_matrix(n: usize, mat: Matrix) -> Result<Self> {
        check(n)?;
        if mat.nrows() != 1 << n || mat.ncols() != 1 << n {
            return Err(Error::Invalid("density matrix has the wrong dimension".into()));
        }
        Ok(DensityMatrix { n, mat })
    }

    pub fn from_pure(state: &DenseState) -> Result<Self> {
        check(state.n())?;
        let v = state.to_matrix();
        Ok(DensityMatrix {
            n: state.n(),
            mat: &v * v.adjoint(),
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check(n)?;
        Ok(DensityMatrix {
            n,
            mat: Matrix::zeros(1 << n, 1 << n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn add_scaled(&mut self, w: f64, other: &DensityMatrix) {
        self.mat += &other.mat * c(w, 0.0);
    }

    /// `K ρ K†` for a single operator `k` on `qubits`.
    pub fn sandwich(&self, k: &Matrix, qubits: &[usize]) -> Result<DensityMatrix> {
        let dim = 1usize << self.n;
        let mut left = self.mat.clone();
        for j in 0..dim {
            apply_local_slice(left.column_mut(j).as_mut_slice(), self.n, k, qubits)?;
        }
        let mut right = left.adjoint();
        for j in 0..dim {
            apply_local_slice(right.column_mut(j).as_mut_slice(), self.n, k, qubits)?;
        }
        Ok(DensityMatrix {
            n: self.n,
            mat: right.adjoint(),
        })
    }

    /// `Σ_μ K_μ ρ K_μ†` with the channel acting on `qubits`.
    pub fn apply_channel_on(&self, channel: &QuantumChannel, qubits: &[usize]) -> Result<DensityMatrix> {
        if qubits.len() != channel.support().len() {
            return Err(Error::Invalid("channel support does not match the target qubits".into()));
        }
        let mut acc = DensityMatrix::zeros(self.n)?;
        for k in channel.kraus() {
            acc.mat += self.sandwich(k, qubits)?.mat;
        }
        Ok(acc)
    }

    /// `P ρ P†` for a Pauli on qubits `offset..offset + p.n()`.
    pub fn conjugate_pauli(&self, p: &PauliOperator, offset: usize) -> Result<DensityMatrix> {
        if offset + p.n() > self.n {
            return Err(Error::SizeMismatch(self.n, offset + p.n()));
        }
        let mut xm = 0usize;
        let mut zm = 0usize;
        for j in 0..p.n() {
            let bit = 1 << (self.n - 1 - (offset + j));
            if p.x().get(j) {
                xm |= bit;
            }
            if p.z().get(j) {
                zm |= bit;
            }
        }
        let dim = 1usize << self.n;
        let mut out = Matrix::zeros(dim, dim);
        for a in 0..dim {
            let sa = if (a & zm).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            for b in 0..dim {
                let sb = if (b & zm).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                out[(a ^ xm, b ^ xm)] = self.mat[(a, b)] * (sa * sb);
            }
        }
        Ok(DensityMatrix { n: self.n, mat: out })
    }

    /// Applies a single-qubit map given by its `4 × 4` superoperator `s` to
    /// qubit `q`, with `ρ'_{ab} = Σ_{cd} s[(2a + b, 2c + d)] ρ_{cd}`.
    pub fn apply_superoperator(&self, s: &Matrix, q: usize) -> Result<DensityMatrix> {
        if s.nrows() != 4 || s.ncols() != 4 {
            return Err(Error::Invalid("single-qubit superoperator must be 4×4".into()));
        }
        if q >= self.n {
            return Err(Error::Invalid(format!("qubit {q} outside {} qubits", self.n)));
        }
        let dim = 1usize << self.n;
        let m = 1usize << (self.n - 1 - q);
        let mut out = Matrix::zeros(dim, dim);
        for i in (0..dim).filter(|i| i & m == 0) {
            for j in (0..dim).filter(|j| j & m == 0) {
                let block = [
                    self.mat[(i, j)],
                    self.mat[(i, j | m)],
                    self.mat[(i | m, j)],
                    self.mat[(i | m, j | m)],
                ];
                for (row, (a, b)) in [(i, j), (i, j | m), (i | m, j), (i | m, j | m)].into_iter().enumerate() {
                    out[(a, b)] = (0..4).map(|col| s[(row, col)] * block[col]).sum();
                }
            }
        }
        Ok(DensityMatrix { n: self.n, mat: out })
    }

    /// `tr(op ρ)`.
    pub fn expectation(&self, op: &Matrix) -> f64 {
        (op * &self.mat).trace().re
    }

    /// One-qubit reduced state of qubit `q`.
    pub fn single_qubit_marginal(&self, q: usize) -> Matrix {
        let dim = 1usize << self.n;
        let m = 1usize << (self.n - 1 - q);
        let mut out = Matrix::zeros(2, 2);
        for a in 0..dim {
            if a & m != 0 {
                continue;
            }
            for i in 0..2 {
                for j in 0..2 {
                    out[(i, j)] += self.mat[(a | (i * m), a | (j * m))];
                }
            }
        }
        out
    }
}

fn check(n: usize) -> Result<()> {
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::SizeGuard(format!(
            "density matrix on {n} qubits (limit {MAX_DENSITY_QUBITS})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::pauli_matrix;
    use crate::symplectic::Gate;

    #[test]
    fn pauli_conjugation_matches_matrices() {
        let mut s = DenseState::zero(3).unwrap();
        s.apply_gate(Gate::H(0)).unwrap();
        s.apply_gate(Gate::Cnot(0, 2)).unwrap();
        s.apply_gate(Gate::S(2)).unwrap();
        let rho = DensityMatrix::from_pure(&s).unwrap();
        let p = PauliOperator::from_symbols("iXZ").unwrap();
        let got = rho.conjugate_pauli(&p, 1).unwrap();
        let full = pauli_matrix(&PauliOperator::from_symbols("I").unwrap().tensor(&p)).unwrap();
        let want = &full * rho.matrix() * full.adjoint();
        assert!((got.matrix() - want).norm() < 1e-12);
    }

    #[test]
    fn channel_on_subsystem_preserves_trace() {
        let mut s = DenseState::zero(2).unwrap();
        s.apply_gate(Gate::H(0)).unwrap();
        s.apply_gate(Gate::Cnot(0, 1)).unwrap();
        let rho = DensityMatrix::from_pure(&s).unwrap();
        let out = rho
            .apply_channel_on(&QuantumChannel::amplitude_damping(0.4).unwrap(), &[1])
            .unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        let marg = out.single_qubit_marginal(1);
        assert!((marg[(0, 0)].re - 0.7).abs() < 1e-12);
    }

    #[test]
    fn superoperator_matches_kraus_application() {
        let mut s = DenseState::zero(3).unwrap();
        s.apply_gate(Gate::H(0)).unwrap();
        s.apply_gate(Gate::Cnot(0, 2)).unwrap();
        s.apply_gate(Gate::H(1)).unwrap();
        let rho = DensityMatrix::from_pure(&s).unwrap();
        let ch = QuantumChannel::amplitude_damping(0.3).unwrap();
        let sup = ch
            .kraus()
            .iter()
            .fold(Matrix::zeros(4, 4), |acc, k| acc + k.kronecker(&k.conjugate()));
        for q in 0..3 {
            let want = rho.apply_channel_on(&ch, &[q]).unwrap();
            let got = rho.apply_superoperator(&sup, q).unwrap();
            assert!((got.matrix() - want.matrix()).norm() < 1e-12);
        }
    }
}
