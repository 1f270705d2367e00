use super::{check_qubits, Matrix};
use crate::error::{Error, Result};
use crate::symplectic::{Circuit, Gate, PauliOperator};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pure state vector. Qubit 0 is the most significant bit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

/// A pure state carried with a probability weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub state: DenseState,
}

pub(crate) fn phase_power(p: u8) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        I,
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][usize::from(p % 4)]
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self> {
        DenseState::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n, "state")?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        if index >= amps.len() {
            return Err(Error::Invalid(format!("basis index {index} on {n} qubits")));
        }
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n, "state")?;
        if amps.len() != 1 << n {
            return Err(Error::Invalid(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        Ok(DenseState { n, amps })
    }

    /// Maximally entangled state `Σ_m |m⟩|m⟩ / √d` on `2k` qubits.
    pub fn max_entangled(k: usize) -> Result<Self> {
        let mut s = DenseState::zero(2 * k)?;
        s.amps[0] = Complex64::new(0.0, 0.0);
        let amp = Complex64::new((1.0 / (1u64 << k) as f64).sqrt(), 0.0);
        for m in 0..1usize << k {
            s.amps[(m << k) | m] = amp;
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for a in &mut self.amps {
                *a /= norm;
            }
        }
        norm
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amps {
            *a *= c;
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &DenseState) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Complex64 {
        debug_assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn distance(&self, other: &DenseState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        check_qubits(self.n + other.n, "state")?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(DenseState {
            n: self.n + other.n,
            amps,
        })
    }

    /// Appends `extra` qubits in `|0⟩`.
    pub fn extend_zero(&self, extra: usize) -> Result<DenseState> {
        self.tensor(&DenseState::zero(extra)?)
    }

    /// Inserts `count` qubits in `|0⟩` starting at position `at`.
    pub fn insert_zero(&self, at: usize, count: usize) -> Result<DenseState> {
        check_qubits(self.n + count, "state")?;
        let tail = self.n - at;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (self.n + count)];
        for (i, a) in self.amps.iter().enumerate() {
            let high = i >> tail;
            let low = i & ((1 << tail) - 1);
            amps[(high << (tail + count)) | low] = *a;
        }
        Ok(DenseState {
            n: self.n + count,
            amps,
        })
    }

    #[inline]
    pub fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    pub fn apply_gate(&mut self, g: Gate) -> Result<()> {
        for q in g.qubits() {
            if q >= self.n {
                return Err(Error::Invalid(format!("gate `{g}` outside {} qubits", self.n)));
            }
        }
        match g {
            Gate::H(q) => {
                let m = self.mask(q);
                let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a + b) * s;
                        self.amps[i | m] = (a - b) * s;
                    }
                }
            }
            Gate::S(q) => {
                let m = self.mask(q);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a *= I;
                    }
                }
            }
            Gate::X(q) => {
                let m = self.mask(q);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
            }
            Gate::Z(q) => {
                let m = self.mask(q);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::Cnot(c, t) => {
                let (mc, mt) = (self.mask(c), self.mask(t));
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let both = self.mask(a) | self.mask(b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *amp = -*amp;
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies `circuit` to qubits `offset..offset + circuit.n()`.
    pub fn apply_circuit_at(&mut self, circuit: &Circuit, offset: usize) -> Result<()> {
        if offset + circuit.n() > self.n {
            return Err(Error::SizeMismatch(self.n, offset + circuit.n()));
        }
        for &g in circuit.gates() {
            let shifted = match g {
                Gate::H(q) => Gate::H(q + offset),
                Gate::S(q) => Gate::S(q + offset),
                Gate::X(q) => Gate::X(q + offset),
                Gate::Z(q) => Gate::Z(q + offset),
                Gate::Cnot(a, b) => Gate::Cnot(a + offset, b + offset),
                Gate::Cz(a, b) => Gate::Cz(a + offset, b + offset),
            };
            self.apply_gate(shifted)?;
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        self.apply_circuit_at(circuit, 0)
    }

    /// Index masks `(x, z)` of a Pauli acting on qubits `offset..offset + p.n()`.
    fn pauli_masks(&self, p: &PauliOperator, offset: usize) -> (usize, usize) {
        let mut xm = 0;
        let mut zm = 0;
        for j in 0..p.n() {
            let m = self.mask(offset + j);
            if p.x().get(j) {
                xm |= m;
            }
            if p.z().get(j) {
                zm |= m;
            }
        }
        (xm, zm)
    }

    /// Applies `p` to qubits `offset..offset + p.n()`, including its phase.
    pub fn apply_pauli_at(&mut self, p: &PauliOperator, offset: usize) -> Result<()> {
        if offset + p.n() > self.n {
            return Err(Error::SizeMismatch(self.n, offset + p.n()));
        }
        let (xm, zm) = self.pauli_masks(p, offset);
        let ph = phase_power(p.phase());
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (b & zm).count_ones() & 1 == 1 { -ph } else { ph };
            out[b ^ xm] = sign * a;
        }
        self.amps = out;
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        self.apply_pauli_at(p, 0)
    }

    /// Applies a `2^k × 2^k` matrix to the listed qubits; `qubits[0]` is the
    /// most significant bit of the local index.
    pub fn apply_local(&mut self, u: &Matrix, qubits: &[usize]) -> Result<()> {
        if qubits.iter().any(|&q| q >= self.n) {
            return Err(Error::Invalid("local operator outside the register".into()));
        }
        apply_local_slice(&mut self.amps, self.n, u, qubits)
    }

    /// Zeroes every amplitude in which one of `qubits` is `|1⟩`.
    pub fn project_zero(&mut self, qubits: &[usize]) {
        let m: usize = qubits.iter().map(|&q| self.mask(q)).sum();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Runs `f` on the component where `qubit` equals `value`, as a state on
    /// the remaining qubits, and writes the result back.
    pub fn on_subspace<F>(&mut self, qubit: usize, value: bool, f: F) -> Result<()>
    where
        F: FnOnce(&mut DenseState) -> Result<()>,
    {
        self.on_register(qubit, 1, value as usize, f)
    }

    /// Runs `f` on the slice where qubits `start..start + len` read `value`
    /// (first qubit most significant). Those qubits are removed from the
    /// sub-state, so qubits before `start` keep their positions.
    pub fn on_register<F>(&mut self, start: usize, len: usize, value: usize, f: F) -> Result<()>
    where
        F: FnOnce(&mut DenseState) -> Result<()>,
    {
        if start + len > self.n || value >= 1 << len {
            return Err(Error::Invalid(format!(
                "register {start}..{} with value {value} on {} qubits",
                start + len,
                self.n
            )));
        }
        let shift = self.n - start - len;
        let mask = ((1usize << len) - 1) << shift;
        let target = value << shift;
        let indices: Vec<usize> = (0..self.amps.len()).filter(|&i| i & mask == target).collect();
        let mut sub = DenseState {
            n: self.n - len,
            amps: indices.iter().map(|&i| self.amps[i]).collect(),
        };
        f(&mut sub)?;
        if sub.n != self.n - len {
            return Err(Error::Invalid("sub-state changed size".into()));
        }
        for (&i, a) in indices.iter().zip(sub.amps) {
            self.amps[i] = a;
        }
        Ok(())
    }

    /// Component where qubits `start..start + len` read `value`, as a state on
    /// the remaining qubits. Inverse of `insert_zero` for `value = 0`.
    pub fn take_register(&self, start: usize, len: usize, value: usize) -> Result<DenseState> {
        let mut out = None;
        let mut scratch = self.clone();
        scratch.on_register(start, len, value, |sub| {
            out = Some(sub.clone());
            Ok(())
        })?;
        out.ok_or_else(|| Error::Invariant("register slice was not produced".into()))
    }

    /// Squared norm of `(⟨Φ| ⊗ I)|self⟩` where `Φ` is maximally entangled between
    /// the first `k` and the last `k` qubits and the middle qubits are left open.
    pub fn max_entangled_overlap(&self, k: usize) -> f64 {
        let junk = self.n - 2 * k;
        let d = 1usize << k;
        let mut total = 0.0;
        for j in 0..1usize << junk {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..d {
                acc += self.amps[(m << (junk + k)) | (j << k) | m];
            }
            total += acc.norm_sqr();
        }
        total / d as f64
    }

    /// Column vector view.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_column_slice(self.amps.len(), 1, &self.amps)
    }
}

/// Applies `u` to `qubits` of a raw amplitude vector on `n` qubits.
pub(crate) fn apply_local_slice(
    amps: &mut [Complex64],
    n: usize,
    u: &Matrix,
    qubits: &[usize],
) -> Result<()> {
    let k = qubits.len();
    if u.nrows() != 1 << k || u.ncols() != 1 << k {
        return Err(Error::Invalid(format!(
            "{}×{} matrix on {k} qubits",
            u.nrows(),
            u.ncols()
        )));
    }
    let masks: Vec<usize> = qubits.iter().map(|&q| 1 << (n - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|l| {
            (0..k)
                .filter(|&j| l >> (k - 1 - j) & 1 == 1)
                .map(|j| masks[j])
                .sum()
        })
        .collect();
    let mut local = vec![Complex64::new(0.0, 0.0); 1 << k];
    for base in 0..amps.len() {
        if base & all != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            local[l] = amps[base | off];
        }
        for (row, off) in offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, v) in local.iter().enumerate() {
                acc += u[(row, col)] * v;
            }
            amps[base | off] = acc;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::{circuit_unitary, pauli_matrix};

    #[test]
    fn pauli_application_matches_matrix() {
        for s in ["XYZ", "iZIX", "-YYI", "IIZ"] {
            let p = PauliOperator::from_symbols(s).unwrap();
            let m = pauli_matrix(&p).unwrap();
            for b in 0..8 {
                let mut st = DenseState::basis(3, b).unwrap();
                st.apply_pauli(&p).unwrap();
                let col = m.column(b);
                for (i, a) in st.amplitudes().iter().enumerate() {
                    assert!((a - col[i]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn local_operator_matches_gate() {
        let h = circuit_unitary(&Circuit::from_gates(1, vec![Gate::H(0)]).unwrap()).unwrap();
        let mut a = DenseState::basis(3, 5).unwrap();
        let mut b = a.clone();
        a.apply_local(&h, &[1]).unwrap();
        b.apply_gate(Gate::H(1)).unwrap();
        assert!(a.distance(&b) < 1e-12);
    }

    #[test]
    fn insert_zero_places_qubits() {
        let s = DenseState::basis(2, 0b11).unwrap();
        let t = s.insert_zero(1, 2).unwrap();
        assert_eq!(t.amplitudes()[0b1001], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn max_entangled_overlap_is_one_on_itself() {
        let phi = DenseState::max_entangled(2).unwrap();
        assert!((phi.max_entangled_overlap(2) - 1.0).abs() < 1e-12);
        let padded = phi.insert_zero(2, 1).unwrap();
        assert!((padded.max_entangled_overlap(2) - 1.0).abs() < 1e-12);
    }
}
