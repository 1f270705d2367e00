//! Pauli manipulation detection code: the message is encoded into a uniform
//! superposition over keys of the keyed family's encodings.
//!
//! Register layout is `[message | family ancilla | key]`, `n + λ` qubits in
//! all, and the key register holds the field element's bit pattern.

use crate::densesim::{c, check_qubits, encoder_isometry, operator_norm, DenseState, Matrix};
use crate::error::{Error, Result};
use crate::ptc::{PtcFamily, SweepMode};
use crate::symplectic::{standard_form_encoder, Circuit, Gate, PauliOperator, PivotRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Largest `n + λ` for which a code is built.
pub const MAX_PMD_QUBITS: usize = 12;

/// Largest `n + λ` swept exhaustively by `measure_pmd_epsilon`.
pub const EXHAUSTIVE_EPSILON_QUBITS: usize = 10;

/// Largest register, flag included, for the dense authentication operator.
pub const DENSE_AUTH_QUBITS: usize = 11;

#[derive(Clone, Debug)]
pub struct PmdCode {
    family: PtcFamily,
    rule: PivotRule,
    encoders: Vec<Circuit>,
    decoders: Vec<Circuit>,
    blocks: Vec<Matrix>,
}

impl PmdCode {
    pub fn new(family: PtcFamily, rule: PivotRule) -> Result<Self> {
        let total = family.n() + family.lambda();
        if total > MAX_PMD_QUBITS {
            return Err(Error::SizeGuard(format!(
                "code on {total} qubits (limit {MAX_PMD_QUBITS})"
            )));
        }
        let k = family.n() - family.lambda();
        let mut encoders = Vec::new();
        let mut blocks = Vec::new();
        for key in 0..family.key_count() as u32 {
            let enc = standard_form_encoder(&family.code(key)?, rule)?;
            blocks.push(encoder_isometry(&enc, k)?);
            encoders.push(enc);
        }
        let decoders = encoders.iter().map(Circuit::inverse).collect();
        Ok(PmdCode {
            family,
            rule,
            encoders,
            decoders,
            blocks,
        })
    }

    pub fn family(&self) -> &PtcFamily {
        &self.family
    }

    pub fn pivot_rule(&self) -> PivotRule {
        self.rule
    }

    /// Qubits of one family code, `n`.
    pub fn code_qubits(&self) -> usize {
        self.family.n()
    }

    pub fn key_qubits(&self) -> usize {
        self.family.lambda()
    }

    pub fn message_qubits(&self) -> usize {
        self.family.n() - self.family.lambda()
    }

    pub fn total_qubits(&self) -> usize {
        self.family.n() + self.family.lambda()
    }

    pub fn key_count(&self) -> usize {
        self.family.key_count()
    }

    pub fn encoder(&self, key: u32) -> &Circuit {
        &self.encoders[key as usize]
    }

    /// Isometry of the code for one key, `2^n × 2^{n-λ}`.
    pub fn block(&self, key: u32) -> &Matrix {
        &self.blocks[key as usize]
    }

    /// `2^{n+λ} × 2^{n-λ}` encoding isometry.
    pub fn isometry(&self) -> Matrix {
        let lam = self.key_qubits();
        let keys = self.key_count();
        let rows = 1usize << self.total_qubits();
        let cols = 1usize << self.message_qubits();
        let norm = 1.0 / (keys as f64).sqrt();
        let mut m = Matrix::zeros(rows, cols);
        for (key, b) in self.blocks.iter().enumerate() {
            for i in 0..b.nrows() {
                for j in 0..cols {
                    m[((i << lam) | key, j)] = b[(i, j)] * norm;
                }
            }
        }
        m
    }

    pub fn projector(&self) -> Matrix {
        let b = self.isometry();
        &b * b.adjoint()
    }

    /// Full encoding unitary on qubits `offset..offset + n + λ`: Hadamards
    /// on the key register, then the family encoder selected by the key.
    pub fn apply_encoder(&self, state: &mut DenseState, offset: usize) -> Result<()> {
        self.check_register(state, offset)?;
        let key_start = offset + self.code_qubits();
        for q in key_start..key_start + self.key_qubits() {
            state.apply_gate(Gate::H(q))?;
        }
        for (key, enc) in self.encoders.iter().enumerate() {
            state.on_register(key_start, self.key_qubits(), key, |sub| {
                sub.apply_circuit_at(enc, offset)
            })?;
        }
        Ok(())
    }

    /// Inverse of `apply_encoder`.
    pub fn apply_decoder(&self, state: &mut DenseState, offset: usize) -> Result<()> {
        self.check_register(state, offset)?;
        let key_start = offset + self.code_qubits();
        for (key, dec) in self.decoders.iter().enumerate() {
            state.on_register(key_start, self.key_qubits(), key, |sub| {
                sub.apply_circuit_at(dec, offset)
            })?;
        }
        for q in key_start..key_start + self.key_qubits() {
            state.apply_gate(Gate::H(q))?;
        }
        Ok(())
    }

    /// Encodes the first `n - λ` qubits of `state`, inserting the ancilla and
    /// key registers right after them.
    pub fn encode(&self, state: &DenseState) -> Result<DenseState> {
        let k = self.message_qubits();
        if state.n() < k {
            return Err(Error::SizeMismatch(state.n(), k));
        }
        let mut out = state.insert_zero(k, 2 * self.key_qubits())?;
        self.apply_encoder(&mut out, 0)?;
        Ok(out)
    }

    /// Authentication on the register at `offset` with flag qubit `flag`.
    ///
    /// The flag is flipped on the code space, and on that branch the register
    /// is decoded. Off the code space the flag picks up a `Z`.
    pub fn apply_auth(&self, state: &mut DenseState, offset: usize, flag: usize) -> Result<()> {
        self.check_register(state, offset)?;
        if (offset..offset + self.total_qubits()).contains(&flag) || flag >= state.n() {
            return Err(Error::Invalid(format!("flag qubit {flag} overlaps the register")));
        }
        self.apply_decoder(state, offset)?;
        // In the decoded frame the code space is "ancilla and key all zero".
        let n = state.n();
        let k = self.message_qubits();
        let check_mask: usize = (offset + k..offset + self.total_qubits())
            .map(|q| 1usize << (n - 1 - q))
            .sum();
        let fmask = 1usize << (n - 1 - flag);
        let amps = state.amplitudes_mut();
        for i in 0..amps.len() {
            if i & check_mask == 0 {
                if i & fmask == 0 {
                    amps.swap(i, i | fmask);
                }
            } else if i & fmask != 0 {
                amps[i] = -amps[i];
            }
        }
        // Re-encode only where the flag reads 0.
        let sub_offset = if flag < offset { offset - 1 } else { offset };
        state.on_subspace(flag, false, |sub| self.apply_encoder(sub, sub_offset))
    }

    fn check_register(&self, state: &DenseState, offset: usize) -> Result<()> {
        if offset + self.total_qubits() > state.n() {
            return Err(Error::SizeMismatch(state.n(), offset + self.total_qubits()));
        }
        Ok(())
    }

    /// `B† E B` for a Pauli on all `n + λ` qubits.
    ///
    /// Writing `E = E_C ⊗ X^a Z^b` with the key part last, this is
    /// `|K|^{-1} Σ_k (-1)^{b·k} B_{k+a}† E_C B_k`.
    pub fn logical_block(&self, e: &PauliOperator) -> Result<Matrix> {
        if e.n() != self.total_qubits() {
            return Err(Error::SizeMismatch(e.n(), self.total_qubits()));
        }
        let n = self.code_qubits();
        let (xc, zc, a, b) = self.split(e);
        let images: Vec<Matrix> = self.blocks.iter().map(|bk| apply_masks(n, xc, zc, bk)).collect();
        let mut acc = self.keyed_sum(&images, a, b);
        acc *= crate::densesim::phase_power(e.phase());
        Ok(acc)
    }

    fn keyed_sum(&self, images: &[Matrix], a: usize, b: usize) -> Matrix {
        let terms: Vec<Matrix> = (0..self.key_count())
            .map(|k| self.blocks[k ^ a].adjoint() * &images[k])
            .collect();
        signed_sum(&terms, b)
    }

    /// Code-part masks (qubit `q` at bit `q`) and key-part integers.
    fn split(&self, e: &PauliOperator) -> (u64, u64, usize, usize) {
        let n = self.code_qubits();
        let lam = self.key_qubits();
        let mut xc = 0u64;
        let mut zc = 0u64;
        for q in 0..n {
            xc |= (e.x().get(q) as u64) << q;
            zc |= (e.z().get(q) as u64) << q;
        }
        let mut a = 0usize;
        let mut b = 0usize;
        for j in 0..lam {
            let bit = 1usize << (lam - 1 - j);
            if e.x().get(n + j) {
                a |= bit;
            }
            if e.z().get(n + j) {
                b |= bit;
            }
        }
        (xc, zc, a, b)
    }

    fn pauli_from_parts(&self, xc: u64, zc: u64, a: usize, b: usize) -> PauliOperator {
        let n = self.code_qubits();
        let lam = self.key_qubits();
        let mut x = xc;
        let mut z = zc;
        for j in 0..lam {
            x |= (((a >> (lam - 1 - j)) & 1) as u64) << (n + j);
            z |= (((b >> (lam - 1 - j)) & 1) as u64) << (n + j);
        }
        PauliOperator::from_masks(n + lam, x, z)
    }
}

pub fn build_pmd(family: PtcFamily) -> Result<PmdCode> {
    PmdCode::new(family, PivotRule::Lowest)
}

/// `|K|^{-1} Σ_k (-1)^{b·k} terms[k]`.
fn signed_sum(terms: &[Matrix], b: usize) -> Matrix {
    let mut acc = Matrix::zeros(terms[0].nrows(), terms[0].ncols());
    for (k, m) in terms.iter().enumerate() {
        if (b & k).count_ones() % 2 == 1 {
            acc -= m;
        } else {
            acc += m;
        }
    }
    acc / c(terms.len() as f64, 0.0)
}

/// Rows of `E_C · m` for a Pauli on `n` qubits given by masks.
fn apply_masks(n: usize, x: u64, z: u64, m: &Matrix) -> Matrix {
    let mut xm = 0usize;
    let mut zm = 0usize;
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        if x >> q & 1 == 1 {
            xm |= bit;
        }
        if z >> q & 1 == 1 {
            zm |= bit;
        }
    }
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for row in 0..m.nrows() {
        let sign = if (row & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        for col in 0..m.ncols() {
            out[(row ^ xm, col)] = m[(row, col)] * sign;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonResult {
    pub value: f64,
    pub argmax: String,
    pub evaluated: u64,
    pub exhaustive: bool,
}

/// `max_{E ≠ I} ‖B† E B‖`, with the first maximiser in sweep order.
pub fn measure_pmd_epsilon(pmd: &PmdCode, mode: SweepMode) -> Result<EpsilonResult> {
    let n = pmd.code_qubits();
    let keys = pmd.key_count();
    let total = pmd.total_qubits();
    let exhaustive = match mode {
        SweepMode::Auto => total <= EXHAUSTIVE_EPSILON_QUBITS,
        SweepMode::Exhaustive if total <= EXHAUSTIVE_EPSILON_QUBITS => true,
        SweepMode::Exhaustive => {
            return Err(Error::SizeGuard(format!(
                "exhaustive sweep on {total} qubits (limit {EXHAUSTIVE_EPSILON_QUBITS}); use sampling mode (--samples N --seed S)"
            )))
        }
        SweepMode::Sampled { .. } => false,
    };
    if exhaustive {
        let dim = 1u64 << n;
        let best = (0..dim * dim)
            .into_par_iter()
            .map(|idx| {
                let (xc, zc) = (idx / dim, idx % dim);
                let images: Vec<Matrix> = pmd
                    .blocks
                    .iter()
                    .map(|bk| apply_masks(n, xc, zc, bk))
                    .collect();
                let mut best = (f64::NEG_INFINITY, u64::MAX);
                for a in 0..keys {
                    let terms: Vec<Matrix> = (0..keys)
                        .map(|k| pmd.blocks[k ^ a].adjoint() * &images[k])
                        .collect();
                    for b in 0..keys {
                        if idx == 0 && a == 0 && b == 0 {
                            continue;
                        }
                        let v = operator_norm(&signed_sum(&terms, b));
                        let global = (idx * keys as u64 + a as u64) * keys as u64 + b as u64;
                        best = pick(best, (v, global));
                    }
                }
                best
            })
            .reduce(|| (f64::NEG_INFINITY, u64::MAX), pick);
        let (v, g) = best;
        let b = (g % keys as u64) as usize;
        let a = ((g / keys as u64) % keys as u64) as usize;
        let idx = g / (keys as u64 * keys as u64);
        Ok(EpsilonResult {
            value: v,
            argmax: pmd.pauli_from_parts(idx / dim, idx % dim, a, b).to_string(),
            evaluated: dim * dim * (keys * keys) as u64 - 1,
            exhaustive: true,
        })
    } else {
        let (samples, seed) = match mode {
            SweepMode::Sampled { samples, seed } => (samples, seed),
            _ => (crate::ptc::DEFAULT_SAMPLES.min(20_000), 0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = (f64::NEG_INFINITY, String::new());
        for _ in 0..samples {
            let e = loop {
                let x = rng.random::<u64>() & ((1u64 << total) - 1);
                let z = rng.random::<u64>() & ((1u64 << total) - 1);
                if x != 0 || z != 0 {
                    break PauliOperator::from_masks(total, x, z);
                }
            };
            let v = operator_norm(&pmd.logical_block(&e)?);
            if v > best.0 {
                best = (v, e.to_string());
            }
        }
        Ok(EpsilonResult {
            value: best.0.max(0.0),
            argmax: best.1,
            evaluated: samples,
            exhaustive: false,
        })
    }
}

fn pick(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Slack allowed when comparing a floating-point measurement with a bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// `max(ε_family, sqrt(2^{-λ} + δ))`.
pub fn pmd_bound(family_epsilon: f64, delta: f64, lambda: usize) -> f64 {
    let key_term = 1.0 / (1u64 << lambda) as f64;
    family_epsilon.max((key_term + delta).sqrt())
}

/// Dense authentication unitary on `[register | flag]`.
pub fn auth_unitary(pmd: &PmdCode) -> Result<Matrix> {
    let total = pmd.total_qubits() + 1;
    if total > DENSE_AUTH_QUBITS {
        return Err(Error::SizeGuard(format!(
            "dense authentication operator on {total} qubits (limit {DENSE_AUTH_QUBITS})"
        )));
    }
    check_qubits(total, "operator")?;
    let dim = 1usize << total;
    let mut m = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = DenseState::basis(total, col)?;
        pmd.apply_auth(&mut s, 0, total - 1)?;
        m.set_column(col, &s.to_matrix().column(0));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::pauli_matrix;
    use crate::ptc::{measure_pairwise_detectability, measure_strong_ptc_error};

    fn pmd(n: usize, lam: usize) -> PmdCode {
        build_pmd(PtcFamily::new(n, lam).unwrap()).unwrap()
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).norm() < tol
    }

    #[test]
    fn isometry_contracts() {
        for (n, lam) in [(2, 1), (4, 2)] {
            let p = pmd(n, lam);
            let b = p.isometry();
            let k = 1 << p.message_qubits();
            assert!(close(&(b.adjoint() * &b), &Matrix::identity(k, k), 1e-10));
            let proj = p.projector();
            assert!(close(&(&proj * &b), &b, 1e-10));
            assert!((proj.trace().re - k as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn state_path_matches_isometry() {
        let p = pmd(4, 2);
        let b = p.isometry();
        for m in 0..4 {
            let s = p.encode(&DenseState::basis(2, m).unwrap()).unwrap();
            assert!(close(&s.to_matrix(), &b.columns(m, 1).into_owned(), 1e-12));
            let mut back = s.clone();
            p.apply_decoder(&mut back, 0).unwrap();
            let want = DenseState::basis(2, m).unwrap().extend_zero(4).unwrap();
            assert!(back.distance(&want) < 1e-12);
        }
    }

    #[test]
    fn fast_block_matches_dense_product() {
        for (n, lam) in [(2, 1), (4, 2)] {
            let p = pmd(n, lam);
            let b = p.isometry();
            let total = n + lam;
            for x in 0..1u64 << total {
                for z in 0..1u64 << total {
                    let e = PauliOperator::from_masks(total, x, z);
                    let dense = b.adjoint() * pauli_matrix(&e).unwrap() * &b;
                    assert!(close(&p.logical_block(&e).unwrap(), &dense, 1e-10), "{e}");
                }
            }
        }
    }

    #[test]
    fn key_phase_errors_vanish() {
        for (n, lam) in [(2, 1), (4, 2), (6, 3)] {
            let p = pmd(n, lam);
            for b in 1..1u64 << lam {
                let e = PauliOperator::from_masks(n + lam, 0, b << n);
                assert!(operator_norm(&p.logical_block(&e).unwrap()) <= 1e-10);
            }
        }
    }

    #[test]
    fn identity_has_unit_norm() {
        let p = pmd(4, 2);
        let e = PauliOperator::identity(6);
        assert!((operator_norm(&p.logical_block(&e).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_holds_for_both_pivot_rules() {
        for (n, lam) in [(2, 1), (4, 2)] {
            let fam = PtcFamily::new(n, lam).unwrap();
            let e = measure_strong_ptc_error(&fam, SweepMode::Exhaustive).unwrap().value;
            let d = measure_pairwise_detectability(&fam, SweepMode::Exhaustive).unwrap().value;
            for rule in [PivotRule::Lowest, PivotRule::Highest] {
                let p = PmdCode::new(fam.clone(), rule).unwrap();
                let eps = measure_pmd_epsilon(&p, SweepMode::Exhaustive).unwrap();
                assert!(eps.value <= pmd_bound(e, d, lam) + BOUND_TOLERANCE, "{n} {lam} {rule:?}");
            }
        }
    }

    #[test]
    fn auth_matches_projector_formula() {
        let p = pmd(2, 1);
        let w = {
            let dim = 8;
            let mut w = Matrix::zeros(dim, dim);
            for col in 0..dim {
                let mut s = DenseState::basis(3, col).unwrap();
                p.apply_encoder(&mut s, 0).unwrap();
                w.set_column(col, &s.to_matrix().column(0));
            }
            w
        };
        let proj = p.projector();
        let id = Matrix::identity(8, 8);
        let x = Matrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let z = Matrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let p0 = Matrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let p1 = &Matrix::identity(2, 2) - &p0;
        let u = proj.kronecker(&x) + (&id - &proj).kronecker(&z);
        let ctrl = id.kronecker(&p0) + w.adjoint().kronecker(&p1);
        let want = ctrl * u;
        let got = auth_unitary(&p).unwrap();
        assert!(close(&got, &want, 1e-10));
        assert!(close(&(got.adjoint() * &got), &Matrix::identity(16, 16), 1e-10));
    }

    #[test]
    fn auth_recovers_code_states() {
        let p = pmd(4, 2);
        let mut msg = DenseState::from_amplitudes(
            2,
            vec![c(0.5, 0.1), c(-0.3, 0.2), c(0.4, -0.5), c(0.1, 0.3)],
        )
        .unwrap();
        msg.normalize();
        let mut s = p.encode(&msg).unwrap().extend_zero(1).unwrap();
        p.apply_auth(&mut s, 0, 6).unwrap();
        let want = msg.extend_zero(4).unwrap().extend_zero(1).unwrap();
        let mut flagged = want.clone();
        flagged.apply_gate(Gate::X(6)).unwrap();
        assert!(s.distance(&flagged) < 1e-10);
    }

    #[test]
    fn auth_leaves_corrupted_states_nearly_alone() {
        let p = pmd(4, 2);
        let eps = measure_pmd_epsilon(&p, SweepMode::Exhaustive).unwrap().value;
        let msg = DenseState::basis(2, 1).unwrap();
        for e in ["XIIIII", "IZIYII", "ZZZZXY", "IIIIXI"] {
            let e = PauliOperator::from_symbols(e).unwrap();
            let mut phi = p.encode(&msg).unwrap();
            phi.apply_pauli(&e).unwrap();
            let before = phi.extend_zero(1).unwrap();
            let mut after = before.clone();
            p.apply_auth(&mut after, 0, 6).unwrap();
            assert!(after.distance(&before) <= 2f64.sqrt() * eps + 1e-10, "{e}");
        }
    }

    #[test]
    fn auth_flag_may_precede_register() {
        let p = pmd(2, 1);
        let msg = DenseState::basis(1, 1).unwrap();
        let enc = p.encode(&msg).unwrap();
        let mut s = DenseState::zero(1).unwrap().tensor(&enc).unwrap();
        p.apply_auth(&mut s, 1, 0).unwrap();
        let mut want = DenseState::zero(1).unwrap().tensor(&msg.extend_zero(2).unwrap()).unwrap();
        want.apply_gate(Gate::X(0)).unwrap();
        assert!(s.distance(&want) < 1e-10);
    }
}
