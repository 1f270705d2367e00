use super::nm::{fit_tampering, NmCode, TamperFunction};
use super::twirl::{
    apply_superoperator_2x2, conjugation_superoperator, pauli_superoperator, replacement_superoperator, superoperator,
    twirl_probabilities,
};
use crate::aqec::ComposedCode;
use crate::bits::BitVec;
use crate::densesim::{c, single_qubit_paulis, DenseState, DensityMatrix, Matrix, QuantumChannel, MAX_DENSITY_QUBITS};
use crate::error::{Error, Result};
use crate::pmd::BOUND_TOLERANCE;
use crate::symplectic::PauliOperator;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest quantum register of the protocol.
pub const MAX_THIRD_QUBITS: usize = 8;

/// Largest register for which every key is enumerated explicitly.
pub const MAX_EXPLICIT_KEY_QUBITS: usize = 6;

/// Squared norm below which a decoded branch counts as rejected.
const ACCEPT_FLOOR: f64 = 1e-14;

/// `X^x Z^z` for the two key bits `v = x + 2z` of one qubit.
pub fn pad_matrix(v: u8) -> Matrix {
    let p = single_qubit_paulis();
    match v & 3 {
        0 => p[0].clone(),
        1 => p[1].clone(),
        2 => p[3].clone(),
        _ => &p[1] * &p[3],
    }
}

/// Register-wide pad, qubit `q` padded by `key[q]`.
pub fn pad_operator(key: &[u8]) -> PauliOperator {
    let (mut x, mut z) = (0u64, 0u64);
    for (q, &v) in key.iter().enumerate() {
        x |= u64::from(v & 1) << q;
        z |= u64::from(v >> 1 & 1) << q;
    }
    PauliOperator::from_masks(key.len(), x, z)
}

/// Per-wire attack: one single-qubit channel per quantum wire and one
/// bit-wise tampering per key chunk on the classical wires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitwiseAttack {
    pub channels: Vec<QuantumChannel>,
    pub tampers: Vec<TamperFunction>,
}

impl QubitwiseAttack {
    pub fn new(channels: Vec<QuantumChannel>, tampers: Vec<TamperFunction>) -> Result<Self> {
        if channels.iter().any(|ch| ch.support().len() != 1) {
            return Err(Error::Invalid("qubit-wise attacks use single-qubit channels".into()));
        }
        Ok(QubitwiseAttack { channels, tampers })
    }

    pub fn identity(qubits: usize, chunks: usize, codeword_bits: usize) -> Self {
        QubitwiseAttack {
            channels: vec![QuantumChannel::identity(); qubits],
            tampers: vec![TamperFunction::keep_all(codeword_bits); chunks],
        }
    }

    /// Applies the Pauli `p` to the quantum wires and leaves the key alone.
    pub fn pauli(p: &PauliOperator, codeword_bits: usize) -> Result<Self> {
        let paulis = single_qubit_paulis();
        let channels = (0..p.n())
            .map(|q| {
                let idx = match (p.x().get(q), p.z().get(q)) {
                    (false, false) => 0,
                    (true, false) => 1,
                    (true, true) => 2,
                    (false, true) => 3,
                };
                QuantumChannel::unitary(paulis[idx].clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QubitwiseAttack {
            channels,
            tampers: vec![TamperFunction::keep_all(codeword_bits); p.n()],
        })
    }

    /// Independent random single-qubit channels and uniformly random bit-wise tamperings.
    pub fn random<R: Rng + ?Sized>(qubits: usize, codeword_bits: usize, kraus: usize, rng: &mut R) -> Result<Self> {
        let channels = (0..qubits)
            .map(|_| QuantumChannel::random(vec![0], kraus, rng))
            .collect::<Result<Vec<_>>>()?;
        let tampers = (0..qubits)
            .map(|_| TamperFunction::nth(codeword_bits, rng.random_range(0..1u64 << (2 * codeword_bits))))
            .collect();
        Ok(QubitwiseAttack { channels, tampers })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: QubitwiseAttack = serde_json::from_str(text)?;
        QubitwiseAttack::new(a.channels, a.tampers)
    }
}

/// One sample of the protocol's encoding.
#[derive(Clone, Debug)]
pub struct ThirdEncoding {
    /// Two pad bits per qubit, `x + 2z`.
    pub key: Vec<u8>,
    /// Chunk `q` occupies bits `q·n_nm..(q + 1)·n_nm`.
    pub classical: BitVec,
    /// Padded code register followed by the untouched qubits of the input.
    pub quantum: DenseState,
}

#[derive(Clone, Debug)]
pub struct ThirdDecoding {
    /// Key recovered from the classical wires, if every chunk decoded.
    pub key: Option<Vec<u8>>,
    pub p_accept: f64,
    /// Normalized accepted state on `[message | rest]`.
    pub state: Option<DenseState>,
}

/// Branch-by-branch account of an attack on the rate-1/3 protocol. The
/// message is maximally entangled with a reference; "wrong" accepted mass is
/// `tr[(I - Φ) ρ_acc]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThirdAttackReport {
    pub p_accept: f64,
    pub p_reject: f64,
    pub p_accept_wrong: f64,
    pub fidelity_given_accept: Option<f64>,
    /// Sum over chunks of the distance to the best simulator.
    pub epsilon_nm: f64,
    pub epsilon_pmd: f64,
    /// Probability that the simulator returns the same key on every chunk.
    pub recovered_weight: f64,
    /// Wrong accepted mass of the twirled channel, per unit of recovered weight.
    pub recovered_wrong_accept: f64,
    /// `ε_pmd²`.
    pub recovered_bound: f64,
    /// Wrong accepted mass of the simulated decode outside the recovered branch.
    pub uncorrelated_wrong_accept: f64,
    /// Accepted mass when every chunk returns an independent key: the overlap
    /// of a product state with the code space projector.
    pub product_overlap: f64,
    /// Wrong accepted mass of that branch: the reference stays maximally
    /// mixed, so it is `product_overlap · (1 - 1/d²)`.
    pub product_wrong_accept: f64,
    /// `ε_nm + ε_pmd² + uncorrelated_wrong_accept`.
    pub bound: f64,
    pub pass: bool,
}

/// Wrong accepted mass and acceptance of an accepted block on `[M | R]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcceptedMass {
    pub accept: f64,
    pub correct: f64,
}

impl AcceptedMass {
    pub fn wrong(&self) -> f64 {
        (self.accept - self.correct).max(0.0)
    }
}

/// Rate-1/3 toy protocol: each qubit's two pad bits travel in their own
/// codeword of a two-bit non-malleable code.
pub struct ThirdProtocol {
    code: ComposedCode,
    nm: NmCode,
}

impl ThirdProtocol {
    pub fn new(code: ComposedCode, nm: NmCode) -> Result<Self> {
        if nm.message_bits() != 2 {
            return Err(Error::Invalid(format!(
                "key chunks carry the two pad bits of a qubit, the code carries {}",
                nm.message_bits()
            )));
        }
        let n = code.n();
        if n > MAX_THIRD_QUBITS || n + code.message_qubits() > MAX_DENSITY_QUBITS {
            return Err(Error::SizeGuard(format!(
                "protocol on {n} qubits with a {}-qubit reference (limit {MAX_THIRD_QUBITS} and {MAX_DENSITY_QUBITS} total)",
                code.message_qubits()
            )));
        }
        Ok(ThirdProtocol { code, nm })
    }

    pub fn code(&self) -> &ComposedCode {
        &self.code
    }

    pub fn nm(&self) -> &NmCode {
        &self.nm
    }

    pub fn quantum_qubits(&self) -> usize {
        self.code.n()
    }

    pub fn classical_bits(&self) -> usize {
        self.code.n() * self.nm.codeword_bits()
    }

    /// Encodes the first `k` qubits of `message` under an explicit key and
    /// per-chunk randomness.
    pub fn encode_with(&self, message: &DenseState, key: &[u8], randomness: &[usize]) -> Result<ThirdEncoding> {
        let n = self.code.n();
        if key.len() != n || randomness.len() != n {
            return Err(Error::SizeMismatch(key.len().min(randomness.len()), n));
        }
        let m = self.nm.codeword_bits();
        let mut classical = BitVec::zeros(n * m);
        for (q, (&v, &r)) in key.iter().zip(randomness).enumerate() {
            let w = self.nm.encode(u32::from(v), r)?;
            for b in 0..m {
                classical.set(q * m + b, w >> b & 1 == 1);
            }
        }
        let mut quantum = self.code.encode(message)?;
        quantum.apply_pauli_at(&pad_operator(key), 0)?;
        Ok(ThirdEncoding {
            key: key.to_vec(),
            classical,
            quantum,
        })
    }

    pub fn encode_sample<R: Rng + ?Sized>(&self, message: &DenseState, rng: &mut R) -> Result<ThirdEncoding> {
        let n = self.code.n();
        let key: Vec<u8> = (0..n).map(|_| rng.random_range(0..4u8)).collect();
        let randomness: Vec<usize> = (0..n).map(|_| rng.random_range(0..self.nm.randomness())).collect();
        self.encode_with(message, &key, &randomness)
    }

    /// Decodes the key, removes the pad, checks the outer syndrome and the
    /// PMD code space, and returns the accepted message.
    pub fn decode(&self, classical: &BitVec, quantum: &DenseState) -> Result<ThirdDecoding> {
        let n = self.code.n();
        let k = self.code.message_qubits();
        let m = self.nm.codeword_bits();
        if classical.len() != n * m {
            return Err(Error::SizeMismatch(classical.len(), n * m));
        }
        let mut key = Vec::with_capacity(n);
        for q in 0..n {
            let w = (0..m).fold(0u32, |acc, b| acc | u32::from(classical.get(q * m + b)) << b);
            match self.nm.decode(w) {
                Some(v) => key.push(v as u8),
                None => {
                    return Ok(ThirdDecoding {
                        key: None,
                        p_accept: 0.0,
                        state: None,
                    })
                }
            }
        }
        let mut s = quantum.clone();
        s.apply_pauli_at(&pad_operator(&key), 0)?;
        s.apply_circuit_at(self.code.outer_decoder(), 0)?;
        self.code.pmd().apply_decoder(&mut s, 0)?;
        let junk: Vec<usize> = (k..n).collect();
        s.project_zero(&junk);
        let p_accept = s.norm_sqr();
        let state = if p_accept > ACCEPT_FLOOR {
            let mut out = s.take_register(k, n - k, 0)?;
            out.normalize();
            Some(out)
        } else {
            None
        };
        Ok(ThirdDecoding {
            key: Some(key),
            p_accept,
            state,
        })
    }

    /// Replaces every wire by a fixed valid encoding of `|0…0⟩` under `key`:
    /// each key chunk becomes a constant codeword and each qubit the matching
    /// marginal of the padded encoding.
    pub fn substitution_attack(&self, key: &[u8], randomness: usize) -> Result<QubitwiseAttack> {
        let n = self.code.n();
        let enc = self.encode_with(
            &DenseState::zero(self.code.message_qubits())?,
            key,
            &vec![randomness; n],
        )?;
        let rho = DensityMatrix::from_pure(&enc.quantum)?;
        let m = self.nm.codeword_bits();
        let channels = (0..n)
            .map(|q| QuantumChannel::replace_with(&rho.single_qubit_marginal(q)))
            .collect::<Result<Vec<_>>>()?;
        let tampers = key
            .iter()
            .map(|&v| Ok(TamperFunction::constant(m, self.nm.encode(u32::from(v), randomness)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(QubitwiseAttack { channels, tampers })
    }

    /// Encoded maximally entangled state on `[code | reference]`.
    fn encoded_reference(&self) -> Result<DensityMatrix> {
        let phi = DenseState::max_entangled(self.code.message_qubits())?;
        DensityMatrix::from_pure(&self.code.encode(&phi)?)
    }

    /// Average of the padded encoding of `message` over every key, one qubit
    /// at a time (the key bits of different qubits are independent).
    pub fn encrypted_average(&self, message: &DenseState) -> Result<DensityMatrix> {
        let mut rho = DensityMatrix::from_pure(&self.code.encode(message)?)?;
        let avg = (0..4u8).fold(Matrix::zeros(4, 4), |acc, v| acc + conjugation_superoperator(&pad_matrix(v)))
            * c(0.25, 0.0);
        for q in 0..self.code.n() {
            rho = rho.apply_superoperator(&avg, q)?;
        }
        Ok(rho)
    }

    /// Same average with all `4^n` keys enumerated.
    pub fn encrypted_average_exhaustive(&self, message: &DenseState) -> Result<DensityMatrix> {
        let n = self.code.n();
        self.check_explicit()?;
        let rho = DensityMatrix::from_pure(&self.code.encode(message)?)?;
        let mut acc = DensityMatrix::zeros(rho.n())?;
        let keys = 1usize << (2 * n);
        for idx in 0..keys {
            let key: Vec<u8> = (0..n).map(|q| (idx >> (2 * q) & 3) as u8).collect();
            acc.add_scaled(1.0 / keys as f64, &rho.conjugate_pauli(&pad_operator(&key), 0)?);
        }
        Ok(acc)
    }

    fn check_explicit(&self) -> Result<()> {
        if self.code.n() > MAX_EXPLICIT_KEY_QUBITS {
            return Err(Error::SizeGuard(format!(
                "explicit key enumeration on {} qubits (limit {MAX_EXPLICIT_KEY_QUBITS})",
                self.code.n()
            )));
        }
        Ok(())
    }

    fn check_channels(&self, channels: &[QuantumChannel]) -> Result<()> {
        if channels.len() != self.code.n() {
            return Err(Error::SizeMismatch(channels.len(), self.code.n()));
        }
        if channels.iter().any(|ch| ch.support().len() != 1) {
            return Err(Error::Invalid("qubit-wise attacks use single-qubit channels".into()));
        }
        Ok(())
    }

    /// `[code | reference]` state after a correctly keyed pad, the channels
    /// and the pad's removal, averaged over all keys one by one.
    pub fn pad_averaged_state(&self, channels: &[QuantumChannel]) -> Result<DensityMatrix> {
        self.check_channels(channels)?;
        self.check_explicit()?;
        let n = self.code.n();
        let rho = self.encoded_reference()?;
        let mut acc = DensityMatrix::zeros(rho.n())?;
        let keys = 1usize << (2 * n);
        for idx in 0..keys {
            let key: Vec<u8> = (0..n).map(|q| (idx >> (2 * q) & 3) as u8).collect();
            let pad = pad_operator(&key);
            let mut s = rho.conjugate_pauli(&pad, 0)?;
            for (q, ch) in channels.iter().enumerate() {
                s = s.apply_channel_on(ch, &[q])?;
            }
            acc.add_scaled(1.0 / keys as f64, &s.conjugate_pauli(&pad.adjoint(), 0)?);
        }
        Ok(acc)
    }

    /// The same state through the per-qubit twirled Pauli channels.
    pub fn twirled_state(&self, channels: &[QuantumChannel]) -> Result<DensityMatrix> {
        self.check_channels(channels)?;
        let sups = channels
            .iter()
            .map(|ch| Ok(pauli_superoperator(&twirl_probabilities(ch)?)))
            .collect::<Result<Vec<_>>>()?;
        self.evolve(&sups)
    }

    fn evolve(&self, superops: &[Matrix]) -> Result<DensityMatrix> {
        let mut rho = self.encoded_reference()?;
        for (q, s) in superops.iter().enumerate() {
            rho = rho.apply_superoperator(s, q)?;
        }
        Ok(rho)
    }

    /// Accepted and correct mass of a `[code | reference]` state.
    pub fn accepted_mass(&self, rho: &DensityMatrix) -> Result<AcceptedMass> {
        let k = self.code.message_qubits();
        let d = 1usize << k;
        if rho.n() != self.code.n() + k {
            return Err(Error::SizeMismatch(rho.n(), self.code.n() + k));
        }
        let w = self.code.isometry()?.kronecker(&Matrix::identity(d, d));
        let acc = w.adjoint() * rho.matrix() * &w;
        let mut correct = c(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                correct += acc[(a * d + a, b * d + b)];
            }
        }
        Ok(AcceptedMass {
            accept: acc.trace().re,
            correct: correct.re / d as f64,
        })
    }

    /// Key-recovered branch: the channels after a uniformly random pad that
    /// the receiver removes correctly.
    pub fn recovered_branch(&self, channels: &[QuantumChannel]) -> Result<AcceptedMass> {
        self.accepted_mass(&self.twirled_state(channels)?)
    }

    /// Decoded-chunk distribution under `f`: `[s][outcome]` with reject last.
    fn chunk_distribution(&self, f: &TamperFunction) -> Result<Vec<Vec<f64>>> {
        let r = self.nm.randomness() as f64;
        Ok(self
            .nm
            .tampered_counts(f)?
            .into_iter()
            .map(|row| row.into_iter().map(|cnt| cnt as f64 / r).collect())
            .collect())
    }

    /// Exact accounting of `attack` against the protocol.
    pub fn attack(&self, attack: &QubitwiseAttack) -> Result<ThirdAttackReport> {
        let n = self.code.n();
        self.check_channels(&attack.channels)?;
        if attack.tampers.len() != n {
            return Err(Error::SizeMismatch(attack.tampers.len(), n));
        }
        let pads: Vec<Matrix> = (0..4u8).map(pad_matrix).collect();
        let half_identity = Matrix::identity(2, 2) * c(0.5, 0.0);
        let mut real = Vec::with_capacity(n);
        let mut ideal = Vec::with_capacity(n);
        let mut twirled = Vec::with_capacity(n);
        let mut stray_states = Vec::with_capacity(n);
        let mut epsilon_nm = 0.0;
        let mut recovered_weight = 1.0;
        for (ch, f) in attack.channels.iter().zip(&attack.tampers) {
            let lambda = superoperator(ch.kraus());
            // Real map: sender's pad s, receiver's decoded pad s̃.
            let dist = self.chunk_distribution(f)?;
            let mut s_real = Matrix::zeros(4, 4);
            for (s, row) in dist.iter().enumerate() {
                for (t, &p) in row.iter().take(4).enumerate() {
                    if p > 0.0 {
                        s_real += conjugation_superoperator(&pads[t].adjoint())
                            * &lambda
                            * conjugation_superoperator(&pads[s])
                            * c(p / 4.0, 0.0);
                    }
                }
            }
            real.push(s_real);
            // Simulated map: same key with weight q_same, else an independent key.
            let fit = fit_tampering(&self.nm, f)?;
            epsilon_nm += fit.distance;
            recovered_weight *= fit.same();
            let out_of_mixed = apply_superoperator_2x2(&lambda, &half_identity);
            let stray = (0..4).fold(Matrix::zeros(2, 2), |acc, t| {
                acc + &pads[t].adjoint() * &out_of_mixed * &pads[t] * c(fit.simulator[t], 0.0)
            });
            let t_sup = pauli_superoperator(&twirl_probabilities(ch)?);
            ideal.push(&t_sup * c(fit.same(), 0.0) + replacement_superoperator(&stray));
            twirled.push(t_sup);
            stray_states.push(stray);
        }
        let real_mass = self.accepted_mass(&self.evolve(&real)?)?;
        let ideal_mass = self.accepted_mass(&self.evolve(&ideal)?)?;
        let rec = self.accepted_mass(&self.evolve(&twirled)?)?;
        let epsilon_pmd = self.code.epsilon()?;
        let recovered_bound = epsilon_pmd * epsilon_pmd;
        let uncorrelated_wrong_accept = (ideal_mass.wrong() - recovered_weight * rec.wrong()).max(0.0);
        let product_overlap = product_code_overlap(&self.code, &stray_states)?;
        let d2 = (1u64 << (2 * self.code.message_qubits())) as f64;
        let bound = epsilon_nm + recovered_bound + uncorrelated_wrong_accept;
        let p_accept_wrong = real_mass.wrong();
        Ok(ThirdAttackReport {
            p_accept: real_mass.accept,
            p_reject: (1.0 - real_mass.accept).max(0.0),
            p_accept_wrong,
            fidelity_given_accept: (real_mass.accept > ACCEPT_FLOOR).then(|| real_mass.correct / real_mass.accept),
            epsilon_nm,
            epsilon_pmd,
            recovered_weight,
            recovered_wrong_accept: rec.wrong(),
            recovered_bound,
            uncorrelated_wrong_accept,
            product_overlap,
            product_wrong_accept: product_overlap * (1.0 - 1.0 / d2),
            bound,
            pass: p_accept_wrong <= bound + BOUND_TOLERANCE && rec.wrong() <= recovered_bound + BOUND_TOLERANCE,
        })
    }
}

/// `tr[Π (⊗_q σ_q)]` for the projector onto the code space of `code`.
pub fn product_code_overlap(code: &ComposedCode, states: &[Matrix]) -> Result<f64> {
    if states.len() != code.n() {
        return Err(Error::SizeMismatch(states.len(), code.n()));
    }
    let product = states
        .iter()
        .skip(1)
        .fold(states[0].clone(), |acc, s| acc.kronecker(s));
    let b = code.isometry()?;
    Ok((b.adjoint() * product * b).trace().re)
}
