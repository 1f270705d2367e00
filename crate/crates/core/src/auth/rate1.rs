use super::nm::{NmCode, TamperFunction};
use super::packing::{normalizer_mass, stabilizer_mass};
use super::third::{pad_operator, QubitwiseAttack};
use super::twise::TwisePad;
use crate::aqec::ComposedCode;
use crate::bits::BitVec;
use crate::densesim::{apply_channel, c, Branch, DenseState, QuantumChannel};
use crate::error::{Error, Result};
use crate::pmd::{build_pmd, BOUND_TOLERANCE};
use crate::ptc::PtcFamily;
use crate::symplectic::{standard_form_encoder, Circuit, PivotRule, StabilizerCode};
use rand::Rng;
use serde::Serialize;

/// Largest inner block.
pub const MAX_RATE1_BLOCK: usize = 5;

/// Largest quantum register.
pub const MAX_RATE1_QUBITS: usize = 10;

/// Largest number of (sent seed, decoded seed) pairs the exact harness visits.
pub const MAX_RATE1_PAIRS: usize = 4096;

/// Largest number of Kraus branches per encoded state in the exact harness.
pub const MAX_RATE1_BRANCHES: usize = 1024;

/// Concatenated protocol: an outer stabilizer code whose qubits are grouped
/// into blocks, each block encoded into a PMD inside an inner stabilizer
/// code, a pseudorandom Pauli pad expanded from a short seed, and the seed
/// sent in chunks of a classical non-malleable code.
pub struct Rate1Protocol {
    outer: StabilizerCode,
    outer_enc: Circuit,
    outer_dec: Circuit,
    inner: ComposedCode,
    pad: TwisePad,
    nm: NmCode,
}

/// One sample of the encoding.
#[derive(Clone, Debug)]
pub struct Rate1Encoding {
    pub seed: BitVec,
    /// Chunk `c` of the seed occupies bits `c·n_nm..(c + 1)·n_nm`.
    pub classical: BitVec,
    /// Padded blocks followed by the untouched qubits of the input.
    pub quantum: DenseState,
}

/// Structural decoding of one pure branch.
#[derive(Clone, Debug)]
pub struct Rate1Decoding {
    /// Decoded seed; `None` when a chunk was rejected.
    pub seed: Option<BitVec>,
    /// Probability that block `j`'s inner decoder accepts, ignoring the others.
    pub block_accept: Vec<f64>,
    /// Probability that every inner decoder accepts.
    pub inner_accept: f64,
    /// Probability that the outer syndrome also accepts.
    pub p_accept: f64,
    /// Unnormalized accepted state on `[message | rest]`; zero when rejected.
    pub accepted: DenseState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rate1Report {
    pub p_accept: f64,
    pub p_reject: f64,
    pub p_accept_wrong: f64,
    pub fidelity_given_accept: Option<f64>,
    /// Probability that the classical decoder rejects a chunk.
    pub key_reject: f64,
    /// Per-block probability that the inner decoder rejects.
    pub block_reject: Vec<f64>,
    pub pairs: usize,
    pub branches: usize,
}

/// Rejection of one inner block under a block-local attack, with the key
/// recovered, against the masses of its twirled channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRejectionReport {
    pub block: usize,
    pub measured_reject: f64,
    pub epsilon_pmd: f64,
    pub stabilizer_mass: f64,
    /// Twirled weight on the inner code's normalizer.
    pub normalizer_mass: f64,
    /// `1 - (ε² + stabilizer_mass)`.
    pub coarse_bound: f64,
    /// `1 - (stabilizer_mass + ε² (normalizer_mass - stabilizer_mass))`.
    pub fine_bound: f64,
    pub holds: bool,
}

impl Rate1Protocol {
    pub fn new(outer: StabilizerCode, inner: ComposedCode, pad: TwisePad, nm: NmCode) -> Result<Self> {
        let kp = inner.message_qubits();
        let b = inner.n();
        if !outer.n().is_multiple_of(kp) {
            return Err(Error::Invalid(format!(
                "{} outer qubits do not split into blocks of {kp}",
                outer.n()
            )));
        }
        let blocks = outer.n() / kp;
        if b > MAX_RATE1_BLOCK || blocks * b > MAX_RATE1_QUBITS {
            return Err(Error::SizeGuard(format!(
                "{blocks} blocks of {b} qubits (limits {MAX_RATE1_BLOCK} per block, {MAX_RATE1_QUBITS} total)"
            )));
        }
        if pad.length() != 2 * blocks * b {
            return Err(Error::SizeMismatch(pad.length(), 2 * blocks * b));
        }
        if !pad.seed_bits().is_multiple_of(nm.message_bits()) {
            return Err(Error::Invalid(format!(
                "{}-bit seed does not split into {}-bit chunks",
                pad.seed_bits(),
                nm.message_bits()
            )));
        }
        let outer_enc = standard_form_encoder(&outer, PivotRule::Lowest)?;
        let outer_dec = outer_enc.inverse();
        Ok(Rate1Protocol {
            outer,
            outer_enc,
            outer_dec,
            inner,
            pad,
            nm,
        })
    }

    /// Two blocks of PMD(2, 1) inside `[[4, 3]]`, joined by the `[[2, 1]]`
    /// code `XX`, padded by a pairwise independent generator whose 4-bit
    /// symbols each cover two qubits, so every block's pad is uniform.
    pub fn toy(nm: NmCode) -> Result<Self> {
        let pmd = build_pmd(PtcFamily::new(2, 1)?)?;
        let inner = ComposedCode::new(pmd, StabilizerCode::from_strings(&["ZZZZ"])?)?;
        let outer = StabilizerCode::from_strings(&["XX"])?;
        Rate1Protocol::new(outer, inner, TwisePad::with_symbol_bits(2, 16, 4)?, nm)
    }

    pub fn outer(&self) -> &StabilizerCode {
        &self.outer
    }

    pub fn inner(&self) -> &ComposedCode {
        &self.inner
    }

    pub fn pad(&self) -> &TwisePad {
        &self.pad
    }

    pub fn nm(&self) -> &NmCode {
        &self.nm
    }

    pub fn blocks(&self) -> usize {
        self.outer.n() / self.inner.message_qubits()
    }

    pub fn block_len(&self) -> usize {
        self.inner.n()
    }

    pub fn message_qubits(&self) -> usize {
        self.outer.k()
    }

    pub fn quantum_qubits(&self) -> usize {
        self.blocks() * self.block_len()
    }

    pub fn chunks(&self) -> usize {
        self.pad.seed_bits() / self.nm.message_bits()
    }

    pub fn classical_bits(&self) -> usize {
        self.chunks() * self.nm.codeword_bits()
    }

    /// Two pad bits per qubit, `x + 2z`, from the generator's output.
    pub fn pad_key(&self, seed: &BitVec) -> Result<Vec<u8>> {
        let bits = self.pad.expand(seed)?;
        Ok((0..self.quantum_qubits())
            .map(|q| u8::from(bits.get(2 * q)) | u8::from(bits.get(2 * q + 1)) << 1)
            .collect())
    }

    fn chunk(&self, seed: &BitVec, c: usize) -> u32 {
        let k = self.nm.message_bits();
        (0..k).fold(0u32, |acc, b| acc | u32::from(seed.get(c * k + b)) << b)
    }

    /// Outer encoding, then each block into the inner code, then the pad.
    pub fn encode_quantum(&self, message: &DenseState, seed: &BitVec) -> Result<DenseState> {
        let k = self.message_qubits();
        if message.n() < k {
            return Err(Error::SizeMismatch(message.n(), k));
        }
        let (kp, b) = (self.inner.message_qubits(), self.block_len());
        let mut s = message.insert_zero(k, self.outer.n() - k)?;
        s.apply_circuit_at(&self.outer_enc, 0)?;
        // Later blocks first, so block j still starts at j·kp when expanded
        // and ends up at j·b.
        for j in (0..self.blocks()).rev() {
            let off = j * kp;
            s = s.insert_zero(off + kp, b - kp)?;
            self.inner.pmd().apply_encoder(&mut s, off)?;
            s.apply_circuit_at(self.inner.outer_encoder(), off)?;
        }
        s.apply_pauli_at(&pad_operator(&self.pad_key(seed)?), 0)?;
        Ok(s)
    }

    pub fn encode_with(&self, message: &DenseState, seed: &BitVec, randomness: &[usize]) -> Result<Rate1Encoding> {
        if seed.len() != self.pad.seed_bits() {
            return Err(Error::SizeMismatch(seed.len(), self.pad.seed_bits()));
        }
        if randomness.len() != self.chunks() {
            return Err(Error::SizeMismatch(randomness.len(), self.chunks()));
        }
        let m = self.nm.codeword_bits();
        let mut classical = BitVec::zeros(self.classical_bits());
        for (c, &r) in randomness.iter().enumerate() {
            let w = self.nm.encode(self.chunk(seed, c), r)?;
            for b in 0..m {
                classical.set(c * m + b, w >> b & 1 == 1);
            }
        }
        Ok(Rate1Encoding {
            seed: seed.clone(),
            classical,
            quantum: self.encode_quantum(message, seed)?,
        })
    }

    pub fn encode_sample<R: Rng + ?Sized>(&self, message: &DenseState, rng: &mut R) -> Result<Rate1Encoding> {
        let seed_bits = self.pad.seed_bits();
        let seed = BitVec::from_mask(seed_bits, rng.random_range(0..1u64 << seed_bits));
        let randomness: Vec<usize> = (0..self.chunks())
            .map(|_| rng.random_range(0..self.nm.randomness()))
            .collect();
        self.encode_with(message, &seed, &randomness)
    }

    /// Decodes every chunk; `None` if any chunk rejects.
    pub fn decode_seed(&self, classical: &BitVec) -> Result<Option<BitVec>> {
        if classical.len() != self.classical_bits() {
            return Err(Error::SizeMismatch(classical.len(), self.classical_bits()));
        }
        let (k, m) = (self.nm.message_bits(), self.nm.codeword_bits());
        let mut seed = BitVec::zeros(self.pad.seed_bits());
        for c in 0..self.chunks() {
            let w = (0..m).fold(0u32, |acc, b| acc | u32::from(classical.get(c * m + b)) << b);
            match self.nm.decode(w) {
                Some(v) => (0..k).for_each(|b| seed.set(c * k + b, v >> b & 1 == 1)),
                None => return Ok(None),
            }
        }
        Ok(Some(seed))
    }

    /// Inner decoder of the block at `off`: undo the inner stabilizer
    /// encoding, demand a zero syndrome, undo the PMD encoding and demand
    /// the PMD ancillas and key register read zero.
    fn decode_block(&self, s: &mut DenseState, off: usize) -> Result<()> {
        let (kp, np, b) = (
            self.inner.message_qubits(),
            self.inner.pmd().total_qubits(),
            self.block_len(),
        );
        s.apply_circuit_at(self.inner.outer_decoder(), off)?;
        s.project_zero(&(off + np..off + b).collect::<Vec<_>>());
        self.inner.pmd().apply_decoder(s, off)?;
        s.project_zero(&(off + kp..off + np).collect::<Vec<_>>());
        Ok(())
    }

    /// Removes the pad under a decoded seed, runs every inner decoder and then the outer one.
    pub fn decode_quantum(&self, seed: &BitVec, quantum: &DenseState) -> Result<Rate1Decoding> {
        let nq = self.quantum_qubits();
        if quantum.n() < nq {
            return Err(Error::SizeMismatch(quantum.n(), nq));
        }
        let (k, kp, b) = (self.message_qubits(), self.inner.message_qubits(), self.block_len());
        let mut s = quantum.clone();
        s.apply_pauli_at(&pad_operator(&self.pad_key(seed)?).adjoint(), 0)?;
        let block_accept = (0..self.blocks())
            .map(|j| {
                let mut t = s.clone();
                self.decode_block(&mut t, j * b)?;
                Ok(t.norm_sqr())
            })
            .collect::<Result<Vec<_>>>()?;
        for j in 0..self.blocks() {
            self.decode_block(&mut s, j * b)?;
        }
        let inner_accept = s.norm_sqr();
        for j in (0..self.blocks()).rev() {
            s = s.take_register(j * b + kp, b - kp, 0)?;
        }
        s.apply_circuit_at(&self.outer_dec, 0)?;
        s.project_zero(&(k..self.outer.n()).collect::<Vec<_>>());
        let p_accept = s.norm_sqr();
        Ok(Rate1Decoding {
            seed: Some(seed.clone()),
            block_accept,
            inner_accept,
            p_accept,
            accepted: s.take_register(k, self.outer.n() - k, 0)?,
        })
    }

    pub fn decode(&self, classical: &BitVec, quantum: &DenseState) -> Result<Rate1Decoding> {
        match self.decode_seed(classical)? {
            Some(seed) => self.decode_quantum(&seed, quantum),
            None => {
                let k = self.message_qubits();
                let rest = quantum.n().saturating_sub(self.quantum_qubits());
                let mut accepted = DenseState::zero(k + rest)?;
                accepted.scale(c(0.0, 0.0));
                Ok(Rate1Decoding {
                    seed: None,
                    block_accept: vec![0.0; self.blocks()],
                    inner_accept: 0.0,
                    p_accept: 0.0,
                    accepted,
                })
            }
        }
    }

    /// Decoded-seed distribution for a sent seed: pairs `(seed, probability)`
    /// plus the probability of a rejected chunk.
    fn seed_distribution(&self, seed: &BitVec, tables: &[Vec<Vec<f64>>]) -> (Vec<(BitVec, f64)>, f64) {
        let k = self.nm.message_bits();
        let mut out = vec![(BitVec::zeros(self.pad.seed_bits()), 1.0)];
        for (c, table) in tables.iter().enumerate() {
            let row = &table[self.chunk(seed, c) as usize];
            let mut next = Vec::with_capacity(out.len() * row.len());
            for (partial, w) in &out {
                for (v, &p) in row.iter().take(1 << k).enumerate() {
                    if p > 0.0 {
                        let mut s = partial.clone();
                        (0..k).for_each(|b| s.set(c * k + b, v >> b & 1 == 1));
                        next.push((s, w * p));
                    }
                }
            }
            out = next;
        }
        let accepted: f64 = out.iter().map(|(_, w)| w).sum();
        (out, (1.0 - accepted).max(0.0))
    }

    /// Exact accounting over every seed, every decoded seed and every Kraus
    /// branch, with the message maximally entangled with a reference.
    pub fn attack(&self, attack: &QubitwiseAttack) -> Result<Rate1Report> {
        let nq = self.quantum_qubits();
        if attack.channels.len() != nq {
            return Err(Error::SizeMismatch(attack.channels.len(), nq));
        }
        if attack.tampers.len() != self.chunks() {
            return Err(Error::SizeMismatch(attack.tampers.len(), self.chunks()));
        }
        let branch_bound: usize = attack.channels.iter().map(|ch| ch.kraus().len()).product();
        if branch_bound > MAX_RATE1_BRANCHES {
            return Err(Error::SizeGuard(format!(
                "{branch_bound} Kraus branches (limit {MAX_RATE1_BRANCHES})"
            )));
        }
        let tables = attack
            .tampers
            .iter()
            .map(|f| self.chunk_table(f))
            .collect::<Result<Vec<_>>>()?;
        let seeds = 1u64 << self.pad.seed_bits();
        let dists: Vec<_> = (0..seeds)
            .map(|s| self.seed_distribution(&BitVec::from_mask(self.pad.seed_bits(), s), &tables))
            .collect();
        let pairs: usize = dists.iter().map(|(d, _)| d.len()).sum();
        if pairs > MAX_RATE1_PAIRS {
            return Err(Error::SizeGuard(format!("{pairs} seed pairs (limit {MAX_RATE1_PAIRS})")));
        }
        let k = self.message_qubits();
        let phi = DenseState::max_entangled(k)?;
        let (mut accept, mut correct, mut key_reject) = (0.0, 0.0, 0.0);
        let mut block_accept = vec![0.0; self.blocks()];
        let mut branches = 0;
        let norm = 1.0 / seeds as f64;
        for (s, (dist, rej)) in dists.iter().enumerate() {
            key_reject += norm * rej;
            let seed = BitVec::from_mask(self.pad.seed_bits(), s as u64);
            let mut state = vec![Branch {
                weight: 1.0,
                state: self.encode_quantum(&phi, &seed)?,
            }];
            for (q, ch) in attack.channels.iter().enumerate() {
                state = apply_channel(&state, &ch.clone().with_support(vec![q])?)?;
            }
            branches = branches.max(state.len());
            for (decoded, p) in dist {
                for br in &state {
                    let w = norm * p * br.weight;
                    let dec = self.decode_quantum(decoded, &br.state)?;
                    accept += w * dec.p_accept;
                    correct += w * dec.accepted.max_entangled_overlap(k);
                    for (acc, a) in block_accept.iter_mut().zip(&dec.block_accept) {
                        *acc += w * a;
                    }
                }
            }
        }
        Ok(Rate1Report {
            p_accept: accept,
            p_reject: (1.0 - accept).max(0.0),
            p_accept_wrong: (accept - correct).max(0.0),
            fidelity_given_accept: (accept > 1e-14).then(|| correct / accept),
            key_reject,
            block_reject: block_accept.iter().map(|a| (1.0 - key_reject - a).max(0.0)).collect(),
            pairs,
            branches,
        })
    }

    fn chunk_table(&self, f: &TamperFunction) -> Result<Vec<Vec<f64>>> {
        let r = self.nm.randomness() as f64;
        Ok(self
            .nm
            .tampered_counts(f)?
            .into_iter()
            .map(|row| row.into_iter().map(|cnt| cnt as f64 / r).collect())
            .collect())
    }

    /// Attacks block `block` with `channels`, leaves everything else alone,
    /// and compares the block's rejection with the masses of its twirled channel.
    pub fn block_rejection(&self, block: usize, channels: &[QuantumChannel]) -> Result<BlockRejectionReport> {
        let b = self.block_len();
        if block >= self.blocks() {
            return Err(Error::Invalid(format!("block {block} of {}", self.blocks())));
        }
        if channels.len() != b {
            return Err(Error::SizeMismatch(channels.len(), b));
        }
        let mut attack = QubitwiseAttack::identity(self.quantum_qubits(), self.chunks(), self.nm.codeword_bits());
        attack.channels[block * b..(block + 1) * b].clone_from_slice(channels);
        let report = self.attack(&attack)?;
        let eps = self.inner.epsilon()?;
        let stab = stabilizer_mass(channels, self.inner.outer())?;
        let norm = normalizer_mass(channels, self.inner.outer())?;
        let measured = report.block_reject[block];
        let fine = 1.0 - (stab + eps * eps * (norm - stab));
        Ok(BlockRejectionReport {
            block,
            measured_reject: measured,
            epsilon_pmd: eps,
            stabilizer_mass: stab,
            normalizer_mass: norm,
            coarse_bound: 1.0 - (eps * eps + stab),
            fine_bound: fine,
            holds: measured + BOUND_TOLERANCE >= fine,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auth::nm::nm_search;
    use crate::densesim::single_qubit_paulis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> Rate1Protocol {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        Rate1Protocol::toy(nm_search(2, 4, 1, &mut rng).unwrap().code).unwrap()
    }

    #[test]
    fn toy_shape() {
        let p = toy();
        assert_eq!((p.blocks(), p.block_len(), p.quantum_qubits()), (2, 4, 8));
        assert_eq!((p.pad().seed_bits(), p.chunks()), (8, 4));
    }

    #[test]
    fn every_seed_round_trips_exactly() {
        let p = toy();
        let phi = DenseState::max_entangled(1).unwrap();
        for s in 0..256u64 {
            let seed = BitVec::from_mask(8, s);
            let enc = p.encode_with(&phi, &seed, &[0, 1, 0, 1]).unwrap();
            let dec = p.decode(&enc.classical, &enc.quantum).unwrap();
            assert_eq!(dec.seed.as_ref(), Some(&seed));
            assert!((dec.p_accept - 1.0).abs() < 1e-12);
            assert!(dec.block_accept.iter().all(|a| (a - 1.0).abs() < 1e-12));
            assert!((dec.accepted.max_entangled_overlap(1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn a_rejecting_block_rejects_globally() {
        let p = toy();
        let phi = DenseState::max_entangled(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let enc = p.encode_sample(&phi, &mut rng).unwrap();
        // X on the first qubit flips the ZZZZ syndrome of block 0 only.
        let mut quantum = enc.quantum.clone();
        quantum.apply_local(&single_qubit_paulis()[1], &[0]).unwrap();
        let dec = p.decode(&enc.classical, &quantum).unwrap();
        assert!(dec.block_accept[0] < 1e-12);
        assert!((dec.block_accept[1] - 1.0).abs() < 1e-12);
        assert!(dec.inner_accept < 1e-12 && dec.p_accept < 1e-12);
        assert!(dec.accepted.norm_sqr() < 1e-12);
    }

    #[test]
    fn a_rejected_chunk_rejects_globally() {
        let p = toy();
        let phi = DenseState::max_entangled(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let enc = p.encode_sample(&phi, &mut rng).unwrap();
        let m = p.nm().codeword_bits();
        let bad = (0..1u32 << m).find(|&w| p.nm().decode(w).is_none()).unwrap();
        let mut classical = enc.classical.clone();
        for b in 0..m {
            classical.set(m + b, bad >> b & 1 == 1);
        }
        let dec = p.decode(&classical, &enc.quantum).unwrap();
        assert!(dec.seed.is_none() && dec.p_accept == 0.0);
    }

    #[test]
    fn untampered_harness_is_complete() {
        let p = toy();
        let r = p
            .attack(&QubitwiseAttack::identity(8, 4, p.nm().codeword_bits()))
            .unwrap();
        assert!((r.p_accept - 1.0).abs() < 1e-10 && r.p_accept_wrong < 1e-10);
        assert_eq!(r.key_reject, 0.0);
        assert!(r.block_reject.iter().all(|&x| x < 1e-10));
    }

    #[test]
    fn block_rejection_respects_the_twirled_masses() {
        let p = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let chans: Vec<_> = (0..4).map(|_| QuantumChannel::random(vec![0], 2, &mut rng).unwrap()).collect();
        let r = p.block_rejection(1, &chans).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.measured_reject + BOUND_TOLERANCE >= r.coarse_bound);
    }

    #[test]
    fn mismatched_parameters_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nm = nm_search(3, 5, 1, &mut rng).unwrap().code;
        assert!(Rate1Protocol::toy(nm).is_err());
    }
}
