use super::twirl::{eta_classify, pauli_decompose_channel, twirl_channel};
use crate::densesim::QuantumChannel;
use crate::error::{Error, Result};
use crate::symplectic::{PauliOperator, StabilizerCode};
use serde::Serialize;

/// Largest block handled by the coefficient sums.
pub const MAX_PACKING_QUBITS: usize = 8;

/// Relative slack when comparing a floating-point mass with its bound.
const COMPARE_TOL: f64 = 1e-12;

fn check(channels: &[QuantumChannel], code: &StabilizerCode) -> Result<()> {
    if channels.len() != code.n() {
        return Err(Error::SizeMismatch(channels.len(), code.n()));
    }
    if code.n() > MAX_PACKING_QUBITS {
        return Err(Error::SizeGuard(format!(
            "coefficient sums on {} qubits (limit {MAX_PACKING_QUBITS})",
            code.n()
        )));
    }
    Ok(())
}

/// Index of the Pauli letter on qubit `q` in `I, X, Y, Z` order.
fn letter_index(p: &PauliOperator, q: usize) -> usize {
    match (p.x().get(q), p.z().get(q)) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    }
}

/// `Σ_{μ, F ∈ S(Q)} |c_F^μ|²` for the product channel `⊗_i Λ_i`.
pub fn stabilizer_mass(channels: &[QuantumChannel], code: &StabilizerCode) -> Result<f64> {
    check(channels, code)?;
    let probs = twirl_channel(channels)?;
    Ok(code
        .stabilizer_group()?
        .iter()
        .map(|f| (0..code.n()).map(|q| probs[q][letter_index(f, q)]).product::<f64>())
        .sum())
}

/// `Σ_{μ, F ∈ N(Q)} |c_F^μ|²`: the twirled channel's weight on Paulis the
/// syndrome measurement cannot see.
pub fn normalizer_mass(channels: &[QuantumChannel], code: &StabilizerCode) -> Result<f64> {
    check(channels, code)?;
    let probs = twirl_channel(channels)?;
    let n = code.n();
    let mut total = 0.0;
    for x in 0..1u64 << n {
        for z in 0..1u64 << n {
            let f = PauliOperator::from_masks(n, x, z);
            if code.in_normalizer(&f) {
                total += (0..n).map(|q| probs[q][letter_index(&f, q)]).product::<f64>();
            }
        }
    }
    Ok(total)
}

/// `Σ_μ (Σ_{F ∈ N(Q)} |c_F^μ|)²` for the product channel `⊗_i Λ_i`.
///
/// Expanding the square gives a sum over pairs `(F, G)` of normalizer
/// elements whose per-qubit factors `Σ_μ |c_σ^μ| |c_τ^μ|` are independent, so
/// it is evaluated by a transfer over qubits that tracks both syndromes.
pub fn normalizer_l1_mass(channels: &[QuantumChannel], code: &StabilizerCode) -> Result<f64> {
    check(channels, code)?;
    let r = code.r();
    // Syndrome contributed by each single-qubit letter.
    let letter_syndrome = |q: usize, letter: usize| -> usize {
        let (x, z) = [(false, false), (true, false), (true, true), (false, true)][letter];
        code.generators().iter().enumerate().fold(0usize, |acc, (j, g)| {
            let anti = (x && g.z().get(q)) ^ (z && g.x().get(q));
            acc | (anti as usize) << j
        })
    };
    let mut dp = vec![0.0; 1 << (2 * r)];
    dp[0] = 1.0;
    for (q, ch) in channels.iter().enumerate() {
        let coeffs = pauli_decompose_channel(ch)?;
        let mut pair = [[0.0; 4]; 4];
        for row in &coeffs {
            for a in 0..4 {
                for b in 0..4 {
                    pair[a][b] += row[a].norm() * row[b].norm();
                }
            }
        }
        let syn: Vec<usize> = (0..4).map(|l| letter_syndrome(q, l)).collect();
        let mut next = vec![0.0; dp.len()];
        for (state, &w) in dp.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let (sf, sg) = (state >> r, state & ((1 << r) - 1));
            for a in 0..4 {
                for b in 0..4 {
                    let m = pair[a][b];
                    if m != 0.0 {
                        next[((sf ^ syn[a]) << r) | (sg ^ syn[b])] += w * m;
                    }
                }
            }
        }
        dp = next;
    }
    Ok(dp[0])
}

/// Exponent of the stabilizer packing bound: a stabilizer element is fixed by
/// its letters outside any `d* - 1` positions, so at most `d* - 1` of the
/// non-`η`-Pauli positions can be summed freely.
pub fn stabilizer_packing_exponent(non_eta_pauli: usize, pure_distance: usize) -> usize {
    non_eta_pauli.min(pure_distance.saturating_sub(1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingReport {
    pub qubits: usize,
    pub pure_distance: usize,
    pub eta: f64,
    /// Channels whose classified `η` exceeds the threshold.
    pub non_eta_pauli: usize,
    pub stabilizer_mass: f64,
    /// `(1 - η)^{min(#non-η-Pauli, d* - 1)}`.
    pub stabilizer_bound: f64,
    pub stabilizer_holds: bool,
    pub normalizer_mass: f64,
    /// `2^{8ηb}`.
    pub normalizer_bound: f64,
    /// At least `b - d*` channels are `η`-Pauli.
    pub normalizer_applies: bool,
    pub normalizer_holds: bool,
}

fn at_most(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + COMPARE_TOL) + f64::MIN_POSITIVE
}

/// Both coefficient sums with their bounds at threshold `eta`.
pub fn packing_report(channels: &[QuantumChannel], code: &StabilizerCode, eta: f64) -> Result<PackingReport> {
    check(channels, code)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Invalid(format!("η = {eta} outside [0, 1]")));
    }
    let b = code.n();
    let d = code.pure_distance()?;
    let non_eta_pauli = channels
        .iter()
        .map(|ch| eta_classify(ch).map(|r| !r.is_eta_pauli(eta)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&x| x)
        .count();
    let stabilizer_mass = stabilizer_mass(channels, code)?;
    let stabilizer_bound = (1.0 - eta).powi(stabilizer_packing_exponent(non_eta_pauli, d) as i32);
    let normalizer_mass = normalizer_l1_mass(channels, code)?;
    let normalizer_bound = 2f64.powf(8.0 * eta * b as f64);
    let normalizer_applies = b - non_eta_pauli >= b.saturating_sub(d);
    Ok(PackingReport {
        qubits: b,
        pure_distance: d,
        eta,
        non_eta_pauli,
        stabilizer_mass,
        stabilizer_bound,
        stabilizer_holds: at_most(stabilizer_mass, stabilizer_bound),
        normalizer_mass,
        normalizer_bound,
        normalizer_applies,
        normalizer_holds: !normalizer_applies || at_most(normalizer_mass, normalizer_bound),
    })
}
