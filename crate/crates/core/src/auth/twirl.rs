use crate::densesim::{c, single_qubit_paulis, Matrix, QuantumChannel};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Pauli labels in coefficient order.
pub const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

fn check_single(ch: &QuantumChannel) -> Result<()> {
    if ch.support().len() != 1 {
        return Err(Error::Invalid(format!(
            "expected a single-qubit channel, got support {:?}",
            ch.support()
        )));
    }
    Ok(())
}

/// `c_σ^μ = tr(σ† K_μ)/2`, one row per Kraus operator, columns `I, X, Y, Z`.
pub fn pauli_decompose_channel(ch: &QuantumChannel) -> Result<Vec<[Complex64; 4]>> {
    check_single(ch)?;
    let paulis = single_qubit_paulis();
    Ok(ch
        .kraus()
        .iter()
        .map(|k| {
            let mut row = [c(0.0, 0.0); 4];
            for (slot, p) in row.iter_mut().zip(&paulis) {
                *slot = (p.adjoint() * k).trace() * 0.5;
            }
            row
        })
        .collect())
}

/// Weights `Σ_μ |c_σ^μ|²` of the Pauli channel left by a uniform Pauli twirl.
pub fn twirl_probabilities(ch: &QuantumChannel) -> Result<[f64; 4]> {
    let mut p = [0.0; 4];
    for row in pauli_decompose_channel(ch)? {
        for (acc, z) in p.iter_mut().zip(row) {
            *acc += z.norm_sqr();
        }
    }
    Ok(p)
}

/// Twirled weights for each qubit's channel.
pub fn twirl_channel(channels: &[QuantumChannel]) -> Result<Vec<[f64; 4]>> {
    channels.iter().map(twirl_probabilities).collect()
}

/// `4 × 4` superoperator `Σ_μ K_μ ⊗ K̄_μ` of a single-qubit map.
pub fn superoperator(kraus: &[Matrix]) -> Matrix {
    kraus
        .iter()
        .fold(Matrix::zeros(4, 4), |acc, k| acc + k.kronecker(&k.conjugate()))
}

/// Superoperator of `ρ ↦ U ρ U†`.
pub fn conjugation_superoperator(u: &Matrix) -> Matrix {
    u.kronecker(&u.conjugate())
}

/// Superoperator of the Pauli channel with weights for `I, X, Y, Z`.
pub fn pauli_superoperator(probs: &[f64; 4]) -> Matrix {
    single_qubit_paulis()
        .iter()
        .zip(probs)
        .fold(Matrix::zeros(4, 4), |acc, (p, &w)| acc + conjugation_superoperator(p) * c(w, 0.0))
}

/// Superoperator of `ρ ↦ tr(ρ) σ`.
pub fn replacement_superoperator(sigma: &Matrix) -> Matrix {
    Matrix::from_fn(4, 4, |row, col| {
        if col == 0 || col == 3 {
            sigma[(row / 2, row % 2)]
        } else {
            c(0.0, 0.0)
        }
    })
}

/// Applies a superoperator to a `2 × 2` operator.
pub fn apply_superoperator_2x2(s: &Matrix, rho: &Matrix) -> Matrix {
    let v = Matrix::from_column_slice(4, 1, &[rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]]);
    let out = s * v;
    Matrix::from_row_slice(2, 2, &[out[0], out[1], out[2], out[3]])
}

/// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)` of a single-qubit map.
pub fn choi_from_superoperator(s: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let mut e = Matrix::zeros(2, 2);
            e[(i, j)] = c(1.0, 0.0);
            let img = apply_superoperator_2x2(s, &e);
            for a in 0..2 {
                for b in 0..2 {
                    out[(2 * i + a, 2 * j + b)] = img[(a, b)];
                }
            }
        }
    }
    out
}

/// Choi matrix of `(1/4) Σ_P P† Λ(P · P†) P`, computed by averaging the four pads.
pub fn explicit_twirl_choi(ch: &QuantumChannel) -> Result<Matrix> {
    check_single(ch)?;
    let sup = superoperator(ch.kraus());
    let mut acc = Matrix::zeros(4, 4);
    for p in single_qubit_paulis() {
        let padded = conjugation_superoperator(&p.adjoint()) * &sup * conjugation_superoperator(&p);
        acc += choi_from_superoperator(&padded);
    }
    Ok(acc * c(0.25, 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaPauliReport {
    /// `1 - max_E Σ_μ |c_E^μ|²`.
    pub eta: f64,
    /// The Pauli attaining the maximum; ties go to the earlier of `I, X, Y, Z`.
    pub best_pauli: char,
}

impl EtaPauliReport {
    /// Whether the channel is `η`-close to a single Pauli.
    pub fn is_eta_pauli(&self, eta: f64) -> bool {
        self.eta <= eta
    }
}

pub fn eta_classify(ch: &QuantumChannel) -> Result<EtaPauliReport> {
    let p = twirl_probabilities(ch)?;
    let mut best = 0;
    for i in 1..4 {
        if p[i] > p[best] {
            best = i;
        }
    }
    Ok(EtaPauliReport {
        eta: (1.0 - p[best]).max(0.0),
        best_pauli: PAULI_LABELS[best],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::random_unitary;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decomposition_reconstructs_kraus_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = QuantumChannel::random(vec![0], 3, &mut rng).unwrap();
        let paulis = single_qubit_paulis();
        let coeffs = pauli_decompose_channel(&ch).unwrap();
        let mut total = 0.0;
        for (k, row) in ch.kraus().iter().zip(&coeffs) {
            let rebuilt = paulis
                .iter()
                .zip(row)
                .fold(Matrix::zeros(2, 2), |acc, (p, &z)| acc + p * z);
            assert!((rebuilt - k).norm() < 1e-12);
            total += row.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn named_channels_twirl_as_expected() {
        let z = QuantumChannel::unitary(single_qubit_paulis()[3].clone()).unwrap();
        assert_eq!(twirl_probabilities(&z).unwrap(), [0.0, 0.0, 0.0, 1.0]);
        let p = 0.3;
        let dep = twirl_probabilities(&QuantumChannel::depolarizing(p).unwrap()).unwrap();
        let want = [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0];
        for (a, b) in dep.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_of_named_channels() {
        let id = eta_classify(&QuantumChannel::identity()).unwrap();
        assert_eq!((id.eta, id.best_pauli), (0.0, 'I'));
        let dep = eta_classify(&QuantumChannel::depolarizing(0.2).unwrap()).unwrap();
        assert!((dep.eta - 0.15).abs() < 1e-12);
        assert_eq!(dep.best_pauli, 'I');
        // |0⟩⟨0| = (I + Z)/2 and |0⟩⟨1| = (X + iY)/2 spread the weight evenly.
        let reset = eta_classify(&QuantumChannel::replace_with_zero()).unwrap();
        assert!((reset.eta - 0.75).abs() < 1e-12);
        assert_eq!(reset.best_pauli, 'I');
        let y = QuantumChannel::unitary(single_qubit_paulis()[2].clone()).unwrap();
        let y = eta_classify(&y).unwrap();
        assert_eq!((y.eta, y.best_pauli), (0.0, 'Y'));
    }

    #[test]
    fn choi_of_superoperators_is_consistent() {
        let ch = QuantumChannel::amplitude_damping(0.4).unwrap();
        let choi = choi_from_superoperator(&superoperator(ch.kraus()));
        // Trace preservation: partial trace over the output is the identity.
        let mut reduced = Matrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                reduced[(i, j)] = choi[(2 * i, 2 * j)] + choi[(2 * i + 1, 2 * j + 1)];
            }
        }
        assert!((reduced - Matrix::identity(2, 2)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn twirl_is_idempotent_and_matches_pad_average(seed in any::<u64>(), kraus in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ch = QuantumChannel::random(vec![0], kraus, &mut rng).unwrap();
            let p = twirl_probabilities(&ch).unwrap();
            let algebraic = choi_from_superoperator(&pauli_superoperator(&p));
            prop_assert!((explicit_twirl_choi(&ch).unwrap() - &algebraic).norm() < 1e-10);
            let twice = twirl_probabilities(&QuantumChannel::pauli(p).unwrap()).unwrap();
            for (a, b) in p.iter().zip(twice) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn unitary_channels_have_unit_weight(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = QuantumChannel::unitary(random_unitary(2, &mut rng)).unwrap();
            let p = twirl_probabilities(&u).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
