use super::{c, Branch, Matrix};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const CPTP_TOL: f64 = 1e-9;

/// Channel given by Kraus operators on `support`, identity elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct QuantumChannel {
    support: Vec<usize>,
    kraus: Vec<Matrix>,
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    support: Vec<usize>,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

pub(crate) fn matrix_to_rows(m: &Matrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Invalid("ragged matrix".into()));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

impl QuantumChannel {
    /// Validates dimensions and trace preservation.
    pub fn new(support: Vec<usize>, kraus: Vec<Matrix>) -> Result<Self> {
        let ch = QuantumChannel::unchecked(support, kraus)?;
        if !ch.is_cptp(CPTP_TOL) {
            return Err(Error::Invalid("Kraus operators do not sum to the identity".into()));
        }
        Ok(ch)
    }

    /// Validates dimensions only; used for trace non-increasing branches.
    pub fn unchecked(support: Vec<usize>, kraus: Vec<Matrix>) -> Result<Self> {
        let dim = 1usize << support.len();
        if kraus.is_empty() {
            return Err(Error::Invalid("channel without Kraus operators".into()));
        }
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::Invalid(format!(
                    "Kraus operator is {}×{}, support needs {dim}×{dim}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let mut seen = support.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != support.len() {
            return Err(Error::Invalid("repeated qubit in channel support".into()));
        }
        Ok(QuantumChannel { support, kraus })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn with_support(mut self, support: Vec<usize>) -> Result<Self> {
        if support.len() != self.support.len() {
            return Err(Error::Invalid("support size changes the channel".into()));
        }
        self.support = support;
        Ok(self)
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        let dim = 1usize << self.support.len();
        let mut acc = Matrix::zeros(dim, dim);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        (acc - Matrix::identity(dim, dim)).norm() <= tol
    }

    pub fn identity() -> Self {
        QuantumChannel::unitary(Matrix::identity(2, 2)).expect("identity is unitary")
    }

    pub fn unitary(u: Matrix) -> Result<Self> {
        let k = u.nrows().trailing_zeros() as usize;
        QuantumChannel::new((0..k).collect(), vec![u])
    }

    /// `ρ ↦ (1 - p) ρ + p · diag(ρ)`.
    pub fn dephasing(p: f64) -> Result<Self> {
        QuantumChannel::pauli([1.0 - p / 2.0, 0.0, 0.0, p / 2.0])
    }

    /// `ρ ↦ (1 - p) ρ + p · I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        QuantumChannel::pauli([1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0])
    }

    /// Single-qubit Pauli channel with probabilities for `I, X, Y, Z`.
    pub fn pauli(probs: [f64; 4]) -> Result<Self> {
        if probs.iter().any(|&p| p < -1e-15) {
            return Err(Error::Invalid("negative probability".into()));
        }
        let kraus = single_qubit_paulis()
            .into_iter()
            .zip(probs)
            .filter(|(_, p)| *p > 0.0)
            .map(|(m, p)| m * c(p.max(0.0).sqrt(), 0.0))
            .collect();
        QuantumChannel::new(vec![0], kraus)
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        let k0 = Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)]);
        let k1 = Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        QuantumChannel::new(vec![0], vec![k0, k1])
    }

    /// Discards the qubit and prepares `|0⟩`.
    pub fn replace_with_zero() -> Self {
        let k0 = Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let k1 = Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        QuantumChannel::new(vec![0], vec![k0, k1]).expect("valid channel")
    }

    /// Discards the qubit and prepares the density matrix `sigma`.
    pub fn replace_with(sigma: &Matrix) -> Result<Self> {
        let eig = sigma.clone().symmetric_eigen();
        let mut kraus = Vec::new();
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < -1e-12 {
                return Err(Error::Invalid("replacement state is not positive".into()));
            }
            if lambda <= 1e-15 {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            for j in 0..2 {
                let mut k = Matrix::zeros(2, 2);
                for i in 0..2 {
                    k[(i, j)] = v[i] * c(lambda.sqrt(), 0.0);
                }
                kraus.push(k);
            }
        }
        QuantumChannel::new(vec![0], kraus)
    }

    /// Applies the channel to one pure state, one branch per Kraus operator.
    /// Branches of zero weight are dropped.
    pub fn apply_to(&self, weight: f64, state: &super::DenseState) -> Result<Vec<Branch>> {
        let mut out = Vec::with_capacity(self.kraus.len());
        for k in &self.kraus {
            let mut s = state.clone();
            s.apply_local(k, &self.support)?;
            let norm = s.normalize();
            let w = weight * norm * norm;
            if w > 0.0 {
                out.push(Branch { weight: w, state: s });
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl From<QuantumChannel> for ChannelFile {
    fn from(ch: QuantumChannel) -> Self {
        ChannelFile {
            kraus: ch.kraus.iter().map(matrix_to_rows).collect(),
            support: ch.support,
        }
    }
}

impl TryFrom<ChannelFile> for QuantumChannel {
    type Error = Error;

    fn try_from(file: ChannelFile) -> Result<Self> {
        let kraus = file
            .kraus
            .iter()
            .map(|m| matrix_from_rows(m))
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(file.support, kraus)
    }
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// the diagonal of `R` divided out.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let g = Matrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

impl QuantumChannel {
    /// Random channel with `kraus_count` operators on `support`: blocks of the
    /// first `2^t` columns of a Haar-random unitary on `kraus_count · 2^t` dimensions.
    pub fn random<R: Rng + ?Sized>(support: Vec<usize>, kraus_count: usize, rng: &mut R) -> Result<Self> {
        if kraus_count == 0 {
            return Err(Error::Invalid("channel without Kraus operators".into()));
        }
        let dim = 1usize << support.len();
        let u = random_unitary(kraus_count * dim, rng);
        let kraus = (0..kraus_count)
            .map(|a| u.view((a * dim, 0), (dim, dim)).into_owned())
            .collect();
        QuantumChannel::new(support, kraus)
    }
}

/// `I, X, Y, Z` as 2×2 matrices.
pub fn single_qubit_paulis() -> [Matrix; 4] {
    let z0 = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    [
        Matrix::identity(2, 2),
        Matrix::from_row_slice(2, 2, &[z0, one, one, z0]),
        Matrix::from_row_slice(2, 2, &[z0, c(0.0, -1.0), c(0.0, 1.0), z0]),
        Matrix::from_row_slice(2, 2, &[one, z0, z0, -one]),
    ]
}

/// Applies `channel` to every branch; the total weight is preserved for CPTP channels.
pub fn apply_channel(branches: &[Branch], channel: &QuantumChannel) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    for b in branches {
        out.extend(channel.apply_to(b.weight, &b.state)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::DenseState;

    #[test]
    fn json_round_trip() {
        for ch in [
            QuantumChannel::amplitude_damping(0.3).unwrap(),
            QuantumChannel::depolarizing(0.2).unwrap().with_support(vec![2]).unwrap(),
            QuantumChannel::replace_with_zero(),
        ] {
            let back = QuantumChannel::from_json(&ch.to_json()).unwrap();
            assert_eq!(back, ch);
        }
    }

    #[test]
    fn random_unitary_and_channel_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for dim in [1, 2, 4, 8] {
            let u = random_unitary(dim, &mut rng);
            assert!((u.adjoint() * &u - Matrix::identity(dim, dim)).norm() < 1e-12);
        }
        for (t, m) in [(1, 1), (1, 3), (2, 2)] {
            let ch = QuantumChannel::random((0..t).collect(), m, &mut rng).unwrap();
            assert_eq!(ch.kraus().len(), m);
            assert!(ch.is_cptp(1e-12));
        }
    }

    #[test]
    fn non_cptp_is_rejected() {
        let k = Matrix::identity(2, 2) * c(0.5, 0.0);
        assert!(QuantumChannel::new(vec![0], vec![k]).is_err());
    }

    #[test]
    fn measurement_splits_plus_state() {
        let mut plus = DenseState::zero(1).unwrap();
        plus.apply_gate(crate::symplectic::Gate::H(0)).unwrap();
        let ch = QuantumChannel::dephasing(1.0).unwrap();
        let out = apply_channel(&[Branch { weight: 1.0, state: plus }], &ch).unwrap();
        assert_eq!(out.len(), 2);
        let total: f64 = out.iter().map(|b| b.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn replacement_channel_outputs_sigma() {
        let sigma = Matrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let ch = QuantumChannel::replace_with(&sigma).unwrap();
        let mut out = Matrix::zeros(2, 2);
        for k in ch.kraus() {
            let rho = Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
            out += k * rho * k.adjoint();
        }
        assert!((out - sigma).norm() < 1e-12);
    }
}
