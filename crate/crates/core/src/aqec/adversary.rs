use crate::densesim::{c, matrix_from_rows, matrix_to_rows, random_unitary, Branch, DenseState, Matrix, QuantumChannel};
use crate::error::{Error, Result};
use crate::qlde::ErasurePattern;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest union of supports for which trace preservation is checked densely.
const CPTP_UNION_QUBITS: usize = 10;
const CPTP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryMode {
    /// Every branch erases the same qubits.
    NonAdaptive,
    /// Each branch erases its own qubits.
    Adaptive,
}

/// One Kraus operator acting on, and then erasing, `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryBranch {
    support: Vec<usize>,
    op: Matrix,
}

impl AdversaryBranch {
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `2^{|support|}`-dimensional operator; `support[0]` is the most significant bit.
    pub fn op(&self) -> &Matrix {
        &self.op
    }
}

/// Completely positive, trace preserving map whose Kraus branches each touch
/// at most `budget` qubits and erase exactly the qubits they touch.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureAdversary {
    n: usize,
    budget: usize,
    mode: AdversaryMode,
    branches: Vec<AdversaryBranch>,
}

#[derive(Serialize, Deserialize)]
struct AdversaryFile {
    n: usize,
    budget: usize,
    mode: AdversaryMode,
    branches: Vec<BranchFile>,
}

#[derive(Serialize, Deserialize)]
struct BranchFile {
    support: Vec<usize>,
    kraus: Vec<Vec<[f64; 2]>>,
}

impl ErasureAdversary {
    pub fn new(n: usize, budget: usize, mode: AdversaryMode, branches: Vec<(Vec<usize>, Matrix)>) -> Result<Self> {
        if budget > n {
            return Err(Error::Invalid(format!("budget {budget} exceeds {n} qubits")));
        }
        if branches.is_empty() {
            return Err(Error::Invalid("adversary without Kraus branches".into()));
        }
        let mut out = Vec::with_capacity(branches.len());
        for (support, op) in branches {
            let pattern = ErasurePattern::new(n, support.clone())?;
            if pattern.erased() != support.as_slice() {
                return Err(Error::Invalid(format!("support {support:?} is not sorted")));
            }
            if support.len() > budget {
                return Err(Error::Invalid(format!(
                    "support {support:?} exceeds the erasure budget {budget}"
                )));
            }
            let dim = 1usize << support.len();
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::Invalid(format!(
                    "operator is {}×{}, support needs {dim}×{dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            out.push(AdversaryBranch { support, op });
        }
        if mode == AdversaryMode::NonAdaptive && out.iter().any(|b| b.support != out[0].support) {
            return Err(Error::Invalid("non-adaptive adversary with differing supports".into()));
        }
        let adv = ErasureAdversary {
            n,
            budget,
            mode,
            branches: out,
        };
        adv.check_trace_preserving()?;
        Ok(adv)
    }

    /// Touches nothing.
    pub fn identity(n: usize) -> Self {
        ErasureAdversary {
            n,
            budget: 0,
            mode: AdversaryMode::NonAdaptive,
            branches: vec![AdversaryBranch {
                support: Vec::new(),
                op: Matrix::identity(1, 1),
            }],
        }
    }

    /// Erases `qubits` and does nothing else.
    pub fn fixed_erasure(n: usize, mut qubits: Vec<usize>) -> Result<Self> {
        qubits.sort_unstable();
        let dim = 1usize << qubits.len();
        ErasureAdversary::new(
            n,
            qubits.len(),
            AdversaryMode::NonAdaptive,
            vec![(qubits, Matrix::identity(dim, dim))],
        )
    }

    /// Applies `channel` on its support and erases that support.
    pub fn from_channel(n: usize, channel: &QuantumChannel) -> Result<Self> {
        let mut order: Vec<usize> = (0..channel.support().len()).collect();
        order.sort_by_key(|&i| channel.support()[i]);
        let support: Vec<usize> = order.iter().map(|&i| channel.support()[i]).collect();
        let t = support.len();
        // Reorder the local index so the support reads in increasing order.
        let perm = |idx: usize| -> usize {
            let mut out = 0;
            for (new_pos, &old_pos) in order.iter().enumerate() {
                if idx >> (t - 1 - old_pos) & 1 == 1 {
                    out |= 1 << (t - 1 - new_pos);
                }
            }
            out
        };
        let branches = channel
            .kraus()
            .iter()
            .map(|k| {
                let mut m = Matrix::zeros(k.nrows(), k.ncols());
                for i in 0..k.nrows() {
                    for j in 0..k.ncols() {
                        m[(perm(i), perm(j))] = k[(i, j)];
                    }
                }
                (support.clone(), m)
            })
            .collect();
        ErasureAdversary::new(n, t, AdversaryMode::NonAdaptive, branches)
    }

    /// Random channel with `kraus_count` branches on a random set of `t` qubits.
    pub fn random_non_adaptive<R: Rng + ?Sized>(n: usize, t: usize, kraus_count: usize, rng: &mut R) -> Result<Self> {
        if t > n {
            return Err(Error::Invalid(format!("{t} erasures on {n} qubits")));
        }
        let mut support = rand::seq::index::sample(rng, n, t).into_vec();
        support.sort_unstable();
        let ch = QuantumChannel::random((0..t).collect(), kraus_count, rng)?;
        let branches = ch.kraus().iter().map(|k| (support.clone(), k.clone())).collect();
        ErasureAdversary::new(n, t, AdversaryMode::NonAdaptive, branches)
    }

    /// Two-stage adaptive adversary: a random two-outcome instrument on one
    /// qubit, then per outcome a random two-operator channel on a second
    /// qubit chosen for that outcome. Every branch erases both qubits it touched.
    pub fn random_adaptive<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid("adaptive adversary needs two qubits".into()));
        }
        const OUTCOMES: usize = 2;
        const FOLLOW_UPS: usize = 2;
        let q1 = rng.random_range(0..n);
        let u = random_unitary(2 * OUTCOMES, rng);
        let mut branches = Vec::new();
        for j in 0..OUTCOMES {
            let first = u.view((2 * j, 0), (2, 2)).into_owned();
            let mut q2 = rng.random_range(0..n - 1);
            if q2 >= q1 {
                q2 += 1;
            }
            let follow = QuantumChannel::random(vec![0], FOLLOW_UPS, rng)?;
            for second in follow.kraus() {
                let (support, op) = if q1 < q2 {
                    (vec![q1, q2], first.kronecker(second))
                } else {
                    (vec![q2, q1], second.kronecker(&first))
                };
                branches.push((support, op));
            }
        }
        ErasureAdversary::new(n, 2, AdversaryMode::Adaptive, branches)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn mode(&self) -> AdversaryMode {
        self.mode
    }

    pub fn branches(&self) -> &[AdversaryBranch] {
        &self.branches
    }

    fn check_trace_preserving(&self) -> Result<()> {
        let mut union: Vec<usize> = self.branches.iter().flat_map(|b| b.support.clone()).collect();
        union.sort_unstable();
        union.dedup();
        if union.len() > CPTP_UNION_QUBITS {
            return Err(Error::SizeGuard(format!(
                "trace-preservation check on {} qubits (limit {CPTP_UNION_QUBITS})",
                union.len()
            )));
        }
        let u = union.len();
        let dim = 1usize << u;
        let mut acc = Matrix::zeros(dim, dim);
        for b in &self.branches {
            let local: Vec<usize> = b
                .support
                .iter()
                .map(|q| union.binary_search(q).expect("support inside union"))
                .collect();
            let mut full = Matrix::zeros(dim, dim);
            for col in 0..dim {
                let mut s = DenseState::basis(u, col)?;
                s.apply_local(&b.op, &local)?;
                full.set_column(col, &s.to_matrix().column(0));
            }
            acc += full.adjoint() * full;
        }
        if (acc - Matrix::identity(dim, dim)).norm() > CPTP_TOL {
            return Err(Error::Invalid("adversary is not trace preserving".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = AdversaryFile {
            n: self.n,
            budget: self.budget,
            mode: self.mode,
            branches: self
                .branches
                .iter()
                .map(|b| BranchFile {
                    support: b.support.clone(),
                    kraus: matrix_to_rows(&b.op),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AdversaryFile = serde_json::from_str(text)?;
        let branches = file
            .branches
            .iter()
            .map(|b| Ok((b.support.clone(), matrix_from_rows(&b.kraus)?)))
            .collect::<Result<Vec<_>>>()?;
        ErasureAdversary::new(file.n, file.budget, file.mode, branches)
    }
}

/// A branch after the adversary, tagged with the qubits it erased.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedBranch {
    pub erased: ErasurePattern,
    pub weight: f64,
    pub state: DenseState,
}

/// Applies every Kraus branch to qubits `0..adv.n()` of every input branch and
/// then replaces the touched qubits by the maximally mixed state.
///
/// The erasure `ρ ↦ Tr_S(ρ) ⊗ I/2^{|S|}` is realised as the mixture over
/// `|b⟩⟨e|_S` with weight `2^{-|S|}`, which keeps every branch pure.
pub fn apply_adversary(branches: &[Branch], adv: &ErasureAdversary) -> Result<Vec<TaggedBranch>> {
    let mut out = Vec::new();
    for input in branches {
        if input.state.n() < adv.n {
            return Err(Error::SizeMismatch(input.state.n(), adv.n));
        }
        for b in &adv.branches {
            let mut hit = input.state.clone();
            hit.apply_local(&b.op, &b.support)?;
            let erased = ErasurePattern::new(adv.n, b.support.clone())?;
            for (w, state) in erase(&hit, &b.support) {
                let weight = input.weight * w;
                if weight > 0.0 {
                    out.push(TaggedBranch {
                        erased: erased.clone(),
                        weight,
                        state,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Pieces `2^{-|S|/2} |b⟩⟨e|_S ψ` of nonzero norm, as (squared norm, normalized state).
pub(crate) fn erase(state: &DenseState, support: &[usize]) -> Vec<(f64, DenseState)> {
    let t = support.len();
    let mut out = Vec::new();
    for e in 0..1usize << t {
        for b in 0..1usize << t {
            let mut piece = erase_piece(state, support, e, b);
            let norm = piece.normalize();
            if norm > 0.0 {
                out.push((norm * norm, piece));
            }
        }
    }
    out
}

/// `2^{-|S|/2} |b⟩⟨e|_S ψ`, with `support[0]` the most significant bit of `e` and `b`.
pub(crate) fn erase_piece(state: &DenseState, support: &[usize], e: usize, b: usize) -> DenseState {
    let t = support.len();
    let masks: Vec<usize> = support.iter().map(|&q| state.mask(q)).collect();
    let pattern = |v: usize| -> usize {
        (0..t)
            .filter(|&j| v >> (t - 1 - j) & 1 == 1)
            .map(|j| masks[j])
            .sum()
    };
    let all: usize = masks.iter().sum();
    let (pe, pb) = (pattern(e), pattern(b));
    let scale = c((1.0 / (1u64 << t) as f64).sqrt(), 0.0);
    let mut amps = vec![c(0.0, 0.0); state.amplitudes().len()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        if i & all == pe {
            amps[(i & !all) | pb] = a * scale;
        }
    }
    DenseState::from_amplitudes(state.n(), amps).expect("same size")
}
