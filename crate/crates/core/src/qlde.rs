//! Erasure list decoding.
//!
//! Given the erased qubits and a syndrome, every Pauli supported on the erased
//! set with that syndrome is one particular solution times an element of
//! `N_E`, the normalizer elements supported on the erased set. Elements that
//! differ by `S_E`, the stabilizer elements supported there, act identically
//! on the code space, so the list holds one canonical Pauli per coset of
//! `N_E / S_E`.

use crate::bits::{self, BitVec, Echelon};
use crate::error::{Error, Result};
use crate::symplectic::{css_from_classical, PauliOperator, StabilizerCode};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Lists with more than `2^MAX_LIST_BITS` entries are refused.
pub const MAX_LIST_BITS: usize = 20;

/// Largest block length profiled exhaustively.
pub const MAX_PROFILE_QUBITS: usize = 16;

/// Draws allowed before `sample_random_css` gives up on independence.
pub const RESAMPLE_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErasurePattern {
    n: usize,
    erased: Vec<usize>,
}

impl ErasurePattern {
    pub fn new(n: usize, mut erased: Vec<usize>) -> Result<Self> {
        erased.sort_unstable();
        if let Some(&q) = erased.iter().find(|&&q| q >= n) {
            return Err(Error::Invalid(format!("erased qubit {q} outside 0..{n}")));
        }
        if erased.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("erased set lists a qubit twice".into()));
        }
        Ok(ErasurePattern { n, erased })
    }

    /// Comma-separated indices; the empty string is the empty set.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return ErasurePattern::new(n, Vec::new());
        }
        let erased = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Invalid(format!("bad qubit index '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        ErasurePattern::new(n, erased)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn erased(&self) -> &[usize] {
        &self.erased
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.n).filter(|q| self.erased.binary_search(q).is_err()).collect()
    }
}

/// Candidate corrections for one `(erased set, syndrome)` pair, sorted by
/// `(x | z)` bit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionList {
    erased: ErasurePattern,
    syndrome: BitVec,
    entries: Vec<PauliOperator>,
}

impl CorrectionList {
    pub fn erased(&self) -> &ErasurePattern {
        &self.erased
    }

    pub fn syndrome(&self) -> &BitVec {
        &self.syndrome
    }

    pub fn entries(&self) -> &[PauliOperator] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// All `e` supported on `erased` with `H e = s`, sorted.
pub fn classical_erasure_list_decode(
    h: &[BitVec],
    n: usize,
    erased: &ErasurePattern,
    s: &BitVec,
) -> Result<Vec<BitVec>> {
    if erased.n() != n || h.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("parity matrix does not match the block length".into()));
    }
    if s.len() != h.len() {
        return Err(Error::SizeMismatch(s.len(), h.len()));
    }
    let cols = erased.erased();
    let restricted: Vec<BitVec> = h.iter().map(|r| r.select(cols)).collect();
    let Some(particular) = bits::solve(&restricted, cols.len(), s) else {
        return Ok(Vec::new());
    };
    let ker = bits::kernel(&restricted, cols.len());
    let mut out: Vec<BitVec> = span_shifted(&particular, &ker)?
        .into_iter()
        .map(|v| embed_bits(&v, n, cols))
        .collect();
    out.sort();
    Ok(out)
}

fn embed_bits(v: &BitVec, n: usize, positions: &[usize]) -> BitVec {
    let mut out = BitVec::zeros(n);
    for i in v.iter_ones() {
        out.set(positions[i], true);
    }
    out
}

/// `base + span(basis)`, every element once.
fn span_shifted(base: &BitVec, basis: &[BitVec]) -> Result<Vec<BitVec>> {
    if basis.len() > MAX_LIST_BITS {
        return Err(Error::SizeGuard(format!("list of 2^{} entries", basis.len())));
    }
    let mut out = Vec::with_capacity(1 << basis.len());
    for combo in 0u64..1 << basis.len() {
        let mut v = base.clone();
        for (i, b) in basis.iter().enumerate() {
            if combo >> i & 1 == 1 {
                v.xor_assign(b);
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Restricted symplectic data of a code on an erased set: rows computing the
/// syndrome of a restricted `(x | z)` vector, and a basis of `S_E`.
struct Restricted {
    syndrome_rows: Vec<BitVec>,
    stabilizers: Echelon,
    cols: usize,
}

impl Restricted {
    fn new(code: &StabilizerCode, erased: &ErasurePattern) -> Result<Self> {
        if erased.n() != code.n() {
            return Err(Error::SizeMismatch(erased.n(), code.n()));
        }
        let e = erased.erased();
        let syndrome_rows = code
            .generators()
            .iter()
            .map(|g| g.z().select(e).concat(&g.x().select(e)))
            .collect();
        // Generator combinations that vanish off the erased set.
        let comp = erased.complement();
        let r = code.r();
        let mut constraints = Vec::with_capacity(2 * comp.len());
        for &q in &comp {
            for half in 0..2 {
                let mut row = BitVec::zeros(r);
                for (i, g) in code.generators().iter().enumerate() {
                    let bit = if half == 0 { g.x().get(q) } else { g.z().get(q) };
                    row.set(i, bit);
                }
                constraints.push(row);
            }
        }
        let combos = bits::kernel(&constraints, r);
        let stab_rows: Vec<BitVec> = combos
            .iter()
            .map(|c| {
                let mut v = BitVec::zeros(2 * e.len());
                for i in c.iter_ones() {
                    let g = &code.generators()[i];
                    v.xor_assign(&g.x().select(e).concat(&g.z().select(e)));
                }
                v
            })
            .collect();
        Ok(Restricted {
            syndrome_rows,
            stabilizers: Echelon::new(&stab_rows, 2 * e.len()),
            cols: 2 * e.len(),
        })
    }

    fn normalizer(&self) -> Vec<BitVec> {
        bits::kernel(&self.syndrome_rows, self.cols)
    }

    /// Normalizer vectors independent modulo `S_E`, one per quotient dimension.
    fn quotient_basis(&self) -> Vec<BitVec> {
        let mut rows = self.stabilizers.rows.clone();
        let mut ech = self.stabilizers.clone();
        let mut extra = Vec::new();
        for v in self.normalizer() {
            if !ech.contains(&v) {
                rows.push(v.clone());
                extra.push(v);
                ech = Echelon::new(&rows, self.cols);
            }
        }
        extra
    }
}

/// `log2 |N_E / S_E|` from ranks alone.
pub fn list_size_log2(code: &StabilizerCode, erased: &ErasurePattern) -> Result<usize> {
    let r = Restricted::new(code, erased)?;
    let normalizer_dim = r.cols - bits::rank(&r.syndrome_rows, r.cols);
    Ok(normalizer_dim - r.stabilizers.rank())
}

pub fn erasure_list_decode(
    code: &StabilizerCode,
    erased: &ErasurePattern,
    s: &BitVec,
) -> Result<CorrectionList> {
    if s.len() != code.r() {
        return Err(Error::SizeMismatch(s.len(), code.r()));
    }
    let r = Restricted::new(code, erased)?;
    let positions = erased.erased();
    let entries = match bits::solve(&r.syndrome_rows, r.cols, s) {
        None => Vec::new(),
        Some(particular) => {
            let mut reps: Vec<BitVec> = span_shifted(&particular, &r.quotient_basis())?
                .iter()
                .map(|v| r.stabilizers.reduce(v))
                .collect();
            reps.sort();
            let t = positions.len();
            reps.iter()
                .map(|v| {
                    PauliOperator::hermitian(v.slice(0, t), v.slice(t, 2 * t))
                        .expect("equal halves")
                        .embed(code.n(), positions)
                })
                .collect()
        }
    };
    Ok(CorrectionList {
        erased: erased.clone(),
        syndrome: s.clone(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ListProfile {
    /// Largest erased-set size considered, `floor(δ n)`.
    pub radius: usize,
    pub max_list: u64,
    pub worst_erased: Vec<usize>,
    pub subsets: u64,
}

/// `floor(δ n)` with a little slack so that e.g. `0.2 · 10` gives 2.
pub fn erasure_radius(n: usize, delta: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Invalid(format!("erasure fraction {delta} outside [0, 1]")));
    }
    Ok(((delta * n as f64) + 1e-9).floor() as usize)
}

/// Subsets of `0..n` of size at most `t`, by size then lexicographically.
pub fn subsets_up_to(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=t.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.clone());
            let Some(i) = (0..size).rev().find(|&i| idx[i] < n - size + i) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

fn profile_with<F>(n: usize, delta: f64, log_size: F) -> Result<ListProfile>
where
    F: Fn(&ErasurePattern) -> Result<usize> + Sync,
{
    if n > MAX_PROFILE_QUBITS {
        return Err(Error::SizeGuard(format!(
            "list-size profile on {n} qubits (limit {MAX_PROFILE_QUBITS})"
        )));
    }
    let radius = erasure_radius(n, delta)?;
    let subsets = subsets_up_to(n, radius);
    let sizes = subsets
        .par_iter()
        .map(|s| log_size(&ErasurePattern::new(n, s.clone())?))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &l) in sizes.iter().enumerate() {
        if l > sizes[best] {
            best = i;
        }
    }
    Ok(ListProfile {
        radius,
        max_list: 1u64 << sizes[best],
        worst_erased: subsets[best].clone(),
        subsets: subsets.len() as u64,
    })
}

/// Largest list over every erased set of size at most `δ n`.
pub fn list_size_profile(code: &StabilizerCode, delta: f64) -> Result<ListProfile> {
    profile_with(code.n(), delta, |e| list_size_log2(code, e))
}

/// Classical analogue: the largest number of codewords of `ker H` supported
/// on an erased set of size at most `δ n`.
pub fn classical_list_size_profile(h: &[BitVec], n: usize, delta: f64) -> Result<ListProfile> {
    profile_with(n, delta, |e| {
        let restricted: Vec<BitVec> = h.iter().map(|r| r.select(e.erased())).collect();
        Ok(e.len() - bits::rank(&restricted, e.len()))
    })
}

#[derive(Clone, Debug)]
pub struct SampledCss {
    pub code: StabilizerCode,
    /// Parity checks of the first classical code; its rows give Z generators.
    pub h1: Vec<BitVec>,
    /// Parity checks of the second classical code; its rows give X generators.
    pub h2: Vec<BitVec>,
    /// Whether the first draw of generator columns was already independent,
    /// which is exactly when the code gets rate `k / n` without resampling.
    pub first_draw_independent: bool,
    pub draws: usize,
}

/// Random CSS code: `(n + k) / 2` independent random vectors span the first
/// classical code, and the first `n - (n + k) / 2` of them form the parity
/// checks of the second.
pub fn sample_random_css<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<SampledCss> {
    if k >= n || !(n + k).is_multiple_of(2) {
        return Err(Error::Invalid(format!("need k < n and n + k even, got n={n} k={k}")));
    }
    let k1 = (n + k) / 2;
    let k2 = n - k1;
    let mut first_draw_independent = false;
    for draw in 1..=RESAMPLE_CAP {
        let g: Vec<BitVec> = (0..k1)
            .map(|_| BitVec::from_bools(&(0..n).map(|_| rng.random::<bool>()).collect::<Vec<_>>()))
            .collect();
        let independent = bits::rank(&g, n) == k1;
        if draw == 1 {
            first_draw_independent = independent;
        }
        if !independent {
            continue;
        }
        let h1 = bits::kernel(&g, n);
        let h2 = g[..k2].to_vec();
        let code = css_from_classical(&h1, &h2, n)?;
        return Ok(SampledCss {
            code,
            h1,
            h2,
            first_draw_independent,
            draws: draw,
        });
    }
    Err(Error::Invariant(format!(
        "no independent draw in {RESAMPLE_CAP} attempts"
    )))
}
