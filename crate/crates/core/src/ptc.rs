//! Keyed family of `[[n, n-λ]]` stabilizer codes indexed by `α ∈ GF(2^λ)`.
//!
//! The code for key `α` is generated by `γ·v_α` for `γ` in the polynomial
//! basis, where `v_α = (1, α, …, α^{2r-1})` and `r = n/λ`. The first `r`
//! coordinates become the X half through primal coordinates, the last `r` the
//! Z half through dual coordinates, so the symplectic form on qubits equals
//! the trace of the field symplectic form.

use crate::error::{Error, Result};
use crate::galois::{DualPair, FieldSpec};
use crate::symplectic::{mask_product, PauliOperator, StabilizerCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Iteration budget for exhaustive sweeps.
pub const EXHAUSTIVE_GUARD: u64 = 100_000_000;

/// Samples used when an automatic sweep exceeds the exhaustive budget.
pub const DEFAULT_SAMPLES: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum SweepMode {
    /// Exhaustive under the guard, seeded sampling above it.
    #[default]
    Auto,
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

impl SweepMode {
    /// Whether a sweep of `iterations` steps runs exhaustively.
    pub fn resolve(self, iterations: u64, what: &str) -> Result<Option<(u64, u64)>> {
        match self {
            SweepMode::Auto if iterations <= EXHAUSTIVE_GUARD => Ok(None),
            SweepMode::Auto => Ok(Some((DEFAULT_SAMPLES, 0))),
            SweepMode::Exhaustive if iterations <= EXHAUSTIVE_GUARD => Ok(None),
            SweepMode::Exhaustive => Err(Error::SizeGuard(format!(
                "exhaustive {what} needs {iterations} iterations; use sampling mode (--samples N --seed S)"
            ))),
            SweepMode::Sampled { samples, seed } => Ok(Some((samples, seed))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PtcFamily {
    n: usize,
    lambda: usize,
    field: FieldSpec,
    pair: DualPair,
    /// Generator masks `(x, z)` per key.
    generators: Vec<Vec<(u64, u64)>>,
}

impl PtcFamily {
    pub fn new(n: usize, lambda: usize) -> Result<Self> {
        let field = check_shape(n, lambda)?;
        Self::with_pair(n, lambda, DualPair::polynomial(field))
    }

    /// Same construction flattened through another primal basis.
    pub fn with_basis(n: usize, lambda: usize, primal: Vec<u32>) -> Result<Self> {
        let field = check_shape(n, lambda)?;
        Self::with_pair(n, lambda, DualPair::new(field, primal)?)
    }

    fn with_pair(n: usize, lambda: usize, pair: DualPair) -> Result<Self> {
        let mut fam = PtcFamily {
            n,
            lambda,
            field: pair.field(),
            pair,
            generators: Vec::new(),
        };
        fam.generators = (0..fam.key_count() as u32)
            .map(|alpha| fam.compute_generators(alpha))
            .collect();
        for a in 0..fam.key_count() as u32 {
            fam.code(a)?;
        }
        Ok(fam)
    }

    /// Arbitrary keyed family given by generator masks, one list per key.
    pub fn from_generators(n: usize, lambda: usize, generators: Vec<Vec<(u64, u64)>>) -> Result<Self> {
        let field = check_shape(n, lambda)?;
        if generators.len() != 1 << lambda {
            return Err(Error::Invalid(format!("expected {} keys, got {}", 1 << lambda, generators.len())));
        }
        let fam = PtcFamily {
            n,
            lambda,
            field,
            pair: DualPair::polynomial(field),
            generators,
        };
        for a in 0..fam.key_count() as u32 {
            fam.code(a)?;
        }
        Ok(fam)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Number of field coordinates per half, `n / λ`.
    pub fn r(&self) -> usize {
        self.n / self.lambda
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dual_pair(&self) -> &DualPair {
        &self.pair
    }

    pub fn key_count(&self) -> usize {
        1 << self.lambda
    }

    /// `(1, α, …, α^{2r-1})`.
    pub fn key_vector(&self, alpha: u32) -> Vec<u32> {
        (0..2 * self.r())
            .map(|i| self.field.pow(alpha, i as u64))
            .collect()
    }

    /// Flattens a field vector of length `2r` into `(x, z)` masks.
    pub fn flatten(&self, v: &[u32]) -> (u64, u64) {
        let r = self.r();
        let lam = self.lambda;
        let mut x = 0u64;
        let mut z = 0u64;
        for i in 0..r {
            x |= u64::from(self.pair.primal_coords(v[i])) << (i * lam);
            z |= u64::from(self.pair.dual_coords(v[r + i])) << (i * lam);
        }
        (x, z)
    }

    /// Inverse of `flatten`.
    pub fn unflatten(&self, x: u64, z: u64) -> Vec<u32> {
        let r = self.r();
        let lam = self.lambda;
        let block = (1u64 << lam) - 1;
        let mut v = vec![0; 2 * r];
        for i in 0..r {
            v[i] = self.pair.from_primal_coords(((x >> (i * lam)) & block) as u32);
            v[r + i] = self.pair.from_dual_coords(((z >> (i * lam)) & block) as u32);
        }
        v
    }

    fn compute_generators(&self, alpha: u32) -> Vec<(u64, u64)> {
        let v = self.key_vector(alpha);
        self.field
            .polynomial_basis()
            .into_iter()
            .map(|gamma| {
                let scaled: Vec<u32> = v.iter().map(|&c| self.field.mul(gamma, c)).collect();
                self.flatten(&scaled)
            })
            .collect()
    }

    pub fn generator_masks(&self, alpha: u32) -> &[(u64, u64)] {
        &self.generators[alpha as usize]
    }

    pub fn code(&self, alpha: u32) -> Result<StabilizerCode> {
        let gens = self
            .generator_masks(alpha)
            .iter()
            .map(|&(x, z)| PauliOperator::from_masks(self.n, x, z))
            .collect();
        StabilizerCode::new(self.n, gens)
    }

    /// Whether the Pauli with masks `(x, z)` has zero syndrome under key `alpha`.
    #[inline]
    pub fn undetected(&self, alpha: u32, x: u64, z: u64) -> bool {
        self.generators[alpha as usize]
            .iter()
            .all(|&(gx, gz)| mask_product(x, z, gx, gz) == 0)
    }

    /// Number of keys under which `(x, z)` goes undetected.
    pub fn undetected_keys(&self, x: u64, z: u64) -> usize {
        (0..self.key_count() as u32)
            .filter(|&a| self.undetected(a, x, z))
            .count()
    }

    /// Whether some non-identity element of `S_a` is undetected by key `b`.
    pub fn stabilizer_overlap(&self, a: u32, b: u32) -> bool {
        let gens = &self.generators[a as usize];
        (1u32..(1 << gens.len())).any(|combo| {
            let (mut x, mut z) = (0u64, 0u64);
            for (i, &(gx, gz)) in gens.iter().enumerate() {
                if combo >> i & 1 == 1 {
                    x ^= gx;
                    z ^= gz;
                }
            }
            self.undetected(b, x, z)
        })
    }
}

fn check_shape(n: usize, lambda: usize) -> Result<FieldSpec> {
    if lambda == 0 || n == 0 || !n.is_multiple_of(lambda) {
        return Err(Error::Invalid(format!("λ={lambda} must divide n={n}")));
    }
    if n > 64 {
        return Err(Error::SizeGuard(format!("code family on {n} qubits")));
    }
    if lambda > 16 {
        return Err(Error::SizeGuard(format!("2^{lambda} keys")));
    }
    FieldSpec::with_default_modulus(lambda as u32)
}

/// Worst-case value of a sweep together with where it was attained.
///
/// Exhaustive sweeps are exact and carry the fraction `hits / keys`. Sampled
/// sweeps are lower bounds on the maximum; for the detectability estimate the
/// 95% Hoeffding half-width of the winning shift is reported as well.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub value: f64,
    pub hits: u64,
    pub keys: u64,
    pub argmax: String,
    pub evaluated: u64,
    pub exhaustive: bool,
    pub ci_half_width: Option<f64>,
}

fn random_nonzero_pauli(rng: &mut ChaCha8Rng, n: usize) -> (u64, u64) {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    loop {
        let x = rng.random::<u64>() & mask;
        let z = rng.random::<u64>() & mask;
        if x != 0 || z != 0 {
            return (x, z);
        }
    }
}

/// Larger count wins; ties go to the earlier `(x, z)`.
fn better(a: (usize, u64, u64), b: (usize, u64, u64)) -> (usize, u64, u64) {
    if a.1 == u64::MAX {
        return b;
    }
    if b.1 == u64::MAX {
        return a;
    }
    if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
        b
    } else {
        a
    }
}

/// `max_{E ≠ I} Pr_α[E undetected by Q_α]`.
pub fn measure_strong_ptc_error(fam: &PtcFamily, mode: SweepMode) -> Result<SweepResult> {
    let n = fam.n;
    let keys = fam.key_count() as u64;
    let total = if n >= 26 {
        u64::MAX
    } else {
        (1u64 << (2 * n)).saturating_mul(keys)
    };
    let ((count, x, z), evaluated, exhaustive) = match mode.resolve(total, "code-family sweep")? {
        None => {
            let dim = 1u64 << n;
            let best = (0..dim)
                .into_par_iter()
                .map(|x| {
                    let mut best = (0usize, u64::MAX, u64::MAX);
                    for z in 0..dim {
                        if x != 0 || z != 0 {
                            best = better(best, (fam.undetected_keys(x, z), x, z));
                        }
                    }
                    best
                })
                .reduce(|| (0, u64::MAX, u64::MAX), better);
            (best, dim * dim - 1, true)
        }
        Some((samples, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = (0usize, u64::MAX, u64::MAX);
            for _ in 0..samples {
                let (x, z) = random_nonzero_pauli(&mut rng, n);
                best = better(best, (fam.undetected_keys(x, z), x, z));
            }
            (best, samples, false)
        }
    };
    let argmax = if x == u64::MAX {
        String::new()
    } else {
        PauliOperator::from_masks(n, x, z).to_string()
    };
    Ok(SweepResult {
        value: count as f64 / keys as f64,
        hits: count as u64,
        keys,
        argmax,
        evaluated,
        exhaustive,
        ci_half_width: None,
    })
}

/// `max_{s ≠ 0} Pr_k[S_k ∩ N(Q_{k+s}) ≠ {I}]`; the argmax is the shift.
pub fn measure_pairwise_detectability(fam: &PtcFamily, mode: SweepMode) -> Result<SweepResult> {
    let keys = fam.key_count() as u64;
    let per_pair = keys.saturating_mul(fam.lambda as u64);
    let total = keys.saturating_mul(keys).saturating_mul(per_pair);
    match mode.resolve(total, "detectability sweep")? {
        None => {
            let per_shift: Vec<(usize, u32)> = (1..keys as u32)
                .into_par_iter()
                .map(|s| {
                    let c = (0..keys as u32)
                        .filter(|&k| fam.stabilizer_overlap(k, k ^ s))
                        .count();
                    (c, s)
                })
                .collect();
            // First shift attaining the maximum.
            let (count, shift) = per_shift
                .iter()
                .copied()
                .fold((0usize, 0u32), |best, cur| {
                    if best.1 == 0 || cur.0 > best.0 {
                        cur
                    } else {
                        best
                    }
                });
            Ok(SweepResult {
                value: count as f64 / keys as f64,
                hits: count as u64,
                keys,
                argmax: shift.to_string(),
                evaluated: (keys - 1) * keys,
                exhaustive: true,
                ci_half_width: None,
            })
        }
        Some((samples, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shifts = (keys - 1).min(samples.max(1));
            let per = (samples / shifts).max(1);
            let mut best = (0u64, 0u32);
            for _ in 0..shifts {
                let s = rng.random_range(1..keys as u32);
                let hits = (0..per)
                    .filter(|_| {
                        let k = rng.random_range(0..keys as u32);
                        fam.stabilizer_overlap(k, k ^ s)
                    })
                    .count() as u64;
                if best.1 == 0 || hits > best.0 {
                    best = (hits, s);
                }
            }
            Ok(SweepResult {
                value: best.0 as f64 / per as f64,
                hits: best.0,
                keys: per,
                argmax: best.1.to_string(),
                evaluated: shifts * per,
                exhaustive: false,
                ci_half_width: Some(((2.0f64 / 0.05).ln() / (2.0 * per as f64)).sqrt()),
            })
        }
    }
}

/// `n · 2^{-λ}`.
pub fn strong_error_bound(n: usize, lambda: usize) -> f64 {
    n as f64 / (1u64 << lambda) as f64
}

/// `2n · 2^{-λ}`.
pub fn detectability_bound(n: usize, lambda: usize) -> f64 {
    2.0 * strong_error_bound(n, lambda)
}

/// Roots in `GF(2^λ)` of `((α+β)^r + α^r)·((α(α+β))^r + 1)`.
///
/// The keys `α` with `S_α ∩ N(Q_{α+β}) ≠ {I}` are exactly the zeros of
/// `((α+β)^r + α^r)·Σ_{i<r} (α(α+β))^i`, and the second factor times
/// `α(α+β) + 1` is `(α(α+β))^r + 1`, so every such key is a root.
pub fn pbeta_roots(field: FieldSpec, beta: u32, r: usize) -> Result<Vec<u32>> {
    if beta == 0 || !field.contains(beta) {
        return Err(Error::Invalid(format!("shift {beta} must be a non-zero field element")));
    }
    let r = r as u64;
    Ok((0..field.order())
        .filter(|&a| {
            let b = a ^ beta;
            let first = field.pow(b, r) ^ field.pow(a, r);
            let second = field.pow(field.mul(a, b), r) ^ 1;
            field.mul(first, second) == 0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_family_keys() {
        let fam = PtcFamily::new(2, 1).unwrap();
        assert_eq!(fam.key_vector(0), vec![1, 0, 0, 0]);
        assert_eq!(fam.key_vector(1), vec![1, 1, 1, 1]);
        assert_eq!(fam.code(0).unwrap().generators()[0].to_string(), "XI");
        assert_eq!(fam.code(1).unwrap().generators()[0].to_string(), "YY");
    }

    #[test]
    fn every_key_gives_a_valid_code() {
        for (n, lam) in [(2, 1), (4, 2), (6, 2), (6, 3), (8, 4)] {
            let fam = PtcFamily::new(n, lam).unwrap();
            for a in 0..fam.key_count() as u32 {
                let code = fam.code(a).unwrap();
                assert_eq!(code.k(), n - lam);
            }
        }
    }

    #[test]
    fn qubit_form_is_trace_of_field_form() {
        let fam = PtcFamily::new(6, 3).unwrap();
        let f = fam.field();
        let r = fam.r();
        for (x1, z1, x2, z2) in [(5u64, 9u64, 33u64, 17u64), (63, 1, 2, 62), (7, 56, 56, 7)] {
            let u = fam.unflatten(x1, z1);
            let v = fam.unflatten(x2, z2);
            let mut form = 0;
            for i in 0..r {
                form ^= f.mul(u[i], v[r + i]) ^ f.mul(v[i], u[r + i]);
            }
            assert_eq!(mask_product(x1, z1, x2, z2), f.trace(form));
            assert_eq!(fam.flatten(&u), (x1, z1));
        }
    }

    #[test]
    fn rejects_non_divisor() {
        assert!(PtcFamily::new(5, 2).is_err());
    }

    #[test]
    fn sampling_never_exceeds_exhaustive() {
        let fam = PtcFamily::new(4, 2).unwrap();
        let full = measure_strong_ptc_error(&fam, SweepMode::Exhaustive).unwrap();
        let sampled =
            measure_strong_ptc_error(&fam, SweepMode::Sampled { samples: 500, seed: 3 }).unwrap();
        assert!(sampled.value <= full.value);
        assert!(!sampled.exhaustive);
    }

    #[test]
    fn root_polynomial_contains_overlapping_keys() {
        for (n, lam) in [(2, 1), (4, 1), (4, 2), (6, 2), (6, 3), (12, 4)] {
            let fam = PtcFamily::new(n, lam).unwrap();
            let r = fam.r();
            for beta in 1..fam.key_count() as u32 {
                let roots = pbeta_roots(fam.field(), beta, r).unwrap();
                assert!(roots.len() <= 3 * r + 2);
                for a in 0..fam.key_count() as u32 {
                    if fam.stabilizer_overlap(a, a ^ beta) {
                        assert!(roots.contains(&a), "n={n} λ={lam} β={beta} α={a}");
                    }
                }
            }
        }
    }

    #[test]
    fn gf4_roots_for_unit_shift() {
        // GF(4) = {0, 1, w, w+1} with w^2 = w + 1; multiplication by table.
        let mul = |a: usize, b: usize| -> usize {
            const T: [[usize; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
            T[a][b]
        };
        let mut want = Vec::new();
        for a in 0..4 {
            let b = a ^ 1;
            let first = mul(b, b) ^ mul(a, a);
            let ab = mul(a, b);
            let second = mul(ab, ab) ^ 1;
            if mul(first, second) == 0 {
                want.push(a as u32);
            }
        }
        assert_eq!(want, vec![2, 3]);
        let field = FieldSpec::with_default_modulus(2).unwrap();
        assert_eq!(pbeta_roots(field, 1, 2).unwrap(), want);
        assert!(pbeta_roots(field, 0, 2).is_err());
    }

    #[test]
    fn literal_exponent_misses_overlapping_keys() {
        // With exponent r+1 in the second factor some overlapping keys are
        // not roots once λ = 4 and r = 3.
        let fam = PtcFamily::new(12, 4).unwrap();
        let f = fam.field();
        let r = fam.r() as u64;
        let literal = |a: u32, beta: u32| {
            let b = a ^ beta;
            let first = f.pow(b, r) ^ f.pow(a, r);
            let second = f.pow(f.mul(a, b), r + 1) ^ 1;
            f.mul(first, second) == 0
        };
        let missed = (1..16u32).any(|beta| {
            (0..16u32).any(|a| fam.stabilizer_overlap(a, a ^ beta) && !literal(a, beta))
        });
        assert!(missed);
    }

    #[test]
    fn measurements_do_not_depend_on_the_basis() {
        for (n, lam, basis) in [(2, 1, vec![1]), (4, 2, vec![1, 3]), (6, 2, vec![3, 2]), (6, 3, vec![1, 3, 5])] {
            let a = PtcFamily::new(n, lam).unwrap();
            let b = PtcFamily::with_basis(n, lam, basis).unwrap();
            let ea = measure_strong_ptc_error(&a, SweepMode::Exhaustive).unwrap();
            let eb = measure_strong_ptc_error(&b, SweepMode::Exhaustive).unwrap();
            assert_eq!(ea.hits, eb.hits);
            let da = measure_pairwise_detectability(&a, SweepMode::Exhaustive).unwrap();
            let db = measure_pairwise_detectability(&b, SweepMode::Exhaustive).unwrap();
            assert_eq!(da.hits, db.hits);
        }
    }

    #[test]
    fn identical_codes_are_never_detected() {
        let fam = PtcFamily::from_generators(2, 1, vec![vec![(0b11, 0)], vec![(0b11, 0)]]).unwrap();
        let e = measure_strong_ptc_error(&fam, SweepMode::Exhaustive).unwrap();
        assert_eq!(e.value, 1.0);
        let d = measure_pairwise_detectability(&fam, SweepMode::Exhaustive).unwrap();
        assert_eq!((d.value, d.argmax.as_str()), (1.0, "1"));
    }

    #[test]
    fn exhaustive_guard_points_to_sampling() {
        let fam = PtcFamily::new(16, 4).unwrap();
        let err = measure_strong_ptc_error(&fam, SweepMode::Exhaustive).unwrap_err();
        assert!(err.to_string().contains("--samples"));
        let s = measure_strong_ptc_error(&fam, SweepMode::Sampled { samples: 2000, seed: 1 }).unwrap();
        assert!(s.value <= strong_error_bound(16, 4));
    }

    #[test]
    fn bounds_hold_on_small_families() {
        for (n, lam) in [(2, 1), (4, 2), (6, 2), (6, 3)] {
            let fam = PtcFamily::new(n, lam).unwrap();
            let e = measure_strong_ptc_error(&fam, SweepMode::Auto).unwrap();
            let d = measure_pairwise_detectability(&fam, SweepMode::Auto).unwrap();
            assert!(e.exhaustive && d.exhaustive);
            assert!(e.value <= strong_error_bound(n, lam));
            assert!(d.value <= detectability_bound(n, lam));
        }
    }
}
