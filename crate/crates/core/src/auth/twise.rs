use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::galois::{FieldSpec, MAX_DEGREE};

/// `t`-wise independent bit generator: the seed holds the coefficients of a
/// polynomial of degree below `t` over `GF(2^w)`, and the output concatenates
/// its values at the points `0, 1, 2, …`, truncated to `length` bits.
///
/// Any `t` output symbols are independent and uniform over uniform seeds, so
/// any set of output bits drawn from at most `t` symbols is uniform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwisePad {
    field: FieldSpec,
    t: usize,
    length: usize,
}

impl TwisePad {
    /// Uses the smallest symbol width `w` with enough distinct points.
    pub fn new(t: usize, length: usize) -> Result<Self> {
        let w = (1..=MAX_DEGREE)
            .find(|&w| length.div_ceil(w as usize) <= 1usize << w)
            .ok_or_else(|| Error::SizeGuard(format!("no field has enough points for {length} bits")))?;
        TwisePad::with_symbol_bits(t, length, w)
    }

    pub fn with_symbol_bits(t: usize, length: usize, w: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::Invalid("independence order must be at least 1".into()));
        }
        if w == 0 || w > MAX_DEGREE {
            return Err(Error::SizeGuard(format!("symbol width {w} outside 1..={MAX_DEGREE}")));
        }
        if length.div_ceil(w as usize) > 1usize << w {
            return Err(Error::SizeGuard(format!(
                "{length} bits need more than the {} points of GF(2^{w})",
                1u64 << w
            )));
        }
        if t * w as usize > 64 {
            return Err(Error::SizeGuard(format!("seed of {} bits", t * w as usize)));
        }
        Ok(TwisePad {
            field: FieldSpec::with_default_modulus(w)?,
            t,
            length,
        })
    }

    pub fn order(&self) -> usize {
        self.t
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn symbol_bits(&self) -> usize {
        self.field.m() as usize
    }

    pub fn seed_bits(&self) -> usize {
        self.t * self.symbol_bits()
    }

    /// Output bits; bit `j` of symbol `i` becomes output bit `i·w + j`.
    pub fn expand(&self, seed: &BitVec) -> Result<BitVec> {
        if seed.len() != self.seed_bits() {
            return Err(Error::SizeMismatch(seed.len(), self.seed_bits()));
        }
        let w = self.symbol_bits();
        let coeffs: Vec<u32> = (0..self.t)
            .map(|j| (0..w).fold(0u32, |acc, b| acc | (seed.get(j * w + b) as u32) << b))
            .collect();
        let mut out = BitVec::zeros(self.length);
        for point in 0..self.length.div_ceil(w) {
            let x = point as u32;
            let value = coeffs.iter().rev().fold(0u32, |acc, &a| self.field.mul(acc, x) ^ a);
            for b in 0..w {
                let i = point * w + b;
                if i < self.length {
                    out.set(i, value >> b & 1 == 1);
                }
            }
        }
        Ok(out)
    }
}

/// Expands `seed` with the smallest symbol width that fits `length` bits.
pub fn twise_pad(seed: &BitVec, t: usize, length: usize) -> Result<BitVec> {
    TwisePad::new(t, length)?.expand(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All `k`-subsets of `0..n` in lexicographic order.
    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    /// Checks that every `k` output bits are uniform over all seeds.
    fn assert_k_wise_uniform(pad: &TwisePad, k: usize) {
        let seeds = 1u64 << pad.seed_bits();
        let outputs: Vec<BitVec> = (0..seeds)
            .map(|s| pad.expand(&BitVec::from_mask(pad.seed_bits(), s)).unwrap())
            .collect();
        for set in subsets(pad.length(), k) {
            let mut counts = vec![0u64; 1 << k];
            for out in &outputs {
                let v = set.iter().enumerate().fold(0usize, |acc, (j, &i)| acc | (out.get(i) as usize) << j);
                counts[v] += 1;
            }
            assert!(counts.iter().all(|&c| c == seeds >> k), "{set:?}: {counts:?}");
        }
    }

    #[test]
    fn single_bits_are_uniform_for_order_one() {
        assert_k_wise_uniform(&TwisePad::new(1, 6).unwrap(), 1);
    }

    #[test]
    fn pairs_and_triples_are_uniform() {
        let pad = TwisePad::new(2, 6).unwrap();
        assert_eq!((pad.symbol_bits(), pad.seed_bits()), (2, 4));
        assert_k_wise_uniform(&pad, 2);
        let pad = TwisePad::new(3, 9).unwrap();
        assert_k_wise_uniform(&pad, 3);
        let pad = TwisePad::with_symbol_bits(2, 16, 4).unwrap();
        assert_k_wise_uniform(&pad, 2);
    }

    #[test]
    fn expansion_is_deterministic() {
        let seed = BitVec::from_mask(9, 0b101101011);
        assert_eq!(twise_pad(&seed, 3, 9).unwrap(), twise_pad(&seed, 3, 9).unwrap());
    }

    #[test]
    fn parameter_overflow_is_reported() {
        assert!(TwisePad::new(0, 4).is_err());
        assert!(matches!(TwisePad::with_symbol_bits(2, 40, 2), Err(Error::SizeGuard(_))));
        assert!(matches!(TwisePad::with_symbol_bits(9, 16, 8), Err(Error::SizeGuard(_))));
    }
}
