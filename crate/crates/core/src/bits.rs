//! Packed bit vectors and Gaussian elimination over F2.

use smallvec::SmallVec;
use std::cmp::Ordering;
use std::fmt;

/// Fixed-length bit vector packed into 64-bit words.
///
/// Ordering is lexicographic with index 0 most significant, so `0110 < 1000`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: SmallVec::from_elem(0, word_count(len)),
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Low `len` bits of `mask`, bit `i` of the mask becoming entry `i`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        v
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        let mut v = BitVec::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => return None,
            }
        }
        Some(v)
    }

    /// Entry `i` of the result is bit `i` of the first word. Requires `len <= 64`.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        debug_assert_eq!(self.len, other.len);
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(other.words.iter()) {
            *a &= *b;
        }
        out
    }

    /// Inner product over F2.
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(other.words.iter()) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn last_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi * 64 + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    pub fn slice(&self, start: usize, end: usize) -> BitVec {
        let mut out = BitVec::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                out.set(i - start, true);
            }
        }
        out
    }

    /// Entries at the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(positions.len());
        for (j, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(j, true);
            }
        }
        out
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl Ord for BitVec {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.words.iter().zip(other.words.iter()) {
            let d = a ^ b;
            if d != 0 {
                let bit = d.trailing_zeros();
                return if (a >> bit) & 1 == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bit_string())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

/// Row-reduced echelon form of a set of rows.
///
/// Every pivot column holds a single 1 across all rows, and each pivot is the
/// first set bit of its row. Reducing a vector against this basis yields the
/// lexicographically smallest element of its coset.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: Vec<BitVec>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(rows: &[BitVec], ncols: usize) -> Echelon {
        let mut work: Vec<BitVec> = rows.to_vec();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..ncols {
            let Some(p) = (r..work.len()).find(|&i| work[i].get(col)) else {
                continue;
            };
            work.swap(r, p);
            let pivot_row = work[r].clone();
            for (i, row) in work.iter_mut().enumerate() {
                if i != r && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivots.push(col);
            r += 1;
            if r == work.len() {
                break;
            }
        }
        work.truncate(r);
        Echelon { rows: work, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut out = v.clone();
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            if out.get(p) {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }
}

pub fn rank(rows: &[BitVec], ncols: usize) -> usize {
    Echelon::new(rows, ncols).rank()
}

/// Basis of `{v : <row, v> = 0 for every row}`, one vector per free column.
pub fn kernel(rows: &[BitVec], ncols: usize) -> Vec<BitVec> {
    let ech = Echelon::new(rows, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = BitVec::zeros(ncols);
        v.set(free, true);
        for (row, &p) in ech.rows.iter().zip(ech.pivots.iter()) {
            if row.get(free) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Solves `A x = b` where `A` is given by its rows. Free variables are set to zero.
pub fn solve(rows: &[BitVec], ncols: usize, rhs: &BitVec) -> Option<BitVec> {
    debug_assert_eq!(rows.len(), rhs.len());
    let augmented: Vec<BitVec> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.concat(&BitVec::from_bools(&[rhs.get(i)])))
        .collect();
    let ech = Echelon::new(&augmented, ncols + 1);
    let mut x = BitVec::zeros(ncols);
    for (row, &p) in ech.rows.iter().zip(ech.pivots.iter()) {
        if p == ncols {
            return None;
        }
        if row.get(ncols) {
            x.set(p, true);
        }
    }
    Some(x)
}

/// Inverse of a square matrix given by rows, or `None` when singular.
pub fn inverse(rows: &[BitVec]) -> Option<Vec<BitVec>> {
    let n = rows.len();
    let augmented: Vec<BitVec> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            debug_assert_eq!(r.len(), n);
            let mut e = BitVec::zeros(n);
            e.set(i, true);
            r.concat(&e)
        })
        .collect();
    let ech = Echelon::new(&augmented, 2 * n);
    if ech.rank() < n || ech.pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(ech.rows.iter().map(|r| r.slice(n, 2 * n)).collect())
}

/// Indices of a maximal independent subset, chosen greedily in order.
pub fn independent_subset(rows: &[BitVec], ncols: usize) -> Vec<usize> {
    let mut chosen: Vec<BitVec> = Vec::new();
    let mut idx = Vec::new();
    let mut ech = Echelon::new(&[], ncols);
    for (i, r) in rows.iter().enumerate() {
        if !ech.contains(r) {
            chosen.push(r.clone());
            idx.push(i);
            ech = Echelon::new(&chosen, ncols);
        }
    }
    idx
}
