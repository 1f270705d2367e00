//! Arithmetic in GF(2^m) for m ≤ 16 with polynomial-basis representation.
//!
//! Bit `j` of an element is the coefficient of `x^j`.

use crate::bits::{self, BitVec};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

pub const MAX_DEGREE: u32 = 16;

/// Lowest-weight irreducible modulus per degree, ties broken by smallest value.
const DEFAULT_MODULI: [u32; 17] = [
    0, 0x2, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11b, 0x203, 0x409, 0x805, 0x1009, 0x201b, 0x4021,
    0x8003, 0x1002b,
];

fn degree(p: u32) -> u32 {
    31 - p.leading_zeros()
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let d = degree(p);
    for q in 2u32..(1 << (d / 2 + 1)) {
        if degree(q) <= d / 2 && poly_rem(p, q) == 0 {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    m: u32,
    modulus: u32,
}

impl FieldSpec {
    pub fn new(m: u32, modulus: u32) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::Field(format!("degree {m} outside 1..={MAX_DEGREE}")));
        }
        if modulus >> m != 1 {
            return Err(Error::Field(format!(
                "modulus {modulus:#x} does not have degree {m}"
            )));
        }
        if !is_irreducible(modulus) {
            return Err(Error::Field(format!("modulus {modulus:#x} is reducible")));
        }
        Ok(FieldSpec { m, modulus })
    }

    pub fn with_default_modulus(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::Field(format!("degree {m} outside 1..={MAX_DEGREE}")));
        }
        FieldSpec::new(m, DEFAULT_MODULI[m as usize])
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn order(self) -> u32 {
        1 << self.m
    }

    pub fn contains(self, a: u32) -> bool {
        a >> self.m == 0
    }

    pub fn element(self, value: u32) -> Result<FieldElement> {
        if !self.contains(value) {
            return Err(Error::Field(format!(
                "value {value:#x} is not an element of GF(2^{})",
                self.m
            )));
        }
        Ok(FieldElement { field: self, value })
    }

    #[inline]
    pub fn mul(self, mut a: u32, mut b: u32) -> u32 {
        let top = 1u32 << self.m;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.pow(a, u64::from(self.order()) - 2))
    }

    /// Absolute trace `a + a^2 + a^4 + ... + a^(2^(m-1))`, always 0 or 1.
    pub fn trace(self, a: u32) -> u32 {
        let mut acc = 0;
        let mut t = a;
        for _ in 0..self.m {
            acc ^= t;
            t = self.mul(t, t);
        }
        debug_assert!(acc <= 1);
        acc
    }

    /// Polynomial basis `1, x, ..., x^(m-1)`.
    pub fn polynomial_basis(self) -> Vec<u32> {
        (0..self.m).map(|j| 1 << j).collect()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m:{}, modulus:{:#x}", self.m, self.modulus)
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Parses `m:<int>, modulus:<hex>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Field(format!("expected `m:<int>, modulus:<hex>`, got `{s}`"));
        let (m_part, mod_part) = s.split_once(',').ok_or_else(bad)?;
        let m = m_part
            .trim()
            .strip_prefix("m:")
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(bad)?;
        let hex = mod_part
            .trim()
            .strip_prefix("modulus:")
            .map(str::trim)
            .ok_or_else(bad)?;
        let hex = hex.strip_prefix("0x").unwrap_or(hex);
        let modulus = u32::from_str_radix(hex, 16).map_err(|_| bad())?;
        FieldSpec::new(m, modulus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: FieldSpec,
    value: u32,
}

impl FieldElement {
    pub fn field(self) -> FieldSpec {
        self.field
    }

    pub fn value(self) -> u32 {
        self.value
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: FieldElement) -> Result<FieldElement> {
        same_field(self, other)?;
        Ok(FieldElement {
            field: self.field,
            value: self.value ^ other.value,
        })
    }
}

fn same_field(a: FieldElement, b: FieldElement) -> Result<()> {
    if a.field != b.field {
        return Err(Error::FieldMismatch);
    }
    Ok(())
}

pub fn gf_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    same_field(a, b)?;
    Ok(FieldElement {
        field: a.field,
        value: a.field.mul(a.value, b.value),
    })
}

pub fn gf_pow(a: FieldElement, e: u64) -> FieldElement {
    FieldElement {
        field: a.field,
        value: a.field.pow(a.value, e),
    }
}

pub fn trace(a: FieldElement) -> u32 {
    a.field.trace(a.value)
}

/// Trace-dual of `basis`: the unique `dual` with `tr(basis[i] * dual[j]) = [i == j]`.
pub fn dual_basis(field: FieldSpec, basis: &[u32]) -> Result<Vec<u32>> {
    let m = field.m as usize;
    if basis.len() != m || basis.iter().any(|&b| !field.contains(b)) {
        return Err(Error::Field(format!(
            "a basis of GF(2^{m}) needs {m} field elements"
        )));
    }
    let as_rows: Vec<BitVec> = basis.iter().map(|&b| BitVec::from_mask(m, b as u64)).collect();
    if bits::rank(&as_rows, m) < m {
        return Err(Error::Field("basis elements are linearly dependent".into()));
    }
    // gram[i][j] = tr(b_i b_j); dual_j = sum_l inv[j][l] b_l.
    let gram: Vec<BitVec> = basis
        .iter()
        .map(|&bi| {
            BitVec::from_bools(
                &basis
                    .iter()
                    .map(|&bj| field.trace(field.mul(bi, bj)) == 1)
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let inv = bits::inverse(&gram)
        .ok_or_else(|| Error::Field("trace form is degenerate on this basis".into()))?;
    Ok(inv
        .iter()
        .map(|row| row.iter_ones().fold(0, |acc, l| acc ^ basis[l]))
        .collect())
}

/// A basis together with its trace dual, used to flatten field vectors into bits.
///
/// `primal_coords(a) · dual_coords(b) = tr(a b)` over F2.
#[derive(Clone, Debug)]
pub struct DualPair {
    field: FieldSpec,
    primal: Vec<u32>,
    dual: Vec<u32>,
}

impl DualPair {
    pub fn new(field: FieldSpec, primal: Vec<u32>) -> Result<Self> {
        let dual = dual_basis(field, &primal)?;
        Ok(DualPair {
            field,
            primal,
            dual,
        })
    }

    pub fn polynomial(field: FieldSpec) -> Self {
        DualPair::new(field, field.polynomial_basis()).expect("polynomial basis is a basis")
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn primal(&self) -> &[u32] {
        &self.primal
    }

    pub fn dual(&self) -> &[u32] {
        &self.dual
    }

    /// Coordinates of `a` in the primal basis, bit `i` for `primal[i]`.
    pub fn primal_coords(&self, a: u32) -> u32 {
        self.dual
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &d)| acc | (self.field.trace(self.field.mul(a, d)) << i))
    }

    /// Coordinates of `b` in the dual basis, bit `i` for `dual[i]`.
    pub fn dual_coords(&self, b: u32) -> u32 {
        self.primal
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | (self.field.trace(self.field.mul(b, p)) << i))
    }

    pub fn from_primal_coords(&self, c: u32) -> u32 {
        (0..self.primal.len())
            .filter(|&i| c >> i & 1 == 1)
            .fold(0, |acc, i| acc ^ self.primal[i])
    }

    pub fn from_dual_coords(&self, c: u32) -> u32 {
        (0..self.dual.len())
            .filter(|&i| c >> i & 1 == 1)
            .fold(0, |acc, i| acc ^ self.dual[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_moduli_are_irreducible_and_lowest_weight() {
        for m in 1..=MAX_DEGREE {
            let p = DEFAULT_MODULI[m as usize];
            assert_eq!(degree(p), m);
            assert!(is_irreducible(p), "m={m}");
            let w = p.count_ones();
            for q in (1u32 << m)..p {
                if q.count_ones() <= w && is_irreducible(q) {
                    assert!(q.count_ones() == w && q > p, "m={m}: {q:#x} beats {p:#x}");
                }
            }
        }
    }

    #[test]
    fn gf4_multiplication_table() {
        let f = FieldSpec::new(2, 0b111).unwrap();
        let w = 0b10;
        assert_eq!(f.mul(w, w), 0b11);
        assert_eq!(f.pow(w, 3), 1);
        assert_eq!(f.trace(w), 1);
        assert_eq!(f.trace(1), 0);
        let expected = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(f.mul(a, b), expected[a as usize][b as usize]);
            }
        }
    }

    #[test]
    fn spec_line_round_trips() {
        for m in 1..=MAX_DEGREE {
            let f = FieldSpec::with_default_modulus(m).unwrap();
            let back: FieldSpec = f.to_string().parse().unwrap();
            assert_eq!(back, f);
        }
        assert!("m:3, modulus:0x9".parse::<FieldSpec>().is_err());
        assert!("m:4 modulus:0x13".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let a = FieldSpec::with_default_modulus(2).unwrap().element(1).unwrap();
        let b = FieldSpec::with_default_modulus(3).unwrap().element(1).unwrap();
        assert!(matches!(gf_mul(a, b), Err(Error::FieldMismatch)));
    }

    #[test]
    fn reducible_modulus_is_rejected() {
        assert!(FieldSpec::new(2, 0b101).is_err());
        assert!(FieldSpec::new(4, 0b10101).is_err());
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let f = FieldSpec::with_default_modulus(3).unwrap();
        assert!(dual_basis(f, &[1, 2, 3]).is_err());
    }

    fn field_and_pair() -> impl Strategy<Value = (FieldSpec, u32, u32, u32)> {
        (1u32..=10).prop_flat_map(|m| {
            let f = FieldSpec::with_default_modulus(m).unwrap();
            let q = f.order();
            (Just(f), 0..q, 0..q, 0..q)
        })
    }

    proptest! {
        #[test]
        fn field_axioms((f, a, b, c) in field_and_pair()) {
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            prop_assert_eq!(f.pow(a, u64::from(f.order())), a);
        }

        #[test]
        fn trace_is_linear_and_binary((f, a, b, _c) in field_and_pair()) {
            prop_assert!(f.trace(a) <= 1);
            prop_assert_eq!(f.trace(a ^ b), f.trace(a) ^ f.trace(b));
            prop_assert_eq!(f.trace(f.mul(a, a)), f.trace(a));
        }

        #[test]
        fn dual_pair_flattening_preserves_trace_form((f, a, b, _c) in field_and_pair()) {
            let pair = DualPair::polynomial(f);
            for (i, &p) in pair.primal().iter().enumerate() {
                for (j, &d) in pair.dual().iter().enumerate() {
                    prop_assert_eq!(f.trace(f.mul(p, d)), u32::from(i == j));
                }
            }
            let x = pair.primal_coords(a);
            let z = pair.dual_coords(b);
            prop_assert_eq!((x & z).count_ones() & 1, f.trace(f.mul(a, b)));
            prop_assert_eq!(pair.from_primal_coords(x), a);
            prop_assert_eq!(pair.from_dual_coords(z), b);
        }
    }
}
