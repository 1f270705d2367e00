use crate::bits::BitVec;
use crate::error::{parse_err, Error, Result};
use std::fmt;

/// `i^phase · X^x Z^z` on `n` qubits, with `X^x Z^z` the tensor product of
/// `X^{x_j} Z^{z_j}` over qubits.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PauliOperator {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    pub fn new(x: BitVec, z: BitVec, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::SizeMismatch(x.len(), z.len()));
        }
        Ok(PauliOperator {
            x,
            z,
            phase: phase % 4,
        })
    }

    /// The Hermitian operator with sign +1 on bits `(x, z)`: each `(1, 1)`
    /// qubit carries a `Y`.
    pub fn hermitian(x: BitVec, z: BitVec) -> Result<Self> {
        let y = x.and(&z).count_ones();
        PauliOperator::new(x, z, (y % 4) as u8)
    }

    /// Hermitian operator from a symplectic vector `(x | z)` of length `2n`.
    pub fn from_symplectic(v: &BitVec) -> Self {
        let n = v.len() / 2;
        PauliOperator::hermitian(v.slice(0, n), v.slice(n, 2 * n)).expect("equal halves")
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        PauliOperator::hermitian(BitVec::from_mask(n, x), BitVec::from_mask(n, z))
            .expect("equal lengths")
    }

    /// One-qubit Pauli `letter` on qubit `q` of `n`.
    pub fn single(n: usize, q: usize, letter: char) -> Result<Self> {
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        match letter {
            'I' => {}
            'X' => x.set(q, true),
            'Z' => z.set(q, true),
            'Y' => {
                x.set(q, true);
                z.set(q, true);
            }
            _ => return Err(Error::Invalid(format!("unknown Pauli letter `{letter}`"))),
        }
        PauliOperator::hermitian(x, z)
    }

    /// Parses letters over `IXYZ`, optionally prefixed by `+`, `-`, `i`, `-i` or `+i`.
    pub fn from_symbols(s: &str) -> Result<Self> {
        let s = s.trim();
        let (extra, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for (q, c) in body.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x.set(q, true),
                'Z' => z.set(q, true),
                'Y' => {
                    x.set(q, true);
                    z.set(q, true);
                }
                _ => return Err(parse_err(1, format!("unknown Pauli letter `{c}`"))),
            }
        }
        let mut p = PauliOperator::hermitian(x, z)?;
        p.phase = (p.phase + extra) % 4;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &BitVec {
        &self.x
    }

    pub fn z(&self) -> &BitVec {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Phase relative to the Hermitian form: the operator equals `i^k` times
    /// a tensor product of `I, X, Y, Z`.
    pub fn relative_phase(&self) -> u8 {
        let y = (self.x.and(&self.z).count_ones() % 4) as u8;
        (self.phase + 4 - y) % 4
    }

    pub fn is_hermitian(&self) -> bool {
        self.relative_phase().is_multiple_of(2)
    }

    pub fn symplectic_vector(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .collect()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    pub fn letters(&self) -> String {
        (0..self.n()).map(|q| self.letter(q)).collect()
    }

    pub fn adjoint(&self) -> Self {
        // (X^x Z^z)^† = Z^z X^x = (-1)^{x·z} X^x Z^z
        let xz = u8::from(self.x.dot(&self.z));
        PauliOperator {
            x: self.x.clone(),
            z: self.z.clone(),
            phase: (4 - self.phase + 2 * xz) % 4,
        }
    }

    /// Restriction to the listed qubits, keeping the Hermitian sign convention.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        PauliOperator::hermitian(self.x.select(qubits), self.z.select(qubits)).expect("same length")
    }

    /// Embeds into `n` qubits, placing qubit `j` of `self` at `positions[j]`.
    pub fn embed(&self, n: usize, positions: &[usize]) -> Self {
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for (j, &p) in positions.iter().enumerate() {
            x.set(p, self.x.get(j));
            z.set(p, self.z.get(j));
        }
        let y_before = (self.x.and(&self.z).count_ones() % 4) as u8;
        let y_after = (x.and(&z).count_ones() % 4) as u8;
        PauliOperator {
            x,
            z,
            phase: (self.phase + 4 + y_after - y_before) % 4,
        }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOperator) -> Self {
        PauliOperator {
            x: self.x.concat(&other.x),
            z: self.z.concat(&other.z),
            phase: (self.phase + other.phase) % 4,
        }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut BitVec, &mut BitVec, &mut u8) {
        (&mut self.x, &mut self.z, &mut self.phase)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.relative_phase() as usize];
        write!(f, "{prefix}{}", self.letters())
    }
}

/// 0 when the operators commute, 1 when they anticommute.
pub fn symplectic_product(p: &PauliOperator, q: &PauliOperator) -> Result<u8> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch(p.n(), q.n()));
    }
    Ok(u8::from(p.x.dot(&q.z) ^ q.x.dot(&p.z)))
}

pub fn commutes(p: &PauliOperator, q: &PauliOperator) -> bool {
    p.x.dot(&q.z) == q.x.dot(&p.z)
}

/// Product `P·Q` with exact phase.
pub fn pauli_mul(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch(p.n(), q.n()));
    }
    // X^a Z^b X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}
    let swap = u8::from(q.x.dot(&p.z));
    Ok(PauliOperator {
        x: p.x.xor(&q.x),
        z: p.z.xor(&q.z),
        phase: (p.phase + q.phase + 2 * swap) % 4,
    })
}

/// Symplectic product on `(x, z)` masks for registers of at most 64 qubits.
#[inline]
pub fn mask_product(x1: u64, z1: u64, x2: u64, z2: u64) -> u32 {
    ((x1 & z2).count_ones() ^ (x2 & z1).count_ones()) & 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip_with_signs() {
        for s in ["XZIIX", "-YY", "iXZ", "-iZ", "IIII"] {
            let p = PauliOperator::from_symbols(s).unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!(PauliOperator::from_symbols("XQ").is_err());
    }

    #[test]
    fn single_qubit_products() {
        let x = PauliOperator::from_symbols("X").unwrap();
        let y = PauliOperator::from_symbols("Y").unwrap();
        let z = PauliOperator::from_symbols("Z").unwrap();
        assert_eq!(pauli_mul(&x, &y).unwrap().to_string(), "iZ");
        assert_eq!(pauli_mul(&y, &x).unwrap().to_string(), "-iZ");
        assert_eq!(pauli_mul(&z, &x).unwrap().to_string(), "iY");
        assert_eq!(pauli_mul(&y, &y).unwrap().to_string(), "I");
        assert_eq!(symplectic_product(&x, &z).unwrap(), 1);
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let a = PauliOperator::identity(2);
        let b = PauliOperator::identity(3);
        assert!(matches!(pauli_mul(&a, &b), Err(Error::SizeMismatch(2, 3))));
        assert!(symplectic_product(&a, &b).is_err());
    }

    #[test]
    fn adjoint_inverts() {
        let p = PauliOperator::from_symbols("iXYZ").unwrap();
        let prod = pauli_mul(&p, &p.adjoint()).unwrap();
        assert!(prod.is_identity_up_to_phase());
        assert_eq!(prod.phase(), 0);
    }
}
