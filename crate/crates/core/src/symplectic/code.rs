use super::pauli::{commutes, pauli_mul, PauliOperator};
use crate::bits::{self, BitVec, Echelon};
use crate::error::{invalid, parse_err, Error, Result};
use std::fmt;
use std::str::FromStr;

/// Largest register for which brute-force sweeps over all Paulis are allowed.
pub const BRUTE_FORCE_QUBITS: usize = 12;

/// Stabilizer code given by independent, commuting Hermitian generators with sign +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    n: usize,
    generators: Vec<PauliOperator>,
}

impl StabilizerCode {
    pub fn new(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        for g in &generators {
            if g.n() != n {
                return Err(Error::SizeMismatch(n, g.n()));
            }
        }
        let gens: Vec<PauliOperator> = generators
            .into_iter()
            .map(|g| PauliOperator::hermitian(g.x().clone(), g.z().clone()).expect("same length"))
            .collect();
        if let Some((i, j)) = first_anticommuting_pair(&gens) {
            return Err(invalid(format!("generators {i} and {j} anticommute")));
        }
        if let Some(i) = first_dependent(&gens) {
            return Err(invalid(format!("generator {i} depends on earlier generators")));
        }
        Ok(StabilizerCode {
            n,
            generators: gens,
        })
    }

    /// Builds a code from letter strings such as `["XXXX", "ZZZZ"]`.
    pub fn from_strings(gens: &[&str]) -> Result<Self> {
        let ops = gens
            .iter()
            .map(|s| PauliOperator::from_symbols(s))
            .collect::<Result<Vec<_>>>()?;
        let n = ops.first().map_or(0, |g| g.n());
        StabilizerCode::new(n, ops)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.generators.len()
    }

    pub fn k(&self) -> usize {
        self.n - self.generators.len()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Bit `i` is the symplectic product of generator `i` with `e`.
    pub fn syndrome(&self, e: &PauliOperator) -> Result<BitVec> {
        if e.n() != self.n {
            return Err(Error::SizeMismatch(self.n, e.n()));
        }
        Ok(BitVec::from_bools(
            &self
                .generators
                .iter()
                .map(|g| !commutes(g, e))
                .collect::<Vec<_>>(),
        ))
    }

    pub fn in_normalizer(&self, e: &PauliOperator) -> bool {
        self.generators.iter().all(|g| commutes(g, e))
    }

    pub fn stabilizer_rows(&self) -> Vec<BitVec> {
        self.generators.iter().map(|g| g.symplectic_vector()).collect()
    }

    /// Whether `e` lies in the stabilizer group up to phase.
    pub fn in_stabilizer(&self, e: &PauliOperator) -> bool {
        Echelon::new(&self.stabilizer_rows(), 2 * self.n).contains(&e.symplectic_vector())
    }

    /// The signed stabilizer group element with the same `(x | z)` bits as `e`.
    pub fn stabilizer_element(&self, e: &PauliOperator) -> Option<PauliOperator> {
        let cols = transpose(&self.stabilizer_rows(), 2 * self.n);
        let coeffs = bits::solve(&cols, self.r(), &e.symplectic_vector())?;
        let mut acc = PauliOperator::identity(self.n);
        for i in coeffs.iter_ones() {
            acc = pauli_mul(&acc, &self.generators[i]).expect("same size");
        }
        Some(acc)
    }

    /// Whether `p` and `q` differ by a stabilizer element, ignoring phase.
    pub fn is_logically_equivalent(&self, p: &PauliOperator, q: &PauliOperator) -> Result<bool> {
        if p.n() != self.n || q.n() != self.n {
            return Err(Error::SizeMismatch(self.n, p.n().max(q.n())));
        }
        let diff = p.symplectic_vector().xor(&q.symplectic_vector());
        Ok(bits::solve(&transpose(&self.stabilizer_rows(), 2 * self.n), self.r(), &diff).is_some())
    }

    /// Basis of the normalizer as symplectic vectors: the `2n - r` dimensional
    /// kernel of the symplectic form against the generators.
    pub fn normalizer_basis(&self) -> Vec<PauliOperator> {
        let twisted: Vec<BitVec> = self
            .generators
            .iter()
            .map(|g| g.z().concat(g.x()))
            .collect();
        bits::kernel(&twisted, 2 * self.n)
            .iter()
            .map(PauliOperator::from_symplectic)
            .collect()
    }

    /// `2k` normalizer elements that extend the generators to a normalizer basis,
    /// picked greedily from the normalizer basis.
    pub fn logical_representatives(&self) -> Vec<PauliOperator> {
        let mut rows = self.stabilizer_rows();
        let mut ech = Echelon::new(&rows, 2 * self.n);
        let mut reps = Vec::new();
        for p in self.normalizer_basis() {
            let v = p.symplectic_vector();
            if !ech.contains(&v) {
                rows.push(v);
                ech = Echelon::new(&rows, 2 * self.n);
                reps.push(p);
            }
        }
        reps
    }

    /// All `2^r` stabilizer group elements with their exact signs.
    pub fn stabilizer_group(&self) -> Result<Vec<PauliOperator>> {
        if self.r() > 2 * BRUTE_FORCE_QUBITS {
            return Err(Error::SizeGuard(format!("stabilizer group of {} generators", self.r())));
        }
        let mut group = vec![PauliOperator::identity(self.n)];
        for g in &self.generators {
            let extra = group
                .iter()
                .map(|h| pauli_mul(h, g))
                .collect::<Result<Vec<_>>>()?;
            group.extend(extra);
        }
        Ok(group)
    }

    /// Smallest weight of a non-identity normalizer element, stabilizers included.
    pub fn pure_distance(&self) -> Result<usize> {
        if self.n > BRUTE_FORCE_QUBITS {
            return Err(Error::SizeGuard(format!("pure distance on {} qubits", self.n)));
        }
        let n = self.n;
        let gens: Vec<(u64, u64)> = self
            .generators
            .iter()
            .map(|g| (g.x().to_mask(), g.z().to_mask()))
            .collect();
        let mut best = usize::MAX;
        for x in 0u64..(1 << n) {
            for z in 0u64..(1 << n) {
                if x == 0 && z == 0 {
                    continue;
                }
                let w = (x | z).count_ones() as usize;
                if w >= best {
                    continue;
                }
                if gens
                    .iter()
                    .all(|&(gx, gz)| super::pauli::mask_product(x, z, gx, gz) == 0)
                {
                    best = w;
                }
            }
        }
        Ok(best)
    }

    /// Smallest weight of a normalizer element outside the stabilizer group.
    pub fn distance(&self) -> Result<usize> {
        if self.n > BRUTE_FORCE_QUBITS {
            return Err(Error::SizeGuard(format!("distance on {} qubits", self.n)));
        }
        let ech = Echelon::new(&self.stabilizer_rows(), 2 * self.n);
        let mut best = usize::MAX;
        for x in 0u64..(1 << self.n) {
            for z in 0u64..(1 << self.n) {
                let p = PauliOperator::from_masks(self.n, x, z);
                let w = p.weight();
                if w == 0 || w >= best {
                    continue;
                }
                if self.in_normalizer(&p) && !ech.contains(&p.symplectic_vector()) {
                    best = w;
                }
            }
        }
        Ok(best)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n={} k={}\n", self.n, self.k());
        for g in &self.generators {
            s.push_str(&g.letters());
            s.push('\n');
        }
        s
    }

    /// Parses the text format: a header `n=<int> k=<int>`, then one generator per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut gens: Vec<(usize, PauliOperator)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((n, _)) = header else {
                header = Some(parse_header(line).ok_or_else(|| {
                    parse_err(line_no, format!("expected header `n=<int> k=<int>`, got `{line}`"))
                })?);
                continue;
            };
            let p = PauliOperator::from_symbols(line)
                .map_err(|_| parse_err(line_no, format!("invalid generator `{line}`")))?;
            if p.n() != n {
                return Err(parse_err(
                    line_no,
                    format!("generator has {} qubits, header says {n}", p.n()),
                ));
            }
            if p.relative_phase() != 0 {
                return Err(parse_err(line_no, "generators carry sign +1"));
            }
            for (other_line, q) in &gens {
                if !commutes(q, &p) {
                    return Err(parse_err(
                        line_no,
                        format!("generator anticommutes with line {other_line}"),
                    ));
                }
            }
            let rows: Vec<BitVec> = gens.iter().map(|(_, g)| g.symplectic_vector()).collect();
            if Echelon::new(&rows, 2 * n).contains(&p.symplectic_vector()) {
                return Err(parse_err(line_no, "generator depends on earlier generators"));
            }
            gens.push((line_no, p));
        }
        let (n, k) = header.ok_or_else(|| parse_err(1, "missing header"))?;
        if gens.len() + k != n {
            return Err(parse_err(
                text.lines().count().max(1),
                format!("{} generators on {n} qubits encode {} qubits, header says {k}", gens.len(), n - gens.len().min(n)),
            ));
        }
        StabilizerCode::new(n, gens.into_iter().map(|(_, g)| g).collect())
    }
}

impl fmt::Display for StabilizerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for StabilizerCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StabilizerCode::parse(s)
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut n = None;
    let mut k = None;
    for tok in line.split_whitespace() {
        let (key, value) = tok.split_once('=')?;
        let value = value.parse::<usize>().ok()?;
        match key {
            "n" => n = Some(value),
            "k" => k = Some(value),
            _ => return None,
        }
    }
    Some((n?, k?))
}

fn first_anticommuting_pair(gens: &[PauliOperator]) -> Option<(usize, usize)> {
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            if !commutes(&gens[i], &gens[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

fn first_dependent(gens: &[PauliOperator]) -> Option<usize> {
    let n2 = gens.first().map_or(0, |g| 2 * g.n());
    let rows: Vec<BitVec> = gens.iter().map(|g| g.symplectic_vector()).collect();
    let keep = bits::independent_subset(&rows, n2);
    (0..gens.len()).find(|i| !keep.contains(i))
}

/// Rows of the transpose of a matrix given by rows with `ncols` columns.
pub(crate) fn transpose(rows: &[BitVec], ncols: usize) -> Vec<BitVec> {
    (0..ncols)
        .map(|c| BitVec::from_bools(&rows.iter().map(|r| r.get(c)).collect::<Vec<_>>()))
        .collect()
}

/// CSS code from parity-check matrices with `ker(h2)^⊥ ⊆ ker(h1)`.
///
/// X-type generators span the row space of `h2`, Z-type generators the row space of `h1`.
pub fn css_from_classical(h1: &[BitVec], h2: &[BitVec], n: usize) -> Result<StabilizerCode> {
    for r in h1.iter().chain(h2) {
        if r.len() != n {
            return Err(Error::SizeMismatch(n, r.len()));
        }
    }
    for a in h2 {
        for b in h1 {
            if a.dot(b) {
                return Err(invalid("dual of the second code is not contained in the first"));
            }
        }
    }
    let zero = BitVec::zeros(n);
    let mut gens = Vec::new();
    for &i in &bits::independent_subset(h2, n) {
        gens.push(PauliOperator::hermitian(h2[i].clone(), zero.clone())?);
    }
    for &i in &bits::independent_subset(h1, n) {
        gens.push(PauliOperator::hermitian(zero.clone(), h1[i].clone())?);
    }
    StabilizerCode::new(n, gens)
}
