use super::pauli::PauliOperator;
use crate::error::{parse_err, Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
}

impl Gate {
    pub fn qubits(self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => vec![q],
            Gate::Cnot(a, b) | Gate::Cz(a, b) => vec![a, b],
        }
    }

    /// Gates whose product is the inverse of `self`, in application order.
    pub fn inverse(self) -> Vec<Gate> {
        match self {
            Gate::S(q) => vec![Gate::Z(q), Gate::S(q)],
            g => vec![g],
        }
    }

    /// Replaces `p` by `G p G†`, tracking the phase exactly.
    pub fn conjugate(self, p: &mut PauliOperator) {
        let (x, z, phase) = p.parts_mut();
        match self {
            Gate::H(q) => {
                let (a, b) = (x.get(q), z.get(q));
                x.set(q, b);
                z.set(q, a);
                if a && b {
                    *phase = (*phase + 2) % 4;
                }
            }
            Gate::S(q) => {
                if x.get(q) {
                    z.flip(q);
                    *phase = (*phase + 1) % 4;
                }
            }
            Gate::X(q) => {
                if z.get(q) {
                    *phase = (*phase + 2) % 4;
                }
            }
            Gate::Z(q) => {
                if x.get(q) {
                    *phase = (*phase + 2) % 4;
                }
            }
            Gate::Cnot(c, t) => {
                if x.get(c) {
                    x.flip(t);
                }
                if z.get(t) {
                    z.flip(c);
                }
            }
            Gate::Cz(a, b) => {
                let (xa, xb) = (x.get(a), x.get(b));
                if xb {
                    z.flip(a);
                }
                if xa {
                    z.flip(b);
                }
                if xa && xb {
                    *phase = (*phase + 2) % 4;
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::Cnot(a, b) => write!(f, "CNOT {a} {b}"),
            Gate::Cz(a, b) => write!(f, "CZ {a} {b}"),
        }
    }
}

/// Clifford circuit; gates are applied in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit {
            n,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        let qs = g.qubits();
        if qs.iter().any(|&q| q >= self.n) {
            return Err(Error::Invalid(format!("gate `{g}` outside {} qubits", self.n)));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::Invalid(format!("gate `{g}` repeats a qubit")));
        }
        self.gates.push(g);
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n: self.n,
            gates: self.gates.iter().rev().flat_map(|g| g.inverse()).collect(),
        }
    }

    /// `U p U†` where `U` is the whole circuit.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.n() != self.n {
            return Err(Error::SizeMismatch(self.n, p.n()));
        }
        let mut out = p.clone();
        for g in &self.gates {
            g.conjugate(&mut out);
        }
        Ok(out)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in s.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let nums = tokens[1..]
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| parse_err(line_no, format!("bad operand in `{line}`")))?;
            let Some(c) = circuit.as_mut() else {
                if tokens[0] != "qubits" || nums.len() != 1 {
                    return Err(parse_err(line_no, "expected header `qubits <n>`"));
                }
                circuit = Some(Circuit::new(nums[0]));
                continue;
            };
            let gate = match (tokens[0], nums.as_slice()) {
                ("H", [q]) => Gate::H(*q),
                ("S", [q]) => Gate::S(*q),
                ("X", [q]) => Gate::X(*q),
                ("Z", [q]) => Gate::Z(*q),
                ("CNOT", [a, b]) => Gate::Cnot(*a, *b),
                ("CZ", [a, b]) => Gate::Cz(*a, *b),
                _ => return Err(parse_err(line_no, format!("unknown gate `{line}`"))),
            };
            c.push(gate).map_err(|e| parse_err(line_no, e.to_string()))?;
        }
        circuit.ok_or_else(|| parse_err(1, "empty circuit"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conj(g: Gate, s: &str) -> String {
        let mut p = PauliOperator::from_symbols(s).unwrap();
        g.conjugate(&mut p);
        p.to_string()
    }

    #[test]
    fn single_qubit_conjugation_rules() {
        assert_eq!(conj(Gate::H(0), "X"), "Z");
        assert_eq!(conj(Gate::H(0), "Y"), "-Y");
        assert_eq!(conj(Gate::S(0), "X"), "Y");
        assert_eq!(conj(Gate::S(0), "Y"), "-X");
        assert_eq!(conj(Gate::X(0), "Z"), "-Z");
        assert_eq!(conj(Gate::Z(0), "Y"), "-Y");
    }

    #[test]
    fn two_qubit_conjugation_rules() {
        assert_eq!(conj(Gate::Cnot(0, 1), "XI"), "XX");
        assert_eq!(conj(Gate::Cnot(0, 1), "IZ"), "ZZ");
        assert_eq!(conj(Gate::Cnot(0, 1), "YI"), "YX");
        assert_eq!(conj(Gate::Cnot(0, 1), "YY"), "-XZ");
        assert_eq!(conj(Gate::Cz(0, 1), "XI"), "XZ");
        assert_eq!(conj(Gate::Cz(0, 1), "XX"), "YY");
    }

    #[test]
    fn inverse_undoes_conjugation() {
        let c = Circuit::from_gates(
            3,
            vec![Gate::H(0), Gate::S(1), Gate::Cnot(0, 2), Gate::Cz(1, 2), Gate::X(2)],
        )
        .unwrap();
        let p = PauliOperator::from_symbols("XYZ").unwrap();
        let q = c.conjugate(&p).unwrap();
        assert_eq!(c.inverse().conjugate(&q).unwrap(), p);
    }

    #[test]
    fn text_round_trip() {
        let c = Circuit::from_gates(2, vec![Gate::H(0), Gate::Cnot(0, 1), Gate::S(1)]).unwrap();
        let back: Circuit = c.to_string().parse().unwrap();
        assert_eq!(back, c);
        let err = "qubits 2\nH 0\nCNOT 0 5\n".parse::<Circuit>().unwrap_err();
        assert!(err.to_string().starts_with("line 3"));
    }
}
