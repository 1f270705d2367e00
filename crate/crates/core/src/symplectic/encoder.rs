use super::circuit::{Circuit, Gate};
use super::code::StabilizerCode;
use super::pauli::{pauli_mul, PauliOperator};
use crate::error::{Error, Result};

/// Which qubit becomes the pivot of each generator during elimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    #[default]
    Lowest,
    Highest,
}

/// Clifford circuit `U` with `U (|m⟩ ⊗ |0^r⟩)` in the code space for every
/// message `|m⟩` on the first `k` qubits.
///
/// The generators are reduced to `Z` on distinct pivot qubits by symplectic
/// Gaussian elimination, the pivots are swapped onto the ancilla positions
/// `k..n`, and the resulting circuit is inverted.
pub fn standard_form_encoder(code: &StabilizerCode, rule: PivotRule) -> Result<Circuit> {
    let n = code.n();
    let k = code.k();
    let r = code.r();
    let mut rows: Vec<PauliOperator> = code.generators().to_vec();
    let mut reduce = Circuit::new(n);
    let mut pivots: Vec<usize> = Vec::with_capacity(r);

    let apply = |g: Gate, rows: &mut Vec<PauliOperator>, reduce: &mut Circuit| -> Result<()> {
        reduce.push(g)?;
        for row in rows.iter_mut() {
            g.conjugate(row);
        }
        Ok(())
    };

    for i in 0..r {
        let support = rows[i].support();
        let q = match rule {
            PivotRule::Lowest => support.first(),
            PivotRule::Highest => support.last(),
        }
        .copied()
        .ok_or_else(|| Error::Invariant("generator reduced to the identity".into()))?;
        debug_assert!(!pivots.contains(&q));

        match (rows[i].x().get(q), rows[i].z().get(q)) {
            (false, true) => apply(Gate::H(q), &mut rows, &mut reduce)?,
            (true, true) => apply(Gate::S(q), &mut rows, &mut reduce)?,
            _ => {}
        }
        for j in rows[i].support() {
            if j != q && rows[i].x().get(j) {
                apply(Gate::Cnot(q, j), &mut rows, &mut reduce)?;
            }
        }
        for j in rows[i].support() {
            if j != q && rows[i].z().get(j) {
                apply(Gate::Cz(q, j), &mut rows, &mut reduce)?;
            }
        }
        if rows[i].z().get(q) {
            apply(Gate::S(q), &mut rows, &mut reduce)?;
        }
        apply(Gate::H(q), &mut rows, &mut reduce)?;
        if rows[i].phase() == 2 {
            apply(Gate::X(q), &mut rows, &mut reduce)?;
        }
        if rows[i].support() != [q] || rows[i].phase() != 0 || !rows[i].z().get(q) {
            return Err(Error::Invariant(format!("failed to reduce generator {i}")));
        }
        let pivot_row = rows[i].clone();
        for (j, row) in rows.iter_mut().enumerate() {
            if j != i && row.z().get(q) {
                *row = pauli_mul(row, &pivot_row)?;
            }
        }
        pivots.push(q);
    }

    // Move the pivot of row i onto ancilla position k + i.
    let mut position = pivots.clone();
    for i in 0..r {
        let target = k + i;
        let current = position[i];
        if current != target {
            for g in [
                Gate::Cnot(current, target),
                Gate::Cnot(target, current),
                Gate::Cnot(current, target),
            ] {
                apply(g, &mut rows, &mut reduce)?;
            }
            if let Some(other) = position.iter().position(|&p| p == target) {
                position[other] = current;
            }
            position[i] = target;
        }
    }
    for (i, row) in rows.iter().enumerate() {
        let expected = PauliOperator::single(n, k + i, 'Z')?;
        if *row != expected {
            return Err(Error::Invariant(format!("row {i} did not reach Z on ancilla {}", k + i)));
        }
    }
    Ok(reduce.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoder_maps_ancilla_z_into_stabilizer() {
        for gens in [
            vec!["XXXX", "ZZZZ"],
            vec!["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"],
            vec!["YYI", "ZZZ"],
            vec!["ZZI", "IZZ"],
        ] {
            let code = StabilizerCode::from_strings(&gens).unwrap();
            for rule in [PivotRule::Lowest, PivotRule::Highest] {
                let u = standard_form_encoder(&code, rule).unwrap();
                for a in 0..code.r() {
                    let z = PauliOperator::single(code.n(), code.k() + a, 'Z').unwrap();
                    let image = u.conjugate(&z).unwrap();
                    assert_eq!(code.stabilizer_element(&image), Some(image), "{gens:?}");
                }
            }
        }
    }

    #[test]
    fn encoder_is_deterministic() {
        let code = StabilizerCode::from_strings(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).unwrap();
        let a = standard_form_encoder(&code, PivotRule::Lowest).unwrap().to_string();
        let b = standard_form_encoder(&code, PivotRule::Lowest).unwrap().to_string();
        assert_eq!(a, b);
    }
}
