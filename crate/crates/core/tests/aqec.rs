use pmdkit_core::aqec::*;
use pmdkit_core::bits::BitVec;
use pmdkit_core::densesim::{c, Branch, DenseState, Matrix};
use pmdkit_core::pmd::build_pmd;
use pmdkit_core::ptc::PtcFamily;
use pmdkit_core::qlde::{erasure_list_decode, ErasurePattern};
use pmdkit_core::symplectic::{pauli_mul, PauliOperator, StabilizerCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// PMD(2, 1) inside a [[6, 3]] code.
fn small_code() -> ComposedCode {
    let pmd = build_pmd(PtcFamily::new(2, 1).unwrap()).unwrap();
    let outer = StabilizerCode::from_strings(&["XXXXXX", "ZZZZZZ", "XXYYZZ"]).unwrap();
    compose(pmd, outer).unwrap()
}

/// PMD(4, 2) inside the [[8, 6, 2]] code.
fn main_code() -> ComposedCode {
    let pmd = build_pmd(PtcFamily::new(4, 2).unwrap()).unwrap();
    let outer = StabilizerCode::from_strings(&["XXXXXXXX", "ZZZZZZZZ"]).unwrap();
    compose(pmd, outer).unwrap()
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DenseState {
    let amps = (0..1 << n)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut s = DenseState::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

#[test]
fn zero_error_pipeline_is_exact() {
    for code in [small_code(), main_code()] {
        let adv = ErasureAdversary::identity(code.n());
        let report = erasure_harness(&code, &adv).unwrap();
        assert!(report.fidelity >= 1.0 - 1e-9, "{report:?}");
        assert_eq!(report.list_size, 1);
        assert_eq!(report.branches, 1);
        assert!(report.pass);
        assert!(direct_fidelity(&code, &adv).unwrap() >= 1.0 - 1e-9);
    }
}

#[test]
fn fast_harness_matches_direct_state_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let small = small_code();
    let mut cases = vec![
        ErasureAdversary::fixed_erasure(6, vec![2]).unwrap(),
        ErasureAdversary::fixed_erasure(6, vec![0, 5]).unwrap(),
    ];
    for _ in 0..3 {
        cases.push(ErasureAdversary::random_adaptive(6, &mut rng).unwrap());
        cases.push(ErasureAdversary::random_non_adaptive(6, 2, 2, &mut rng).unwrap());
    }
    for adv in &cases {
        let fast = erasure_harness(&small, adv).unwrap();
        let direct = direct_fidelity(&small, adv).unwrap();
        assert!((fast.fidelity - direct).abs() < 1e-9, "{} vs {direct}", fast.fidelity);
        assert!((fast.weight - 1.0).abs() < 1e-9);
    }
    let main = main_code();
    let adv = ErasureAdversary::random_adaptive(8, &mut rng).unwrap();
    let fast = erasure_harness(&main, &adv).unwrap();
    let direct = direct_fidelity(&main, &adv).unwrap();
    assert!((fast.fidelity - direct).abs() < 1e-9, "{} vs {direct}", fast.fidelity);
}

/// `Tr_q(ρ) ⊗ I/2` with `q` put back in place, by explicit index loops.
fn erase_by_partial_trace(rho: &Matrix, n: usize, q: usize) -> Matrix {
    let dim = 1usize << n;
    let bit = 1usize << (n - 1 - q);
    Matrix::from_fn(dim, dim, |i, j| {
        if i & bit != j & bit {
            return c(0.0, 0.0);
        }
        let (i0, j0) = (i & !bit, j & !bit);
        (rho[(i0, j0)] + rho[(i0 | bit, j0 | bit)]) * c(0.5, 0.0)
    })
}

#[test]
fn fixed_erasure_matches_partial_trace() {
    let code = small_code();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let psi = code.encode(&random_state(1, &mut rng)).unwrap();
    let rho = psi.to_matrix() * psi.to_matrix().adjoint();
    for q in [0, 3] {
        let adv = ErasureAdversary::fixed_erasure(6, vec![q]).unwrap();
        let out = apply_adversary(&[Branch { weight: 1.0, state: psi.clone() }], &adv).unwrap();
        let mut mixed = Matrix::zeros(64, 64);
        for b in &out {
            assert_eq!(b.erased.erased(), &[q]);
            let v = b.state.to_matrix();
            mixed += &v * v.adjoint() * c(b.weight, 0.0);
        }
        assert!((mixed - erase_by_partial_trace(&rho, 6, q)).norm() < 1e-12);
    }
}

#[test]
fn identity_and_adaptive_tags() {
    let code = small_code();
    let psi = code.encode(&DenseState::basis(1, 0).unwrap()).unwrap();
    let start = [Branch { weight: 1.0, state: psi.clone() }];
    let out = apply_adversary(&start, &ErasureAdversary::identity(6)).unwrap();
    assert_eq!(out.len(), 1);
    assert!(out[0].erased.is_empty());
    assert!(out[0].state.distance(&psi) < 1e-12);

    let h = Matrix::identity(2, 2) * c(0.5f64.sqrt(), 0.0);
    let adv = ErasureAdversary::new(6, 1, AdversaryMode::Adaptive, vec![(vec![1], h.clone()), (vec![4], h)]).unwrap();
    let tags: Vec<Vec<usize>> = apply_adversary(&start, &adv)
        .unwrap()
        .iter()
        .map(|b| b.erased.erased().to_vec())
        .collect();
    assert!(tags.contains(&vec![1]) && tags.contains(&vec![4]));
}

#[test]
fn single_erasures_are_corrected_exactly() {
    // The outer code has distance 2, so one erasure leaves a single candidate.
    let code = main_code();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..4 {
        let adv = ErasureAdversary::random_non_adaptive(8, 1, 3, &mut rng).unwrap();
        let report = erasure_harness(&code, &adv).unwrap();
        assert_eq!(report.list_size, 1);
        assert!(report.fidelity >= 1.0 - 1e-9, "{report:?}");
    }
}

/// `|φ⟩ ⊗ |0…0⟩ ⊗ |0^i 1^{L-i}⟩` on `[code register | flags]`.
fn accepted_at(phi: &DenseState, n: usize, l: usize, i: usize) -> DenseState {
    let k = phi.n();
    let flags = DenseState::basis(l, (1 << (l - i)) - 1).unwrap();
    phi.extend_zero(n - k).unwrap().tensor(&flags).unwrap()
}

struct Instance {
    code: ComposedCode,
    erased: Vec<usize>,
}

fn instances() -> Vec<Instance> {
    vec![
        Instance { code: small_code(), erased: vec![1] },
        Instance { code: small_code(), erased: vec![0, 4] },
        Instance { code: main_code(), erased: vec![0, 1] },
        Instance { code: main_code(), erased: vec![2, 7] },
    ]
}

#[test]
fn single_error_recovery_stays_within_two_l_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for inst in instances() {
        let code = &inst.code;
        let n = code.n();
        let eps = code.epsilon().unwrap();
        let stabilizers = code.outer().stabilizer_group().unwrap();
        let pat = ErasurePattern::new(n, inst.erased.clone()).unwrap();
        let r = code.outer().r();
        for s in 0..1u64 << r {
            let list = erasure_list_decode(code.outer(), &pat, &BitVec::from_mask(r, s)).unwrap();
            if list.is_empty() {
                continue;
            }
            let l = list.len();
            let phi = random_state(code.message_qubits(), &mut rng);
            let enc = code.encode(&phi).unwrap();
            let mut auxes: Vec<DenseState> = Vec::new();
            for (i, e_i) in list.entries().iter().enumerate() {
                let g = &stabilizers[rng.random_range(0..stabilizers.len())];
                let e = pauli_mul(e_i, g).unwrap();
                let mut hit = enc.clone();
                hit.apply_pauli(&e).unwrap();
                // Phase picked up by E_i† E on the code space.
                let mut back = hit.clone();
                back.apply_pauli(&e_i.adjoint()).unwrap();
                let phase = enc.inner(&back);
                assert!((phase.norm() - 1.0).abs() < 1e-10);

                let mut out = hit.insert_zero(n, l).unwrap();
                apply_cascade(code, list.entries(), &mut out, n).unwrap();
                let mut ideal = accepted_at(&phi, n, l, i);
                ideal.scale(phase);
                let dev = out.distance(&ideal);
                assert!(dev <= 2.0 * l as f64 * eps + 1e-9, "L={l} i={i} deviation {dev}");
                if l == 1 {
                    assert!(dev < 1e-9);
                }
                auxes.push(ideal);
            }
            for a in 0..l {
                for b in 0..a {
                    assert!(auxes[a].inner(&auxes[b]).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn superposed_errors_stay_within_the_trace_distance_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for inst in instances() {
        let code = &inst.code;
        let n = code.n();
        let eps = code.epsilon().unwrap();
        let pat = ErasurePattern::new(n, inst.erased.clone()).unwrap();
        let r = code.outer().r();
        for s in 0..1u64 << r {
            let list = erasure_list_decode(code.outer(), &pat, &BitVec::from_mask(r, s)).unwrap();
            if list.is_empty() {
                continue;
            }
            let l = list.len();
            let phi = random_state(code.message_qubits(), &mut rng);
            let enc = code.encode(&phi).unwrap();
            let alpha: Vec<_> = (0..l)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let mut input = DenseState::from_amplitudes(n, vec![c(0.0, 0.0); 1 << n]).unwrap();
            let mut ideal = DenseState::from_amplitudes(n + l, vec![c(0.0, 0.0); 1 << (n + l)]).unwrap();
            for (i, e) in list.entries().iter().enumerate() {
                let mut hit = enc.clone();
                hit.apply_pauli(e).unwrap();
                input.add_scaled(alpha[i], &hit);
                ideal.add_scaled(alpha[i], &accepted_at(&phi, n, l, i));
            }
            input.normalize();
            ideal.normalize();
            let mut out = input.insert_zero(n, l).unwrap();
            apply_cascade(code, list.entries(), &mut out, n).unwrap();
            let overlap = ideal.inner(&out).norm_sqr().min(1.0);
            let trace_distance = 2.0 * (1.0 - overlap).sqrt();
            let bound = 3.0 * eps.sqrt() * (l as f64).powf(0.75);
            assert!(trace_distance <= bound + 1e-9, "L={l}: {trace_distance} > {bound}");
        }
    }
}

#[test]
fn seeded_adversaries_meet_the_fidelity_bound() {
    let code = main_code();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let adv = ErasureAdversary::random_adaptive(8, &mut rng).unwrap();
        let report = erasure_harness(&code, &adv).unwrap();
        assert!((report.weight - 1.0).abs() < 1e-9, "seed {seed}: {report:?}");
        assert!(report.pass, "seed {seed}: {report:?}");
        assert!(report.fidelity <= 1.0 + 1e-9);
        assert_eq!(report.bound, fidelity_bound(report.epsilon, report.list_size));
    }
}

#[test]
fn dense_cascade_agrees_with_state_path() {
    let code = small_code();
    let pat = ErasurePattern::new(6, vec![3]).unwrap();
    let list = erasure_list_decode(code.outer(), &pat, &BitVec::from_mask(3, 0b011)).unwrap();
    let entries: Vec<PauliOperator> = list.entries().to_vec();
    let u = cascade_unitary(&code, &entries).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let v = random_state(6 + entries.len(), &mut rng);
    let mut w = v.clone();
    apply_cascade(&code, &entries, &mut w, 6).unwrap();
    assert!((u * v.to_matrix() - w.to_matrix()).norm() < 1e-12);
}
