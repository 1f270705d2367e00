use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pmdkit_core::aqec::{compose, erasure_harness, ErasureAdversary};
use pmdkit_core::auth::{nm_verify, TwisePad};
use pmdkit_core::bits::BitVec;
use pmdkit_core::pmd::{build_pmd, measure_pmd_epsilon};
use pmdkit_core::ptc::{measure_pairwise_detectability, measure_strong_ptc_error, PtcFamily, SweepMode};
use pmdkit_core::qlde::{erasure_list_decode, list_size_profile, sample_random_css, ErasurePattern};
use pmdkit_core::symplectic::StabilizerCode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn ptc(c: &mut Criterion) {
    let mut g = c.benchmark_group("ptc");
    for (n, lam) in [(4, 2), (6, 3), (8, 4)] {
        let fam = PtcFamily::new(n, lam).unwrap();
        g.bench_with_input(BenchmarkId::new("strong_error", format!("{n},{lam}")), &fam, |b, f| {
            b.iter(|| measure_strong_ptc_error(black_box(f), SweepMode::Exhaustive).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("pairwise", format!("{n},{lam}")), &fam, |b, f| {
            b.iter(|| measure_pairwise_detectability(black_box(f), SweepMode::Exhaustive).unwrap())
        });
    }
    g.finish();
}

fn pmd(c: &mut Criterion) {
    let mut g = c.benchmark_group("pmd");
    g.sample_size(10);
    for (n, lam) in [(2, 1), (4, 2)] {
        let code = build_pmd(PtcFamily::new(n, lam).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::new("epsilon", format!("{n},{lam}")), &code, |b, p| {
            b.iter(|| measure_pmd_epsilon(black_box(p), SweepMode::Exhaustive).unwrap())
        });
    }
    g.finish();
}

fn qlde(c: &mut Criterion) {
    let css = sample_random_css(10, 2, &mut ChaCha8Rng::seed_from_u64(4242)).unwrap().code;
    let erased = ErasurePattern::parse(10, "0,3").unwrap();
    let syndrome = BitVec::zeros(css.r());
    c.bench_function("qlde/decode_css10", |b| {
        b.iter(|| erasure_list_decode(black_box(&css), &erased, &syndrome).unwrap())
    });
    c.bench_function("qlde/profile_css10", |b| b.iter(|| list_size_profile(black_box(&css), 0.2).unwrap()));
}

fn harness(c: &mut Criterion) {
    let outer = StabilizerCode::from_strings(&["XXXXXXXX", "ZZZZZZZZ"]).unwrap();
    let code = compose(build_pmd(PtcFamily::new(4, 2).unwrap()).unwrap(), outer).unwrap();
    let adv = ErasureAdversary::random_adaptive(8, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut g = c.benchmark_group("aqec");
    g.sample_size(10);
    g.bench_function("harness_8_qubits", |b| b.iter(|| erasure_harness(black_box(&code), &adv).unwrap()));
    g.finish();
}

fn auth(c: &mut Criterion) {
    let pad = TwisePad::with_symbol_bits(2, 16, 4).unwrap();
    let seed = BitVec::zeros(pad.seed_bits());
    c.bench_function("auth/pad_expand", |b| b.iter(|| pad.expand(black_box(&seed)).unwrap()));
    let nm = pmdkit_core::auth::nm_search(2, 6, 1, &mut ChaCha8Rng::seed_from_u64(7)).unwrap().code;
    let mut g = c.benchmark_group("auth");
    g.sample_size(10);
    g.bench_function("nm_verify_2_6", |b| b.iter(|| nm_verify(black_box(&nm)).unwrap()));
    g.finish();
}

criterion_group!(benches, ptc, pmd, qlde, harness, auth);
criterion_main!(benches);
