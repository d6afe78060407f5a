//! Wall-clock benchmarks for the simulation hot paths: dense operator
//! application, pairwise combination routes, search, and state
//! preparation. All inputs are drawn from fixed seeds so runs are
//! comparable across machines.

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use lculab_core::random::{random_real_state, random_unitary, RandomSource};
use lculab_core::{
    combine2_hadamard, combine2_rotation, grover_standard, make_instance, prep_thm1,
    random_log_uniform_vector, AngleMode, CostLedger, PreparedState, RotationVariant,
};

fn bench_statevector(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector");
    for dim in [64usize, 256, 1024] {
        let mut rng = RandomSource::new(11);
        let u = random_unitary(dim, &mut rng).unwrap();
        let s = random_real_state(dim, &mut rng).unwrap();
        group.bench_with_input(BenchmarkId::new("unitary_apply", dim), &dim, |b, _| {
            b.iter(|| {
                let mut l = CostLedger::ZERO;
                u.apply(&s, &mut l).unwrap()
            })
        });
        let t = random_real_state(dim, &mut rng).unwrap();
        group.bench_with_input(BenchmarkId::new("fidelity", dim), &dim, |b, _| {
            b.iter(|| s.fidelity(&t).unwrap())
        });
    }
    group.finish();
}

fn bench_combine2(c: &mut Criterion) {
    let mut group = c.benchmark_group("combine2");
    let dim = 256;
    let mut rng = RandomSource::new(23);
    let a = random_real_state(dim, &mut rng).unwrap();
    let b = random_real_state(dim, &mut rng).unwrap();

    group.bench_function("hadamard", |bch| {
        bch.iter_batched(
            || {
                (
                    PreparedState::new(a.clone()),
                    PreparedState::new(b.clone()),
                    rng.derive(1),
                )
            },
            |(pa, pb, mut r)| combine2_hadamard(&pa, &pb, &mut r, false).unwrap(),
            BatchSize::SmallInput,
        )
    });

    for (label, variant) in
        [("rotation_eig", RotationVariant::Eig), ("rotation_iterate", RotationVariant::Iterate)]
    {
        group.bench_function(label, |bch| {
            bch.iter_batched(
                || {
                    (
                        PreparedState::new(a.clone()),
                        PreparedState::new(b.clone()),
                        rng.derive(2),
                    )
                },
                |(pa, pb, mut r)| {
                    combine2_rotation(&pa, &pb, 1.0, 0.5, 0.01, variant, AngleMode::Exact, &mut r)
                        .unwrap()
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    for n in [256usize, 1024] {
        let inst = make_instance(n, &[n / 3]).unwrap();
        group.bench_with_input(BenchmarkId::new("grover_standard", n), &n, |b, _| {
            b.iter_batched(
                || RandomSource::new(5),
                |mut r| grover_standard(&inst, &mut r).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_prep(c: &mut Criterion) {
    let mut group = c.benchmark_group("prep");
    group.sample_size(20);
    let mut rng = RandomSource::new(7);
    let x = random_log_uniform_vector(256, 8.0, &mut rng).unwrap();
    group.bench_function("thm1_n256", |b| {
        b.iter_batched(
            || rng.derive(3),
            |mut r| prep_thm1(&x, &mut r).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_statevector, bench_combine2, bench_search, bench_prep);
criterion_main!(benches);
