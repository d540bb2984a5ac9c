use carnot_core::catalog;
use carnot_core::rational::rat;
use carnot_core::{check_carnot, epsilon, NilpotentGroup};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn group_law(c: &mut Criterion) {
    let mut g = c.benchmark_group("group_law");
    for name in ["heisenberg_3", "engel_4", "step3_filiform_5"] {
        g.bench_with_input(BenchmarkId::from_parameter(name), name, |b, name| {
            b.iter(|| NilpotentGroup::new(catalog::lookup(name).unwrap().algebra).unwrap())
        });
    }
    g.finish();

    let grp = NilpotentGroup::new(catalog::lookup("step3_filiform_5").unwrap().algebra).unwrap();
    let x: Vec<_> = (1..=5).map(|i| rat(i, 3)).collect();
    let y: Vec<_> = (1..=5).map(|i| rat(-i, 2)).collect();
    c.bench_function("product/step3_filiform_5", |b| {
        b.iter(|| grp.product(black_box(&x), black_box(&y)).unwrap())
    });
}

fn epsilon_pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("epsilon");
    for (name, a) in [
        ("heisenberg_3", vec![rat(1, 2), rat(-1, 1), rat(3, 1)]),
        ("perturbed_engel_4", vec![rat(1, 1), rat(1, 3), rat(0, 1), rat(-2, 1)]),
        (
            "step3_filiform_5",
            vec![rat(1, 1), rat(2, 1), rat(0, 1), rat(1, 2), rat(-1, 1)],
        ),
    ] {
        let frame = catalog::lookup(name).unwrap().frame.at(a).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &frame, |b, f| {
            b.iter(|| epsilon(f).unwrap())
        });
    }
    g.finish();
}

fn verification(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_carnot");
    g.sample_size(20);
    for name in ["heisenberg_5", "engel_4", "perturbed_engel_4"] {
        let frame = catalog::lookup(name).unwrap().frame;
        let change = epsilon(&frame).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &(frame, change), |b, (f, ch)| {
            b.iter(|| check_carnot(f, ch).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, group_law, epsilon_pipeline, verification);
criterion_main!(benches);
