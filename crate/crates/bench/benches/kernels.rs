use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use davenport_core::arith::{mobius, LatticeVector};
use davenport_core::coeffs::CoefficientFamily;
use davenport_core::eval::{partial_sum, GridSpec};
use davenport_core::regularity::formula_shell_infimum;
use davenport_core::transforms::{invert_jump, jump_operator};

fn bench_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");

    let hecke = CoefficientFamily::hecke(2.0).unwrap();
    g.bench_function("jump_operator_hecke_r64_l1e4", |b| {
        b.iter(|| jump_operator(black_box(&hecke), 64.0, 10_000).unwrap())
    });

    g.bench_function("partial_sum_hecke_n1e5", |b| {
        b.iter(|| partial_sum(black_box(&hecke), 1e5, &[0.378_213_4]).unwrap())
    });

    let jumps = jump_operator(&hecke, 256.0, 1000).unwrap();
    g.bench_function("invert_jump_hecke", |b| {
        b.iter(|| invert_jump(black_box(&jumps), &LatticeVector::new(vec![3]), 64).unwrap())
    });

    g.bench_function("mobius_scan_1e5", |b| {
        b.iter(|| {
            let mut acc = 0i64;
            for n in 1..=100_000u64 {
                acc += mobius(n).unwrap() as i64;
            }
            black_box(acc)
        })
    });

    let lac = CoefficientFamily::power_lacunary(2, 2, LatticeVector::new(vec![1, 0]), 0.5).unwrap();
    let t = 26f64.sqrt().fract();
    g.bench_function("formula_exponent_lacunary", |b| {
        b.iter(|| {
            formula_shell_infimum(black_box(&lac), &[t, 0.3], 1024.0, (1u64 << 20) as f64).unwrap()
        })
    });

    let grid = GridSpec::new(vec![0.0], vec![1.0], vec![256]).unwrap();
    g.bench_function("grid_eval_hecke_256", |b| {
        b.iter(|| davenport_core::eval::grid_eval(black_box(&hecke), 1024.0, &grid).unwrap())
    });

    g.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default()
        .warm_up_time(Duration::from_millis(300))
        .measurement_time(Duration::from_millis(1500))
        .sample_size(10);
    targets = bench_kernels
);
criterion_main!(benches);
