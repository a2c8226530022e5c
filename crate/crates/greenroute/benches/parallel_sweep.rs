//! Benchmarks for the data-parallel hot paths: the brute-force (umin, umax)
//! grid sweep behind labeling, and 10-fold cross-validation.
//!
//! With the default `parallel` feature the same workload runs on the global
//! rayon pool and on a single-thread pool for comparison. Build with
//! `--no-default-features` to bench the plain sequential code path instead.

use criterion::{criterion_group, criterion_main, Criterion};

use greenroute::learn::{cross_validate_k, CvConfig};
use greenroute::netmodel::Topology;
use greenroute::traffic::{assemble_feature_matrix, synth_snapshots};
use greenroute::tune::{brute_force_optimal, EeEvaluator};

fn bench_topology() -> Topology {
    // Eight nodes on a ring plus chords: enough alternative paths to make
    // each routing evaluation non-trivial.
    let mut s = String::new();
    for i in 0..8 {
        s.push_str(&format!("node n{i}\n"));
    }
    let mut edge = |a: usize, b: usize| {
        s.push_str(&format!("link n{a} n{b} 10\nlink n{b} n{a} 10\n"));
    };
    for i in 0..8 {
        edge(i, (i + 1) % 8);
    }
    edge(0, 4);
    edge(2, 6);
    edge(1, 5);
    Topology::parse(&s).unwrap()
}

fn sweep_once(t: &Topology) -> f64 {
    let snaps = synth_snapshots(t, 2, 1, 13);
    let ee = EeEvaluator::for_snapshot(t, &snaps[0], 3).unwrap();
    brute_force_optimal(&ee, 2.0).unwrap().ee
}

fn cv_once(t: &Topology) -> usize {
    let snaps = synth_snapshots(t, 3, 40, 13);
    let x = assemble_feature_matrix(&snaps, t).unwrap();
    let labels: Vec<f64> = (0..x.sample_count())
        .map(|r| 20.0 + x.row(r).iter().take(4).sum::<f64>())
        .collect();
    let cfg = CvConfig {
        k_grid: vec![1, 2, 3, 6, 12],
        folds: 10,
        seed: 13,
        epsilon: 3.0,
    };
    cross_validate_k(&x, &labels, &cfg).unwrap().chosen_k
}

fn bench_brute_force(c: &mut Criterion) {
    let t = bench_topology();
    let mut group = c.benchmark_group("brute_force_sweep");

    #[cfg(feature = "parallel")]
    {
        group.bench_function("rayon_pool", |b| b.iter(|| sweep_once(&t)));
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_function("single_thread", |b| {
            b.iter(|| single.install(|| sweep_once(&t)))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(|| sweep_once(&t)));

    group.finish();
}

fn bench_cross_validation(c: &mut Criterion) {
    let t = bench_topology();
    let mut group = c.benchmark_group("cross_validation");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    {
        group.bench_function("rayon_pool", |b| b.iter(|| cv_once(&t)));
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_function("single_thread", |b| {
            b.iter(|| single.install(|| cv_once(&t)))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(|| cv_once(&t)));

    group.finish();
}

criterion_group!(benches, bench_brute_force, bench_cross_validation);
criterion_main!(benches);
