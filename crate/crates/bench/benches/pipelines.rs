//! End-to-end benchmarks for the numerically dominant kernels: dense
//! Hermitian eigendecomposition, mean-observable assembly, the entropy
//! solver, the clustering pipeline, and spectral counting.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use faer::Mat;
use num_complex::Complex64;

use macrospin_core::{
    beta_min_rank, build_mean_observables, entropy_mu, hermitian_eig, pauli_x, pauli_y, pauli_z,
    rank_rate, sequential_joint_cluster, BoxSpec, ClusterParams, HermitianOperator,
    ObservableFamily, ProductState,
};

const MAX_DIM: usize = 1 << 14;

/// Deterministic dense Hermitian test matrix: Hilbert-like real part plus an
/// antisymmetric imaginary part.
fn dense_hermitian(dim: usize) -> HermitianOperator {
    let mat = Mat::from_fn(dim, dim, |i, j| {
        Complex64::new(
            1.0 / (1.0 + (i + j) as f64),
            0.01 * (j as f64 - i as f64) / dim as f64,
        )
    });
    HermitianOperator::new(mat).unwrap()
}

fn bench_eigendecomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eig");
    for dim in [64usize, 128, 256] {
        let h = dense_hermitian(dim);
        group.bench_function(format!("dim_{dim}"), |b| {
            b.iter(|| hermitian_eig(black_box(&h)).unwrap())
        });
    }
    group.finish();
}

fn bench_mean_assembly(c: &mut Criterion) {
    let family = ObservableFamily::new(2, vec![pauli_x(), pauli_y(), pauli_z()]).unwrap();
    c.bench_function("build_mean_observables/pauli_triple_n3", |b| {
        b.iter(|| build_mean_observables(black_box(&family), 3, MAX_DIM).unwrap())
    });
}

fn bench_entropy_solver(c: &mut Criterion) {
    let family = ObservableFamily::new(2, vec![pauli_z(), pauli_x()]).unwrap();
    c.bench_function("entropy_mu/bloch_pair_interior", |b| {
        b.iter(|| entropy_mu(black_box(&family), black_box(&[0.3, 0.4])).unwrap())
    });
}

fn bench_cluster_pipeline(c: &mut Criterion) {
    let family = ObservableFamily::new(2, vec![pauli_x(), pauli_y(), pauli_z()]).unwrap();
    let means = build_mean_observables(&family, 2, MAX_DIM).unwrap();
    let params = ClusterParams::new(1.0 / (5.0_f64).sqrt()).unwrap();
    c.bench_function("sequential_joint_cluster/pauli_triple_n2", |b| {
        b.iter(|| sequential_joint_cluster(black_box(&means), black_box(&params)).unwrap())
    });
}

fn bench_spectral_counting(c: &mut Criterion) {
    let family = ObservableFamily::new(2, vec![pauli_z()]).unwrap();
    let spec = BoxSpec::closed(vec![0.0], 0.25).unwrap();
    let mut group = c.benchmark_group("spectral_counting");
    group.sample_size(10);
    group.bench_function("rank_rate/sigma_z_n5", |b| {
        b.iter(|| rank_rate(black_box(&family), black_box(&spec), &[5], None, MAX_DIM).unwrap())
    });
    let state = ProductState::new(HermitianOperator::from_real_diagonal(&[0.5, 0.3, 0.2]).unwrap())
        .unwrap();
    group.bench_function("beta_min_rank/qutrit_n6", |b| {
        b.iter(|| beta_min_rank(black_box(&state), 0.1, 6).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_eigendecomposition,
    bench_mean_assembly,
    bench_entropy_solver,
    bench_cluster_pipeline,
    bench_spectral_counting
);
criterion_main!(benches);
