//! Sequential vs. rayon paths of the grid kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use glv_core::bordered::{eta_column, phase_row, BorderedJacobian};
use glv_core::exec::Exec;
use glv_core::glop::{apply_jacobian_with, residual_with};
use glv_core::linalg::LinearOperator;
use glv_core::{Grid, LinkField, OrderField};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 3] = [32, 64, 110];

fn setup(n: usize) -> (OrderField, OrderField, LinkField) {
    let g = Grid::new(5.5, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    (OrderField::random(g, &mut rng), OrderField::random(g, &mut rng), LinkField::new(g, 0.9))
}

fn paths() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("auto", Exec::Auto)]
}

fn residual_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("residual");
    for n in SIZES {
        let (psi, _, links) = setup(n);
        for (name, exec) in paths() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| residual_with(exec, black_box(&psi), &links).unwrap())
            });
        }
    }
    group.finish();
}

fn jacobian_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobian");
    for n in SIZES {
        let (psi, phi, links) = setup(n);
        for (name, exec) in paths() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| apply_jacobian_with(exec, &psi, black_box(&phi), &links).unwrap())
            });
        }
    }
    group.finish();
}

fn bordered_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("bordered_matvec");
    for n in SIZES {
        let (psi, phi, links) = setup(n);
        let mut x = phi.as_real().to_vec();
        x.push(0.3);
        let mut y = vec![0.0; x.len()];
        for (name, exec) in paths() {
            let op = BorderedJacobian::new(&psi, &links, 0.0, vec![eta_column(&psi)], vec![phase_row(&psi)], DMatrix::zeros(1, 1))
                .unwrap()
                .with_exec(exec);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| b.iter(|| op.apply(black_box(&x), &mut y)));
        }
    }
    group.finish();
}

criterion_group!(benches, residual_bench, jacobian_bench, bordered_bench);
criterion_main!(benches);
