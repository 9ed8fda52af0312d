use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use varsep::exec::Exec;
use varsep::fe::{fe2d_solve_with, Grid1D, Grid2D};
use varsep::himod::ModalBasis;
use varsep::hipod::{hipod_offline, uniform_samples, TruncationRule};
use varsep::linalg::{DenseMatrix, LuFactors};
use varsep::problem::presets;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn snapshots(c: &mut Criterion) {
    let problem = presets::inlet_channel();
    let basis = ModalBasis::sine(9).unwrap();
    let grid = Grid1D::uniform(problem.domain.x0, problem.domain.x1, 50).unwrap();
    let samples = uniform_samples(1.0, 5.0, 32);
    let mut group = c.benchmark_group("hipod_offline");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                hipod_offline(&problem, &basis, &grid, black_box(&samples), 1e-10, TruncationRule::KeepAboveTolerance, exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn fe_solve(c: &mut Criterion) {
    let problem = presets::two_gaussian_source();
    let grid = Grid2D::over(&problem.domain, 400, 80).unwrap();
    let mut group = c.benchmark_group("fe2d_solve");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fe2d_solve_with(black_box(&problem), &grid, exec).unwrap())
        });
    }
    group.finish();
}

fn dense_lu(c: &mut Criterion) {
    let n = 400;
    let a = DenseMatrix::from_fn(n, n, |i, j| if i == j { n as f64 } else { ((i * 31 + j * 17) % 13) as f64 / 13.0 });
    let mut group = c.benchmark_group("dense_lu");
    group.sample_size(20);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| LuFactors::with_exec(black_box(&a), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, snapshots, fe_solve, dense_lu);
criterion_main!(benches);
