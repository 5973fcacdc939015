use std::hint::black_box;

use bosegas::bounds::cells::cell_table;
use bosegas::bounds::{optimize_error_constant, CellMode, Exponents, OptimizeOptions};
use bosegas::gp::{gp_minimize, GpProblem, GridGeometry};
use bosegas::jellium::{infinite_mass_comparison, QuadratureSpec};
use bosegas::scattering::Dimension;
use bosegas::{Exec, TrapPotential};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn optimizer(c: &mut Criterion) {
    let grid: Vec<f64> = (0..9).map(|i| 10f64.powi(-24 + i)).collect();
    let mut group = c.benchmark_group("optimize_error_constant");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let opts = OptimizeOptions { exec, ..OptimizeOptions::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| optimize_error_constant(black_box(&grid), Exponents::standard(), &opts).unwrap())
        });
    }
    group.finish();
}

fn cells(c: &mut Criterion) {
    let ks: Vec<f64> = (0..=12).map(|i| 1.0 + 0.25 * i as f64).collect();
    let ps: Vec<u32> = (2..=24).collect();
    let mut group = c.benchmark_group("cell_table_brute_force");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| cell_table(black_box(&ks), &ps, CellMode::DEFAULT_BRUTE_FORCE, exec).unwrap())
        });
    }
    group.finish();
}

fn gp_tensor(c: &mut Criterion) {
    let mut group = c.benchmark_group("gp_tensor_2d");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let trap = TrapPotential::harmonic(vec![1.0, 2.0]).unwrap();
        let mut p = GpProblem::new(Dimension::Two, trap, 500.0, 1e-3).unwrap();
        p.grid.geometry = GridGeometry::Tensor;
        p.exec = exec;
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| gp_minimize(black_box(&p)).unwrap()));
    }
    group.finish();
}

fn jellium(c: &mut Criterion) {
    let rhos: Vec<f64> = (0..=12).map(|i| 10f64.powf(-3.0 + 0.5 * i as f64)).collect();
    let spec = QuadratureSpec::default();
    let mut group = c.benchmark_group("jellium_density_fit");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| infinite_mass_comparison(black_box(&rhos), &spec, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, optimizer, cells, gp_tensor, jellium);
criterion_main!(benches);
