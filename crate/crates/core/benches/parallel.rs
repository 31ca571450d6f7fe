//! Sequential versus parallel execution of the data-parallel kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rofnk::assembly::{
    assemble_middle_block_with, assemble_p1_mass, build_block_field_with, Layout, Method, SaddleOperator,
};
use rofnk::experiments::run_robustness_with;
use rofnk::nonlinear::SolveConfig;
use rofnk::par::Execution;
use rofnk::{Beta, TriMesh, Vec2};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn field_data(mesh: &TriMesh) -> Vec<Vec2> {
    (0..mesh.num_triangles()).map(|t| Vec2::new((t as f64 * 0.37).sin(), (t as f64 * 0.11).cos())).collect()
}

fn kernels(c: &mut Criterion) {
    let mesh = TriMesh::level(4).unwrap();
    let p = field_data(&mesh);
    let beta = Beta::new(1e-3).unwrap();
    let mass = assemble_p1_mass(&mesh);
    let field = build_block_field_with(Execution::Sequential, &p, beta, Method::Newton);
    let layout = Layout::of(&mesh);
    let x: Vec<f64> = (0..layout.len()).map(|i| (i as f64 * 0.01).sin()).collect();

    let mut g = c.benchmark_group("saddle_apply");
    for (name, exec) in POLICIES {
        let op = SaddleOperator::new(&mesh, &mass, &field, 0.5).with_execution(exec);
        let mut y = vec![0.0; x.len()];
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| op.apply(black_box(&x), &mut y)));
    }
    g.finish();

    let mut g = c.benchmark_group("spmv");
    let u = &x[layout.u_range()];
    for (name, exec) in POLICIES {
        let mut y = vec![0.0; u.len()];
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| mass.mul_vec_into_with(exec, black_box(u), &mut y)));
    }
    g.finish();

    let mut g = c.benchmark_group("assembly");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let f = build_block_field_with(exec, black_box(&p), beta, Method::Newton);
                assemble_middle_block_with(exec, &mesh, &f, 0.5)
            })
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mesh = TriMesh::level(1).unwrap();
    let template = SolveConfig::new(1.0, 1.0, Method::Newton);
    let mut g = c.benchmark_group("robustness_sweep");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_robustness_with(exec, &[1.0, 1e-3], &[1.0, 1e-3], &mesh, &template).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernels, sweep);
criterion_main!(benches);
