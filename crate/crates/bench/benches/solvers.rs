use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use pls_core::tables::bench_solver_options;
use pls_core::{
    assemble_elliptic, enumerate_solutions, qmr_solve, run_parabolic, solve_obstacle,
    KrylovOptions, ObstacleSpec, OperatorKind, ParabolicOptions, Preconditioner, Problem,
    SparseMatrix,
};

fn spmv(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmv");
    for n in [50, 100, 200] {
        let d = assemble_elliptic(&ObstacleSpec::new(Problem::Tent), n).unwrap();
        let x = vec![1.0; d.dim()];
        let mut y = vec![0.0; d.dim()];
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| d.t.spmv_into(black_box(&x), &mut y))
        });
    }
    g.finish();
}

fn qmr(c: &mut Criterion) {
    let mut g = c.benchmark_group("qmr_laplacian");
    g.sample_size(20);
    for n in [25, 50] {
        let d = assemble_elliptic(&ObstacleSpec::new(Problem::Torsion { c: -5.0 }), n).unwrap();
        let x0 = vec![0.0; d.dim()];
        for (name, pc) in [
            ("none", Preconditioner::None),
            ("jacobi", Preconditioner::Jacobi),
        ] {
            let opts = KrylovOptions {
                preconditioner: pc,
                ..KrylovOptions::default()
            };
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| qmr_solve(&d.t, black_box(&d.f_vec), &x0, &opts).unwrap())
            });
        }
    }
    g.finish();
}

fn obstacle(c: &mut Criterion) {
    let mut g = c.benchmark_group("obstacle");
    g.sample_size(10);
    let opts = bench_solver_options();
    for (name, problem) in [
        ("tent", Problem::Tent),
        ("tent_neumann", Problem::TentNeumann),
        ("torsion_c5", Problem::Torsion { c: -5.0 }),
    ] {
        g.bench_function(BenchmarkId::new(name, 25), |b| {
            b.iter(|| solve_obstacle(&ObstacleSpec::new(problem), 25, &opts).unwrap())
        });
    }
    g.bench_function("parabolic_tent/25", |b| {
        b.iter(|| {
            run_parabolic(
                &ObstacleSpec::new(Problem::Tent),
                25,
                &ParabolicOptions::new(1e4, 20),
                &opts,
            )
            .unwrap()
        })
    });
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for n in [8, 12] {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match (i as isize - j as isize).abs() {
                        0 => 2.5,
                        1 => -1.0,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        let t = SparseMatrix::from_dense(&rows).unwrap();
        let b: Vec<f64> = (0..n)
            .map(|i| if i % 3 == 0 { 1.0 } else { -0.5 })
            .collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| enumerate_solutions(&t, black_box(&b), OperatorKind::Elliptic).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, spmv, qmr, obstacle, oracle);
criterion_main!(benches);
