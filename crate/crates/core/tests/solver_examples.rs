mod common;

use common::*;
use pls_core::numkit::vector::norm_inf;
use pls_core::{
    active_mask, check_t1, check_t2, classify_solvability, enumerate_solutions, lcp_check,
    qmr_solve, residual_nonsmooth, solve_elliptic_pls, solve_parabolic_pls, solve_shifted,
    w_matrix, Error, KrylovOptions, OperatorKind, PlsProblem, ShiftForm, SolvabilityVerdict,
    SolveStatus, SolverOptions, SparseMatrix, Verdict,
};

fn tri() -> SparseMatrix {
    sparse(&vec![vec![2.0, -1.0], vec![-1.0, 2.0]])
}

fn lap2() -> SparseMatrix {
    sparse(&vec![vec![1.0, -1.0], vec![-1.0, 1.0]])
}

fn close(a: &[f64], b: &[f64]) -> bool {
    max_abs_diff(a, b) <= 1e-12 * (1.0 + norm_inf(b))
}

#[test]
fn active_mask_examples() {
    assert_eq!(
        active_mask(&[0.0, -1.0, 2.0], 0.0).bits(),
        &[true, false, true]
    );
    assert_eq!(active_mask(&[-5.0, -5.0], 0.0).popcount(), 0);
    assert_eq!(
        active_mask(&[1.0, 2.0], &vec![2.0, 2.0]).bits(),
        &[false, true]
    );
}

#[test]
fn negative_rhs_needs_one_solve() {
    let sol = solve_elliptic_pls(
        &PlsProblem::elliptic(tri(), vec![-1.0, -2.0]).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    assert_eq!(sol.x, vec![-1.0, -2.0]);
    assert_eq!(sol.y, vec![0.0, 0.0]);
    assert_eq!(sol.report.outer_iterations, 1);
}

#[test]
fn mixed_rhs_two_by_two() {
    let sol = solve_elliptic_pls(
        &PlsProblem::elliptic(tri(), vec![1.0, -1.0]).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(close(&sol.x, &[0.5, -0.5]));
    assert!(close(&sol.y, &[0.5, 0.0]));
    let oracle = enumerate_solutions(&tri(), &[1.0, -1.0], OperatorKind::Elliptic).unwrap();
    assert!(oracle.is_unique());
    assert!(close(&oracle.point_solutions[0], &[0.5, -0.5]));
}

#[test]
fn singular_system_without_solution_is_certified() {
    let p = PlsProblem::elliptic(lap2(), vec![1.0, 1.0])
        .unwrap()
        .with_t2(vec![1.0, 1.0], vec![1.0, 1.0])
        .unwrap();
    let sol = solve_elliptic_pls(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::NoSolutionCertified);
    assert_eq!(sol.report.outer_iterations, 0);
    assert!(
        enumerate_solutions(&lap2(), &[1.0, 1.0], OperatorKind::Elliptic)
            .unwrap()
            .is_empty()
    );
}

#[test]
fn singular_consistent_system_returns_a_family_member() {
    let p = PlsProblem::elliptic(lap2(), vec![1.0, -1.0])
        .unwrap()
        .with_t2(vec![1.0, 1.0], vec![1.0, 1.0])
        .unwrap();
    let sol = solve_elliptic_pls(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Converged);
    assert_eq!(
        sol.report.family_direction.as_deref(),
        Some(&[1.0, 1.0][..])
    );
    let oracle = enumerate_solutions(&lap2(), &[1.0, -1.0], OperatorKind::Elliptic).unwrap();
    let fam = &oracle.families[0];
    assert!(close(&fam.base, &[1.0, 0.0]));
    assert!(close(&fam.direction, &[1.0, 1.0]));
    assert_eq!(fam.alpha_max, None);
    assert!(fam.contains(&sol.x, 1e-10));
}

#[test]
fn parabolic_examples() {
    let opts = SolverOptions::default();
    let neg = solve_parabolic_pls(
        &PlsProblem::parabolic(tri(), vec![-3.0, -4.0]).unwrap(),
        &opts,
    )
    .unwrap();
    assert_eq!(neg.x, vec![-3.0, -4.0]);
    assert_eq!(neg.report.outer_iterations, 1);

    let id = SparseMatrix::identity(2);
    let pos =
        solve_parabolic_pls(&PlsProblem::parabolic(id, vec![2.0, 4.0]).unwrap(), &opts).unwrap();
    assert!(close(&pos.x, &[1.0, 2.0]));

    let mixed = solve_parabolic_pls(
        &PlsProblem::parabolic(tri(), vec![1.0, -1.0]).unwrap(),
        &opts,
    )
    .unwrap();
    assert!(close(&mixed.x, &[1.0 / 3.0, -2.0 / 3.0]));
}

#[test]
fn shifted_examples() {
    let opts = SolverOptions::default();
    let zero = solve_shifted(
        &tri(),
        &[1.0, -1.0],
        &[0.0, 0.0],
        ShiftForm::MinPlusTMax,
        &opts,
    )
    .unwrap();
    assert!(close(&zero.x, &[0.5, -0.5]));

    let sol = solve_shifted(
        &tri(),
        &[1.0, 0.0],
        &[1.0, 1.0],
        ShiftForm::MinPlusTMax,
        &opts,
    )
    .unwrap();
    assert!(close(&sol.x, &[0.0, -1.0]));

    let scalar = solve_shifted(
        &SparseMatrix::identity(1),
        &[12.0],
        &[5.0],
        ShiftForm::MinPlusTMax,
        &opts,
    )
    .unwrap();
    assert!(close(&scalar.x, &[7.0]));

    // max{xi,x} + T min{xi,x} = b
    let t = tri();
    let (b, xi) = ([0.5, 2.0], [1.0, -1.0]);
    let other = solve_shifted(&t, &b, &xi, ShiftForm::MaxPlusTMin, &opts).unwrap();
    let r = residual_nonsmooth(
        &t,
        &b,
        &other.x,
        OperatorKind::Elliptic,
        Some((&xi, ShiftForm::MaxPlusTMin)),
    )
    .unwrap();
    assert!(r < 1e-10, "{r}");
}

#[test]
fn residual_examples() {
    let t = tri();
    let r0 =
        residual_nonsmooth(&t, &[1.0, -1.0], &[0.0, 0.0], OperatorKind::Elliptic, None).unwrap();
    assert_eq!(r0, 1.0);
    let exact =
        residual_nonsmooth(&t, &[1.0, -1.0], &[0.5, -0.5], OperatorKind::Elliptic, None).unwrap();
    assert!(exact <= 1e-12);
    let para = residual_nonsmooth(
        &t,
        &[-1.0, -2.0],
        &[-1.0, -2.0],
        OperatorKind::Parabolic,
        None,
    )
    .unwrap();
    assert_eq!(para, 0.0);
}

#[test]
fn lcp_examples() {
    let pass = lcp_check(
        &tri(),
        &[1.0, -1.0],
        &[0.5, 0.0],
        OperatorKind::Elliptic,
        1e-8,
    )
    .unwrap();
    assert!(pass.passed());
    let trivial = lcp_check(
        &tri(),
        &[-1.0, -1.0],
        &[0.0, 0.0],
        OperatorKind::Elliptic,
        1e-8,
    )
    .unwrap();
    assert!(trivial.passed());
    let fail = lcp_check(
        &SparseMatrix::identity(2),
        &[0.0, 0.0],
        &[1.0, 1.0],
        OperatorKind::Elliptic,
        1e-8,
    )
    .unwrap();
    assert!(!fail.complementary);
    assert_eq!(fail.complementarity, 2.0);
}

#[test]
fn w_matrix_examples() {
    assert_eq!(w_matrix(&[1.0, 2.0], &[3.0, 4.0]).omegas, vec![1.0, 1.0]);
    assert_eq!(
        w_matrix(&[-1.0, -2.0], &[-3.0, -4.0]).omegas,
        vec![0.0, 0.0]
    );
    assert_eq!(w_matrix(&[1.0, -1.0], &[-1.0, 1.0]).omegas, vec![0.5, 0.5]);
}

#[test]
fn matrix_class_examples() {
    assert_eq!(check_t1(&tri()).unwrap().t1_verdict, Verdict::Proven);
    assert_eq!(check_t1(&lap2()).unwrap().t1_verdict, Verdict::Disproven);
    let t2 = check_t2(&lap2()).unwrap();
    assert_eq!(t2.t2_verdict, Verdict::Proven);
    let v = t2.left_null.unwrap();
    assert!((v[0] - v[1]).abs() < 1e-12 && (v[0] - 0.5f64.sqrt()).abs() < 1e-10);
    assert_eq!(check_t2(&tri()).unwrap().t2_verdict, Verdict::Disproven);
    let rect = SparseMatrix::from_triplets(&[(0, 0, 1.0)], 1, 2).unwrap();
    assert!(matches!(check_t1(&rect), Err(Error::Dimension(_))));
}

#[test]
fn solvability_examples() {
    let v = [1.0, 1.0];
    let verdict = |b: [f64; 2]| classify_solvability(&v, &b, 1e-12).unwrap().verdict;
    assert_eq!(verdict([-1.0, -1.0]), SolvabilityVerdict::Unique);
    assert_eq!(verdict([1.0, -1.0]), SolvabilityVerdict::FamilyAlongW);
    assert_eq!(verdict([1.0, 1.0]), SolvabilityVerdict::NoSolution);
    assert!(matches!(
        classify_solvability(&[1.0, 0.0], &[1.0, 1.0], 0.0),
        Err(Error::InvalidNullVector(1))
    ));
}

/// The masks `O < {1} < {1,2}` are all distinct, so the third solve is
/// the first to reproduce its mask: `n + 1` solves for `n = 2`.
#[test]
fn strictly_growing_masks_take_n_plus_one_solves() {
    let sol = solve_elliptic_pls(
        &PlsProblem::elliptic(tri(), vec![1.0, -0.1]).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    assert_eq!(sol.report.active_counts, vec![1, 2, 2]);
    assert_eq!(sol.report.outer_iterations, 3);
    assert!(sol.x.iter().all(|&v| v > 0.0));
}

#[test]
fn dense_fallback_rescues_unreachable_tolerance() {
    let mut opts = SolverOptions {
        krylov: KrylovOptions {
            max_iters: Some(1),
            ..KrylovOptions::default()
        },
        ..SolverOptions::default()
    };
    let t = sparse(&vec![
        vec![2.0, -1.0, 0.0],
        vec![-1.0, 2.0, -1.0],
        vec![0.0, -1.0, 2.0],
    ]);
    let p = PlsProblem::elliptic(t, vec![1.0, 0.5, 0.25]).unwrap();
    let sol = solve_elliptic_pls(&p, &opts).unwrap();
    assert!(close(&sol.x, &[1.0625, 1.125, 0.6875]));
    opts.dense_fallback_dim = 0;
    assert!(matches!(
        solve_elliptic_pls(&p, &opts),
        Err(Error::NotConverged { .. })
    ));
}

#[test]
fn qmr_on_laplacians_with_default_options() {
    for n in [10, 50, 100] {
        let d = pls_core::assemble_elliptic(
            &pls_core::ObstacleSpec::new(pls_core::Problem::Torsion { c: -1.0 }),
            n,
        )
        .unwrap();
        let x0 = vec![0.0; d.dim()];
        let (x, stats) = qmr_solve(&d.t, &d.f_vec, &x0, &KrylovOptions::default()).unwrap();
        assert!(stats.converged);
        let r: Vec<f64> =
            d.t.spmv(&x)
                .unwrap()
                .iter()
                .zip(&d.f_vec)
                .map(|(a, b)| a - b)
                .collect();
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bn = d.f_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rn <= 1e-12 * bn, "n={n} residual {rn}");
    }
}
