use std::fs::File;
use std::io::BufWriter;

use pls_core::numkit::{read_matrix_market, read_vector};
use pls_core::obstacle::{full_field, write_field_csv};
use pls_core::tables::{bench_solver_options, run_table, run_table_on};
use pls_core::{
    assemble_elliptic, check_t2, classify_solvability, default_class_tol, enumerate_solutions,
    lcp_check, run_parabolic, solve as solve_pls, solve_obstacle, IterationReport, ObstacleSpec,
    OperatorKind, ParabolicOptions, PlsProblem, Result, SolvabilityVerdict, SolveStatus,
    SparseMatrix, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{BenchArgs, CheckArgs, OracleArgs, ProblemArgs, Sample, SolveArgs};

const LCP_TOL: f64 = 1e-8;

fn exit_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::NoSolutionCertified => 2,
        SolveStatus::MaxOuterExceeded => 1,
    }
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::NoSolutionCertified => "no_solution_certified",
        SolveStatus::MaxOuterExceeded => "max_outer_exceeded",
    }
}

fn verdict_name(v: SolvabilityVerdict) -> &'static str {
    match v {
        SolvabilityVerdict::Unique => "unique",
        SolvabilityVerdict::FamilyAlongW => "family_along_w",
        SolvabilityVerdict::NoSolution => "no_solution",
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn vector(v: &[f64]) -> String {
    join(v.iter().map(|x| format!("{x:.16e}")))
}

fn spec_of(p: &ProblemArgs) -> ObstacleSpec {
    ObstacleSpec {
        problem: p.problem(),
        corner: p.corner.into(),
    }
}

fn print_report(r: &IterationReport) {
    println!("K={}", r.outer_iterations);
    println!("active_counts={}", join(&r.active_counts));
    println!(
        "inner_iterations={}",
        join(r.inner_stats.iter().map(|s| s.iterations))
    );
    println!(
        "residuals={}",
        join(r.residual_history.iter().map(|x| format!("{x:.6e}")))
    );
    println!("mask_losses={}", r.mask_losses);
    if let Some(s) = r.solvability {
        println!("solvability={}", verdict_name(s.verdict));
        println!("vtb={:.6e}", s.vtb);
    }
}

pub fn solve(a: &SolveArgs) -> Result<u8> {
    let spec = spec_of(&a.problem);
    let n = a.problem.n;
    let opts = a.solver.options();
    println!("problem={}", spec.problem.name());
    println!("n={n}");

    let (discrete, u, status) = match a.tau {
        None => {
            let sol = solve_obstacle(&spec, n, &opts)?;
            println!("dim={}", sol.discrete.dim());
            println!("status={}", status_name(sol.status));
            print_report(&sol.report);
            if sol.status == SolveStatus::Converged {
                let y: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
                let lcp = lcp_check(
                    &sol.discrete.t,
                    &sol.discrete.b,
                    &y,
                    OperatorKind::Elliptic,
                    LCP_TOL,
                )?;
                println!("lcp_check={}", if lcp.passed() { "pass" } else { "fail" });
            }
            println!(
                "coincidence_nodes={}",
                sol.coincidence.iter().filter(|&&c| c).count()
            );
            (sol.discrete, sol.u, sol.status)
        }
        Some(tau) => {
            let run = run_parabolic(&spec, n, &ParabolicOptions::new(tau, a.nu), &opts)?;
            let status = run
                .per_step_status
                .iter()
                .copied()
                .find(|&s| s != SolveStatus::Converged)
                .unwrap_or(SolveStatus::Converged);
            let discrete = assemble_elliptic(&spec, n)?;
            println!("dim={}", discrete.dim());
            println!("tau={tau:e}");
            println!("nu={}", run.nu);
            println!("dt={:e}", run.dt);
            println!("status={}", status_name(status));
            println!("K={}", join(run.step_counts()));
            println!(
                "inner_iterations={}",
                join(run.per_step_reports.iter().map(|r| r.inner_iterations()))
            );
            println!(
                "residuals={}",
                join(run.per_step_reports.iter().map(|r| {
                    format!("{:.6e}", r.residual_history.last().copied().unwrap_or(0.0))
                }))
            );
            println!(
                "monotone={}",
                run.per_step_reports.iter().all(|r| r.is_monotone())
            );
            let u = run.final_field().to_vec();
            (discrete, u, status)
        }
    };

    if let Some(path) = &a.out {
        let nodes = full_field(&discrete, &u)?;
        write_field_csv(BufWriter::new(File::create(path)?), &nodes)?;
        println!("field={}", path.display());
    }
    Ok(exit_code(status))
}

pub fn bench(a: &BenchArgs) -> Result<u8> {
    let opts = bench_solver_options();
    let table = if a.sizes.is_empty() {
        run_table(a.table, &opts)
    } else {
        run_table_on(a.table, &a.sizes, &opts)
    };
    let csv = table.to_csv();
    print!("{csv}");
    println!();
    print!("{}", table.to_text());
    for c in table.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!(
            "{} {}: {}",
            c.row,
            c.column,
            c.error.as_deref().unwrap_or("")
        );
    }
    eprintln!(
        "wall_times_ms={}",
        join(table.wall_times_ms.iter().map(|t| format!("{t:.1}")))
    );
    if let Some(path) = &a.out {
        std::fs::write(path, csv)?;
    }
    Ok(if table.any_failed() { 1 } else { 0 })
}

pub fn check(a: &CheckArgs) -> Result<u8> {
    let (t, b) = match (&a.mm, a.problem) {
        (Some(path), _) => (read_matrix_market(path)?, None),
        (None, Some(name)) => {
            let problem = ProblemArgs {
                problem: name,
                n: a.n.unwrap_or(0),
                c: a.c,
                corner: crate::args::CornerName::Average,
            };
            let d = assemble_elliptic(&spec_of(&problem), problem.n)?;
            (d.t, Some(d.b))
        }
        (None, None) => unreachable!("clap requires a matrix source"),
    };
    let b = match &a.rhs {
        Some(path) => Some(read_vector(path)?),
        None => b,
    };
    let rep = check_t2(&t)?;
    println!("dim={}", t.n_rows());
    print!("{rep}");
    if rep.t2_verdict == Verdict::Proven {
        if let (Some(v), Some(w)) = (&rep.left_null, &rep.right_null) {
            for (name, x) in [("v", v), ("w", w)] {
                let top = x.iter().copied().fold(0.0, f64::max);
                let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
                println!("{name}_min_over_max={:.6e}", lo / top);
            }
            if let Some(b) = &b {
                let s = classify_solvability(v, b, default_class_tol(v, b))?;
                println!("solvability={}", verdict_name(s.verdict));
                println!("vtb={:.6e}", s.vtb);
            }
        }
    }
    Ok(0)
}

fn sample(s: Sample) -> Result<(SparseMatrix, Vec<f64>)> {
    let (t, b) = match s {
        Sample::T1 => (vec![vec![2.0, -1.0], vec![-1.0, 2.0]], vec![1.0, -2.0]),
        Sample::T2Family => (vec![vec![1.0, -1.0], vec![-1.0, 1.0]], vec![1.0, -1.0]),
        Sample::T2None => (vec![vec![1.0, -1.0], vec![-1.0, 1.0]], vec![1.0, 1.0]),
    };
    Ok((SparseMatrix::from_dense(&t)?, b))
}

/// Irreducible, strictly diagonally dominant Z-matrix with a ring of
/// couplings plus random extra ones, and a mixed-sign right-hand side.
fn random_t1(n: usize, seed: u64) -> Result<(SparseMatrix, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && (j == (i + 1) % n || rng.gen_bool(0.3)) {
                t[i][j] = -rng.gen_range(0.1..1.0);
            }
        }
        let off: f64 = t[i].iter().map(|v: &f64| v.abs()).sum();
        t[i][i] = off + rng.gen_range(0.1..1.0);
    }
    let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Ok((SparseMatrix::from_dense(&t)?, b))
}

pub fn oracle(a: &OracleArgs) -> Result<u8> {
    let (t, b) = if let Some(path) = &a.mm {
        let rhs = a.rhs.as_ref().expect("clap requires --rhs with --mm");
        (read_matrix_market(path)?, read_vector(rhs)?)
    } else if let Some(s) = a.sample {
        sample(s)?
    } else {
        random_t1(a.random.unwrap_or(0), a.seed)?
    };
    let kind = if a.parabolic {
        OperatorKind::Parabolic
    } else {
        OperatorKind::Elliptic
    };
    let found = enumerate_solutions(&t, &b, kind)?;
    println!("dim={}", t.n_rows());
    println!("patterns_tested={}", found.patterns_tested);
    println!("unresolved_patterns={}", found.unresolved_patterns);
    println!("solutions={}", found.point_solutions.len());
    for (i, x) in found.point_solutions.iter().enumerate() {
        println!("solution[{i}]={}", vector(x));
    }
    println!("families={}", found.families.len());
    for (i, f) in found.families.iter().enumerate() {
        println!("family[{i}].base={}", vector(&f.base));
        println!("family[{i}].direction={}", vector(&f.direction));
        match f.alpha_max {
            Some(m) => println!("family[{i}].alpha=[0,{m:.16e}]"),
            None => println!("family[{i}].alpha=[0,inf)"),
        }
    }

    let mut problem = match kind {
        OperatorKind::Elliptic => PlsProblem::elliptic(t.clone(), b.clone())?,
        OperatorKind::Parabolic => PlsProblem::parabolic(t.clone(), b.clone())?,
    };
    if kind == OperatorKind::Elliptic {
        let rep = check_t2(&t)?;
        if let (Verdict::Proven, Some(v), Some(w)) = (rep.t2_verdict, rep.left_null, rep.right_null)
        {
            problem = problem.with_t2(v, w)?;
        }
    }
    let sol = solve_pls(&problem, &a.solver.options())?;
    println!("solver_status={}", status_name(sol.status));
    println!("solver_K={}", sol.report.outer_iterations);
    let agree = match sol.status {
        SolveStatus::NoSolutionCertified => found.is_empty(),
        SolveStatus::MaxOuterExceeded => false,
        SolveStatus::Converged => {
            println!("solver_x={}", vector(&sol.x));
            let scale = 1.0 + sol.x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let close = |p: &[f64]| {
                p.iter()
                    .zip(&sol.x)
                    .all(|(p, x)| (p - x).abs() <= 1e-9 * scale)
            };
            found.point_solutions.iter().any(|p| close(p))
                || found
                    .families
                    .iter()
                    .any(|f| f.contains(&sol.x, 1e-8 * scale))
        }
    };
    println!("agree={agree}");
    Ok(if agree { exit_code(sol.status) } else { 1 })
}
