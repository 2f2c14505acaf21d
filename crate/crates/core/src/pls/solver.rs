//! The active-set Newton (Picard) iteration
//!
//! ```text
//! P^0 = O,   (I - P^k + T P^k) x^{k+1} = b,   P^{k+1} = P(x^{k+1})
//! ```
//!
//! and its parabolic counterpart with `I + T P^k`. Every step is one sparse
//! QMR solve warm-started from the previous iterate. The loop stops as soon
//! as the mask repeats, at which point `(P^{k+1} - P^k) x^{k+1} = 0` holds
//! trivially and `x^{k+1}` solves the piecewise linear system exactly (up to
//! the inner tolerance). For T1 matrices, or T2 matrices with `v^T b <= 0`,
//! the masks grow monotonically from `O`, so at most `n + 1` solves are
//! needed, the last of which only reproduces its mask.

use crate::error::{Error, Result};
use crate::krylov::{qmr_solve, KrylovStats};
use crate::matprops::{classify_solvability, default_class_tol, SolvabilityVerdict};
use crate::numkit::vector::{norm2, norm_inf, sub};
use crate::numkit::{ActiveBlock, LinearOperator, MaskedOperator, OperatorKind, SparseMatrix};
use crate::oracle::dense::Lu;
use crate::pls::{
    residual_nonsmooth, ActiveMask, IterationReport, PlsProblem, PlsSolution, ShiftForm,
    SolveStatus, SolverOptions,
};

/// Flipped entries smaller than this (relative to `||x||_inf`) count as
/// zeros when deciding whether a singular system's exit condition holds.
pub const FLIP_ZERO_TOL: f64 = 1e-9;

/// How the mask is read off an iterate, in the variable the loop iterates on.
#[derive(Clone, Copy)]
enum MaskRule {
    /// active iff `z_i >= threshold`
    AtLeast(f64),
    /// active iff `z_i < -threshold`; the complemented mask `I - P` used for
    /// `max{xi,x} + T min{xi,x} = b`
    Below(f64),
}

impl MaskRule {
    fn mask(self, z: &[f64]) -> ActiveMask {
        match self {
            MaskRule::AtLeast(t) => ActiveMask::from_bits(z.iter().map(|&v| v >= t).collect()),
            MaskRule::Below(t) => ActiveMask::from_bits(z.iter().map(|&v| v < -t).collect()),
        }
    }
}

struct Outcome {
    z: Vec<f64>,
    status: SolveStatus,
    report: IterationReport,
}

/// Runs the iteration on `M(P) z = rhs` where `M(P)` is the masked operator
/// of `kind`. `singular_exit` enables the T2 exit: when the next mask would
/// be `I` (a singular operator) and every newly activated entry is zero,
/// the current iterate already satisfies the exit condition.
fn iterate(
    t: &SparseMatrix,
    rhs: &[f64],
    kind: OperatorKind,
    rule: MaskRule,
    residual: &dyn Fn(&[f64]) -> f64,
    singular_exit: bool,
    opts: &SolverOptions,
) -> Result<Outcome> {
    let n = rhs.len();
    let max_outer = opts.max_outer.unwrap_or(n + 1);
    if max_outer == 0 {
        return Err(Error::InvalidArgument(
            "max_outer must be at least 1".into(),
        ));
    }
    let mut report = IterationReport::default();
    let mut mask = ActiveMask::empty(n);
    let mut z = vec![0.0; n];

    loop {
        if report.outer_iterations >= max_outer {
            return Ok(Outcome {
                z,
                status: SolveStatus::MaxOuterExceeded,
                report,
            });
        }
        let (z_next, stats) = inner_solve(t, &mask, kind, rhs, &z, opts)?;
        report.outer_iterations += 1;
        report.inner_stats.push(stats);
        report.residual_history.push(residual(&z_next));

        let raw = rule.mask(&z_next);
        report.mask_losses += mask
            .bits()
            .iter()
            .zip(raw.bits())
            .filter(|(&a, &b)| a && !b)
            .count();
        let next = if opts.enforce_monotone_mask {
            raw.join(&mask)
        } else {
            raw
        };
        report.active_counts.push(next.popcount());

        let stable = next == mask;
        let singular_stop = !stable && singular_exit && next.is_full() && {
            let scale = norm_inf(&z_next);
            next.gained_over(&mask)
                .all(|i| z_next[i].abs() <= FLIP_ZERO_TOL * scale)
        };
        z = z_next;
        if stable || singular_stop {
            for _ in 0..opts.refinement_steps {
                refine(t, &mask, kind, rhs, &mut z, opts)?;
            }
            return Ok(Outcome {
                z,
                status: SolveStatus::Converged,
                report,
            });
        }
        mask = next;
    }
}

/// One linear solve with the masked matrix, warm-started from `x0`.
fn inner_solve(
    t: &SparseMatrix,
    mask: &ActiveMask,
    kind: OperatorKind,
    rhs: &[f64],
    x0: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, KrylovStats)> {
    if !opts.reduce_active_block {
        let op = MaskedOperator::new(t, mask, kind)?;
        let x0 = warm_start(&op, rhs, x0.to_vec());
        return krylov_or_dense(&op, rhs, &x0, opts);
    }
    let block = ActiveBlock::new(t, mask, kind)?;
    if block.active().is_empty() {
        let stats = KrylovStats {
            converged: true,
            ..Default::default()
        };
        return Ok((rhs.to_vec(), stats));
    }
    let rhs_p = block.gather(rhs);
    let x0 = warm_start(&block, &rhs_p, block.gather(x0));
    match krylov_or_dense(&block, &rhs_p, &x0, opts) {
        Ok((z, stats)) => Ok((block.extend(&z, rhs), stats)),
        Err(Error::NotConverged { best, stats }) => Err(Error::NotConverged {
            best: block.extend(&best, rhs),
            stats,
        }),
        Err(Error::Breakdown { best, stats }) => Err(Error::Breakdown {
            best: block.extend(&best, rhs),
            stats,
        }),
        Err(e) => Err(e),
    }
}

/// One step of iterative refinement of `z` for the linear system of `mask`.
/// The correction is kept only if it lowers the residual.
fn refine(
    t: &SparseMatrix,
    mask: &ActiveMask,
    kind: OperatorKind,
    rhs: &[f64],
    z: &mut Vec<f64>,
    opts: &SolverOptions,
) -> Result<()> {
    let op = MaskedOperator::new(t, mask, kind)?;
    let residual = |z: &[f64]| {
        let mut mz = vec![0.0; z.len()];
        op.apply(z, &mut mz);
        sub(rhs, &mz)
    };
    let r = residual(z);
    let before = norm2(&r);
    if before == 0.0 {
        return Ok(());
    }
    let zeros = vec![0.0; r.len()];
    let Ok((d, _)) = inner_solve(t, mask, kind, &r, &zeros, opts) else {
        return Ok(());
    };
    let refined: Vec<f64> = z.iter().zip(&d).map(|(z, d)| z + d).collect();
    if norm2(&residual(&refined)) < before {
        *z = refined;
    }
    Ok(())
}

/// QMR, then dense LU if QMR fails on a system of at most
/// `opts.dense_fallback_dim` unknowns.
fn krylov_or_dense<A: LinearOperator>(
    op: &A,
    rhs: &[f64],
    x0: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, KrylovStats)> {
    match qmr_solve(op, rhs, x0, &opts.krylov) {
        Err(Error::NotConverged { best, stats }) | Err(Error::Breakdown { best, stats })
            if op.dim() <= opts.dense_fallback_dim =>
        {
            let failed = |best, stats: KrylovStats| {
                if stats.breakdown {
                    Error::Breakdown { best, stats }
                } else {
                    Error::NotConverged { best, stats }
                }
            };
            let n = op.dim();
            let mut cols = vec![vec![0.0; n]; n];
            let mut e = vec![0.0; n];
            for (j, col) in cols.iter_mut().enumerate() {
                e[j] = 1.0;
                op.apply(&e, col);
                e[j] = 0.0;
            }
            let dense: Vec<Vec<f64>> = (0..n)
                .map(|i| cols.iter().map(|c| c[i]).collect())
                .collect();
            let Some(lu) = Lu::factor(&dense) else {
                return Err(failed(best, stats));
            };
            let x = lu.solve(rhs);
            let mut ax = vec![0.0; n];
            op.apply(&x, &mut ax);
            let stats = KrylovStats {
                final_residual_norm: norm2(&sub(rhs, &ax)),
                converged: true,
                ..stats
            };
            Ok((x, stats))
        }
        other => other,
    }
}

/// Keeps the previous iterate as starting guess only if it beats zero. A
/// stale iterate with huge entries would otherwise inflate the initial
/// residual and with it the accuracy QMR can reach.
fn warm_start<A: LinearOperator>(op: &A, rhs: &[f64], x0: Vec<f64>) -> Vec<f64> {
    let mut ax = vec![0.0; rhs.len()];
    op.apply(&x0, &mut ax);
    if norm2(&sub(rhs, &ax)) < norm2(rhs) {
        x0
    } else {
        vec![0.0; rhs.len()]
    }
}

fn verify(residual: f64, rhs: &[f64], opts: &SolverOptions) -> Result<()> {
    let tolerance = opts.res_tol * norm_inf(rhs);
    if residual > tolerance {
        return Err(Error::VerificationFailed {
            residual,
            tolerance,
        });
    }
    Ok(())
}

fn no_solution(n: usize, report: IterationReport) -> PlsSolution {
    PlsSolution {
        x: vec![0.0; n],
        y: vec![0.0; n],
        status: SolveStatus::NoSolutionCertified,
        report,
    }
}

/// Solves `min{0,x} + T max{0,x} = b`, i.e. `[I - P(x) + T P(x)] x = b`.
///
/// When null vectors are attached, `v^T b > 0` is reported as
/// [`SolveStatus::NoSolutionCertified`] without iterating, and `v^T b = 0`
/// marks the result as one member of the family `x + alpha w`.
pub fn solve_elliptic_pls(p: &PlsProblem, opts: &SolverOptions) -> Result<PlsSolution> {
    if p.kind != OperatorKind::Elliptic {
        return Err(Error::InvalidArgument(
            "solve_elliptic_pls needs an elliptic problem".into(),
        ));
    }
    if p.shift.is_some() {
        return solve_shifted_problem(p, opts);
    }
    solve_plain(p, &p.b, opts)
}

fn classify(
    p: &PlsProblem,
    rhs: &[f64],
    opts: &SolverOptions,
) -> Result<Option<crate::matprops::Solvability>> {
    match &p.t2 {
        None => Ok(None),
        Some(t2) => {
            let tol = opts
                .class_tol
                .unwrap_or_else(|| default_class_tol(&t2.v, rhs));
            classify_solvability(&t2.v, rhs, tol).map(Some)
        }
    }
}

fn solve_plain(p: &PlsProblem, b: &[f64], opts: &SolverOptions) -> Result<PlsSolution> {
    let solvability = classify(p, b, opts)?;
    let mut family = None;
    if let Some(s) = &solvability {
        match s.verdict {
            SolvabilityVerdict::NoSolution => {
                let report = IterationReport {
                    solvability,
                    ..Default::default()
                };
                return Ok(no_solution(p.dim(), report));
            }
            SolvabilityVerdict::FamilyAlongW => family = p.t2.as_ref().map(|t2| t2.w.clone()),
            SolvabilityVerdict::Unique => {}
        }
    }

    let residual = |x: &[f64]| {
        residual_nonsmooth(&p.t, b, x, OperatorKind::Elliptic, None).unwrap_or(f64::INFINITY)
    };
    let out = iterate(
        &p.t,
        b,
        OperatorKind::Elliptic,
        MaskRule::AtLeast(opts.sign_threshold),
        &residual,
        p.t2.is_some(),
        opts,
    )?;
    let mut report = out.report;
    report.solvability = solvability;
    report.family_direction = family;
    if out.status == SolveStatus::Converged {
        verify(residual(&out.z), b, opts)?;
    }
    let y = out.z.iter().map(|&v| v.max(0.0)).collect();
    Ok(PlsSolution {
        x: out.z,
        y,
        status: out.status,
        report,
    })
}

/// Solves `x + T max{0,x} = b`, i.e. `[I + T P(x)] x = b`.
///
/// This is the elliptic iteration applied to `I + T`, which is a
/// nonsingular M-matrix whenever `T` is T1 or T2, so the solution is always
/// unique and no solvability test is needed.
pub fn solve_parabolic_pls(p: &PlsProblem, opts: &SolverOptions) -> Result<PlsSolution> {
    if p.kind != OperatorKind::Parabolic {
        return Err(Error::InvalidArgument(
            "solve_parabolic_pls needs a parabolic problem".into(),
        ));
    }
    let residual = |x: &[f64]| {
        residual_nonsmooth(&p.t, &p.b, x, OperatorKind::Parabolic, None).unwrap_or(f64::INFINITY)
    };
    let out = iterate(
        &p.t,
        &p.b,
        OperatorKind::Parabolic,
        MaskRule::AtLeast(opts.sign_threshold),
        &residual,
        false,
        opts,
    )?;
    if out.status == SolveStatus::Converged {
        verify(residual(&out.z), &p.b, opts)?;
    }
    let y = out.z.iter().map(|&v| v.max(0.0)).collect();
    Ok(PlsSolution {
        x: out.z,
        y,
        status: out.status,
        report: out.report,
    })
}

/// Solves `min{xi,x} + T max{xi,x} = b` or `max{xi,x} + T min{xi,x} = b`
/// through `z = x - xi` and `c = b - (I + T) xi`.
pub fn solve_shifted(
    t: &SparseMatrix,
    b: &[f64],
    xi: &[f64],
    form: ShiftForm,
    opts: &SolverOptions,
) -> Result<PlsSolution> {
    let p = PlsProblem::shifted(t.clone(), b.to_vec(), xi.to_vec(), form)?;
    solve_shifted_problem(&p, opts)
}

fn solve_shifted_problem(p: &PlsProblem, opts: &SolverOptions) -> Result<PlsSolution> {
    let (xi, form) = p
        .shift()
        .ok_or_else(|| Error::InvalidArgument("problem has no shift".into()))?;
    let t_xi = p.t.spmv(xi)?;
    let c: Vec<f64> =
        p.b.iter()
            .zip(xi)
            .zip(&t_xi)
            .map(|((b, s), ts)| b - s - ts)
            .collect();

    let (rule, class_rhs) = match form {
        ShiftForm::MinPlusTMax => (MaskRule::AtLeast(opts.sign_threshold), c.clone()),
        // with u = -z this is min{0,u} + T max{0,u} = -c
        ShiftForm::MaxPlusTMin => (
            MaskRule::Below(opts.sign_threshold),
            c.iter().map(|v| -v).collect(),
        ),
    };
    let solvability = classify(p, &class_rhs, opts)?;
    let mut family = None;
    if let Some(s) = &solvability {
        match s.verdict {
            SolvabilityVerdict::NoSolution => {
                let report = IterationReport {
                    solvability,
                    ..Default::default()
                };
                return Ok(no_solution(p.dim(), report));
            }
            SolvabilityVerdict::FamilyAlongW => {
                family = p.t2.as_ref().map(|t2| match form {
                    ShiftForm::MinPlusTMax => t2.w.clone(),
                    ShiftForm::MaxPlusTMin => t2.w.iter().map(|v| -v).collect(),
                })
            }
            SolvabilityVerdict::Unique => {}
        }
    }

    let to_x = |z: &[f64]| -> Vec<f64> { z.iter().zip(xi).map(|(z, s)| z + s).collect() };
    let residual = |z: &[f64]| {
        residual_nonsmooth(
            &p.t,
            &p.b,
            &to_x(z),
            OperatorKind::Elliptic,
            Some((xi, form)),
        )
        .unwrap_or(f64::INFINITY)
    };
    let out = iterate(
        &p.t,
        &c,
        OperatorKind::Elliptic,
        rule,
        &residual,
        p.t2.is_some(),
        opts,
    )?;
    if out.status == SolveStatus::Converged {
        verify(residual(&out.z), &c, opts)?;
    }
    let x = to_x(&out.z);
    let y = sub(
        &x.iter().zip(xi).map(|(v, s)| v.max(*s)).collect::<Vec<_>>(),
        xi,
    );
    let mut report = out.report;
    report.solvability = solvability;
    report.family_direction = family;
    Ok(PlsSolution {
        x,
        y,
        status: out.status,
        report,
    })
}

/// Dispatches on the problem's kind and shift.
pub fn solve(p: &PlsProblem, opts: &SolverOptions) -> Result<PlsSolution> {
    match p.kind {
        OperatorKind::Elliptic => solve_elliptic_pls(p, opts),
        OperatorKind::Parabolic => solve_parabolic_pls(p, opts),
    }
}
