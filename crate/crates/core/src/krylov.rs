//! Quasi-minimal residual (QMR) solver for sparse nonsymmetric systems.
//!
//! Two-sided Lanczos biorthogonalization without look-ahead, in the coupled
//! two-term recurrence form, with optional Jacobi (left) preconditioning.
//! The recursively updated residual is only a hint: convergence is always
//! confirmed on the true residual `b - A x`, which is recomputed every
//! [`TRUE_RESIDUAL_EVERY`] iterations and whenever the recurrence claims
//! convergence. If the two disagree the process restarts from the current
//! iterate.

use crate::error::{Error, Result};
use crate::numkit::vector::{axpy, dot, ensure_len, norm2};
use crate::numkit::LinearOperator;

/// Pivots smaller than this in magnitude are treated as a breakdown.
pub const BREAKDOWN_PIVOT: f64 = 1e-300;

/// Period of the explicit true-residual check.
pub const TRUE_RESIDUAL_EVERY: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Preconditioner {
    #[default]
    None,
    Jacobi,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `None` means `10 * n`.
    pub max_iters: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_iters: None,
            preconditioner: Preconditioner::None,
        }
    }
}

impl KrylovOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 0.0) || !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidArgument(
                "Krylov tolerances must be nonnegative".into(),
            ));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidArgument(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    /// Euclidean norm of the true residual of the returned iterate.
    pub final_residual_norm: f64,
    pub converged: bool,
    pub breakdown: bool,
}

struct Best {
    x: Vec<f64>,
    norm: f64,
}

impl Best {
    fn offer(&mut self, x: &[f64], norm: f64) {
        if norm < self.norm {
            self.norm = norm;
            self.x.copy_from_slice(x);
        }
    }
}

fn true_residual<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    op.apply(x, r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    norm2(r)
}

/// Solves `op x = b` starting from `x0`.
///
/// On success the returned iterate satisfies
/// `||b - op x||_2 <= rel_tol ||b||_2 + abs_tol`. Exhausting `max_iters`
/// yields [`Error::NotConverged`] and an unrecoverable pivot yields
/// [`Error::Breakdown`]; both carry the best iterate seen.
pub fn qmr_solve<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, KrylovStats)> {
    opts.validate()?;
    let n = op.dim();
    ensure_len(b, n, "right-hand side")?;
    ensure_len(x0, n, "initial guess")?;

    let max_iters = opts.max_iters.unwrap_or(10 * n.max(1));
    let target = opts.rel_tol * norm2(b) + opts.abs_tol;
    let inv_diag: Option<Vec<f64>> = match opts.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(
            op.diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        ),
    };
    let precondition = |src: &[f64], dst: &mut [f64]| match &inv_diag {
        Some(inv) => dst
            .iter_mut()
            .zip(src.iter().zip(inv))
            .for_each(|(d, (s, m))| *d = s * m),
        None => dst.copy_from_slice(src),
    };

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut rnorm = true_residual(op, b, &x, &mut r);
    let mut best = Best {
        x: x.clone(),
        norm: rnorm,
    };
    let mut stats = KrylovStats {
        iterations: 0,
        final_residual_norm: rnorm,
        converged: rnorm <= target,
        breakdown: false,
    };
    if stats.converged {
        return Ok((x, stats));
    }

    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut z_t = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut p_t = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    'restart: loop {
        // fresh Lanczos pair seeded with the current residual
        let mut v_tilde = r.clone();
        let mut w_tilde = r.clone();
        precondition(&v_tilde, &mut y);
        let mut rho = norm2(&y);
        z.copy_from_slice(&w_tilde);
        let mut xi = norm2(&z);
        let mut gamma_prev = 1.0;
        let mut eta = -1.0;
        let mut eps_prev = 1.0;
        let mut theta_prev = 0.0;
        let mut first = true;

        loop {
            let mut pivot_failed = rho < BREAKDOWN_PIVOT || xi < BREAKDOWN_PIVOT;
            let mut delta = 0.0;
            if !pivot_failed {
                v.iter_mut().zip(&v_tilde).for_each(|(a, b)| *a = b / rho);
                y.iter_mut().for_each(|a| *a /= rho);
                w.iter_mut().zip(&w_tilde).for_each(|(a, b)| *a = b / xi);
                z.iter_mut().for_each(|a| *a /= xi);
                delta = dot(&z, &y);
                pivot_failed = delta.abs() < BREAKDOWN_PIVOT;
            }
            let mut eps = 0.0;
            let mut beta = 0.0;
            if !pivot_failed {
                precondition(&z, &mut z_t);
                if first {
                    p.copy_from_slice(&y);
                    q.copy_from_slice(&z_t);
                } else {
                    let cp = xi * delta / eps_prev;
                    let cq = rho * delta / eps_prev;
                    p.iter_mut().zip(&y).for_each(|(a, b)| *a = b - cp * *a);
                    q.iter_mut().zip(&z_t).for_each(|(a, b)| *a = b - cq * *a);
                }
                op.apply(&p, &mut p_t);
                eps = dot(&q, &p_t);
                beta = eps / delta;
                pivot_failed = eps.abs() < BREAKDOWN_PIVOT || beta.abs() < BREAKDOWN_PIVOT;
            }
            if pivot_failed {
                rnorm = true_residual(op, b, &x, &mut r);
                best.offer(&x, rnorm);
                stats.final_residual_norm = rnorm;
                if rnorm <= target {
                    stats.converged = true;
                    return Ok((x, stats));
                }
                stats.breakdown = true;
                stats.final_residual_norm = best.norm;
                return Err(Error::Breakdown {
                    best: best.x,
                    stats,
                });
            }

            v_tilde
                .iter_mut()
                .zip(p_t.iter().zip(&v))
                .for_each(|(a, (pt, vi))| *a = pt - beta * vi);
            precondition(&v_tilde, &mut y);
            let rho_next = norm2(&y);

            op.apply_transpose(&q, &mut scratch);
            w_tilde
                .iter_mut()
                .zip(scratch.iter().zip(&w))
                .for_each(|(a, (aq, wi))| *a = aq - beta * wi);
            z.copy_from_slice(&w_tilde);
            let xi_next = norm2(&z);

            let theta = rho_next / (gamma_prev * beta.abs());
            let gamma = 1.0 / (1.0 + theta * theta).sqrt();
            eta = -eta * rho * gamma * gamma / (beta * gamma_prev * gamma_prev);
            if first {
                d.iter_mut().zip(&p).for_each(|(a, b)| *a = eta * b);
                s.iter_mut().zip(&p_t).for_each(|(a, b)| *a = eta * b);
            } else {
                let c = (theta_prev * gamma) * (theta_prev * gamma);
                d.iter_mut()
                    .zip(&p)
                    .for_each(|(a, b)| *a = eta * b + c * *a);
                s.iter_mut()
                    .zip(&p_t)
                    .for_each(|(a, b)| *a = eta * b + c * *a);
            }
            axpy(1.0, &d, &mut x);
            axpy(-1.0, &s, &mut r);
            stats.iterations += 1;

            rho = rho_next;
            xi = xi_next;
            gamma_prev = gamma;
            theta_prev = theta;
            eps_prev = eps;
            first = false;

            let recurrence_done = norm2(&r) <= target;
            if recurrence_done || stats.iterations.is_multiple_of(TRUE_RESIDUAL_EVERY) {
                rnorm = true_residual(op, b, &x, &mut scratch);
                best.offer(&x, rnorm);
                stats.final_residual_norm = rnorm;
                if rnorm <= target {
                    stats.converged = true;
                    return Ok((x, stats));
                }
                if recurrence_done && stats.iterations < max_iters {
                    // residual gap: restart from the true residual
                    r.copy_from_slice(&scratch);
                    continue 'restart;
                }
            }
            if stats.iterations >= max_iters {
                stats.final_residual_norm = best.norm;
                return Err(Error::NotConverged {
                    best: best.x,
                    stats,
                });
            }
        }
    }
}
