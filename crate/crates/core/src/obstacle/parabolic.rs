use crate::error::{Error, Result};
use crate::numkit::SparseMatrix;
use crate::pls::{solve_parabolic_pls, IterationReport, PlsProblem, SolveStatus, SolverOptions};

use super::{assemble_elliptic, ObstacleSpec};

/// Starting state of a time-dependent run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitialCondition {
    /// `max(psi, g)` with `g` the Dirichlet boundary value; `psi` for
    /// Neumann problems.
    #[default]
    ClampedObstacle,
    /// `u = psi`
    Obstacle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParabolicOptions {
    pub tau: f64,
    pub nu: usize,
    pub initial: InitialCondition,
}

impl ParabolicOptions {
    pub fn new(tau: f64, nu: usize) -> Self {
        ParabolicOptions {
            tau,
            nu,
            initial: InitialCondition::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParabolicRun {
    pub tau: f64,
    pub nu: usize,
    pub dt: f64,
    pub per_step_reports: Vec<IterationReport>,
    pub per_step_status: Vec<SolveStatus>,
    /// `nu + 1` interior fields, the initial condition first.
    pub snapshots: Vec<Vec<f64>>,
}

impl ParabolicRun {
    /// Outer iteration count of every step.
    pub fn step_counts(&self) -> Vec<usize> {
        self.per_step_reports
            .iter()
            .map(|r| r.outer_iterations)
            .collect()
    }

    pub fn final_field(&self) -> &[f64] {
        self.snapshots
            .last()
            .expect("a run keeps its initial state")
    }
}

/// The linear complementarity system solved at every implicit Euler step:
/// `x + T max{0,x} = b(u)` with `T = dt A`.
#[derive(Clone, Debug)]
pub struct ParabolicSystem {
    pub t: SparseMatrix,
    pub psi: Vec<f64>,
    pub dt: f64,
    f: Vec<f64>,
    c: f64,
    t_psi: Vec<f64>,
    dirichlet: Option<f64>,
}

impl ParabolicSystem {
    pub fn new(spec: &ObstacleSpec, n: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let d = assemble_elliptic(spec, n)?;
        let c = dt / d.scale;
        let (a, f) = if spec.problem.is_neumann() {
            let inv: Vec<f64> = d.row_weights.iter().map(|w| 1.0 / w).collect();
            let a = d.t.scale_rows(&inv)?;
            let f = d.f_vec.iter().zip(&inv).map(|(f, s)| f * s).collect();
            (a, f)
        } else {
            (d.t, d.f_vec)
        };
        let t = a.scaled(c);
        let t_psi = t.spmv(&d.psi_vec)?;
        Ok(ParabolicSystem {
            t,
            psi: d.psi_vec,
            dt,
            f,
            c,
            t_psi,
            dirichlet: spec.problem.dirichlet_value(),
        })
    }

    pub fn initial_field(&self, initial: InitialCondition) -> Vec<f64> {
        match (initial, self.dirichlet) {
            (InitialCondition::ClampedObstacle, Some(g)) => {
                self.psi.iter().map(|p| p.max(g)).collect()
            }
            _ => self.psi.clone(),
        }
    }

    /// `b = u + dt f - (I + dt A) psi`
    pub fn rhs(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.f)
            .zip(&self.psi)
            .zip(&self.t_psi)
            .map(|(((u, f), p), tp)| u + self.c * f - p - tp)
            .collect()
    }
}

/// Implicit Euler in time: every step solves `x + T max{0,x} = b` with
/// `T = dt A` and `b = u^n + dt f - (I + dt A) psi`, then sets
/// `u^{n+1} = max{0,x} + psi`.
pub fn run_parabolic(
    spec: &ObstacleSpec,
    n: usize,
    popts: &ParabolicOptions,
    opts: &SolverOptions,
) -> Result<ParabolicRun> {
    if !(popts.tau > 0.0) || !popts.tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tau must be positive, got {}",
            popts.tau
        )));
    }
    if popts.nu == 0 {
        return Err(Error::InvalidArgument("nu must be at least 1".into()));
    }
    let dt = popts.tau / popts.nu as f64;
    let sys = ParabolicSystem::new(spec, n, dt)?;
    let mut u = sys.initial_field(popts.initial);
    let mut run = ParabolicRun {
        tau: popts.tau,
        nu: popts.nu,
        dt,
        per_step_reports: Vec::with_capacity(popts.nu),
        per_step_status: Vec::with_capacity(popts.nu),
        snapshots: vec![u.clone()],
    };
    for _ in 0..popts.nu {
        let sol = solve_parabolic_pls(&PlsProblem::parabolic(sys.t.clone(), sys.rhs(&u))?, opts)?;
        u = sol.y.iter().zip(&sys.psi).map(|(y, p)| y + p).collect();
        run.per_step_reports.push(sol.report);
        run.per_step_status.push(sol.status);
        run.snapshots.push(u.clone());
    }
    Ok(run)
}
