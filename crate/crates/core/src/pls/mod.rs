//! Piecewise linear systems and the active-set iteration that solves them.

mod mask;
mod problem;
mod residual;
mod solver;

pub use mask::{active_mask, ActiveMask, Threshold};
pub use problem::{
    IterationReport, PlsProblem, PlsSolution, ShiftForm, SolveStatus, SolverOptions, T2Data,
};
pub use residual::{lcp_check, residual_nonsmooth, CheckReport};
pub use solver::{solve, solve_elliptic_pls, solve_parabolic_pls, solve_shifted, FLIP_ZERO_TOL};
