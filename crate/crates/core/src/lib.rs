//! Solvers for piecewise linear systems
//!
//! ```text
//! min{0,x} + T max{0,x} = b        x + T max{0,x} = b
//! ```
//!
//! with `T` an irreducible M-matrix (or a singular one with positive null
//! vectors), by a finitely terminating active-set Newton iteration, plus
//! finite-difference discretizations of classical and time-dependent
//! obstacle problems.

pub mod error;
pub mod krylov;
pub mod matprops;
pub mod numkit;
pub mod obstacle;
pub mod oracle;
pub mod pls;
pub mod tables;

pub use error::{Error, Result};
pub use krylov::{qmr_solve, KrylovOptions, KrylovStats, Preconditioner};
pub use matprops::{
    check_t1, check_t2, classify_solvability, default_class_tol, MatrixClassReport, Solvability,
    SolvabilityVerdict, Verdict,
};
pub use numkit::{LinearOperator, MaskedOperator, OperatorKind, SparseMatrix};
pub use obstacle::{
    assemble_elliptic, coincidence_set, run_parabolic, solve_obstacle, CornerRule,
    DiscreteObstacle, InitialCondition, ObstacleSolution, ObstacleSpec, ParabolicOptions,
    ParabolicRun, ParabolicSystem, Problem,
};
pub use oracle::{enumerate_solutions, w_matrix, Family, OracleResult, WDiagonal};
pub use pls::{
    active_mask, lcp_check, residual_nonsmooth, solve, solve_elliptic_pls, solve_parabolic_pls,
    solve_shifted, ActiveMask, CheckReport, IterationReport, PlsProblem, PlsSolution, ShiftForm,
    SolveStatus, SolverOptions,
};
pub use tables::{BenchTable, TableId};
