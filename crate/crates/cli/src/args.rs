use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pls_core::{CornerRule, Preconditioner, Problem, SolverOptions, TableId};

#[derive(Debug, Parser)]
#[command(
    name = "pls",
    version,
    about = "Active-set solvers for piecewise linear systems and obstacle problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a stationary or time-dependent obstacle problem.
    Solve(SolveArgs),
    /// Run the sweep behind one of the reference iteration-count tables.
    Bench(BenchArgs),
    /// Classify a matrix as T1, T2 or neither.
    Check(CheckArgs),
    /// Enumerate all solutions of a small system and cross-check the solver.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    Tent,
    TentNeumann,
    Torsion,
    TorsionNeumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CornerName {
    Average,
    Xedge,
    Yedge,
}

impl From<CornerName> for CornerRule {
    fn from(c: CornerName) -> Self {
        match c {
            CornerName::Average => CornerRule::Average,
            CornerName::Xedge => CornerRule::XEdge,
            CornerName::Yedge => CornerRule::YEdge,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecondName {
    None,
    Jacobi,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemName,
    /// Interior grid points per direction.
    #[arg(long)]
    pub n: usize,
    /// Torsion constant, negative.
    #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
    pub c: f64,
    /// Corner treatment when rebuilding Neumann boundary values.
    #[arg(long, value_enum, default_value_t = CornerName::Average)]
    pub corner: CornerName,
}

impl ProblemArgs {
    pub fn problem(&self) -> Problem {
        match self.problem {
            ProblemName::Tent => Problem::Tent,
            ProblemName::TentNeumann => Problem::TentNeumann,
            ProblemName::Torsion => Problem::Torsion { c: self.c },
            ProblemName::TorsionNeumann => Problem::TorsionNeumann { c: self.c },
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Relative residual target of the inner QMR solves.
    #[arg(long, default_value_t = 1e-12)]
    pub krylov_tol: f64,
    /// Entries above `-sign_tol` count as nonnegative.
    #[arg(long, default_value_t = 0.0)]
    pub sign_tol: f64,
    /// Use the raw sign mask instead of joining it with the previous one.
    #[arg(long)]
    pub no_monotone_mask: bool,
    #[arg(long, value_enum, default_value_t = PrecondName::Jacobi)]
    pub preconditioner: PrecondName,
    /// Run QMR on the full masked matrix instead of its active block.
    #[arg(long)]
    pub full_operator: bool,
}

impl SolverArgs {
    pub fn options(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        o.krylov.rel_tol = self.krylov_tol;
        o.krylov.preconditioner = match self.preconditioner {
            PrecondName::None => Preconditioner::None,
            PrecondName::Jacobi => Preconditioner::Jacobi,
        };
        o.sign_threshold = -self.sign_tol;
        o.enforce_monotone_mask = !self.no_monotone_mask;
        o.reduce_active_block = !self.full_operator;
        o
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Final time; switches to implicit Euler time stepping.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of time steps.
    #[arg(long, default_value_t = 20)]
    pub nu: usize,
    /// Field CSV with the boundary included.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// 1, 2, 2n, 3 or 4.
    #[arg(long)]
    pub table: TableId,
    /// Restrict the sweep to these grid sizes.
    #[arg(long = "n", value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Also write the CSV form here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["problem", "mm"]))]
pub struct CheckArgs {
    #[arg(long, value_enum, requires = "n")]
    pub problem: Option<ProblemName>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
    pub c: f64,
    /// Matrix Market file.
    #[arg(long)]
    pub mm: Option<PathBuf>,
    /// Right-hand side (one value per line) to classify against a T2 matrix.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sample {
    /// `[2 -1; -1 2]`, `b = (1, -2)`
    T1,
    /// `[1 -1; -1 1]`, `b = (1, -1)`: a half-line of solutions
    T2Family,
    /// `[1 -1; -1 1]`, `b = (1, 1)`: no solution
    T2None,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("system").required(true).args(["mm", "sample", "random"]))]
pub struct OracleArgs {
    /// Matrix Market file; needs `--rhs`.
    #[arg(long, requires = "rhs")]
    pub mm: Option<PathBuf>,
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub sample: Option<Sample>,
    /// Random diagonally dominant T1 system of this size.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use `x + T max{0,x} = b` instead of `min{0,x} + T max{0,x} = b`.
    #[arg(long)]
    pub parabolic: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}
