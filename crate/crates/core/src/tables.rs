//! Reference iteration counts for the four benchmark tables and the sweeps
//! that regenerate them.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krylov::Preconditioner;
use crate::obstacle::{run_parabolic, solve_obstacle, ObstacleSpec, ParabolicOptions, Problem};
use crate::pls::SolverOptions;

pub const GRID_SIZES: [usize; 4] = [25, 50, 75, 100];
pub const TORSION_C: [f64; 4] = [-5.0, -10.0, -15.0, -20.0];

/// Tent, Dirichlet: `K` per grid size.
pub const TENT_K: [usize; 4] = [6, 10, 10, 12];
/// Tent, Neumann variant.
pub const TENT_NEUMANN_K: [usize; 4] = [12, 25, 37, 49];
/// Torsion `K(C, N)`, rows by `C`, columns by `N`; shared by both boundary
/// conditions and by every step of the time-dependent run.
pub const TORSION_K: [[usize; 4]; 4] = [
    [9, 17, 25, 32],
    [5, 10, 13, 16],
    [4, 7, 9, 11],
    [4, 5, 7, 9],
];
/// Time-dependent tent: first step, then every later step.
pub const PARABOLIC_TENT_FIRST: [usize; 4] = [5, 6, 8, 8];
pub const PARABOLIC_TENT_LATER: [usize; 4] = [5, 6, 6, 6];

pub const PARABOLIC_TENT_TAU: f64 = 1e4;
pub const PARABOLIC_TORSION_TAU: f64 = 5.0;
pub const PARABOLIC_STEPS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableId {
    /// Tent, Dirichlet and Neumann.
    Tent,
    /// Torsion, Dirichlet.
    Torsion,
    /// Torsion, Neumann.
    TorsionNeumann,
    ParabolicTent,
    ParabolicTorsion,
}

impl TableId {
    pub const ALL: [TableId; 5] = [
        TableId::Tent,
        TableId::Torsion,
        TableId::TorsionNeumann,
        TableId::ParabolicTent,
        TableId::ParabolicTorsion,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            TableId::Tent => "1",
            TableId::Torsion => "2",
            TableId::TorsionNeumann => "2n",
            TableId::ParabolicTent => "3",
            TableId::ParabolicTorsion => "4",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            TableId::Tent => "tent obstacle, Dirichlet (K) and Neumann (K_V)",
            TableId::Torsion => "elastic-plastic torsion, Dirichlet",
            TableId::TorsionNeumann => "elastic-plastic torsion, Neumann",
            TableId::ParabolicTent => "time-dependent tent, tau=1e4, nu=20",
            TableId::ParabolicTorsion => "time-dependent torsion, tau=5, nu=20",
        }
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.key() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("unknown table '{s}' (use 1, 2, 2n, 3 or 4)"))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchStatus {
    Exact,
    WithinTolerance,
    Mismatch,
    Failed,
}

impl MatchStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatchStatus::Exact => "exact",
            MatchStatus::WithinTolerance => "within",
            MatchStatus::Mismatch => "mismatch",
            MatchStatus::Failed => "error",
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, MatchStatus::Exact | MatchStatus::WithinTolerance)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchCell {
    pub row: String,
    pub column: String,
    /// `None` when the run failed.
    pub k: Option<usize>,
    pub reference: usize,
    pub tolerance: usize,
    pub error: Option<String>,
    /// Whether the active set grew monotonically in every solve of the cell.
    pub monotone: bool,
    /// Whether every solve of the cell stopped within `n` iterations.
    pub within_bound: bool,
}

impl BenchCell {
    pub fn status(&self) -> MatchStatus {
        match self.k {
            None => MatchStatus::Failed,
            Some(k) if k == self.reference => MatchStatus::Exact,
            Some(k) if k.abs_diff(self.reference) <= self.tolerance => MatchStatus::WithinTolerance,
            Some(_) => MatchStatus::Mismatch,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchTable {
    pub id: TableId,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// Row-major, `rows.len() * columns.len()` entries.
    pub cells: Vec<BenchCell>,
    /// One entry per independent run, in parameter order.
    pub wall_times_ms: Vec<f64>,
}

impl BenchTable {
    pub fn cell(&self, row: usize, col: usize) -> &BenchCell {
        &self.cells[row * self.columns.len() + col]
    }

    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|c| c.status().is_ok())
    }

    pub fn any_failed(&self) -> bool {
        self.cells.iter().any(|c| c.k.is_none())
    }

    /// `table,row,column,k,reference,tolerance,match`; no timings, so the
    /// output is stable across runs.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("table,row,column,k,reference,tolerance,match\n");
        for c in &self.cells {
            let k = c.k.map_or_else(|| "NA".to_string(), |k| k.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                self.id.key(),
                c.row,
                c.column,
                k,
                c.reference,
                c.tolerance,
                c.status().as_str()
            );
        }
        s
    }

    /// Aligned grid of `k(reference)` entries; mismatches are starred and
    /// failures shown as `ERR`.
    pub fn to_text(&self) -> String {
        let entry = |c: &BenchCell| match c.status() {
            MatchStatus::Failed => format!("ERR({})", c.reference),
            MatchStatus::Mismatch => format!("{}({})*", c.k.unwrap_or(0), c.reference),
            _ => format!("{}({})", c.k.unwrap_or(0), c.reference),
        };
        let label_w = self.rows.iter().map(|r| r.len()).max().unwrap_or(0).max(4);
        let col_w = self
            .cells
            .iter()
            .map(|c| entry(c).len())
            .chain(self.columns.iter().map(|c| c.len()))
            .max()
            .unwrap_or(0);
        let mut s = format!("table {}: {}\n", self.id.key(), self.id.title());
        let _ = write!(s, "{:label_w$}", "");
        for c in &self.columns {
            let _ = write!(s, "  {c:>col_w$}");
        }
        s.push('\n');
        for (r, label) in self.rows.iter().enumerate() {
            let _ = write!(s, "{label:label_w$}");
            for c in 0..self.columns.len() {
                let _ = write!(s, "  {:>col_w$}", entry(self.cell(r, c)));
            }
            s.push('\n');
        }
        let ok = self.cells.iter().filter(|c| c.status().is_ok()).count();
        let _ = writeln!(s, "match: {ok}/{} cells within tolerance", self.cells.len());
        s
    }
}

/// Options used for every table run: defaults plus Jacobi preconditioning.
pub fn bench_solver_options() -> SolverOptions {
    let mut o = SolverOptions::default();
    o.krylov.preconditioner = Preconditioner::Jacobi;
    o
}

struct Run {
    counts: std::result::Result<Vec<usize>, String>,
    monotone: bool,
    within_bound: bool,
    ms: f64,
}

fn stationary(problem: Problem, n: usize, opts: &SolverOptions) -> Run {
    let start = Instant::now();
    let res = solve_obstacle(&ObstacleSpec::new(problem), n, opts);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match res {
        Ok(s) => Run {
            counts: Ok(vec![s.report.outer_iterations]),
            monotone: s.report.is_monotone(),
            within_bound: s.report.outer_iterations <= n * n,
            ms,
        },
        Err(e) => Run {
            counts: Err(e.to_string()),
            monotone: true,
            within_bound: true,
            ms,
        },
    }
}

fn transient(problem: Problem, n: usize, tau: f64, opts: &SolverOptions) -> Run {
    let start = Instant::now();
    let res = run_parabolic(
        &ObstacleSpec::new(problem),
        n,
        &ParabolicOptions::new(tau, PARABOLIC_STEPS),
        opts,
    );
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match res {
        Ok(r) => Run {
            counts: Ok(r.step_counts()),
            monotone: r.per_step_reports.iter().all(|s| s.is_monotone()),
            within_bound: r
                .per_step_reports
                .iter()
                .all(|s| s.outer_iterations <= n * n),
            ms,
        },
        Err(e) => Run {
            counts: Err(e.to_string()),
            monotone: true,
            within_bound: true,
            ms,
        },
    }
}

fn n_label(n: usize) -> String {
    format!("N={n}")
}

fn c_label(c: f64) -> String {
    format!("C={c}")
}

/// Runs every cell of a table, in parallel, and assembles the result in
/// parameter order.
pub fn run_table(id: TableId, opts: &SolverOptions) -> BenchTable {
    run_table_on(id, &GRID_SIZES, opts)
}

/// [`run_table`] restricted to a subset of [`GRID_SIZES`].
pub fn run_table_on(id: TableId, sizes: &[usize], opts: &SolverOptions) -> BenchTable {
    let col_of = |n: usize| GRID_SIZES.iter().position(|&m| m == n);
    let sizes: Vec<(usize, usize)> = sizes
        .iter()
        .filter_map(|&n| col_of(n).map(|c| (n, c)))
        .collect();
    let cell = |row: String,
                column: String,
                k: std::result::Result<usize, String>,
                reference,
                tolerance,
                run: &Run| BenchCell {
        row,
        column,
        k: k.as_ref().ok().copied(),
        reference,
        tolerance,
        error: k.err(),
        monotone: run.monotone,
        within_bound: run.within_bound,
    };
    let pick = |run: &Run, i: usize| run.counts.clone().map(|c| c[i]);

    match id {
        TableId::Tent => {
            let jobs: Vec<(Problem, usize)> = [Problem::Tent, Problem::TentNeumann]
                .into_iter()
                .flat_map(|p| sizes.iter().map(move |&(n, _)| (p, n)))
                .collect();
            let runs: Vec<Run> = jobs
                .par_iter()
                .map(|&(p, n)| stationary(p, n, opts))
                .collect();
            let m = sizes.len();
            let mut cells = Vec::new();
            for (r, (label, refs, tol)) in [("K", TENT_K, 1), ("K_V", TENT_NEUMANN_K, 2)]
                .into_iter()
                .enumerate()
            {
                for (i, &(n, c)) in sizes.iter().enumerate() {
                    let run = &runs[r * m + i];
                    cells.push(cell(
                        label.into(),
                        n_label(n),
                        pick(run, 0),
                        refs[c],
                        tol,
                        run,
                    ));
                }
            }
            BenchTable {
                id,
                rows: vec!["K".into(), "K_V".into()],
                columns: sizes.iter().map(|&(n, _)| n_label(n)).collect(),
                cells,
                wall_times_ms: runs.iter().map(|r| r.ms).collect(),
            }
        }
        TableId::Torsion | TableId::TorsionNeumann => {
            let neumann = id == TableId::TorsionNeumann;
            let jobs: Vec<(usize, f64, usize)> = (0..4)
                .flat_map(|ci| sizes.iter().map(move |&(n, _)| (ci, TORSION_C[ci], n)))
                .collect();
            let runs: Vec<Run> = jobs
                .par_iter()
                .map(|&(_, c, n)| {
                    let p = if neumann {
                        Problem::TorsionNeumann { c }
                    } else {
                        Problem::Torsion { c }
                    };
                    stationary(p, n, opts)
                })
                .collect();
            let cells = jobs
                .iter()
                .zip(&runs)
                .map(|(&(ci, c, n), run)| {
                    let col = col_of(n).unwrap();
                    cell(
                        c_label(c),
                        n_label(n),
                        pick(run, 0),
                        TORSION_K[ci][col],
                        1,
                        run,
                    )
                })
                .collect();
            BenchTable {
                id,
                rows: TORSION_C.iter().map(|&c| c_label(c)).collect(),
                columns: sizes.iter().map(|&(n, _)| n_label(n)).collect(),
                cells,
                wall_times_ms: runs.iter().map(|r| r.ms).collect(),
            }
        }
        TableId::ParabolicTent => {
            let runs: Vec<Run> = sizes
                .par_iter()
                .map(|&(n, _)| transient(Problem::Tent, n, PARABOLIC_TENT_TAU, opts))
                .collect();
            let mut cells = Vec::new();
            for step in 0..PARABOLIC_STEPS {
                for (&(n, c), run) in sizes.iter().zip(&runs) {
                    let reference = if step == 0 {
                        PARABOLIC_TENT_FIRST[c]
                    } else {
                        PARABOLIC_TENT_LATER[c]
                    };
                    cells.push(cell(
                        format!("step={}", step + 1),
                        n_label(n),
                        pick(run, step),
                        reference,
                        1,
                        run,
                    ));
                }
            }
            BenchTable {
                id,
                rows: (1..=PARABOLIC_STEPS).map(|s| format!("step={s}")).collect(),
                columns: sizes.iter().map(|&(n, _)| n_label(n)).collect(),
                cells,
                wall_times_ms: runs.iter().map(|r| r.ms).collect(),
            }
        }
        TableId::ParabolicTorsion => {
            let jobs: Vec<(usize, usize, usize)> = sizes
                .iter()
                .flat_map(|&(n, col)| (0..4).map(move |ci| (n, col, ci)))
                .collect();
            let runs: Vec<Run> = jobs
                .par_iter()
                .map(|&(n, _, ci)| {
                    transient(
                        Problem::Torsion { c: TORSION_C[ci] },
                        n,
                        PARABOLIC_TORSION_TAU,
                        opts,
                    )
                })
                .collect();
            let columns: Vec<String> = jobs
                .iter()
                .map(|&(n, _, ci)| format!("{}/{}", n_label(n), c_label(TORSION_C[ci])))
                .collect();
            let mut cells = Vec::new();
            for step in 0..PARABOLIC_STEPS {
                for (j, (&(_, col, ci), run)) in jobs.iter().zip(&runs).enumerate() {
                    cells.push(cell(
                        format!("step={}", step + 1),
                        columns[j].clone(),
                        pick(run, step),
                        TORSION_K[ci][col],
                        1,
                        run,
                    ));
                }
            }
            BenchTable {
                id,
                rows: (1..=PARABOLIC_STEPS).map(|s| format!("step={s}")).collect(),
                columns,
                cells,
                wall_times_ms: runs.iter().map(|r| r.ms).collect(),
            }
        }
    }
}
