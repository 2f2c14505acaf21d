use crate::error::{Error, Result};
use crate::krylov::{KrylovOptions, KrylovStats};
use crate::matprops::Solvability;
use crate::numkit::vector::{ensure_finite, ensure_len};
use crate::numkit::{OperatorKind, SparseMatrix};

/// Which of the two shifted systems a shift vector `xi` belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftForm {
    /// `min{xi, x} + T max{xi, x} = b`
    MinPlusTMax,
    /// `max{xi, x} + T min{xi, x} = b`
    MaxPlusTMin,
}

/// Positive left/right null vectors of a singular `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct T2Data {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

/// One piecewise linear system.
///
/// `kind` selects `min{0,x} + T max{0,x} = b` (elliptic) or
/// `x + T max{0,x} = b` (parabolic). A shift is only allowed on the
/// elliptic form.
#[derive(Clone, Debug)]
pub struct PlsProblem {
    pub(crate) t: SparseMatrix,
    pub(crate) b: Vec<f64>,
    pub(crate) kind: OperatorKind,
    pub(crate) shift: Option<(Vec<f64>, ShiftForm)>,
    pub(crate) t2: Option<T2Data>,
}

impl PlsProblem {
    fn new(t: SparseMatrix, b: Vec<f64>, kind: OperatorKind) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::dim(format!(
                "T must be square, got {}x{}",
                t.n_rows(),
                t.n_cols()
            )));
        }
        ensure_len(&b, t.n_rows(), "b")?;
        ensure_finite(&b)?;
        Ok(PlsProblem {
            t,
            b,
            kind,
            shift: None,
            t2: None,
        })
    }

    pub fn elliptic(t: SparseMatrix, b: Vec<f64>) -> Result<Self> {
        Self::new(t, b, OperatorKind::Elliptic)
    }

    pub fn parabolic(t: SparseMatrix, b: Vec<f64>) -> Result<Self> {
        Self::new(t, b, OperatorKind::Parabolic)
    }

    pub fn shifted(t: SparseMatrix, b: Vec<f64>, xi: Vec<f64>, form: ShiftForm) -> Result<Self> {
        let mut p = Self::new(t, b, OperatorKind::Elliptic)?;
        ensure_len(&xi, p.dim(), "shift")?;
        ensure_finite(&xi)?;
        p.shift = Some((xi, form));
        Ok(p)
    }

    /// Attaches the null vectors of a singular `T`; enables the solvability
    /// test before iterating.
    pub fn with_t2(mut self, v: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        ensure_len(&v, self.dim(), "v")?;
        ensure_len(&w, self.dim(), "w")?;
        self.t2 = Some(T2Data { v, w });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn t(&self) -> &SparseMatrix {
        &self.t
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn shift(&self) -> Option<(&[f64], ShiftForm)> {
        self.shift.as_ref().map(|(xi, f)| (xi.as_slice(), *f))
    }

    pub fn t2_data(&self) -> Option<&T2Data> {
        self.t2.as_ref()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Entry `i` is active when `x_i >= sign_threshold`. Zero reproduces
    /// the exact sign rule; a small negative value tolerates noisy inner
    /// solves.
    pub sign_threshold: f64,
    /// Final residual must satisfy `||r||_inf <= res_tol * ||b||_inf`.
    pub res_tol: f64,
    /// Join each new mask with the previous one.
    pub enforce_monotone_mask: bool,
    /// `None` means `n + 1`.
    pub max_outer: Option<usize>,
    /// Tolerance for the `v^T b = 0` branch; `None` picks
    /// `1e-10 * ||v||_2 * ||b||_2`.
    pub class_tol: Option<f64>,
    /// Run QMR on the active block `T_PP` (or `I + T_PP`) and recover the
    /// inactive entries by substitution, instead of on the full masked
    /// matrix. Both produce the same iterate in exact arithmetic; the full
    /// matrix is block triangular with couplings as large as `T`, which
    /// limits the attainable residual when `T` has large entries.
    pub reduce_active_block: bool,
    /// Inner systems up to this size are solved by dense LU when QMR
    /// fails to converge.
    pub dense_fallback_dim: usize,
    /// Iterative refinement steps applied to the final iterate with the
    /// final mask.
    pub refinement_steps: usize,
    pub krylov: KrylovOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            sign_threshold: 0.0,
            res_tol: 1e-8,
            enforce_monotone_mask: true,
            max_outer: None,
            class_tol: None,
            reduce_active_block: true,
            dense_fallback_dim: 64,
            refinement_steps: 1,
            krylov: KrylovOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// `T` is singular with `v^T b > 0`; no solution exists.
    NoSolutionCertified,
    MaxOuterExceeded,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationReport {
    /// Number of linear solves `K`.
    pub outer_iterations: usize,
    /// Active-set size after each solve.
    pub active_counts: Vec<usize>,
    pub inner_stats: Vec<KrylovStats>,
    /// Nonsmooth residual (infinity norm) of each iterate.
    pub residual_history: Vec<f64>,
    /// Entries that the raw sign rule dropped but the monotone join kept.
    pub mask_losses: usize,
    /// Solvability verdict when null vectors were supplied.
    pub solvability: Option<Solvability>,
    /// Set when the solution is one member `x + alpha w, alpha >= 0` of a family.
    pub family_direction: Option<Vec<f64>>,
}

impl IterationReport {
    pub fn inner_iterations(&self) -> usize {
        self.inner_stats.iter().map(|s| s.iterations).sum()
    }

    pub fn is_monotone(&self) -> bool {
        self.active_counts.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlsSolution {
    pub x: Vec<f64>,
    /// `max{0, x}`, or `max{xi, x} - xi` for shifted systems.
    pub y: Vec<f64>,
    pub status: SolveStatus,
    pub report: IterationReport,
}
