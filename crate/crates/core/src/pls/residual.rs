use crate::error::{Error, Result};
use crate::numkit::vector::{dot, ensure_len, norm2};
use crate::numkit::{OperatorKind, SparseMatrix};
use crate::pls::ShiftForm;

fn check_dims(t: &SparseMatrix, b: &[f64], x: &[f64]) -> Result<()> {
    if !t.is_square() {
        return Err(Error::dim("T must be square"));
    }
    ensure_len(b, t.n_rows(), "b")?;
    ensure_len(x, t.n_rows(), "x")
}

/// Infinity norm of the nonsmooth residual.
///
/// * elliptic: `min{0,x} + T max{0,x} - b`
/// * parabolic: `x + T max{0,x} - b`
/// * shifted elliptic: `min{xi,x} + T max{xi,x} - b` or
///   `max{xi,x} + T min{xi,x} - b`
pub fn residual_nonsmooth(
    t: &SparseMatrix,
    b: &[f64],
    x: &[f64],
    kind: OperatorKind,
    shift: Option<(&[f64], ShiftForm)>,
) -> Result<f64> {
    check_dims(t, b, x)?;
    let n = x.len();
    let (lower, upper): (Vec<f64>, Vec<f64>) = match (kind, shift) {
        (OperatorKind::Elliptic, None) => x.iter().map(|&v| (v.min(0.0), v.max(0.0))).unzip(),
        (OperatorKind::Parabolic, None) => x.iter().map(|&v| (v, v.max(0.0))).unzip(),
        (OperatorKind::Elliptic, Some((xi, form))) => {
            ensure_len(xi, n, "shift")?;
            let pairs = x.iter().zip(xi).map(|(&v, &s)| (v.min(s), v.max(s)));
            match form {
                ShiftForm::MinPlusTMax => pairs.unzip(),
                ShiftForm::MaxPlusTMin => pairs.map(|(lo, hi)| (hi, lo)).unzip(),
            }
        }
        (OperatorKind::Parabolic, Some(_)) => {
            return Err(Error::InvalidArgument(
                "shifts are only defined for the elliptic form".into(),
            ))
        }
    };
    let tu = t.spmv(&upper)?;
    Ok(lower
        .iter()
        .zip(&tu)
        .zip(b)
        .map(|((l, t), b)| (l + t - b).abs())
        .fold(0.0, f64::max))
}

/// Outcome of [`lcp_check`]. Violations are reported as nonnegative
/// magnitudes; zero means the condition holds exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckReport {
    /// `max_i (-y_i)`
    pub nonnegativity_violation: f64,
    pub worst_nonnegativity_index: Option<usize>,
    /// `max_i (b - My)_i` with `M = T` or `I + T`.
    pub feasibility_violation: f64,
    pub worst_feasibility_index: Option<usize>,
    /// `|y^T (M y - b)|`
    pub complementarity: f64,
    /// `tol * ||y||_2 * ||b||_2`
    pub complementarity_bound: f64,
    pub nonnegative: bool,
    pub feasible: bool,
    pub complementary: bool,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.feasible && self.complementary
    }
}

/// Verifies `y >= 0`, `My >= b`, `y^T (My - b) = 0` up to `tol`, where
/// `M = T` (elliptic) or `M = I + T` (parabolic).
pub fn lcp_check(
    t: &SparseMatrix,
    b: &[f64],
    y: &[f64],
    kind: OperatorKind,
    tol: f64,
) -> Result<CheckReport> {
    check_dims(t, b, y)?;
    let mut my = t.spmv(y)?;
    if kind == OperatorKind::Parabolic {
        my.iter_mut().zip(y).for_each(|(m, v)| *m += v);
    }
    let slack: Vec<f64> = my.iter().zip(b).map(|(m, b)| m - b).collect();

    let worst = |vals: &mut dyn Iterator<Item = f64>| {
        vals.enumerate().fold(
            (0.0, None),
            |(m, idx), (i, v)| if v > m { (v, Some(i)) } else { (m, idx) },
        )
    };
    let (nonneg, nonneg_idx) = worst(&mut y.iter().map(|v| -v));
    let (feas, feas_idx) = worst(&mut slack.iter().map(|s| -s));
    let complementarity = dot(y, &slack).abs();
    let bound = tol * norm2(y) * norm2(b);

    Ok(CheckReport {
        nonnegativity_violation: nonneg,
        worst_nonnegativity_index: nonneg_idx,
        feasibility_violation: feas,
        worst_feasibility_index: feas_idx,
        complementarity,
        complementarity_bound: bound,
        nonnegative: nonneg <= tol,
        feasible: feas <= tol,
        complementary: complementarity <= bound,
    })
}
