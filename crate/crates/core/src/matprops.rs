//! Checks for the two matrix hypotheses the solvers rely on.
//!
//! * T1: `T` is an irreducible nonsingular M-matrix.
//! * T2: `T` is a singular irreducible M-matrix whose left and right null
//!   spaces are spanned by positive vectors `v` and `w`, and `T + D` is a
//!   nonsingular M-matrix for every nonzero diagonal `D >= 0`.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::krylov::{qmr_solve, KrylovOptions, Preconditioner};
use crate::numkit::vector::{dot, ensure_len, norm2, norm_inf};
use crate::numkit::SparseMatrix;

/// Relative gap between the Perron root of `alpha I - T` and `alpha`
/// required before the power iteration certifies T1.
pub const SEPARATION_TOL: f64 = 1e-10;

/// Null-vector residual bound `||T w||_inf <= NULL_TOL ||T||_inf ||w||_inf`.
pub const NULL_TOL: f64 = 1e-10;

const POWER_MAX_ITERS: usize = 5000;
const DOMINANT_POWER_ITERS: usize = 50;
const INVERSE_ITERS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proven,
    Disproven,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proven => "proven",
            Verdict::Disproven => "disproven",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixClassReport {
    pub is_z_matrix: bool,
    pub is_irreducible: bool,
    pub t1_verdict: Verdict,
    pub t2_verdict: Verdict,
    /// `v` with `T^T v = 0`, unit 2-norm.
    pub left_null: Option<Vec<f64>>,
    /// `w` with `T w = 0`, unit 2-norm.
    pub right_null: Option<Vec<f64>>,
    /// Largest diagonal entry; `B = alpha I - T`.
    pub alpha: Option<f64>,
    /// Lower Collatz-Wielandt bound on the spectral radius of `B`.
    pub spectral_radius_estimate: Option<f64>,
    /// Matching upper bound.
    pub spectral_radius_upper: Option<f64>,
    pub notes: Vec<String>,
}

impl MatrixClassReport {
    fn new(is_z_matrix: bool, is_irreducible: bool) -> Self {
        MatrixClassReport {
            is_z_matrix,
            is_irreducible,
            t1_verdict: Verdict::Inconclusive,
            t2_verdict: Verdict::Inconclusive,
            left_null: None,
            right_null: None,
            alpha: None,
            spectral_radius_estimate: None,
            spectral_radius_upper: None,
            notes: Vec::new(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:.6e}"))
}

fn opt_vec_summary(v: &Option<Vec<f64>>) -> String {
    match v {
        None => "none".into(),
        Some(v) => {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            format!("min={lo:.6e},max={hi:.6e}")
        }
    }
}

/// One `key=value` pair per line.
impl fmt::Display for MatrixClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "is_z_matrix={}", self.is_z_matrix)?;
        writeln!(f, "is_irreducible={}", self.is_irreducible)?;
        writeln!(f, "t1_verdict={}", self.t1_verdict)?;
        writeln!(f, "t2_verdict={}", self.t2_verdict)?;
        writeln!(f, "alpha={}", opt(self.alpha))?;
        writeln!(
            f,
            "spectral_radius_estimate={}",
            opt(self.spectral_radius_estimate)
        )?;
        writeln!(
            f,
            "spectral_radius_upper={}",
            opt(self.spectral_radius_upper)
        )?;
        writeln!(f, "left_null={}", opt_vec_summary(&self.left_null))?;
        writeln!(f, "right_null={}", opt_vec_summary(&self.right_null))?;
        for note in &self.notes {
            writeln!(f, "note={note}")?;
        }
        Ok(())
    }
}

fn ensure_square(t: &SparseMatrix) -> Result<()> {
    if !t.is_square() {
        return Err(Error::dim(format!(
            "expected a square matrix, got {}x{}",
            t.n_rows(),
            t.n_cols()
        )));
    }
    if t.n_rows() == 0 {
        return Err(Error::dim("matrix is empty"));
    }
    Ok(())
}

/// Off-diagonal entries are all `<= 0`.
pub fn is_z_matrix(t: &SparseMatrix) -> bool {
    (0..t.n_rows()).all(|i| t.row(i).all(|(j, v)| i == j || v <= 0.0))
}

fn reaches_all(t: &SparseMatrix) -> bool {
    let n = t.n_rows();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for (j, _) in t.row(i) {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// The directed graph with an edge `i -> j` for every stored `T_ij` is
/// strongly connected.
pub fn is_irreducible(t: &SparseMatrix) -> bool {
    t.n_rows() > 0 && reaches_all(t) && reaches_all(&t.transpose())
}

/// Row (or column) diagonal dominance with at least one strict row, which
/// for an irreducible Z-matrix with positive diagonal implies a nonsingular
/// M-matrix.
fn irreducibly_dominant(t: &SparseMatrix) -> bool {
    let dominant = |m: &SparseMatrix| {
        let mut strict = false;
        for i in 0..m.n_rows() {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (j, v) in m.row(i) {
                if i == j {
                    diag = v;
                } else {
                    off += v.abs();
                }
            }
            if diag <= 0.0 || diag < off {
                return false;
            }
            strict |= diag > off;
        }
        strict
    };
    dominant(t) || dominant(&t.transpose())
}

/// Collatz-Wielandt bounds on the Perron root of `B = alpha I - T`, by
/// power iteration on the primitive matrix `B + I`.
fn perron_bounds(t: &SparseMatrix, alpha: f64, max_iters: usize) -> (f64, f64) {
    let n = t.n_rows();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..max_iters {
        t.spmv_into(&x, &mut y);
        let (mut it_lo, mut it_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (yi, &xi) in y.iter_mut().zip(&x) {
            *yi = (alpha + 1.0) * xi - *yi;
            let q = *yi / xi;
            it_lo = it_lo.min(q);
            it_hi = it_hi.max(q);
        }
        lo = lo.max(it_lo - 1.0);
        hi = hi.min(it_hi - 1.0);
        if lo >= alpha || hi - lo <= 1e-13 * alpha {
            break;
        }
        let scale = norm_inf(&y);
        if !(scale > 0.0) || y.iter().any(|&v| !(v > 0.0)) {
            break;
        }
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / scale);
    }
    (lo, hi)
}

/// Tests whether `T` is an irreducible nonsingular M-matrix.
///
/// A Z-matrix that is irreducible and diagonally dominant with one strict
/// row is accepted at once. Otherwise the spectral radius of
/// `B = alpha I - T` is bracketed by power iteration and must sit below
/// `alpha` by a relative margin of [`SEPARATION_TOL`].
pub fn check_t1(t: &SparseMatrix) -> Result<MatrixClassReport> {
    ensure_square(t)?;
    let z = is_z_matrix(t);
    let irreducible = is_irreducible(t);
    let mut rep = MatrixClassReport::new(z, irreducible);
    let diag = t.diagonal();
    let alpha = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.alpha = Some(alpha);

    if !z {
        rep.t1_verdict = Verdict::Disproven;
        rep.notes.push("positive off-diagonal entry".into());
        rep.t2_verdict = Verdict::Disproven;
        return Ok(rep);
    }
    if diag.iter().any(|&d| d <= 0.0) {
        rep.t1_verdict = Verdict::Disproven;
        rep.notes.push("nonpositive diagonal entry".into());
        rep.t2_verdict = Verdict::Disproven;
        return Ok(rep);
    }
    if !irreducible {
        rep.t1_verdict = Verdict::Disproven;
        rep.notes
            .push("sparsity graph is not strongly connected".into());
        return Ok(rep);
    }

    let dominant = irreducibly_dominant(t);
    let iters = if dominant {
        DOMINANT_POWER_ITERS
    } else {
        POWER_MAX_ITERS
    };
    let (lo, hi) = perron_bounds(t, alpha, iters);
    rep.spectral_radius_estimate = Some(lo);
    rep.spectral_radius_upper = Some(hi);
    rep.t1_verdict = if dominant {
        rep.notes.push("irreducibly diagonally dominant".into());
        Verdict::Proven
    } else if hi < alpha * (1.0 - SEPARATION_TOL) {
        Verdict::Proven
    } else if lo >= alpha * (1.0 - 4.0 * f64::EPSILON) {
        Verdict::Disproven
    } else {
        Verdict::Inconclusive
    };
    if rep.t1_verdict == Verdict::Proven {
        rep.t2_verdict = Verdict::Disproven;
        rep.notes.push("nonsingular, so not T2".into());
    }
    Ok(rep)
}

/// Unit null vector of `m` by inverse iteration on `m + sigma I`, with the
/// sign chosen so the entries sum to a nonnegative value. Returns the vector
/// and its relative residual `||m x||_inf / (||m||_inf ||x||_inf)`.
fn null_vector(m: &SparseMatrix, sigma: f64) -> Result<(Vec<f64>, f64)> {
    let n = m.n_rows();
    let shifted = m.add_diagonal(&vec![sigma; n])?;
    let opts = KrylovOptions {
        rel_tol: 1e-14,
        max_iters: Some(50 * n + 100),
        preconditioner: Preconditioner::Jacobi,
        ..KrylovOptions::default()
    };
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..INVERSE_ITERS {
        let y = match qmr_solve(&shifted, &x, &x, &opts) {
            Ok((y, _)) => y,
            Err(Error::NotConverged { best, .. }) | Err(Error::Breakdown { best, .. }) => best,
            Err(e) => return Err(e),
        };
        let nrm = norm2(&y);
        if !(nrm > 0.0) || !nrm.is_finite() {
            break;
        }
        x = y.into_iter().map(|v| v / nrm).collect();
    }
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let r = m.spmv(&x)?;
    let rel = norm_inf(&r) / (m.norm_inf() * norm_inf(&x));
    Ok((x, rel))
}

/// Tests whether `T` satisfies T2.
///
/// Null vectors come from inverse iteration on `T + sigma I` and
/// `T^T + sigma I` with `sigma = 1e-8 ||T||_inf`. The M-matrix property of
/// `T + D` is only probed with `D = e_1 e_1^T`, so a proof here rests on
/// that single diagonal perturbation.
pub fn check_t2(t: &SparseMatrix) -> Result<MatrixClassReport> {
    let mut rep = check_t1(t)?;
    if rep.t2_verdict == Verdict::Disproven {
        return Ok(rep);
    }
    if !rep.is_irreducible {
        rep.notes
            .push("reducible matrices are outside the T2 certificate".into());
        return Ok(rep);
    }

    let sigma = 1e-8 * t.norm_inf();
    let (w, w_res) = null_vector(t, sigma)?;
    let (v, v_res) = null_vector(&t.transpose(), sigma)?;
    let positive = |x: &[f64]| x.iter().all(|&e| e > 0.0);

    rep.t2_verdict = if w_res > 1e-6 || v_res > 1e-6 {
        rep.notes.push(format!(
            "no null vector: relative residuals {w_res:.3e}, {v_res:.3e}"
        ));
        Verdict::Disproven
    } else if w_res > NULL_TOL || v_res > NULL_TOL {
        rep.notes.push(format!(
            "null vector residuals {w_res:.3e}, {v_res:.3e} above tolerance"
        ));
        Verdict::Inconclusive
    } else if !positive(&w) || !positive(&v) {
        rep.notes
            .push("null vector is not strictly positive".into());
        Verdict::Disproven
    } else {
        let mut bump = vec![0.0; t.n_rows()];
        bump[0] = 1.0;
        let bumped = check_t1(&t.add_diagonal(&bump)?)?;
        rep.notes
            .push("T + D checked for D = e1 e1^T only; other diagonals are not sampled".into());
        bumped.t1_verdict
    };
    if rep.t2_verdict == Verdict::Proven {
        rep.t1_verdict = Verdict::Disproven;
    }
    rep.right_null = Some(w);
    rep.left_null = Some(v);
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvabilityVerdict {
    /// `v^T b < 0`
    Unique,
    /// `v^T b = 0`: solutions form the half-line `x + alpha w, alpha >= 0`.
    FamilyAlongW,
    /// `v^T b > 0`
    NoSolution,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solvability {
    pub verdict: SolvabilityVerdict,
    pub vtb: f64,
}

/// `1e-10 * ||v||_2 * ||b||_2`
pub fn default_class_tol(v: &[f64], b: &[f64]) -> f64 {
    1e-10 * norm2(v) * norm2(b)
}

/// Classifies `min{0,x} + T max{0,x} = b` for a T2 matrix by the sign of
/// `v^T b`, treating `|v^T b| <= class_tol` as zero.
pub fn classify_solvability(v: &[f64], b: &[f64], class_tol: f64) -> Result<Solvability> {
    ensure_len(b, v.len(), "b")?;
    if let Some(i) = v.iter().position(|&e| !(e > 0.0)) {
        return Err(Error::InvalidNullVector(i));
    }
    if !(class_tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "class_tol must be nonnegative".into(),
        ));
    }
    let vtb = dot(v, b);
    let verdict = if vtb.abs() <= class_tol {
        SolvabilityVerdict::FamilyAlongW
    } else if vtb < 0.0 {
        SolvabilityVerdict::Unique
    } else {
        SolvabilityVerdict::NoSolution
    };
    Ok(Solvability { verdict, vtb })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> SparseMatrix {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn laplacian_2d(n: usize) -> SparseMatrix {
        let mut trip = Vec::new();
        let id = |i: usize, j: usize| i * n + j;
        for i in 0..n {
            for j in 0..n {
                trip.push((id(i, j), id(i, j), 4.0));
                if i > 0 {
                    trip.push((id(i, j), id(i - 1, j), -1.0));
                }
                if i + 1 < n {
                    trip.push((id(i, j), id(i + 1, j), -1.0));
                }
                if j > 0 {
                    trip.push((id(i, j), id(i, j - 1), -1.0));
                }
                if j + 1 < n {
                    trip.push((id(i, j), id(i, j + 1), -1.0));
                }
            }
        }
        SparseMatrix::from_triplets(&trip, n * n, n * n).unwrap()
    }

    #[test]
    fn t1_examples() {
        let r = check_t1(&dense(&[&[2.0, -1.0], &[-1.0, 2.0]])).unwrap();
        assert_eq!(r.t1_verdict, Verdict::Proven);
        assert!(r.spectral_radius_estimate.unwrap() < r.alpha.unwrap());

        let r = check_t1(&dense(&[&[1.0, -1.0], &[-1.0, 1.0]])).unwrap();
        assert_eq!(r.t1_verdict, Verdict::Disproven);

        let r = check_t1(&laplacian_2d(5)).unwrap();
        assert_eq!(r.t1_verdict, Verdict::Proven);
        assert!(r.is_irreducible && r.is_z_matrix);
    }

    #[test]
    fn t1_needs_power_iteration() {
        // not diagonally dominant, still an M-matrix: B = [[0,3],[1/4,0]]
        // has spectral radius sqrt(3/4) < 1 = alpha
        let t = dense(&[&[1.0, -3.0], &[-0.25, 1.0]]);
        assert!(!irreducibly_dominant(&t));
        let r = check_t1(&t).unwrap();
        assert_eq!(r.t1_verdict, Verdict::Proven);
        let rho = r.spectral_radius_estimate.unwrap();
        assert!((rho - 0.75_f64.sqrt()).abs() < 1e-8);

        // B spectral radius sqrt(3/2) > 1
        let r = check_t1(&dense(&[&[1.0, -3.0], &[-0.5, 1.0]])).unwrap();
        assert_eq!(r.t1_verdict, Verdict::Disproven);
    }

    #[test]
    fn t1_rejects_reducible_and_non_z() {
        let r = check_t1(&dense(&[&[2.0, 0.0], &[-1.0, 2.0]])).unwrap();
        assert!(!r.is_irreducible);
        assert_eq!(r.t1_verdict, Verdict::Disproven);
        let r = check_t1(&dense(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!(!r.is_z_matrix);
        assert_eq!(r.t1_verdict, Verdict::Disproven);
    }

    #[test]
    fn non_square_is_an_error() {
        let t = SparseMatrix::from_triplets(&[(0, 0, 1.0)], 1, 2).unwrap();
        assert!(matches!(check_t1(&t), Err(Error::Dimension(_))));
        assert!(matches!(check_t2(&t), Err(Error::Dimension(_))));
    }

    #[test]
    fn t2_examples() {
        let r = check_t2(&dense(&[&[1.0, -1.0], &[-1.0, 1.0]])).unwrap();
        assert_eq!(r.t2_verdict, Verdict::Proven, "{r}");
        let s = 0.5_f64.sqrt();
        for v in [r.left_null.unwrap(), r.right_null.unwrap()] {
            assert!((v[0] - s).abs() < 1e-12 && (v[1] - s).abs() < 1e-12);
        }
        let r = check_t2(&dense(&[&[2.0, -1.0], &[-1.0, 2.0]])).unwrap();
        assert_eq!(r.t2_verdict, Verdict::Disproven);
    }

    #[test]
    fn t2_nonsymmetric() {
        // T = diag(1, 2) L for the path Laplacian: w = 1, v = (2, 1)
        let t = dense(&[&[1.0, -1.0], &[-2.0, 2.0]]);
        let r = check_t2(&t).unwrap();
        assert_eq!(r.t2_verdict, Verdict::Proven, "{r}");
        let v = r.left_null.unwrap();
        assert!((v[0] / v[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn t2_rejects_indefinite_null_vector() {
        // zero row sums but a positive off-diagonal entry
        let t = dense(&[&[1.0, 1.0, -2.0], &[1.0, 1.0, -2.0], &[-2.0, -2.0, 4.0]]);
        assert_eq!(check_t2(&t).unwrap().t2_verdict, Verdict::Disproven);
    }

    #[test]
    fn classification_examples() {
        let v = [1.0, 1.0];
        let c = |b: [f64; 2]| classify_solvability(&v, &b, 1e-12).unwrap();
        assert_eq!(c([-1.0, -1.0]).verdict, SolvabilityVerdict::Unique);
        assert_eq!(c([-1.0, -1.0]).vtb, -2.0);
        assert_eq!(c([1.0, -1.0]).verdict, SolvabilityVerdict::FamilyAlongW);
        assert_eq!(c([1.0, 1.0]).verdict, SolvabilityVerdict::NoSolution);
        assert!(matches!(
            classify_solvability(&[1.0, 0.0], &[1.0, 1.0], 0.0),
            Err(Error::InvalidNullVector(1))
        ));
    }

    #[test]
    fn report_prints_key_values() {
        let r = check_t1(&dense(&[&[2.0, -1.0], &[-1.0, 2.0]])).unwrap();
        let s = r.to_string();
        assert!(s.contains("t1_verdict=proven"));
        assert!(s.lines().all(|l| l.contains('=')));
    }
}
