//! Brute-force reference solver: tries every sign pattern.

pub mod dense;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numkit::vector::{ensure_len, norm_inf};
use crate::numkit::{OperatorKind, SparseMatrix};
use crate::pls::residual_nonsmooth;
use dense::{solve_general, Dense, Lu};

/// Largest system [`enumerate_solutions`] accepts.
pub const MAX_ORACLE_DIM: usize = 20;

/// The half-line or segment `base + alpha * direction`,
/// `0 <= alpha <= alpha_max` (`None` = unbounded).
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub base: Vec<f64>,
    /// Unit infinity norm.
    pub direction: Vec<f64>,
    pub alpha_max: Option<f64>,
}

impl Family {
    pub fn point(&self, alpha: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(b, d)| b + alpha * d)
            .collect()
    }

    /// Whether `x` lies on the family within `tol` in the infinity norm.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let (num, den) = x
            .iter()
            .zip(&self.base)
            .zip(&self.direction)
            .fold((0.0, 0.0), |(n, d), ((x, b), w)| {
                (n + (x - b) * w, d + w * w)
            });
        let alpha = num / den;
        let upper = self.alpha_max.unwrap_or(f64::INFINITY);
        alpha >= -tol
            && alpha <= upper + tol
            && self
                .point(alpha)
                .iter()
                .zip(x)
                .all(|(p, x)| (p - x).abs() <= tol)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleResult {
    pub point_solutions: Vec<Vec<f64>>,
    pub families: Vec<Family>,
    pub patterns_tested: usize,
    /// Singular consistent patterns with a null space of dimension above
    /// one; these are not resolved.
    pub unresolved_patterns: usize,
}

impl OracleResult {
    pub fn is_unique(&self) -> bool {
        self.point_solutions.len() == 1 && self.families.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.point_solutions.is_empty() && self.families.is_empty()
    }
}

enum Candidate {
    Point(Vec<f64>),
    Family(Family),
    Unresolved,
}

fn masked_dense(t: &SparseMatrix, bits: &[bool], kind: OperatorKind) -> Dense {
    let n = bits.len();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        if kind == OperatorKind::Parabolic || !bits[i] {
            row[i] = 1.0;
        }
        for (j, v) in t.row(i) {
            if bits[j] {
                row[j] += v;
            }
        }
    }
    m
}

fn sign_tol(x: &[f64]) -> f64 {
    1e-10 * (1.0 + norm_inf(x))
}

fn consistent(x: &[f64], bits: &[bool]) -> bool {
    let tol = sign_tol(x);
    x.iter()
        .zip(bits)
        .all(|(&v, &active)| if active { v >= -tol } else { v <= tol })
}

/// The range of `alpha` for which `x + alpha d` has sign pattern `bits`
/// (with exact zero thresholds), or `None` when it is empty.
fn alpha_range(x: &[f64], d: &[f64], bits: &[bool]) -> Option<(f64, f64)> {
    let tol = sign_tol(x);
    let dtol = 1e-12 * norm_inf(d);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for ((&xi, &di), &active) in x.iter().zip(d).zip(bits) {
        if di.abs() <= dtol {
            let ok = if active { xi >= -tol } else { xi <= tol };
            if !ok {
                return None;
            }
            continue;
        }
        let edge = -xi / di;
        // active wants x_i + alpha d_i >= 0, inactive wants <= 0
        if (di > 0.0) == active {
            lo = lo.max(edge);
        } else {
            hi = hi.min(edge);
        }
    }
    let slack = 1e-10 * (1.0 + lo.abs().min(hi.abs()));
    (lo <= hi + slack).then_some((lo, hi.max(lo)))
}

fn try_pattern(t: &SparseMatrix, b: &[f64], kind: OperatorKind, mask: u32) -> Option<Candidate> {
    let n = b.len();
    let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
    let m = masked_dense(t, &bits, kind);
    if let Some(lu) = Lu::factor(&m) {
        let x = lu.solve(b);
        return consistent(&x, &bits).then_some(Candidate::Point(x));
    }
    let (x, basis) = solve_general(&m, b)?;
    if basis.len() != 1 {
        return Some(Candidate::Unresolved);
    }
    let scale = norm_inf(&basis[0]);
    let d: Vec<f64> = basis[0].iter().map(|v| v / scale).collect();
    let (lo, hi) = alpha_range(&x, &d, &bits)?;
    let shift = |a: f64| -> Vec<f64> { x.iter().zip(&d).map(|(x, d)| x + a * d).collect() };
    let family = if lo.is_finite() {
        let len = hi - lo;
        if len <= 1e-10 * (1.0 + lo.abs()) {
            return Some(Candidate::Point(shift(lo)));
        }
        Family {
            base: shift(lo),
            direction: d,
            alpha_max: len.is_finite().then_some(len),
        }
    } else if hi.is_finite() {
        Family {
            base: shift(hi),
            direction: d.iter().map(|v| -v).collect(),
            alpha_max: None,
        }
    } else {
        Family {
            base: x,
            direction: d,
            alpha_max: None,
        }
    };
    Some(Candidate::Family(family))
}

/// Solves the masked linear system for every `P` in `{0,1}^n` and keeps the
/// sign-consistent solutions of `min{0,x} + T max{0,x} = b` (elliptic) or
/// `x + T max{0,x} = b` (parabolic).
pub fn enumerate_solutions(
    t: &SparseMatrix,
    b: &[f64],
    kind: OperatorKind,
) -> Result<OracleResult> {
    if !t.is_square() {
        return Err(Error::dim("T must be square"));
    }
    let n = t.n_rows();
    ensure_len(b, n, "b")?;
    if n > MAX_ORACLE_DIM {
        return Err(Error::TooLarge {
            n,
            limit: MAX_ORACLE_DIM,
        });
    }
    let patterns = 1u32 << n;
    let candidates: Vec<Candidate> = (0..patterns)
        .into_par_iter()
        .filter_map(|mask| try_pattern(t, b, kind, mask))
        .collect();

    let mut result = OracleResult {
        patterns_tested: patterns as usize,
        ..Default::default()
    };
    let residual_bound = 1e-10 * (1.0 + norm_inf(b));
    let mut points = Vec::new();
    for c in candidates {
        match c {
            Candidate::Point(x) => points.push(x),
            Candidate::Family(f) => {
                let tol = sign_tol(&f.base);
                if !result.families.iter().any(|g| g.contains(&f.base, tol)) {
                    result.families.push(f);
                }
            }
            Candidate::Unresolved => result.unresolved_patterns += 1,
        }
    }
    for x in points {
        if residual_nonsmooth(t, b, &x, kind, None)? > residual_bound {
            continue;
        }
        let tol = 1e-9 * (1.0 + norm_inf(&x));
        let seen = result
            .point_solutions
            .iter()
            .any(|p| p.iter().zip(&x).all(|(a, b)| (a - b).abs() <= tol));
        if !seen && !result.families.iter().any(|f| f.contains(&x, tol)) {
            result.point_solutions.push(x);
        }
    }
    Ok(result)
}

/// Diagonal `W` with `P(x) x - P(y) y = W (x - y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WDiagonal {
    /// Entries in `[0, 1]`.
    pub omegas: Vec<f64>,
}

impl WDiagonal {
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.omegas.iter().zip(z).map(|(w, z)| w * z).collect()
    }
}

/// Builds `W` componentwise: 1 where both entries are nonnegative, 0 where
/// both are negative, and the interpolation weight across the sign change
/// otherwise.
///
/// # Panics
///
/// If `x` and `y` differ in length.
pub fn w_matrix(x: &[f64], y: &[f64]) -> WDiagonal {
    assert_eq!(x.len(), y.len(), "w_matrix needs equal lengths");
    let omegas = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| match (xi >= 0.0, yi >= 0.0) {
            (true, true) => 1.0,
            (false, false) => 0.0,
            (true, false) => xi / (xi - yi),
            (false, true) => yi / (yi - xi),
        })
        .collect();
    WDiagonal { omegas }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> SparseMatrix {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn unique_solution() {
        let t = dense(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let r = enumerate_solutions(&t, &[1.0, -1.0], OperatorKind::Elliptic).unwrap();
        assert!(r.is_unique());
        let x = &r.point_solutions[0];
        assert!((x[0] - 0.5).abs() < 1e-14 && (x[1] + 0.5).abs() < 1e-14);
        assert_eq!(r.patterns_tested, 4);
    }

    #[test]
    fn family_along_w() {
        let t = dense(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let r = enumerate_solutions(&t, &[1.0, -1.0], OperatorKind::Elliptic).unwrap();
        assert!(r.point_solutions.is_empty(), "{r:?}");
        assert_eq!(r.families.len(), 1);
        let f = &r.families[0];
        assert_eq!(f.base, vec![1.0, 0.0]);
        assert_eq!(f.direction, vec![1.0, 1.0]);
        assert_eq!(f.alpha_max, None);
    }

    #[test]
    fn no_solution() {
        let t = dense(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let r = enumerate_solutions(&t, &[1.0, 1.0], OperatorKind::Elliptic).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn parabolic_example() {
        let t = dense(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let r = enumerate_solutions(&t, &[1.0, -1.0], OperatorKind::Parabolic).unwrap();
        assert!(r.is_unique());
        let x = &r.point_solutions[0];
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-14 && (x[1] + 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn too_large() {
        let t = SparseMatrix::identity(21);
        assert!(matches!(
            enumerate_solutions(&t, &[0.0; 21], OperatorKind::Elliptic),
            Err(Error::TooLarge { n: 21, limit: 20 })
        ));
    }

    #[test]
    fn w_cases() {
        assert_eq!(w_matrix(&[1.0, 2.0], &[3.0, 4.0]).omegas, vec![1.0, 1.0]);
        assert_eq!(
            w_matrix(&[-1.0, -2.0], &[-3.0, -4.0]).omegas,
            vec![0.0, 0.0]
        );
        let w = w_matrix(&[1.0, -1.0], &[-1.0, 1.0]);
        assert_eq!(w.omegas, vec![0.5, 0.5]);
        assert_eq!(w.apply(&[2.0, -2.0]), vec![1.0, -1.0]);
    }
}
