//! Finite-difference obstacle problems on rectangles.
//!
//! * tent: `-Lap u >= 0` on `[-1,1] x [-2,2]`, `u = 1/2` on the boundary,
//!   obstacle `min(1-|x|, 2-|y|)`, grid `2 dx = dy`.
//! * tent, Neumann variant: same domain and obstacle, `f = -1`,
//!   homogeneous flux.
//! * torsion: `-Lap u >= C` on the unit square, `u = 0` on the boundary,
//!   obstacle `-dist(., boundary)`, grid `dx = dy`.
//! * torsion, Neumann variant: `du/dn = dpsi/dn` on the boundary.
//!
//! Every system is multiplied through by `dy^2`, which keeps the stencil
//! coefficients small integers for both grids. Neumann boundary values are
//! eliminated with the second-order one-sided difference and the edge rows
//! are then weighted by 3/2 per eliminated direction, which makes `T`
//! symmetric with zero row and column sums.

mod field;
mod grid;
mod parabolic;

pub use field::{full_field, write_field_csv, FieldNode};
pub use grid::Grid2D;
pub use parabolic::{
    run_parabolic, InitialCondition, ParabolicOptions, ParabolicRun, ParabolicSystem,
};

use crate::error::Result;
use crate::numkit::SparseMatrix;
use crate::pls::{
    solve_elliptic_pls, IterationReport, PlsProblem, SolveStatus, SolverOptions, T2Data,
};

/// Default relative tolerance of [`coincidence_set`].
pub const COIN_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    Tent,
    TentNeumann,
    /// `c < 0`
    Torsion {
        c: f64,
    },
    /// `c < 0`
    TorsionNeumann {
        c: f64,
    },
}

impl Problem {
    pub fn is_neumann(&self) -> bool {
        matches!(self, Problem::TentNeumann | Problem::TorsionNeumann { .. })
    }

    pub fn is_tent(&self) -> bool {
        matches!(self, Problem::Tent | Problem::TentNeumann)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Tent => "tent",
            Problem::TentNeumann => "tent-neumann",
            Problem::Torsion { .. } => "torsion",
            Problem::TorsionNeumann { .. } => "torsion-neumann",
        }
    }

    fn domain(&self) -> ((f64, f64), (f64, f64)) {
        if self.is_tent() {
            ((-1.0, 1.0), (-2.0, 2.0))
        } else {
            ((0.0, 1.0), (0.0, 1.0))
        }
    }

    pub fn psi(&self, x: f64, y: f64) -> f64 {
        if self.is_tent() {
            (1.0 - x.abs()).min(2.0 - y.abs())
        } else {
            -(x.min(1.0 - x)).min(y.min(1.0 - y))
        }
    }

    /// Right-hand side of `-Lap u >= f`.
    pub fn source(&self) -> f64 {
        match *self {
            Problem::Tent => 0.0,
            Problem::TentNeumann => -1.0,
            Problem::Torsion { c } | Problem::TorsionNeumann { c } => c,
        }
    }

    /// Boundary value for Dirichlet problems.
    pub fn dirichlet_value(&self) -> Option<f64> {
        match self {
            Problem::Tent => Some(0.5),
            Problem::Torsion { .. } => Some(0.0),
            _ => None,
        }
    }

    /// Outward normal derivative prescribed on the edges of Neumann
    /// problems. For the torsion variant this is `dpsi/dn`, which equals 1
    /// on every edge away from the corners.
    pub fn neumann_flux(&self) -> Option<f64> {
        match self {
            Problem::TentNeumann => Some(0.0),
            Problem::TorsionNeumann { .. } => Some(1.0),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Problem::Torsion { c } | Problem::TorsionNeumann { c } = *self {
            if !(c < 0.0) || !c.is_finite() {
                return Err(crate::error::Error::InvalidArgument(format!(
                    "torsion constant must be negative, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// How the outward derivative at a domain corner is extended when the
/// corner boundary value of a Neumann solution is reconstructed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CornerRule {
    /// Mean of the extrapolations along both edges.
    #[default]
    Average,
    /// Extrapolate along the horizontal edge.
    XEdge,
    /// Extrapolate along the vertical edge.
    YEdge,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstacleSpec {
    pub problem: Problem,
    pub corner: CornerRule,
}

impl ObstacleSpec {
    pub fn new(problem: Problem) -> Self {
        ObstacleSpec {
            problem,
            corner: CornerRule::default(),
        }
    }

    /// The grid for `n` interior points per direction.
    pub fn grid(&self, n: usize) -> Result<Grid2D> {
        let (xr, yr) = self.problem.domain();
        Grid2D::new(xr, yr, n, n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcKind {
    /// Dirichlet: `T` is a nonsingular M-matrix.
    T1,
    /// Neumann: `T` is singular with `v = w = 1`.
    T2,
}

/// A discretized obstacle problem, `b = f_vec - T psi_vec`.
///
/// `T` and `f_vec` carry the `scale = dy^2` factor and, for Neumann
/// problems, the per-row weights; dividing row `k` by
/// `scale * row_weights[k]` recovers the plain difference operator.
#[derive(Clone, Debug)]
pub struct DiscreteObstacle {
    pub spec: ObstacleSpec,
    pub grid: Grid2D,
    pub t: SparseMatrix,
    pub f_vec: Vec<f64>,
    pub psi_vec: Vec<f64>,
    pub b: Vec<f64>,
    pub bc_kind: BcKind,
    pub t2_data: Option<T2Data>,
    pub scale: f64,
    pub row_weights: Vec<f64>,
}

impl DiscreteObstacle {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// The elliptic system `min{0,x} + T max{0,x} = b` for `x = u - psi`.
    pub fn pls_problem(&self) -> Result<PlsProblem> {
        let p = PlsProblem::elliptic(self.t.clone(), self.b.clone())?;
        match &self.t2_data {
            Some(d) => p.with_t2(d.v.clone(), d.w.clone()),
            None => Ok(p),
        }
    }

    /// `-Lap_h` in true units with its source vector.
    pub fn unscaled(&self) -> Result<(SparseMatrix, Vec<f64>)> {
        let inv: Vec<f64> = self
            .row_weights
            .iter()
            .map(|w| 1.0 / (self.scale * w))
            .collect();
        let a = self.t.scale_rows(&inv)?;
        let f = self.f_vec.iter().zip(&inv).map(|(f, s)| f * s).collect();
        Ok((a, f))
    }
}

/// Builds the `N^2 x N^2` system for `spec` on an `N x N` interior grid.
pub fn assemble_elliptic(spec: &ObstacleSpec, n: usize) -> Result<DiscreteObstacle> {
    spec.problem.validate()?;
    let grid = spec.grid(n)?;
    let problem = spec.problem;
    let neumann = problem.is_neumann();
    let scale = grid.dy * grid.dy;
    let cx = scale / (grid.dx * grid.dx);
    let cy = 1.0;

    // 3/2 on eliminated edges, 1 elsewhere
    let weight = |k: usize| {
        if neumann && (k == 0 || k == n - 1) {
            1.5
        } else {
            1.0
        }
    };
    let bc_value = problem.dirichlet_value().unwrap_or(0.0);
    let flux = problem.neumann_flux().unwrap_or(0.0);
    let source = problem.source() * grid.dy * grid.dy;

    let size = grid.len();
    let mut trip = Vec::with_capacity(5 * size);
    let mut f_vec = vec![0.0; size];
    let mut psi_vec = vec![0.0; size];
    let mut row_weights = vec![1.0; size];

    for j in 0..n {
        for i in 0..n {
            let k = grid.index(i, j);
            let (wx, wy) = (weight(i), weight(j));
            row_weights[k] = wx * wy;
            psi_vec[k] = problem.psi(grid.x(i), grid.y(j));

            let mut rhs = source * wx * wy;
            // x-direction second difference, weighted by the y-edge factor
            let ax = cx * wy;
            let (x_edge, y_edge) = (i == 0 || i == n - 1, j == 0 || j == n - 1);
            if neumann && x_edge {
                trip.push((k, k, ax));
                let inner = if i == 0 { k + 1 } else { k - 1 };
                trip.push((k, inner, -ax));
                rhs += wy * scale * flux / grid.dx;
            } else {
                trip.push((k, k, 2.0 * ax));
                for (ok, nb) in [(i > 0, k.wrapping_sub(1)), (i + 1 < n, k + 1)] {
                    if ok {
                        trip.push((k, nb, -ax));
                    } else {
                        rhs += ax * bc_value;
                    }
                }
            }
            let ay = cy * wx;
            if neumann && y_edge {
                trip.push((k, k, ay));
                let inner = if j == 0 { k + n } else { k - n };
                trip.push((k, inner, -ay));
                rhs += wx * scale * flux / grid.dy;
            } else {
                trip.push((k, k, 2.0 * ay));
                for (ok, nb) in [(j > 0, k.wrapping_sub(n)), (j + 1 < n, k + n)] {
                    if ok {
                        trip.push((k, nb, -ay));
                    } else {
                        rhs += ay * bc_value;
                    }
                }
            }
            f_vec[k] = rhs;
        }
    }

    let t = SparseMatrix::from_triplets(&trip, size, size)?;
    let t_psi = t.spmv(&psi_vec)?;
    let b = f_vec.iter().zip(&t_psi).map(|(f, tp)| f - tp).collect();
    let (bc_kind, t2_data) = if neumann {
        let ones = vec![1.0; size];
        (
            BcKind::T2,
            Some(T2Data {
                v: ones.clone(),
                w: ones,
            }),
        )
    } else {
        (BcKind::T1, None)
    };
    Ok(DiscreteObstacle {
        spec: *spec,
        grid,
        t,
        f_vec,
        psi_vec,
        b,
        bc_kind,
        t2_data,
        scale,
        row_weights,
    })
}

/// `u_i - psi_i <= coin_tol (1 + ||u||_inf)`.
///
/// # Panics
///
/// If the lengths differ.
pub fn coincidence_set(u: &[f64], psi: &[f64], coin_tol: f64) -> Vec<bool> {
    assert_eq!(u.len(), psi.len(), "u and psi must have equal length");
    let tol = coin_tol * (1.0 + crate::numkit::vector::norm_inf(u));
    u.iter().zip(psi).map(|(u, p)| u - p <= tol).collect()
}

#[derive(Clone, Debug)]
pub struct ObstacleSolution {
    pub discrete: DiscreteObstacle,
    /// `max{0,x} + psi` on the interior nodes.
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub coincidence: Vec<bool>,
    pub status: SolveStatus,
    pub report: IterationReport,
}

/// Assembles and solves the stationary problem; `u = max{0,x} + psi`.
pub fn solve_obstacle(
    spec: &ObstacleSpec,
    n: usize,
    opts: &SolverOptions,
) -> Result<ObstacleSolution> {
    let discrete = assemble_elliptic(spec, n)?;
    let sol = solve_elliptic_pls(&discrete.pls_problem()?, opts)?;
    let u: Vec<f64> = sol
        .y
        .iter()
        .zip(&discrete.psi_vec)
        .map(|(y, p)| y + p)
        .collect();
    let coincidence = coincidence_set(&u, &discrete.psi_vec, COIN_TOL);
    Ok(ObstacleSolution {
        discrete,
        u,
        x: sol.x,
        coincidence,
        status: sol.status,
        report: sol.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::vector::norm_inf;

    #[test]
    fn tent_dimensions() {
        let d = assemble_elliptic(&ObstacleSpec::new(Problem::Tent), 25).unwrap();
        assert_eq!(d.dim(), 625);
        assert!((2.0 * d.grid.dx - d.grid.dy).abs() < 1e-15);
        assert_eq!(d.bc_kind, BcKind::T1);
        // interior stencil: 2 (dy/dx)^2 + 2 on the diagonal
        assert_eq!(d.t.get(300, 300), 10.0);
        assert_eq!(d.t.get(300, 301), -4.0);
        assert_eq!(d.t.get(300, 325), -1.0);
    }

    #[test]
    fn b_matches_definition() {
        for p in [
            Problem::Tent,
            Problem::TentNeumann,
            Problem::Torsion { c: -5.0 },
            Problem::TorsionNeumann { c: -5.0 },
        ] {
            let d = assemble_elliptic(&ObstacleSpec::new(p), 6).unwrap();
            let tp = d.t.spmv(&d.psi_vec).unwrap();
            for k in 0..d.dim() {
                assert_eq!(d.b[k], d.f_vec[k] - tp[k]);
            }
        }
    }

    #[test]
    fn neumann_has_unit_null_vectors() {
        for p in [Problem::TentNeumann, Problem::TorsionNeumann { c: -10.0 }] {
            let d = assemble_elliptic(&ObstacleSpec::new(p), 7).unwrap();
            assert_eq!(d.bc_kind, BcKind::T2);
            let ones = vec![1.0; d.dim()];
            let tol = 1e-10 * d.t.norm_inf();
            assert!(norm_inf(&d.t.spmv(&ones).unwrap()) <= tol);
            assert!(norm_inf(&d.t.spmv_transpose(&ones).unwrap()) <= tol);
        }
    }

    #[test]
    fn tent_neumann_sum_is_negative() {
        let d = assemble_elliptic(&ObstacleSpec::new(Problem::TentNeumann), 5).unwrap();
        assert!(d.b.iter().sum::<f64>() < 0.0);
    }

    #[test]
    fn torsion_neumann_sum() {
        let n = 9;
        let c = -7.0;
        let d = assemble_elliptic(&ObstacleSpec::new(Problem::TorsionNeumann { c }), n).unwrap();
        let expected = d.scale * ((n + 1) as f64).powi(2) * (c + 4.0);
        let sum: f64 = d.b.iter().sum();
        assert!((sum - expected).abs() < 1e-10 * expected.abs());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(assemble_elliptic(&ObstacleSpec::new(Problem::Tent), 1).is_err());
        assert!(assemble_elliptic(&ObstacleSpec::new(Problem::Torsion { c: 1.0 }), 5).is_err());
    }

    #[test]
    fn coincidence_basics() {
        let psi = [0.0, 1.0, -2.0];
        assert_eq!(coincidence_set(&psi, &psi, COIN_TOL), vec![true; 3]);
        let u: Vec<f64> = psi.iter().map(|p| p + 1.0).collect();
        assert_eq!(coincidence_set(&u, &psi, 1e-8), vec![false; 3]);
    }

    #[test]
    fn unscaled_recovers_laplacian() {
        let d =
            assemble_elliptic(&ObstacleSpec::new(Problem::TorsionNeumann { c: -5.0 }), 5).unwrap();
        let (a, _) = d.unscaled().unwrap();
        let h2 = d.grid.dx * d.grid.dx;
        // interior node of the 5x5 grid
        assert!((a.get(12, 12) * h2 - 4.0).abs() < 1e-12);
        // left-edge node, eliminated with weight 2/3
        assert!((a.get(5, 5) * h2 - (2.0 / 3.0 + 2.0)).abs() < 1e-12);
        assert!((a.get(5, 6) * h2 + 2.0 / 3.0).abs() < 1e-12);
    }
}
