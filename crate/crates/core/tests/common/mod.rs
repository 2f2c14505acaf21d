#![allow(dead_code)]

use pls_core::numkit::vector::norm_inf;
use pls_core::{KrylovOptions, SolverOptions, SparseMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

/// Random irreducible nonsingular M-matrix: a Z-matrix with a cyclic
/// coupling (so the graph is strongly connected), extra random couplings,
/// and a diagonal that dominates either every row or every column by a
/// random margin. Some margins are tiny, so the matrices range from
/// comfortably to barely nonsingular.
pub fn random_t1(n: usize, rng: &mut ChaCha8Rng) -> Dense {
    let density = rng.gen_range(0.0..0.8);
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && (j == (i + 1) % n || rng.gen_bool(density)) {
                t[i][j] = -rng.gen_range(0.05..2.0);
            }
        }
    }
    let by_rows = rng.gen_bool(0.5);
    for i in 0..n {
        let off: f64 = if by_rows {
            (0..n).filter(|&j| j != i).map(|j| -t[i][j]).sum()
        } else {
            (0..n).filter(|&j| j != i).map(|j| -t[j][i]).sum()
        };
        let margin = if rng.gen_bool(0.2) {
            rng.gen_range(1e-3..1e-2)
        } else {
            rng.gen_range(0.05..1.5)
        };
        t[i][i] = off + margin;
    }
    t
}

/// Random singular irreducible Z-matrix with zero column sums, so
/// `v = 1`; `w` is the (positive) Perron vector of the column-stochastic
/// part.
pub fn random_t2(n: usize, rng: &mut ChaCha8Rng) -> Dense {
    let mut t = random_t1(n, rng);
    for j in 0..n {
        let off: f64 = (0..n).filter(|&i| i != j).map(|i| -t[i][j]).sum();
        t[j][j] = off;
    }
    t
}

/// Weighted path-graph Laplacian; `v = w = 1`.
pub fn path_laplacian(n: usize, rng: &mut ChaCha8Rng) -> Dense {
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        let c = rng.gen_range(0.5..2.0);
        t[i][i + 1] -= c;
        t[i + 1][i] -= c;
        t[i][i] += c;
        t[i + 1][i + 1] += c;
    }
    t
}

pub fn mixed_rhs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if b.iter().any(|&v| v > 0.0) && b.iter().any(|&v| v < 0.0) {
            return b;
        }
    }
}

pub fn sparse(t: &Dense) -> SparseMatrix {
    SparseMatrix::from_dense(t).unwrap()
}

/// Solver settings for small systems where the inner solves should be as
/// accurate as floating point allows.
pub fn tight_options() -> SolverOptions {
    SolverOptions {
        krylov: KrylovOptions {
            rel_tol: 1e-14,
            max_iters: Some(200),
            ..KrylovOptions::default()
        },
        ..SolverOptions::default()
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    max_abs_diff(a, b) <= tol * norm_inf(b).max(f64::MIN_POSITIVE)
}

/// A random `b` with `v^T b` negative, zero or positive.
pub fn rhs_with_sign(v: &[f64], branch: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = v.len();
    let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let vb: f64 = v.iter().zip(&b).map(|(v, b)| v * b).sum();
    let target = match branch {
        0 => -rng.gen_range(0.1..1.0),
        1 => 0.0,
        _ => rng.gen_range(0.1..1.0),
    };
    b.iter_mut()
        .zip(v)
        .for_each(|(b, v)| *b += (target - vb) * v / vv);
    b
}
