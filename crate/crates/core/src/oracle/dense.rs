//! Small dense kernels for the enumeration oracle and for tests.

/// Row-major square matrix.
pub type Dense = Vec<Vec<f64>>;

fn norm_inf(a: &Dense) -> f64 {
    a.iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Dense,
    perm: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot falls below `1e-12 * ||A||_inf`.
    pub fn factor(a: &Dense) -> Option<Lu> {
        let n = a.len();
        let tol = 1e-12 * norm_inf(a);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i][k].abs().total_cmp(&lu[j][k].abs()))
                .unwrap();
            if !(lu[p][k].abs() > tol) {
                return None;
            }
            lu.swap(k, p);
            perm.swap(k, p);
            let pivot = lu[k][k];
            let (top, bottom) = lu.split_at_mut(k + 1);
            let row_k = &top[k];
            for row in bottom.iter_mut() {
                let m = row[k] / pivot;
                row[k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        row[j] -= m * row_k[j];
                    }
                }
            }
        }
        Some(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i][j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i][j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i][i];
        }
        x
    }
}

/// `A^{-1}`, or `None` if `A` is numerically singular.
pub fn inverse(a: &Dense) -> Option<Dense> {
    let n = a.len();
    let lu = Lu::factor(a)?;
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lu.solve(&e)
        })
        .collect();
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect(),
    )
}

/// Solution set of a possibly singular `A x = b`: one particular solution
/// and a basis of the null space. `None` when the system is inconsistent.
pub fn solve_general(a: &Dense, b: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    let scale = norm_inf(a).max(b.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    let tol = 1e-12 * norm_inf(a).max(f64::MIN_POSITIVE);
    let mut m: Dense = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();

    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == n {
            break;
        }
        let p = (row..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if !(m[p][col].abs() > tol) {
            continue;
        }
        m.swap(row, p);
        let pv = m[row][col];
        m[row].iter_mut().for_each(|v| *v /= pv);
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i != row && r[col] != 0.0 {
                let f = r[col];
                r.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| r[n].abs() > 1e-10 * scale.max(1.0)) {
        return None;
    }

    let mut x = vec![0.0; n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][n];
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![0.0; n];
            v[f] = 1.0;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -m[r][f];
            }
            v
        })
        .collect();
    Some((x, basis))
}
