use crate::error::{Error, Result};
use crate::numkit::SparseMatrix;
use crate::pls::ActiveMask;

/// A square linear map that can apply itself and its transpose.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `y = A^T x`
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);

    /// Main diagonal, used by the Jacobi preconditioner.
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y)
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_transpose_into(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        SparseMatrix::diagonal(self)
    }
}

/// Which masked matrix a [`MaskedOperator`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `I - P + T P`
    Elliptic,
    /// `I + T P`
    Parabolic,
}

/// Matrix-free `I - P + TP` or `I + TP` for a 0/1 diagonal `P`.
///
/// The columns of `T` outside the mask are skipped at product time, so `T`
/// is never copied or re-assembled when the mask changes.
#[derive(Clone, Copy, Debug)]
pub struct MaskedOperator<'a> {
    base: &'a SparseMatrix,
    mask: &'a ActiveMask,
    kind: OperatorKind,
}

impl<'a> MaskedOperator<'a> {
    pub fn new(base: &'a SparseMatrix, mask: &'a ActiveMask, kind: OperatorKind) -> Result<Self> {
        if !base.is_square() {
            return Err(Error::dim("masked operator needs a square base matrix"));
        }
        if mask.len() != base.n_rows() {
            return Err(Error::dim(format!(
                "mask of length {} for a matrix of order {}",
                mask.len(),
                base.n_rows()
            )));
        }
        Ok(MaskedOperator { base, mask, kind })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Checked product returning a fresh vector.
    pub fn matvec(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::dim(format!(
                "operator of order {}, vector of length {}",
                self.dim(),
                z.len()
            )));
        }
        let mut y = vec![0.0; z.len()];
        self.apply(z, &mut y);
        Ok(y)
    }

    /// Assembles the masked matrix explicitly. Meant for checks on small
    /// instances.
    pub fn assemble(&self) -> SparseMatrix {
        let n = self.dim();
        let bits = self.mask.bits();
        let mut triplets = Vec::with_capacity(self.base.nnz() + n);
        for i in 0..n {
            let keep_identity = match self.kind {
                OperatorKind::Elliptic => !bits[i],
                OperatorKind::Parabolic => true,
            };
            if keep_identity {
                triplets.push((i, i, 1.0));
            }
            triplets.extend(
                self.base
                    .row(i)
                    .filter(|&(j, _)| bits[j])
                    .map(|(j, v)| (i, j, v)),
            );
        }
        SparseMatrix::from_triplets(&triplets, n, n).expect("indices come from a valid matrix")
    }
}

impl LinearOperator for MaskedOperator<'_> {
    fn dim(&self) -> usize {
        self.base.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let bits = self.mask.bits();
        let (offsets, cols, vals) = (
            self.base.row_offsets(),
            self.base.col_indices(),
            self.base.values(),
        );
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in offsets[i]..offsets[i + 1] {
                let j = cols[k];
                if bits[j] {
                    acc += vals[k] * x[j];
                }
            }
            let diag = match self.kind {
                OperatorKind::Elliptic if bits[i] => 0.0,
                _ => x[i],
            };
            *yi = diag + acc;
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        // (I - P + TP)^T x = (I - P) x + P T^T x
        self.base.spmv_transpose_into(x, y);
        let bits = self.mask.bits();
        for (i, yi) in y.iter_mut().enumerate() {
            let masked = if bits[i] { *yi } else { 0.0 };
            *yi = match self.kind {
                OperatorKind::Elliptic if bits[i] => masked,
                _ => x[i] + masked,
            };
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let bits = self.mask.bits();
        self.base
            .diagonal()
            .into_iter()
            .enumerate()
            .map(|(i, t)| match (self.kind, bits[i]) {
                (OperatorKind::Elliptic, true) => t,
                (OperatorKind::Elliptic, false) => 1.0,
                (OperatorKind::Parabolic, true) => 1.0 + t,
                (OperatorKind::Parabolic, false) => 1.0,
            })
            .collect()
    }
}

/// The active block of a masked operator: `T_PP` (elliptic) or
/// `I + T_PP` (parabolic), acting on vectors indexed by the active set.
///
/// The rows of `I - P + TP` and `I + TP` outside the mask read
/// `x_i + (T P x)_i = b_i`, so once the active block is solved the
/// remaining entries follow by substitution.
#[derive(Clone, Debug)]
pub struct ActiveBlock<'a> {
    base: &'a SparseMatrix,
    active: Vec<usize>,
    /// Position in `active`, or `usize::MAX` for inactive indices.
    local: Vec<usize>,
    kind: OperatorKind,
}

impl<'a> ActiveBlock<'a> {
    pub fn new(base: &'a SparseMatrix, mask: &ActiveMask, kind: OperatorKind) -> Result<Self> {
        MaskedOperator::new(base, mask, kind)?;
        let mut local = vec![usize::MAX; mask.len()];
        let mut active = Vec::with_capacity(mask.popcount());
        for (i, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
            local[i] = active.len();
            active.push(i);
        }
        Ok(ActiveBlock {
            base,
            active,
            local,
            kind,
        })
    }

    /// Active indices in increasing order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Restricts a full vector to the active set.
    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&i| x[i]).collect()
    }

    /// The full solution of the masked system whose active part is `z`.
    pub fn extend(&self, z: &[f64], b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for (&i, &zi) in self.active.iter().zip(z) {
            x[i] = zi;
        }
        for (i, xi) in x.iter_mut().enumerate() {
            if self.local[i] == usize::MAX {
                let coupling: f64 = self
                    .base
                    .row(i)
                    .filter(|&(j, _)| self.local[j] != usize::MAX)
                    .map(|(j, v)| v * z[self.local[j]])
                    .sum();
                *xi -= coupling;
            }
        }
        x
    }
}

impl LinearOperator for ActiveBlock<'_> {
    fn dim(&self) -> usize {
        self.active.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, (&i, yr)) in self.active.iter().zip(y.iter_mut()).enumerate() {
            let mut acc = 0.0;
            for (j, v) in self.base.row(i) {
                let c = self.local[j];
                if c != usize::MAX {
                    acc += v * x[c];
                }
            }
            *yr = match self.kind {
                OperatorKind::Elliptic => acc,
                OperatorKind::Parabolic => x[r] + acc,
            };
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        match self.kind {
            OperatorKind::Elliptic => y.fill(0.0),
            OperatorKind::Parabolic => y.copy_from_slice(x),
        }
        for (&i, &xr) in self.active.iter().zip(x) {
            for (j, v) in self.base.row(i) {
                let c = self.local[j];
                if c != usize::MAX {
                    y[c] += v * xr;
                }
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.active
            .iter()
            .map(|&i| {
                let t = self.base.get(i, i);
                match self.kind {
                    OperatorKind::Elliptic => t,
                    OperatorKind::Parabolic => 1.0 + t,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t2x2() -> SparseMatrix {
        SparseMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap()
    }

    #[test]
    fn empty_mask_is_identity() {
        let t = t2x2();
        let mask = ActiveMask::from_bits(vec![false, false]);
        let op = MaskedOperator::new(&t, &mask, OperatorKind::Elliptic).unwrap();
        assert_eq!(op.matvec(&[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
    }

    #[test]
    fn full_mask_is_t() {
        let t = t2x2();
        let mask = ActiveMask::from_bits(vec![true, true]);
        let op = MaskedOperator::new(&t, &mask, OperatorKind::Elliptic).unwrap();
        assert_eq!(op.matvec(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn partial_mask() {
        // I - P + TP = [[2, 0], [-1, 1]]
        let t = t2x2();
        let mask = ActiveMask::from_bits(vec![true, false]);
        let op = MaskedOperator::new(&t, &mask, OperatorKind::Elliptic).unwrap();
        assert_eq!(op.matvec(&[0.5, -0.5]).unwrap(), vec![1.0, -1.0]);
        assert_eq!(
            op.assemble().to_dense(),
            vec![vec![2.0, 0.0], vec![-1.0, 1.0]]
        );
        assert_eq!(LinearOperator::diagonal(&op), vec![2.0, 1.0]);
    }

    #[test]
    fn parabolic_partial_mask() {
        // I + TP = [[3, 0], [-1, 1]]
        let t = t2x2();
        let mask = ActiveMask::from_bits(vec![true, false]);
        let op = MaskedOperator::new(&t, &mask, OperatorKind::Parabolic).unwrap();
        assert_eq!(
            op.assemble().to_dense(),
            vec![vec![3.0, 0.0], vec![-1.0, 1.0]]
        );
    }

    #[test]
    fn dimension_checks() {
        let t = t2x2();
        let mask = ActiveMask::from_bits(vec![true]);
        assert!(MaskedOperator::new(&t, &mask, OperatorKind::Elliptic).is_err());
        let mask = ActiveMask::from_bits(vec![true, true]);
        let op = MaskedOperator::new(&t, &mask, OperatorKind::Elliptic).unwrap();
        assert!(matches!(op.matvec(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn active_block_solves_masked_system() {
        // mask (1,0): [[2,0],[-1,1]] x = (1,-1) gives x = (0.5,-0.5)
        let t = t2x2();
        let mask = ActiveMask::from_bits(vec![true, false]);
        let block = ActiveBlock::new(&t, &mask, OperatorKind::Elliptic).unwrap();
        assert_eq!(block.active(), &[0]);
        assert_eq!(LinearOperator::diagonal(&block), vec![2.0]);
        assert_eq!(block.extend(&[0.5], &[1.0, -1.0]), vec![0.5, -0.5]);
        let block = ActiveBlock::new(&t, &mask, OperatorKind::Parabolic).unwrap();
        let x = block.extend(&[1.0 / 3.0], &[1.0, -1.0]);
        assert!((x[1] + 2.0 / 3.0).abs() < 1e-15);
    }

    fn small_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>, Vec<f64>, Vec<f64>)> {
        (1usize..=8).prop_flat_map(|n| {
            (
                prop::collection::vec(
                    prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], n),
                    n,
                ),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(-10.0..10.0f64, n),
                prop::collection::vec(-10.0..10.0f64, n),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_explicit_assembly((dense, bits, z, u) in small_case()) {
            let t = SparseMatrix::from_dense(&dense).unwrap();
            let mask = ActiveMask::from_bits(bits.clone());
            let n = bits.len();
            for kind in [OperatorKind::Elliptic, OperatorKind::Parabolic] {
                // explicit dense I - P + TP (or I + TP)
                let mut m = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        let p = if bits[j] { 1.0 } else { 0.0 };
                        m[i][j] = dense[i][j] * p;
                    }
                    m[i][i] += match kind {
                        OperatorKind::Elliptic => if bits[i] { 0.0 } else { 1.0 },
                        OperatorKind::Parabolic => 1.0,
                    };
                }
                let op = MaskedOperator::new(&t, &mask, kind).unwrap();
                let got = op.matvec(&z).unwrap();
                let mut got_t = vec![0.0; n];
                op.apply_transpose(&u, &mut got_t);
                for i in 0..n {
                    let want: f64 = (0..n).map(|j| m[i][j] * z[j]).sum();
                    let want_t: f64 = (0..n).map(|j| m[j][i] * u[j]).sum();
                    prop_assert!((got[i] - want).abs() <= 1e-12 * (1.0 + want.abs()));
                    prop_assert!((got_t[i] - want_t).abs() <= 1e-12 * (1.0 + want_t.abs()));
                }
                let block = ActiveBlock::new(&t, &mask, kind).unwrap();
                let zp = block.gather(&z);
                let up = block.gather(&u);
                let mut bz = vec![0.0; zp.len()];
                let mut bu = vec![0.0; up.len()];
                block.apply(&zp, &mut bz);
                block.apply_transpose(&up, &mut bu);
                for (r, &i) in block.active().iter().enumerate() {
                    let want: f64 = block.active().iter().map(|&j| m[i][j] * z[j]).sum();
                    let want_t: f64 = block.active().iter().map(|&j| m[j][i] * u[j]).sum();
                    prop_assert!((bz[r] - want).abs() <= 1e-12 * (1.0 + want.abs()));
                    prop_assert!((bu[r] - want_t).abs() <= 1e-12 * (1.0 + want_t.abs()));
                }
                let assembled = op.assemble().spmv(&z).unwrap();
                for i in 0..n {
                    prop_assert!((assembled[i] - got[i]).abs() <= 1e-12 * (1.0 + got[i].abs()));
                }
            }
        }

        #[test]
        fn spmv_matches_dense(dense in (1usize..=16).prop_flat_map(|n| prop::collection::vec(
                prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], n), n)),
                seed in any::<u64>()) {
            let n = dense.len();
            let x: Vec<f64> = (0..n).map(|i| ((seed >> (i % 60)) & 0xff) as f64 / 17.0 - 7.0).collect();
            let t = SparseMatrix::from_dense(&dense).unwrap();
            let y = t.spmv(&x).unwrap();
            for i in 0..n {
                let want: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
                prop_assert!((y[i] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }
}
