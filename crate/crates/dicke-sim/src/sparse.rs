//! Minimal compressed-row/column storage for operator application.
//!
//! The evolving state is a dense (column-major) complex matrix; the
//! operators acting on it are very sparse, so the generator keeps them
//! in CSR form for left products and CSC form for right products. Both
//! product kernels walk contiguous columns of the dense operand.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct Sparse {
    dim: usize,
    // CSR triplets for A·X
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    val: Vec<Complex64>,
    // CSC triplets for X·A
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    cval: Vec<Complex64>,
}

impl Sparse {
    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "sparse operators must be square");
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            for c in 0..dim {
                let z = m[(r, c)];
                if z != Complex64::ZERO {
                    col_idx.push(c);
                    val.push(z);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut cval = Vec::new();
        col_ptr.push(0);
        for c in 0..dim {
            for r in 0..dim {
                let z = m[(r, c)];
                if z != Complex64::ZERO {
                    row_idx.push(r);
                    cval.push(z);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            val,
            col_ptr,
            row_idx,
            cval,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[(r, self.col_idx[k])] = self.val[k];
            }
        }
        out
    }

    /// out += alpha · A · x, column by column.
    pub fn left_mul_acc(&self, alpha: Complex64, x: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n = self.dim;
        debug_assert_eq!(x.nrows(), n);
        debug_assert_eq!(out.nrows(), n);
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for col in 0..x.ncols() {
            let xcol = &xs[col * n..(col + 1) * n];
            let ocol = &mut os[col * n..(col + 1) * n];
            for r in 0..n {
                let mut acc = Complex64::ZERO;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.val[k] * xcol[self.col_idx[k]];
                }
                ocol[r] += alpha * acc;
            }
        }
    }

    /// out += alpha · x · A, accumulating whole columns of x at once.
    pub fn right_mul_acc(&self, alpha: Complex64, x: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n = self.dim;
        debug_assert_eq!(x.ncols(), n);
        debug_assert_eq!(out.ncols(), n);
        let rows = x.nrows();
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for c in 0..n {
            let ocol = &mut os[c * rows..(c + 1) * rows];
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let src = self.row_idx[k];
                let w = alpha * self.cval[k];
                let xcol = &xs[src * rows..(src + 1) * rows];
                for r in 0..rows {
                    ocol[r] += w * xcol[r];
                }
            }
        }
    }

    /// Restriction to the subspace spanned by `keep` (sorted global indices).
    /// Entries with either index outside `keep` are dropped.
    pub fn restrict(&self, keep: &[usize], pos: &[u32]) -> Self {
        const ABSENT: u32 = u32::MAX;
        let dim = keep.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for &g in keep {
            for k in self.row_ptr[g]..self.row_ptr[g + 1] {
                let c = self.col_idx[k];
                if pos[c] != ABSENT {
                    col_idx.push(pos[c] as usize);
                    val.push(self.val[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut cval = Vec::new();
        col_ptr.push(0);
        for &g in keep {
            for k in self.col_ptr[g]..self.col_ptr[g + 1] {
                let r = self.row_idx[k];
                if pos[r] != ABSENT {
                    row_idx.push(pos[r] as usize);
                    cval.push(self.cval[k]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            val,
            col_ptr,
            row_idx,
            cval,
        }
    }

    /// Out-neighbours (rows) reachable from column `c`.
    pub fn rows_from_col(&self, c: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    /// A†A, accumulated row by row: (A†A)[i,j] = Σ_k conj(A[k,i])·A[k,j].
    /// Cost is Σ_k nnz(row k)², cheap for the near-monomial operators here.
    pub fn gram(&self) -> Self {
        let mut dense = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            let lo = self.row_ptr[r];
            let hi = self.row_ptr[r + 1];
            for a in lo..hi {
                let ca = self.col_idx[a];
                let va = self.val[a].conj();
                for b in lo..hi {
                    dense[(ca, self.col_idx[b])] += va * self.val[b];
                }
            }
        }
        Self::from_dense(&dense)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<Complex64> {
        DMatrix::from_fn(4, 4, |r, c| {
            if (r + 2 * c) % 3 == 0 {
                Complex64::new(r as f64 + 1.0, c as f64 - 1.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    #[test]
    fn roundtrip_and_products() {
        let m = sample();
        let s = Sparse::from_dense(&m);
        assert_eq!(s.to_dense(), m);

        let x = DMatrix::from_fn(4, 4, |r, c| Complex64::new((r * 4 + c) as f64, 0.5));
        let alpha = Complex64::new(0.7, -0.2);

        let mut left = DMatrix::zeros(4, 4);
        s.left_mul_acc(alpha, &x, &mut left);
        let expect_left = &m * &x * alpha;
        assert!((left - expect_left).iter().all(|z| z.norm() < 1e-12));

        let mut right = DMatrix::zeros(4, 4);
        s.right_mul_acc(alpha, &x, &mut right);
        let expect_right = &x * &m * alpha;
        assert!((right - expect_right).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn restriction_matches_dense_submatrix() {
        let m = sample();
        let s = Sparse::from_dense(&m);
        let keep = vec![0usize, 2, 3];
        let mut pos = vec![u32::MAX; 4];
        for (i, &g) in keep.iter().enumerate() {
            pos[g] = i as u32;
        }
        let r = s.restrict(&keep, &pos);
        let dense = r.to_dense();
        for (i, &gi) in keep.iter().enumerate() {
            for (j, &gj) in keep.iter().enumerate() {
                assert_eq!(dense[(i, j)], m[(gi, gj)]);
            }
        }
    }
}
