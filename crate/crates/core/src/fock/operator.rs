use num_complex::Complex;

use crate::eigen::LinearOperator;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

/// Compressed-sparse-row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex<T>>,
    hermitian: bool,
}

impl<T: Real> SparseOperator<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(
        dim: usize,
        mut triplets: Vec<(usize, usize, Complex<T>)>,
        hermitian: bool,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(values) {
            if v != czero() {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator {
            dim,
            row_ptr,
            cols: keep_cols,
            values: keep_vals,
            hermitian,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, one)).collect(), true)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.row(r)
            .find(|&(col, _)| col == c)
            .map(|(_, v)| v)
            .unwrap_or_else(czero)
    }

    pub fn matvec(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = czero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    /// `y += alpha * A x`.
    pub fn matvec_add(&self, alpha: Complex<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = czero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *yr += alpha * acc;
        }
    }

    pub fn apply_checked(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut y = vec![czero(); self.dim];
        self.matvec(x, &mut y);
        Ok(y)
    }

    /// Largest `|A_ij - conj(A_ji)|` over stored entries.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let d = (v - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Maximum absolute row sum, an upper bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> T {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn to_dense(&self) -> Vec<Complex<T>> {
        let mut a = vec![czero(); self.dim * self.dim];
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                a[r * self.dim + c] += v;
            }
        }
        a
    }
}

impl<T: Real> LinearOperator<T> for SparseOperator<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        self.matvec(x, y)
    }

    fn norm_bound(&self) -> T {
        self.gershgorin_bound()
    }
}
