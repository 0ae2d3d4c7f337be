use num_complex::Complex64;

use super::SparseError;

/// Value types storable in a [`CscMatrix`].
pub trait Scalar: Copy + PartialEq + std::ops::Add<Output = Self> + std::fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

/// Square sparse matrix in compressed sparse column form.
///
/// Row indices are strictly increasing within each column and no explicit
/// zeros are stored after [`CscBuilder::finalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T> {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
    symmetric: bool,
}

pub type SparseRealMatrix = CscMatrix<f64>;
pub type SparseComplexMatrix = CscMatrix<Complex64>;

impl<T: Scalar> CscMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Entries of column `j` as `(row, value)` pairs in ascending row order.
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        self.row_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&i, &v)| (i, v))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        match self.row_idx[lo..hi].binary_search(&i) {
            Ok(k) => self.values[lo + k],
            Err(_) => T::zero(),
        }
    }

    /// Transpose. For a structurally symmetric matrix this yields the
    /// row-compressed view of `self`: column `i` of the result is row `i`.
    pub fn transpose(&self) -> CscMatrix<T> {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let mut col_ptr = counts.clone();
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for j in 0..n {
            for (i, v) in self.col(j) {
                let dst = col_ptr[i];
                row_idx[dst] = j;
                values[dst] = v;
                col_ptr[i] += 1;
            }
        }
        CscMatrix {
            n,
            col_ptr: counts,
            row_idx,
            values,
            symmetric: self.symmetric,
        }
    }

    /// Checks that the sparsity pattern is structurally symmetric.
    pub fn check_pattern_symmetric(&self) -> Result<(), SparseError> {
        for j in 0..self.n {
            for (i, _) in self.col(j) {
                let lo = self.col_ptr[i];
                let hi = self.col_ptr[i + 1];
                if self.row_idx[lo..hi].binary_search(&j).is_err() {
                    return Err(SparseError::AsymmetricPattern(i, j));
                }
            }
        }
        Ok(())
    }

    /// Per-column row index lists (the raw sparsity pattern).
    pub fn pattern(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|j| self.col(j).map(|(i, _)| i).collect())
            .collect()
    }
}

impl CscMatrix<Complex64> {
    /// `y = A * x` (used with the transpose for row-oriented access).
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for j in 0..self.n {
            let xj = x[j];
            for (i, v) in self.col(j) {
                y[i] += v * xj;
            }
        }
        y
    }
}

/// Triplet accumulator for building a [`CscMatrix`].
///
/// Duplicate entries are summed on finalize; exact zeros are dropped.
pub struct CscBuilder<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
    symmetric: bool,
}

impl<T: Scalar> CscBuilder<T> {
    pub fn new(n: usize) -> Self {
        CscBuilder {
            n,
            entries: Vec::new(),
            symmetric: false,
        }
    }

    pub fn set_symmetric(&mut self, symmetric: bool) {
        self.symmetric = symmetric;
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    pub fn finalize(mut self) -> CscMatrix<T> {
        // column-major, then row order
        self.entries.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; self.n + 1];
        let mut row_idx = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut iter = self.entries.into_iter().peekable();
        while let Some((r, c, v)) = iter.next() {
            let mut sum = v;
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    sum = sum + v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if !sum.is_zero() {
                col_ptr[c + 1] += 1;
                row_idx.push(r);
                values.push(sum);
            }
        }
        for k in 0..self.n {
            col_ptr[k + 1] += col_ptr[k];
        }
        CscMatrix {
            n: self.n,
            col_ptr,
            row_idx,
            values,
            symmetric: self.symmetric,
        }
    }
}
