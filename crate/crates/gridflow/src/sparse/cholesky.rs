use rayon::prelude::*;

use super::csc::SparseRealMatrix;
use super::symbolic::SymbolicFactorization;
use super::SparseError;

/// Sparse Cholesky factor `L` of `P·A·Pᵀ = L·Lᵀ`, stored column-wise on the
/// symbolic fill pattern.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    symbolic: SymbolicFactorization,
    /// Diagonal of L per permuted column (strictly positive).
    diag: Vec<f64>,
    /// Strictly-lower values per column, parallel to `symbolic.l_cols`.
    col_vals: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn symbolic(&self) -> &SymbolicFactorization {
        &self.symbolic
    }

    pub fn n(&self) -> usize {
        self.symbolic.n
    }

    /// `L(i,j)` in permuted coordinates, for testing and export.
    pub fn l_entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[j];
        }
        match self.symbolic.l_cols[j].binary_search(&i) {
            Ok(k) => self.col_vals[j][k],
            Err(_) => 0.0,
        }
    }

    /// Solves `A·x = rhs` (original ordering) via the level-scheduled
    /// forward/backward sweeps.
    ///
    /// Forward sweep walks levels ascending, backward descending; columns
    /// within one level carry no mutual dependency. Scatter contributions are
    /// applied in fixed column order so results are bitwise identical for any
    /// worker count.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SparseError> {
        let n = self.n();
        if rhs.len() != n {
            return Err(SparseError::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let sym = &self.symbolic;
        // permute: y solves L·Lᵀ·y = P·rhs
        let mut acc: Vec<f64> = (0..n).map(|k| rhs[sym.perm[k]]).collect();

        // forward: L·z = P·rhs
        let mut z = vec![0.0f64; n];
        for level in &sym.levels {
            let updates: Vec<(usize, f64)> = level
                .par_iter()
                .map(|&j| (j, acc[j] / self.diag[j]))
                .collect();
            for &(j, zj) in &updates {
                z[j] = zj;
            }
            let scatters: Vec<Vec<(usize, f64)>> = level
                .par_iter()
                .map(|&j| {
                    let zj = z[j];
                    sym.l_cols[j]
                        .iter()
                        .zip(&self.col_vals[j])
                        .map(|(&i, &lij)| (i, lij * zj))
                        .collect()
                })
                .collect();
            for list in &scatters {
                for &(i, d) in list {
                    acc[i] -= d;
                }
            }
        }

        // backward: Lᵀ·y = z, pure gather per column
        let mut y = vec![0.0f64; n];
        for level in sym.levels.iter().rev() {
            let vals: Vec<(usize, f64)> = level
                .par_iter()
                .map(|&j| {
                    let mut s = z[j];
                    for (&i, &lij) in sym.l_cols[j].iter().zip(&self.col_vals[j]) {
                        s -= lij * y[i];
                    }
                    (j, s / self.diag[j])
                })
                .collect();
            for &(j, yj) in &vals {
                y[j] = yj;
            }
        }

        // un-permute
        let mut x = vec![0.0f64; n];
        for k in 0..n {
            x[sym.perm[k]] = y[k];
        }
        Ok(x)
    }
}

/// Numeric Cholesky on a precomputed symbolic pattern.
///
/// Left-looking by column; a column depends only on its elimination-tree
/// descendants, so all columns of one level factorize concurrently. Column
/// results are merged in ascending order, keeping the output independent of
/// the worker count.
pub fn numeric_factorize(
    a: &SparseRealMatrix,
    sym: &SymbolicFactorization,
) -> Result<CholeskyFactor, SparseError> {
    let n = sym.n;
    if a.n() != n {
        return Err(SparseError::DimensionMismatch {
            expected: n,
            got: a.n(),
        });
    }

    // permuted columns of the lower triangle of A, gathered once
    let a_cols: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|j| {
            let mut col: Vec<(usize, f64)> = a
                .col(sym.perm[j])
                .map(|(orig_row, v)| (sym.perm_inv[orig_row], v))
                .filter(|&(i, _)| i >= j)
                .collect();
            col.sort_unstable_by_key(|&(i, _)| i);
            col
        })
        .collect();

    let mut diag = vec![0.0f64; n];
    let mut col_vals: Vec<Vec<f64>> = sym.l_cols.iter().map(|c| vec![0.0; c.len()]).collect();

    for level in &sym.levels {
        let results: Vec<Result<(usize, f64, Vec<f64>), SparseError>> = level
            .par_iter()
            .map(|&j| {
                // dense accumulator over rows >= j of column j
                let mut x = vec![0.0f64; n - j];
                for &(i, v) in &a_cols[j] {
                    x[i - j] = v;
                }
                // subtract contributions of earlier columns k with L(j,k) != 0
                for &k in &sym.l_rows[j] {
                    let pos = sym.l_cols[k].binary_search(&j).expect("pattern row/col mismatch");
                    let ljk = col_vals[k][pos];
                    for (&i, &lik) in sym.l_cols[k].iter().zip(&col_vals[k]).skip(pos) {
                        x[i - j] -= lik * ljk;
                    }
                }
                let d = x[0];
                if d <= 0.0 {
                    return Err(SparseError::NotPositiveDefinite {
                        column: j,
                        value: d,
                    });
                }
                let root = d.sqrt();
                let vals: Vec<f64> = sym.l_cols[j].iter().map(|&i| x[i - j] / root).collect();
                Ok((j, root, vals))
            })
            .collect();
        for r in results {
            let (j, d, vals) = r?;
            diag[j] = d;
            col_vals[j] = vals;
        }
    }

    Ok(CholeskyFactor {
        symbolic: sym.clone(),
        diag,
        col_vals,
    })
}
