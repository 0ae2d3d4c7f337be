use super::csc::{CscMatrix, Scalar};
use super::SparseError;

/// Sentinel parent index for elimination-tree roots.
pub const NO_PARENT: usize = usize::MAX;

/// Symbolic analysis of a sparse Cholesky factorization of `P·A·Pᵀ`.
#[derive(Debug, Clone)]
pub struct SymbolicFactorization {
    pub n: usize,
    /// `perm[k]` = original index placed at permuted position k.
    pub perm: Vec<usize>,
    /// `perm_inv[orig]` = permuted position.
    pub perm_inv: Vec<usize>,
    /// Elimination tree over permuted columns; `NO_PARENT` marks roots.
    pub etree: Vec<usize>,
    /// Strictly-lower row indices of each column of L (ascending, permuted).
    pub l_cols: Vec<Vec<usize>>,
    /// Strictly-lower column indices of each row of L (ascending, permuted).
    pub l_rows: Vec<Vec<usize>>,
    /// Columns grouped by level; level 0 holds the leaves.
    pub levels: Vec<Vec<usize>>,
    /// `level_of[j]` for each permuted column.
    pub level_of: Vec<usize>,
}

/// Computes fill pattern, elimination tree and level schedule for `P·A·Pᵀ`.
///
/// Uses row-subtree traversal with path compression: the nonzeros of row i of
/// L are the nodes on etree paths from each entry of the permuted row i of A
/// up towards i, and `parent(j) = min{i > j : L(i,j) != 0}`.
pub fn symbolic_factorize<T: Scalar>(
    pattern: &CscMatrix<T>,
    perm: &[usize],
) -> Result<SymbolicFactorization, SparseError> {
    pattern.check_pattern_symmetric()?;
    let n = pattern.n();
    if perm.len() != n {
        return Err(SparseError::InvalidPermutation(perm.len()));
    }
    let mut perm_inv = vec![usize::MAX; n];
    for (k, &orig) in perm.iter().enumerate() {
        if orig >= n || perm_inv[orig] != usize::MAX {
            return Err(SparseError::InvalidPermutation(perm.len()));
        }
        perm_inv[orig] = k;
    }

    let mut etree = vec![NO_PARENT; n];
    let mut l_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mark = vec![usize::MAX; n];

    for i in 0..n {
        mark[i] = i;
        let orig_col = perm[i];
        for (orig_row, _) in pattern.col(orig_col) {
            let mut k = perm_inv[orig_row];
            if k >= i {
                continue;
            }
            // walk the true parent chain from k towards i; every node touched
            // belongs to row i of L, and the first rootless node gains i as parent
            while mark[k] != i {
                mark[k] = i;
                l_rows[i].push(k);
                if etree[k] == NO_PARENT {
                    etree[k] = i;
                    break;
                }
                k = etree[k];
            }
        }
        l_rows[i].sort_unstable();
    }

    let mut l_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in &l_rows[i] {
            l_cols[j].push(i);
        }
    }
    // rows arrive in ascending i already

    let levels = level_schedule(&etree)?;
    let mut level_of = vec![0usize; n];
    for (lv, cols) in levels.iter().enumerate() {
        for &j in cols {
            level_of[j] = lv;
        }
    }

    Ok(SymbolicFactorization {
        n,
        perm: perm.to_vec(),
        perm_inv,
        etree,
        l_cols,
        l_rows,
        levels,
        level_of,
    })
}

/// Groups elimination-tree nodes into levels: leaves at level 0 and
/// `level(j) = 1 + max(level of children)`, so every node's descendants sit
/// in strictly earlier levels and each level can be processed in parallel.
pub fn level_schedule(etree: &[usize]) -> Result<Vec<Vec<usize>>, SparseError> {
    let n = etree.len();
    let mut depth = vec![0usize; n];
    for j in 0..n {
        let p = etree[j];
        if p == NO_PARENT {
            continue;
        }
        if p <= j || p >= n {
            return Err(SparseError::InvalidEtree { child: j, parent: p });
        }
        depth[p] = depth[p].max(depth[j] + 1);
    }
    let max_depth = depth.iter().copied().max().unwrap_or(0);
    let mut levels = vec![Vec::new(); if n == 0 { 0 } else { max_depth + 1 }];
    for j in 0..n {
        levels[depth[j]].push(j);
    }
    Ok(levels)
}
