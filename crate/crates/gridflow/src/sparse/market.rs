//! MatrixMarket coordinate I/O plus a plain-text dump of the symbolic
//! analysis for debugging.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::csc::{CscBuilder, CscMatrix};
use super::symbolic::{SymbolicFactorization, NO_PARENT};
use super::SparseError;

pub fn write_matrix_market_real(m: &CscMatrix<f64>) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", m.n(), m.n(), m.nnz());
    for j in 0..m.n() {
        for (i, v) in m.col(j) {
            let _ = writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v);
        }
    }
    out
}

pub fn write_matrix_market_complex(m: &CscMatrix<Complex64>) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(out, "{} {} {}", m.n(), m.n(), m.nnz());
    for j in 0..m.n() {
        for (i, v) in m.col(j) {
            let _ = writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im);
        }
    }
    out
}

pub fn read_matrix_market_real(text: &str) -> Result<CscMatrix<f64>, SparseError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| SparseError::Format("empty matrix market file".into()))?;
    if !header.starts_with("%%MatrixMarket matrix coordinate real") {
        return Err(SparseError::Format(format!("unsupported header: {header}")));
    }
    let mut lines = lines.filter(|l| !l.trim_start().starts_with('%'));
    let dims = lines
        .next()
        .ok_or_else(|| SparseError::Format("missing dimension line".into()))?;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(SparseError::Format(format!("bad dimension line: {dims}")));
    }
    let rows: usize = parts[0]
        .parse()
        .map_err(|_| SparseError::Format("bad row count".into()))?;
    let cols: usize = parts[1]
        .parse()
        .map_err(|_| SparseError::Format("bad column count".into()))?;
    if rows != cols {
        return Err(SparseError::Format("only square matrices supported".into()));
    }
    let mut b = CscBuilder::new(rows);
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(SparseError::Format(format!("bad entry line: {line}")));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| SparseError::Format("bad row index".into()))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| SparseError::Format("bad column index".into()))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| SparseError::Format("bad value".into()))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(SparseError::Format(format!("entry out of range: {line}")));
        }
        b.push(i - 1, j - 1, v);
    }
    Ok(b.finalize())
}

/// Human-readable dump of permutation, elimination tree and level schedule.
pub fn dump_symbolic(sym: &SymbolicFactorization) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n = {}", sym.n);
    let _ = writeln!(out, "perm = {:?}", sym.perm);
    out.push_str("etree:\n");
    for (j, &p) in sym.etree.iter().enumerate() {
        if p == NO_PARENT {
            let _ = writeln!(out, "  {j} -> root");
        } else {
            let _ = writeln!(out, "  {j} -> {p}");
        }
    }
    out.push_str("levels:\n");
    for (lv, cols) in sym.levels.iter().enumerate() {
        let _ = writeln!(out, "  {lv}: {cols:?}");
    }
    out
}
