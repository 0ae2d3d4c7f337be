//! Walks the sparse kernel on the 118-bus B' matrix: fill-reducing ordering,
//! elimination tree, level schedule, numeric factorization and a solve.
//!
//!     cargo run --example sparse_kernel

use std::path::{Path, PathBuf};

use gridflow::admittance::build_fdpf_matrices;
use gridflow::model::parse_case;
use gridflow::sparse::{
    min_degree_order, numeric_factorize, symbolic_factorize,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn main() -> anyhow::Result<()> {
    let net = parse_case(&std::fs::read_to_string(fixture("case118.m"))?)?;
    let b_prime = build_fdpf_matrices(&net)?.b_prime;
    let n = b_prime.n();
    println!("B': {} x {}, {} nonzeros", n, n, b_prime.nnz());

    let natural: Vec<usize> = (0..n).collect();
    let sym_natural = symbolic_factorize(&b_prime, &natural)?;
    let perm = min_degree_order(&b_prime)?;
    let sym = symbolic_factorize(&b_prime, &perm)?;
    let nnz_of = |s: &gridflow::sparse::SymbolicFactorization| {
        n + s.l_cols.iter().map(|c| c.len()).sum::<usize>()
    };
    println!(
        "factor nonzeros: natural order {}, minimum-degree {}",
        nnz_of(&sym_natural),
        nnz_of(&sym)
    );

    println!("level schedule: {} levels for {} columns", sym.levels.len(), n);
    for (d, level) in sym.levels.iter().enumerate().take(6) {
        println!("  level {d}: {} columns", level.len());
    }
    if sym.levels.len() > 6 {
        println!("  ...");
    }

    let factor = numeric_factorize(&b_prime, &sym)?;
    let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let x = factor.solve(&rhs)?;

    // residual check of A x = b, accumulated row-wise via the transpose
    let mut residual = 0.0f64;
    let at = b_prime.transpose();
    for i in 0..n {
        let mut ax = 0.0;
        for (j, v) in at.col(i) {
            ax += v * x[j];
        }
        residual = residual.max((ax - rhs[i]).abs());
    }
    println!("solve residual ||Ax - b||_inf = {residual:.3e}");
    Ok(())
}
