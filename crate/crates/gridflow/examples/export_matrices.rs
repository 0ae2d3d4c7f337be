//! Exports the admittance and decoupled coefficient matrices of a case to
//! Matrix Market files, plus a text dump of the B' symbolic factorization.
//!
//!     cargo run --example export_matrices [-- output_dir]

use std::path::{Path, PathBuf};

use gridflow::admittance::{build_fdpf_matrices, build_ybus};
use gridflow::model::parse_case;
use gridflow::sparse::{
    dump_symbolic, min_degree_order, symbolic_factorize, write_matrix_market_complex,
    write_matrix_market_real,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn main() -> anyhow::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let net = parse_case(&std::fs::read_to_string(fixture("case118.m"))?)?;

    let ybus = build_ybus(&net)?;
    let matrices = build_fdpf_matrices(&net)?;

    let write = |name: &str, text: String| -> anyhow::Result<PathBuf> {
        let path = out.join(name);
        std::fs::write(&path, text)?;
        Ok(path)
    };
    println!("{}", write("ybus.mtx", write_matrix_market_complex(&ybus))?.display());
    println!(
        "{}",
        write("b_prime.mtx", write_matrix_market_real(&matrices.b_prime))?.display()
    );
    println!(
        "{}",
        write(
            "b_double_prime.mtx",
            write_matrix_market_real(&matrices.b_double_prime)
        )?
        .display()
    );

    let perm = min_degree_order(&matrices.b_prime)?;
    let sym = symbolic_factorize(&matrices.b_prime, &perm)?;
    println!("{}", write("b_prime.symbolic.txt", dump_symbolic(&sym))?.display());
    Ok(())
}
