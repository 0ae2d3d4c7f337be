//! Monolithic fast decoupled solve of a case file.
//!
//!     cargo run --example solve_case [-- path/to/case.m]

use std::path::{Path, PathBuf};

use gridflow::fdpf::{fdpf_solve, SolverOptions};
use gridflow::model::parse_case;
use gridflow::report::SolutionReport;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| fixture("case118.m"));
    let net = parse_case(&std::fs::read_to_string(&path)?)?;
    println!(
        "{}: {} buses, {} branches, {} generators",
        path.display(),
        net.n_bus(),
        net.branches.len(),
        net.generators.len()
    );

    let sol = fdpf_solve(&net, &SolverOptions::default(), None)?;
    println!("\nmismatch history (max |dP|, max |dQ|) per half-iteration:");
    for (k, (p, q)) in sol.max_mismatch_history.iter().enumerate() {
        println!("  {k:>2}: {p:.3e}  {q:.3e}");
    }
    println!();
    print!("{}", SolutionReport::new(&net, &sol).to_text());
    Ok(())
}
