//! Distributed multi-area solve of the 118-bus system with a committed
//! 4-area map, compared against the monolithic solution.
//!
//!     cargo run --example distributed_solve

use std::path::{Path, PathBuf};

use gridflow::distributed::{compare_solutions, run_distributed};
use gridflow::fdpf::{fdpf_solve, SolverOptions};
use gridflow::model::parse_case;
use gridflow::partition::parse_area_map;
use gridflow::report::{diff_to_text, DistributedReport};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn main() -> anyhow::Result<()> {
    let net = parse_case(&std::fs::read_to_string(fixture("case118.m"))?)?;
    let map = parse_area_map(&std::fs::read_to_string(fixture("case118_4area.areas"))?)?;
    let opts = SolverOptions::default();

    // the reference state stands in for a state-estimator snapshot
    let mono = fdpf_solve(&net, &opts, None)?;
    anyhow::ensure!(mono.converged, "monolithic reference did not converge");

    let dist = run_distributed(&net, &map, &mono.state, &opts)?;
    print!("{}", DistributedReport::new(&net, &dist).to_text());

    println!("\ndeviation from the monolithic solution:");
    let diff = compare_solutions(&dist.merged, &mono)?;
    let ids: Vec<i64> = net.buses.iter().map(|b| b.id).collect();
    print!("{}", diff_to_text(&diff, Some(&ids)));
    Ok(())
}
