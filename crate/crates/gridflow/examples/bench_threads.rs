//! Times monolithic vs distributed solves over a sweep of worker counts.
//!
//!     cargo run --release --example bench_threads

use std::path::{Path, PathBuf};

use gridflow::distributed::benchmark;
use gridflow::fdpf::{fdpf_solve, SolverOptions};
use gridflow::model::parse_case;
use gridflow::report::benchmark_to_text;
use gridflow::synth::synth_grid;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn main() -> anyhow::Result<()> {
    let base = parse_case(&std::fs::read_to_string(fixture("case118.m"))?)?;
    // a smaller stitched grid keeps this example quick; scale `copies` up
    // (e.g. to 90) to reproduce large-grid trends
    let grid = synth_grid(&base, 20, 4, 0.1, 2024)?;
    println!(
        "benchmark grid: {} buses, {} branches",
        grid.network.n_bus(),
        grid.network.branches.len()
    );

    let opts = SolverOptions::default();
    let mono = fdpf_solve(&grid.network, &opts, None)?;
    anyhow::ensure!(mono.converged);

    let table = benchmark(&grid.network, &grid.area_map, &mono.state, &opts, &[1, 2, 4], 5)?;
    print!("{}", benchmark_to_text(&table));
    Ok(())
}
