//! Generates the ~10k-bus synthetic grid (90 stitched 118-bus copies, fixed
//! seed), solves it monolithically and distributed over 4 areas.
//!
//!     cargo run --release --example synth_grid

use std::path::{Path, PathBuf};

use gridflow::distributed::{compare_solutions, run_distributed};
use gridflow::fdpf::{fdpf_solve, SolverOptions};
use gridflow::model::parse_case;
use gridflow::synth::synth_grid;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn main() -> anyhow::Result<()> {
    let base = parse_case(&std::fs::read_to_string(fixture("case118.m"))?)?;
    let grid = synth_grid(&base, 90, 4, 0.1, 2024)?;
    println!(
        "synthetic grid: {} buses, {} branches, {} generators, 4 areas",
        grid.network.n_bus(),
        grid.network.branches.len(),
        grid.network.generators.len()
    );

    let opts = SolverOptions::default();
    let mono = fdpf_solve(&grid.network, &opts, None)?;
    println!(
        "monolithic: converged={} in {} iterations ({:.1} ms iterate, {:.1} ms factorize)",
        mono.converged, mono.iterations, mono.timing.iterate_ms, mono.timing.factorize_ms
    );

    let dist = run_distributed(&grid.network, &grid.area_map, &mono.state, &opts)?;
    for (id, sol) in &dist.per_area {
        println!(
            "  area {id}: {} buses, converged={} in {} iterations",
            sol.state.vm.len(),
            sol.converged,
            sol.iterations
        );
    }
    println!("distributed wall time: {:.1} ms", dist.wall_time_ms);

    let diff = compare_solutions(&dist.merged, &mono)?;
    println!(
        "deviation vs monolithic: {:.6} deg, {:.6} pu",
        diff.max_angle_diff_deg, diff.max_vm_diff_pu
    );
    Ok(())
}
