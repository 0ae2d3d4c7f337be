//! Audits a partition: area sizes, cut branches, boundary injections and
//! their conservation against the removed branches' losses.
//!
//!     cargo run --example partition_audit

use std::path::{Path, PathBuf};

use gridflow::fdpf::{branch_flows, fdpf_solve, SolverOptions};
use gridflow::model::parse_case;
use gridflow::partition::{
    boundary_injections, parse_area_map, select_area_slacks, split_areas,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn main() -> anyhow::Result<()> {
    let net = parse_case(&std::fs::read_to_string(fixture("case118.m"))?)?;
    let map = parse_area_map(&std::fs::read_to_string(fixture("case118_4area.areas"))?)?;

    let part = split_areas(&net, &map)?;
    let reference = fdpf_solve(&net, &SolverOptions::default(), None)?;
    anyhow::ensure!(reference.converged);
    let inj = boundary_injections(&net, &part, &reference.state)?;
    let slacks = select_area_slacks(&part, &net, &reference.state)?;

    for (area, slack) in part.areas.iter().zip(&slacks) {
        println!(
            "area {}: {} buses, {} branches, slack bus {} pinned at {:.4} deg",
            area.id,
            area.network.n_bus(),
            area.network.branches.len(),
            slack.bus,
            slack.angle.to_degrees()
        );
    }

    let s = net.base_mva;
    println!("\ncut branches ({}):", part.inter_area_branches.len());
    for c in inj.provenance.chunks(2) {
        let (fe, te) = (&c[0], &c[1]);
        println!(
            "  {}-{}: from-end {:>8.2} MW, to-end {:>8.2} MW, loss {:>7.3} MW",
            fe.from,
            fe.to,
            fe.p * s,
            te.p * s,
            (fe.p + te.p) * s
        );
    }

    let boundary = inj
        .p_extra
        .iter()
        .zip(&inj.q_extra)
        .filter(|(p, q)| **p != 0.0 || **q != 0.0)
        .count();
    println!(
        "\nboundary buses: {} of {} (ratio {:.4})",
        boundary,
        net.n_bus(),
        boundary as f64 / net.n_bus() as f64
    );

    // conservation: the injections must sum to exactly the removed losses
    let flows = branch_flows(&net, &reference.state);
    let total: f64 = inj.p_extra.iter().sum();
    let losses: f64 = part
        .inter_area_branches
        .iter()
        .map(|&k| flows[k].p_from + flows[k].p_to)
        .sum();
    println!(
        "sum of P injections {:.6} MW vs removed-branch losses {:.6} MW (|diff| {:.2e})",
        total * s,
        losses * s,
        (total - losses).abs() * s
    );
    Ok(())
}
