//! Synthetic large-grid generator: tiles a solved base case into many
//! weakly-coupled copies. Each copy is internally balanced (its slack is
//! demoted to PV with the slack injection from the base solution), so the
//! stitched system stays easy to converge at any size.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::admittance::build_ybus;
use crate::fdpf::{fdpf_solve, SolveError, SolverOptions};
use crate::model::{Branch, BusKind, ModelError, Network};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least one copy and 1..=copies areas (got {copies} copies, {areas} areas)")]
    BadShape { copies: usize, areas: usize },
    #[error("base case failed to solve: {0}")]
    BaseSolve(#[from] SolveError),
    #[error("base case did not converge")]
    BaseDiverged,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A stitched grid plus its copy-aligned area assignment.
#[derive(Debug, Clone)]
pub struct SynthGrid {
    pub network: Network,
    /// Bus id → area id; areas are contiguous groups of copies.
    pub area_map: BTreeMap<i64, i64>,
}

/// Tiles `copies` instances of `base` and joins consecutive copies with two
/// weak tie branches between generator buses. Copy loads and generation are
/// jittered ±0.5% (deterministically from `seed`) so the copies are not
/// identical. Only copy 0 keeps a slack bus.
pub fn synth_grid(
    base: &Network,
    copies: usize,
    areas: usize,
    tie_reactance: f64,
    seed: u64,
) -> Result<SynthGrid, SynthError> {
    if copies == 0 || areas == 0 || areas > copies {
        return Err(SynthError::BadShape { copies, areas });
    }

    // the base slack's net injection, needed to rebalance demoted copies
    let base_sol = fdpf_solve(base, &SolverOptions::default(), None)?;
    if !base_sol.converged {
        return Err(SynthError::BaseDiverged);
    }
    let slack_dense = base
        .buses
        .iter()
        .position(|b| b.kind == BusKind::Slack)
        .expect("validated network has a slack");
    let slack_id = base.buses[slack_dense].id;
    let ybus_rows = build_ybus(base).map_err(SolveError::from)?.transpose();
    let v = base_sol.state.complex_voltages();
    let mut current = Complex64::new(0.0, 0.0);
    for (j, y) in ybus_rows.col(slack_dense) {
        current += y * v[j];
    }
    let s_slack = v[slack_dense] * current.conj();
    let slack_pg = s_slack.re + base.buses[slack_dense].pd;
    let slack_qg = s_slack.im + base.buses[slack_dense].qd;

    let stride = base.buses.iter().map(|b| b.id).max().unwrap_or(0) + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut buses = Vec::with_capacity(base.buses.len() * copies);
    let mut branches = Vec::with_capacity(base.branches.len() * copies + 2 * copies);
    let mut generators = Vec::with_capacity(base.generators.len() * copies);
    let mut area_map = BTreeMap::new();

    for c in 0..copies {
        let offset = c as i64 * stride;
        // the jitter must stay small: each copy's imbalance drains through
        // the weak ties toward the single remaining slack
        let scale = 1.0 + 0.01 * (rng.gen::<f64>() - 0.5);
        let area = (c * areas / copies) as i64 + 1;
        for bus in &base.buses {
            let mut b = bus.clone();
            b.id += offset;
            b.pd *= scale;
            b.qd *= scale;
            if c > 0 && b.kind == BusKind::Slack {
                b.kind = BusKind::Pv;
            }
            area_map.insert(b.id, area);
            buses.push(b);
        }
        for br in &base.branches {
            let mut b = br.clone();
            b.from += offset;
            b.to += offset;
            branches.push(b);
        }
        for gen in &base.generators {
            let mut g = gen.clone();
            if c > 0 && g.bus == slack_id {
                g.pg = slack_pg;
                g.qg = slack_qg;
            }
            g.bus += offset;
            g.pg *= scale;
            g.qg *= scale;
            generators.push(g);
        }
    }

    // two ties per adjacent copy pair keeps the stitched graph connected and
    // gives the imbalance a path to the one remaining slack; ties join
    // corresponding generator buses, so both ends share a voltage setpoint
    // and the ties carry no structural reactive flow
    let mut tie_ends: Vec<i64> = vec![slack_id];
    if let Some(big) = base
        .generators
        .iter()
        .filter(|g| g.bus != slack_id)
        .max_by(|a, b| a.pmax.partial_cmp(&b.pmax).unwrap())
    {
        tie_ends.push(big.bus);
    }
    for c in 0..copies.saturating_sub(1) {
        for &end in &tie_ends {
            branches.push(Branch {
                from: end + c as i64 * stride,
                to: end + (c as i64 + 1) * stride,
                r: 0.0,
                x: tie_reactance,
                b_charging: 0.0,
                tap: 1.0,
                shift: 0.0,
                status: true,
            });
        }
    }

    let network = Network::assemble(base.base_mva, buses, branches, generators, true)?;
    Ok(SynthGrid { network, area_map })
}
