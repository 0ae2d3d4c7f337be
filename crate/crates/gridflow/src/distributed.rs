//! Concurrent multi-area execution: solve every area independently, merge
//! the per-area solutions into a global one, and quantify deviation from the
//! monolithic solve.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdpf::{
    branch_flows, fdpf_solve, PowerFlowState, Solution, SolveError, SolverOptions, Timing,
};
use crate::model::Network;
use crate::partition::{
    area_problem, boundary_injections, select_area_slacks, split_areas, PartitionError,
};

#[derive(Debug, Error)]
pub enum DistributedError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("area {area}: {source}")]
    AreaSolve { area: i64, source: SolveError },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("solutions cover different bus sets ({0} vs {1} buses)")]
    BusSetMismatch(usize, usize),
}

/// Global solution assembled from independent per-area solves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributedSolution {
    pub merged: Solution,
    /// Area id → that area's own solution.
    pub per_area: Vec<(i64, Solution)>,
    /// Areas that failed to converge, if any.
    pub failed_areas: Vec<i64>,
    pub wall_time_ms: f64,
    pub thread_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BusDiff {
    pub bus_index: usize,
    pub angle_diff_deg: f64,
    pub vm_diff_pu: f64,
}

/// Per-bus voltage deviation between two solutions over the same bus set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffReport {
    pub max_angle_diff_deg: f64,
    pub max_vm_diff_pu: f64,
    /// Worst offenders, largest deviation first.
    pub worst: Vec<BusDiff>,
}

/// Executes the full distributed pipeline: split, compute boundary
/// injections from the reference state, pick per-area slacks, solve all
/// areas concurrently, merge.
///
/// Non-convergence of an area is reported in `failed_areas` (and
/// `merged.converged = false`), not as an error.
pub fn run_distributed(
    net: &Network,
    area_map: &BTreeMap<i64, i64>,
    reference_state: &PowerFlowState,
    options: &SolverOptions,
) -> Result<DistributedSolution, DistributedError> {
    let t0 = std::time::Instant::now();
    let partition = split_areas(net, area_map)?;
    let injections = boundary_injections(net, &partition, reference_state)?;
    let slacks = select_area_slacks(&partition, net, reference_state)?;

    let problems: Vec<(i64, Network)> = partition
        .areas
        .iter()
        .zip(&slacks)
        .map(|(area, slack)| Ok((area.id, area_problem(area, &injections, slack)?)))
        .collect::<Result<_, PartitionError>>()?;

    let solved: Vec<(i64, Solution)> = problems
        .par_iter()
        .map(|(id, problem)| {
            fdpf_solve(problem, options, None)
                .map(|s| (*id, s))
                .map_err(|source| DistributedError::AreaSolve {
                    area: *id,
                    source,
                })
        })
        .collect::<Result<_, _>>()?;

    let n = net.n_bus();
    let mut vm = vec![0.0f64; n];
    let mut va = vec![0.0f64; n];
    for (area, (_, sol)) in partition.areas.iter().zip(&solved) {
        for (local, &global) in area.global_of_local.iter().enumerate() {
            vm[global] = sol.state.vm[local];
            va[global] = sol.state.va[local];
        }
    }
    let merged_state = PowerFlowState { vm, va };
    let failed_areas: Vec<i64> = solved
        .iter()
        .filter(|(_, s)| !s.converged)
        .map(|(id, _)| *id)
        .collect();
    let iterations = solved.iter().map(|(_, s)| s.iterations).max().unwrap_or(0);
    let history_len = solved
        .iter()
        .map(|(_, s)| s.max_mismatch_history.len())
        .max()
        .unwrap_or(0);
    let mut history = Vec::with_capacity(history_len);
    for k in 0..history_len {
        let mut p = 0.0f64;
        let mut q = 0.0f64;
        for (_, s) in &solved {
            if let Some(&(hp, hq)) = s.max_mismatch_history.get(k) {
                p = p.max(hp);
                q = q.max(hq);
            }
        }
        history.push((p, q));
    }
    let timing = Timing {
        build_ms: solved.iter().map(|(_, s)| s.timing.build_ms).sum(),
        factorize_ms: solved.iter().map(|(_, s)| s.timing.factorize_ms).sum(),
        iterate_ms: solved.iter().map(|(_, s)| s.timing.iterate_ms).sum(),
    };
    // flows over the full network, removed branches included
    let flows = branch_flows(net, &merged_state);
    let merged = Solution {
        state: merged_state,
        converged: failed_areas.is_empty(),
        iterations,
        max_mismatch_history: history,
        branch_flows: flows,
        timing,
    };

    Ok(DistributedSolution {
        merged,
        per_area: solved,
        failed_areas,
        wall_time_ms: t0.elapsed().as_secs_f64() * 1e3,
        thread_count: rayon::current_num_threads(),
    })
}

/// Maximum per-bus voltage deviation between two solutions, with the worst
/// offenders listed first (ranked against the parity scales 0.01° / 0.001
/// per-unit so angle and magnitude deviations are comparable).
pub fn compare_solutions(a: &Solution, b: &Solution) -> Result<DiffReport, DistributedError> {
    if a.state.vm.len() != b.state.vm.len() {
        return Err(DistributedError::BusSetMismatch(
            a.state.vm.len(),
            b.state.vm.len(),
        ));
    }
    let n = a.state.vm.len();
    let mut diffs: Vec<BusDiff> = (0..n)
        .map(|i| {
            let mut da = (a.state.va[i] - b.state.va[i]).to_degrees() % 360.0;
            if da > 180.0 {
                da -= 360.0;
            }
            if da < -180.0 {
                da += 360.0;
            }
            BusDiff {
                bus_index: i,
                angle_diff_deg: da.abs(),
                vm_diff_pu: (a.state.vm[i] - b.state.vm[i]).abs(),
            }
        })
        .collect();
    let max_angle_diff_deg = diffs.iter().map(|d| d.angle_diff_deg).fold(0.0, f64::max);
    let max_vm_diff_pu = diffs.iter().map(|d| d.vm_diff_pu).fold(0.0, f64::max);
    let score = |d: &BusDiff| (d.angle_diff_deg / 0.01).max(d.vm_diff_pu / 0.001);
    diffs.sort_by(|x, y| score(y).partial_cmp(&score(x)).unwrap());
    diffs.truncate(5);
    Ok(DiffReport {
        max_angle_diff_deg,
        max_vm_diff_pu,
        worst: diffs,
    })
}

/// Adds zero-mean Gaussian noise to a state, emulating estimator error in
/// the reference snapshot. Deterministic for a given seed.
pub fn perturb_state(state: &PowerFlowState, sigma: f64, seed: u64) -> PowerFlowState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = state.clone();
    for v in noisy.vm.iter_mut() {
        *v += sigma * gaussian(&mut rng);
    }
    for v in noisy.va.iter_mut() {
        *v += sigma * gaussian(&mut rng);
    }
    noisy
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One thread-count column of the benchmark table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkColumn {
    pub threads: usize,
    pub monolithic_ms: f64,
    pub distributed_ms: f64,
    pub monolithic_phases: Timing,
    pub distributed_phases: Timing,
}

/// Timing table over thread counts: one column per count, two methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub runs: usize,
    pub columns: Vec<BenchmarkColumn>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Benchmarks monolithic and distributed solves over a list of worker
/// counts: one warm-up run, then the median of `runs` timed repetitions per
/// cell.
pub fn benchmark(
    net: &Network,
    area_map: &BTreeMap<i64, i64>,
    reference_state: &PowerFlowState,
    options: &SolverOptions,
    thread_counts: &[usize],
    runs: usize,
) -> Result<BenchmarkTable, DistributedError> {
    let mut columns = Vec::with_capacity(thread_counts.len());
    for &threads in thread_counts {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool");
        let column = pool.install(|| -> Result<BenchmarkColumn, DistributedError> {
            fdpf_solve(net, options, None)?; // warm-up
            let mut mono_ms = Vec::with_capacity(runs);
            let mut mono_phase = Vec::with_capacity(runs);
            for _ in 0..runs {
                let t = std::time::Instant::now();
                let sol = fdpf_solve(net, options, None)?;
                mono_ms.push(t.elapsed().as_secs_f64() * 1e3);
                mono_phase.push(sol.timing);
            }
            run_distributed(net, area_map, reference_state, options)?; // warm-up
            let mut dist_ms = Vec::with_capacity(runs);
            let mut dist_phase = Vec::with_capacity(runs);
            for _ in 0..runs {
                let sol = run_distributed(net, area_map, reference_state, options)?;
                dist_ms.push(sol.wall_time_ms);
                dist_phase.push(sol.merged.timing);
            }
            Ok(BenchmarkColumn {
                threads,
                monolithic_ms: median(mono_ms),
                distributed_ms: median(dist_ms),
                monolithic_phases: Timing {
                    build_ms: median(mono_phase.iter().map(|t| t.build_ms).collect()),
                    factorize_ms: median(mono_phase.iter().map(|t| t.factorize_ms).collect()),
                    iterate_ms: median(mono_phase.iter().map(|t| t.iterate_ms).collect()),
                },
                distributed_phases: Timing {
                    build_ms: median(dist_phase.iter().map(|t| t.build_ms).collect()),
                    factorize_ms: median(dist_phase.iter().map(|t| t.factorize_ms).collect()),
                    iterate_ms: median(dist_phase.iter().map(|t| t.iterate_ms).collect()),
                },
            })
        })?;
        columns.push(column);
    }
    Ok(BenchmarkTable { runs, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_case;

    fn four_bus_text() -> &'static str {
        r#"function mpc = case4
mpc.baseMVA = 100;
mpc.bus = [
    1  3  0   0  0  0  1  1.0  0  138  1  1.1  0.9;
    2  1  40  10 0  0  1  1.0  0  138  1  1.1  0.9;
    3  2  20  0  0  0  1  1.0  0  138  1  1.1  0.9;
    4  1  40  10 0  0  1  1.0  0  138  1  1.1  0.9;
];
mpc.gen = [
    1  0   0  100  -100  1.0   100  1  300  0;
    3  50  0  100  -100  1.01  100  1  150  0;
];
mpc.branch = [
    1  2  0.01  0.1  0  0  0  0  0  0  1;
    2  3  0.01  0.1  0  0  0  0  0  0  1;
    3  4  0.01  0.1  0  0  0  0  0  0  1;
    4  1  0.01  0.1  0  0  0  0  0  0  1;
];
"#
    }

    fn single_area_map(net: &Network) -> BTreeMap<i64, i64> {
        net.buses.iter().map(|b| (b.id, 1)).collect()
    }

    #[test]
    fn single_area_degenerates_to_monolithic_bitwise() {
        let net = parse_case(four_bus_text()).unwrap();
        let opts = SolverOptions::default();
        let mono = fdpf_solve(&net, &opts, None).unwrap();
        let dist =
            run_distributed(&net, &single_area_map(&net), &mono.state, &opts).unwrap();
        assert_eq!(dist.merged.state, mono.state);
        assert_eq!(dist.merged.iterations, mono.iterations);
        assert_eq!(dist.merged.branch_flows, mono.branch_flows);
        let diff = compare_solutions(&dist.merged, &mono).unwrap();
        assert_eq!(diff.max_angle_diff_deg, 0.0);
        assert_eq!(diff.max_vm_diff_pu, 0.0);
    }

    #[test]
    fn two_area_split_stays_close_to_monolithic() {
        let net = parse_case(four_bus_text()).unwrap();
        let opts = SolverOptions::default();
        let mono = fdpf_solve(&net, &opts, None).unwrap();
        let map: BTreeMap<i64, i64> = [(1, 1), (2, 1), (3, 2), (4, 2)].into_iter().collect();
        let dist = run_distributed(&net, &map, &mono.state, &opts).unwrap();
        assert!(dist.merged.converged, "areas failed: {:?}", dist.failed_areas);
        let diff = compare_solutions(&dist.merged, &mono).unwrap();
        assert!(diff.max_angle_diff_deg <= 0.01, "{diff:?}");
        assert!(diff.max_vm_diff_pu <= 0.001, "{diff:?}");
    }

    #[test]
    fn compare_to_self_is_zero_and_shifted_bus_leads() {
        let net = parse_case(four_bus_text()).unwrap();
        let sol = fdpf_solve(&net, &SolverOptions::default(), None).unwrap();
        let diff = compare_solutions(&sol, &sol).unwrap();
        assert_eq!(diff.max_angle_diff_deg, 0.0);
        assert_eq!(diff.max_vm_diff_pu, 0.0);

        let mut shifted = sol.clone();
        shifted.state.va[2] += 0.5f64.to_radians();
        let diff = compare_solutions(&shifted, &sol).unwrap();
        assert!((diff.max_angle_diff_deg - 0.5).abs() < 1e-12);
        assert_eq!(diff.worst[0].bus_index, 2);
    }

    #[test]
    fn results_identical_across_thread_counts() {
        let net = parse_case(four_bus_text()).unwrap();
        let opts = SolverOptions::default();
        let mono = fdpf_solve(&net, &opts, None).unwrap();
        let map: BTreeMap<i64, i64> = [(1, 1), (2, 1), (3, 2), (4, 2)].into_iter().collect();
        let run_in = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_distributed(&net, &map, &mono.state, &opts).unwrap())
        };
        let a = run_in(1);
        let b = run_in(4);
        assert_eq!(a.merged.state, b.merged.state);
        assert_eq!(a.merged.branch_flows, b.merged.branch_flows);
        assert_eq!(a.per_area.len(), b.per_area.len());
        for ((ia, sa), (ib, sb)) in a.per_area.iter().zip(&b.per_area) {
            assert_eq!(ia, ib);
            assert_eq!(sa.state, sb.state);
            assert_eq!(sa.max_mismatch_history, sb.max_mismatch_history);
        }
    }

    #[test]
    fn perturbation_is_seed_deterministic() {
        let state = PowerFlowState {
            vm: vec![1.0; 10],
            va: vec![0.0; 10],
        };
        let a = perturb_state(&state, 1e-3, 42);
        let b = perturb_state(&state, 1e-3, 42);
        let c = perturb_state(&state, 1e-3, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn benchmark_degenerate_single_thread_sweep() {
        let net = parse_case(four_bus_text()).unwrap();
        let opts = SolverOptions::default();
        let mono = fdpf_solve(&net, &opts, None).unwrap();
        let map: BTreeMap<i64, i64> = [(1, 1), (2, 1), (3, 2), (4, 2)].into_iter().collect();
        let table = benchmark(&net, &map, &mono.state, &opts, &[1], 3).unwrap();
        assert_eq!(table.columns.len(), 1);
        assert_eq!(table.columns[0].threads, 1);
        assert!(table.columns[0].monolithic_ms >= 0.0);
        assert!(table.columns[0].distributed_ms >= 0.0);
    }
}
