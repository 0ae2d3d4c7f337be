//! End-to-end acceptance gate. Each test covers one numbered criterion and
//! prints a single pass/fail line (visible with `cargo test -- --nocapture`
//! or on failure).
//!
//! Criterion 4's hard timing assertions only run when `GRIDFLOW_BENCH_CI` is
//! set: wall-clock trends need real parallel hardware, which laptop and CI
//! containers don't reliably provide. The numbers are printed either way.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use gridflow::distributed::{benchmark, compare_solutions, run_distributed};
use gridflow::fdpf::{fdpf_solve, Solution, SolverOptions};
use gridflow::model::{parse_case, BusKind, Network};
use gridflow::partition::{
    area_problem, boundary_injections, parse_area_map, select_area_slacks, split_areas,
};
use gridflow::report::{benchmark_to_text, DistributedReport, SolutionReport};
use gridflow::sparse::{
    min_degree_order, numeric_factorize, symbolic_factorize, CscBuilder, SparseRealMatrix,
    NO_PARENT,
};
use gridflow::synth::{synth_grid, SynthGrid};

fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn case118() -> &'static Network {
    static NET: OnceLock<Network> = OnceLock::new();
    NET.get_or_init(|| parse_case(&fixture("case118.m")).unwrap())
}

fn case118_map() -> &'static BTreeMap<i64, i64> {
    static MAP: OnceLock<BTreeMap<i64, i64>> = OnceLock::new();
    MAP.get_or_init(|| parse_area_map(&fixture("case118_4area.areas")).unwrap())
}

fn mono118() -> &'static Solution {
    static SOL: OnceLock<Solution> = OnceLock::new();
    SOL.get_or_init(|| fdpf_solve(case118(), &SolverOptions::default(), None).unwrap())
}

/// The ~10k-bus synthetic grid plus its monolithic solution, built once.
fn synth10k() -> &'static (SynthGrid, Solution) {
    static GRID: OnceLock<(SynthGrid, Solution)> = OnceLock::new();
    GRID.get_or_init(|| {
        let grid = synth_grid(case118(), 90, 4, 0.1, 2024).unwrap();
        let sol = fdpf_solve(&grid.network, &SolverOptions::default(), None).unwrap();
        (grid, sol)
    })
}

fn verdict(number: usize, name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {number} ({name}): pass");
    } else {
        println!("criterion {number} ({name}): FAIL");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("criterion {number} failed:\n{}", failures.join("\n"));
    }
}

#[test]
fn criterion_1_118_bus_accuracy_parity() {
    let mut failures = Vec::new();
    let net = case118();

    let t0 = std::time::Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let sol = pool.install(|| fdpf_solve(net, &SolverOptions::default(), None).unwrap());
    let elapsed = t0.elapsed();

    if !sol.converged {
        failures.push("monolithic solve did not converge".into());
    }
    if sol.iterations > 10 {
        failures.push(format!("{} iterations > 10", sol.iterations));
    }
    if elapsed.as_secs_f64() >= 1.0 {
        failures.push(format!("runtime {:.3} s >= 1 s", elapsed.as_secs_f64()));
    }

    let oracle = gridflow_testkit::newton_solve(net, 1e-10, 50);
    assert!(oracle.converged, "Newton oracle failed to converge");
    let mut max_deg = 0.0f64;
    let mut max_vm = 0.0f64;
    for i in 0..net.n_bus() {
        max_deg = max_deg.max((sol.state.va[i] - oracle.va[i]).to_degrees().abs());
        max_vm = max_vm.max((sol.state.vm[i] - oracle.vm[i]).abs());
    }
    println!(
        "  118-bus vs Newton: {max_deg:.6} deg, {max_vm:.6} pu, {} iterations, {:.1} ms",
        sol.iterations,
        elapsed.as_secs_f64() * 1e3
    );
    if max_deg > 0.01 {
        failures.push(format!("max angle difference {max_deg:.6} deg > 0.01"));
    }
    if max_vm > 0.001 {
        failures.push(format!("max magnitude difference {max_vm:.6} pu > 0.001"));
    }
    verdict(1, "118-bus accuracy parity", failures);
}

#[test]
fn criterion_2_distributed_parity_118_bus() {
    let mut failures = Vec::new();
    let net = case118();
    let mono = mono118();

    // the committed map keeps the boundary small (about 11% of buses)
    let part = split_areas(net, case118_map()).unwrap();
    let inj = boundary_injections(net, &part, &mono.state).unwrap();
    let boundary = inj
        .p_extra
        .iter()
        .zip(&inj.q_extra)
        .filter(|(p, q)| **p != 0.0 || **q != 0.0)
        .count();
    let ratio = boundary as f64 / net.n_bus() as f64;
    println!("  boundary buses: {boundary}/{} (ratio {ratio:.4})", net.n_bus());
    if ratio > 0.15 {
        failures.push(format!("boundary ratio {ratio:.4} > 0.15"));
    }

    let dist = run_distributed(net, case118_map(), &mono.state, &SolverOptions::default()).unwrap();
    if !dist.merged.converged {
        failures.push(format!("areas failed to converge: {:?}", dist.failed_areas));
    }
    let diff = compare_solutions(&dist.merged, mono).unwrap();
    println!(
        "  distributed vs monolithic: {:.6} deg, {:.6} pu",
        diff.max_angle_diff_deg, diff.max_vm_diff_pu
    );
    if diff.max_angle_diff_deg > 0.01 {
        failures.push(format!("max angle diff {:.6} deg > 0.01", diff.max_angle_diff_deg));
    }
    if diff.max_vm_diff_pu > 0.001 {
        failures.push(format!("max vm diff {:.6} pu > 0.001", diff.max_vm_diff_pu));
    }
    verdict(2, "distributed-vs-monolithic parity, 118-bus", failures);
}

#[test]
fn criterion_3_iteration_pattern_10k_grid() {
    let mut failures = Vec::new();
    let (grid, mono) = synth10k();
    if !mono.converged {
        failures.push("monolithic solve of the synthetic grid did not converge".into());
    }
    let dist = run_distributed(
        &grid.network,
        &grid.area_map,
        &mono.state,
        &SolverOptions::default(),
    )
    .unwrap();
    let counts: Vec<usize> = dist.per_area.iter().map(|(_, s)| s.iterations).collect();
    println!(
        "  {} buses: monolithic {} iterations, areas {:?}",
        grid.network.n_bus(),
        mono.iterations,
        counts
    );
    for (id, sol) in &dist.per_area {
        if !sol.converged {
            failures.push(format!("area {id} did not converge"));
        }
        if sol.iterations > mono.iterations + 1 {
            failures.push(format!(
                "area {id}: {} iterations > monolithic {} + 1",
                sol.iterations, mono.iterations
            ));
        }
        if sol.iterations > 6 {
            failures.push(format!("area {id}: {} iterations > 6", sol.iterations));
        }
    }
    verdict(3, "iteration-count pattern, synthetic 10k grid", failures);
}

#[test]
fn criterion_4_thread_scaling_trend() {
    let mut failures = Vec::new();
    let (grid, mono) = synth10k();
    let table = benchmark(
        &grid.network,
        &grid.area_map,
        &mono.state,
        &SolverOptions::default(),
        &[1, 2, 4],
        5,
    )
    .unwrap();
    for line in benchmark_to_text(&table).lines() {
        println!("  {line}");
    }

    if std::env::var_os("GRIDFLOW_BENCH_CI").is_some() {
        let at = |t: usize| table.columns.iter().find(|c| c.threads == t).unwrap();
        if at(4).distributed_ms > 0.7 * at(1).distributed_ms {
            failures.push(format!(
                "distributed at 4 threads {:.2} ms > 0.7 x {:.2} ms at 1 thread",
                at(4).distributed_ms,
                at(1).distributed_ms
            ));
        }
        for c in &table.columns {
            if c.distributed_ms > c.monolithic_ms {
                failures.push(format!(
                    "{} threads: distributed {:.2} ms > monolithic {:.2} ms",
                    c.threads, c.distributed_ms, c.monolithic_ms
                ));
            }
        }
    } else {
        println!("  (timing assertions skipped; set GRIDFLOW_BENCH_CI to enforce)");
    }
    verdict(4, "thread-scaling trend", failures);
}

fn dense_to_csc(dense: &[Vec<f64>]) -> SparseRealMatrix {
    let n = dense.len();
    let mut b = CscBuilder::new(n);
    for j in 0..n {
        for i in 0..n {
            if dense[i][j] != 0.0 {
                b.push(i, j, dense[i][j]);
            }
        }
    }
    b.finalize()
}

#[test]
fn criterion_5_sparse_kernel_oracle_suite() {
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let (n, dense) = gridflow_testkit::random_spd(seed, 50);
        let a = dense_to_csc(&dense);
        let perm = min_degree_order(&a).unwrap();
        let sym = symbolic_factorize(&a, &perm).unwrap();
        let f = numeric_factorize(&a, &sym).unwrap();

        // fill pattern and elimination tree vs dense brute-force elimination
        let pattern: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| dense[i][j] != 0.0).collect())
            .collect();
        let (fill, etree) = gridflow_testkit::symbolic_elimination_oracle(&pattern, &perm);
        for j in 0..n {
            let want: Vec<usize> = (j + 1..n).filter(|&i| fill[i][j]).collect();
            if sym.l_cols[j] != want {
                failures.push(format!("seed {seed}: fill pattern differs at column {j}"));
            }
        }
        let want_parents: Vec<usize> =
            etree.iter().map(|p| p.unwrap_or(NO_PARENT)).collect();
        if sym.etree != want_parents {
            failures.push(format!("seed {seed}: elimination tree differs"));
        }

        // level schedule vs recursive depth oracle
        for (depth, level) in sym.levels.iter().enumerate() {
            for &j in level {
                let want = gridflow_testkit::etree_depth_oracle(&sym.etree, j);
                if depth != want {
                    failures.push(format!("seed {seed}: column {j} at level {depth}, oracle {want}"));
                }
            }
        }

        // ‖L·Lᵀ − P·A·Pᵀ‖∞ bound
        let norm_a = dense
            .iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut max_err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..=i.min(j) {
                    s += f.l_entry(i, k) * f.l_entry(j, k);
                }
                max_err = max_err.max((s - dense[perm[i]][perm[j]]).abs());
            }
        }
        if max_err > 1e-10 * norm_a {
            failures.push(format!(
                "seed {seed}: reconstruction error {max_err:.3e} > 1e-10 * {norm_a:.3e}"
            ));
        }

        // solve vs dense LU oracle, relative
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 1.0).collect();
        let x = f.solve(&rhs).unwrap();
        let x_oracle = gridflow_testkit::dense_solve(&dense, &rhs);
        let scale = x_oracle.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for i in 0..n {
            if (x[i] - x_oracle[i]).abs() > 1e-8 * scale {
                failures.push(format!("seed {seed}: solve component {i} off by >1e-8 relative"));
            }
        }
        if failures.len() > 10 {
            break;
        }
    }
    verdict(5, "sparse-kernel oracle suite, 100 random SPD systems", failures);
}

#[test]
fn criterion_6_boundary_injection_conservation() {
    let mut failures = Vec::new();
    let fixtures = [("case14.m", "case14_4area.areas"), ("case118.m", "case118_4area.areas")];
    for (case_name, map_name) in fixtures {
        let net = parse_case(&fixture(case_name)).unwrap();
        let map = parse_area_map(&fixture(map_name)).unwrap();
        let part = split_areas(&net, &map).unwrap();
        let reference = fdpf_solve(&net, &SolverOptions::default(), None).unwrap();
        assert!(reference.converged, "{case_name}: reference did not converge");
        let inj = boundary_injections(&net, &part, &reference.state).unwrap();

        let flows = gridflow::fdpf::branch_flows(&net, &reference.state);
        let total_p: f64 = inj.p_extra.iter().sum();
        let total_q: f64 = inj.q_extra.iter().sum();
        let loss_p: f64 = part
            .inter_area_branches
            .iter()
            .map(|&k| flows[k].p_from + flows[k].p_to)
            .sum();
        let loss_q: f64 = part
            .inter_area_branches
            .iter()
            .map(|&k| flows[k].q_from + flows[k].q_to)
            .sum();
        println!(
            "  {case_name}: {} cut branches, sum P {:.6} pu vs losses {:.6} pu",
            part.inter_area_branches.len(),
            total_p,
            loss_p
        );
        if (total_p - loss_p).abs() > 1e-10 {
            failures.push(format!("{case_name}: P conservation off by {:.3e}", (total_p - loss_p).abs()));
        }
        if (total_q - loss_q).abs() > 1e-10 {
            failures.push(format!("{case_name}: Q conservation off by {:.3e}", (total_q - loss_q).abs()));
        }

        // per removed branch, the two contributions sum to exactly its loss
        // (the p_from + p_to ≈ 0 structure up to the branch loss)
        for pair in inj.provenance.chunks(2) {
            let k = pair[0].branch;
            let loss = flows[k].p_from + flows[k].p_to;
            if (pair[0].p + pair[1].p - loss).abs() > 1e-12 {
                failures.push(format!(
                    "{case_name}: branch {}-{} contributions do not reproduce its loss",
                    pair[0].from, pair[0].to
                ));
            }
            if loss < 0.0 {
                failures.push(format!(
                    "{case_name}: branch {}-{} has negative loss {loss:.3e}",
                    pair[0].from, pair[0].to
                ));
            }
        }
    }
    verdict(6, "boundary-injection conservation", failures);
}

/// Dense per-bus mismatch re-check of a converged state; returns worst raw
/// |dP| over non-slack buses and |dQ| over PQ buses.
fn dense_recheck(net: &Network, vm: &[f64], va: &[f64]) -> (f64, f64) {
    let y = gridflow_testkit::dense_ybus(net);
    let s = gridflow_testkit::dense_injections(&y, vm, va);
    let (p_spec, q_spec) = gridflow_testkit::specified_injections(net);
    let mut max_p = 0.0f64;
    let mut max_q = 0.0f64;
    for (i, bus) in net.buses.iter().enumerate() {
        match bus.kind {
            BusKind::Slack => {}
            BusKind::Pv => max_p = max_p.max((p_spec[i] - s[i].re).abs()),
            BusKind::Pq => {
                max_p = max_p.max((p_spec[i] - s[i].re).abs());
                max_q = max_q.max((q_spec[i] - s[i].im).abs());
            }
        }
    }
    (max_p, max_q)
}

#[test]
fn criterion_7_physical_consistency() {
    let mut failures = Vec::new();
    let tol = SolverOptions::default().tolerance;

    // monolithic solutions on both committed cases
    for case_name in ["case14.m", "case118.m"] {
        let net = parse_case(&fixture(case_name)).unwrap();
        let sol = fdpf_solve(&net, &SolverOptions::default(), None).unwrap();
        assert!(sol.converged);
        let (p, q) = dense_recheck(&net, &sol.state.vm, &sol.state.va);
        println!("  {case_name} monolithic re-check: dP {p:.3e}, dQ {q:.3e} pu");
        if p >= tol || q >= tol {
            failures.push(format!("{case_name}: dense re-check {p:.3e}/{q:.3e} >= tol"));
        }
    }

    // every per-area solution of the distributed 118-bus run
    let net = case118();
    let mono = mono118();
    let part = split_areas(net, case118_map()).unwrap();
    let inj = boundary_injections(net, &part, &mono.state).unwrap();
    let slacks = select_area_slacks(&part, net, &mono.state).unwrap();
    let dist = run_distributed(net, case118_map(), &mono.state, &SolverOptions::default()).unwrap();
    for ((area, slack), (id, sol)) in part.areas.iter().zip(&slacks).zip(&dist.per_area) {
        let problem = area_problem(area, &inj, slack).unwrap();
        let (p, q) = dense_recheck(&problem, &sol.state.vm, &sol.state.va);
        if p >= tol || q >= tol {
            failures.push(format!("area {id}: dense re-check {p:.3e}/{q:.3e} >= tol"));
        }
    }

    // global power balance on the synthetic grid, flows recomputed by the
    // independent dense per-branch oracle
    let (grid, sol) = synth10k();
    let gnet = &grid.network;
    let v: Vec<num_complex::Complex64> = sol.state.complex_voltages();
    let mut balance: f64 = 0.0;
    for g in &gnet.generators {
        let i = gnet.index_of(g.bus).unwrap();
        if gnet.buses[i].kind != BusKind::Slack {
            balance += g.pg;
        }
    }
    for bus in &gnet.buses {
        let i = gnet.index_of(bus.id).unwrap();
        balance -= bus.pd;
        balance -= bus.gs * sol.state.vm[i] * sol.state.vm[i];
    }
    // the slack generator's output is whatever the flows say it is
    let slack_i = gnet.buses.iter().position(|b| b.kind == BusKind::Slack).unwrap();
    let mut slack_pg = gnet.buses[slack_i].pd
        + gnet.buses[slack_i].gs * sol.state.vm[slack_i] * sol.state.vm[slack_i];
    let mut losses = 0.0f64;
    for br in &gnet.branches {
        if !br.status {
            continue;
        }
        let f = gnet.index_of(br.from).unwrap();
        let t = gnet.index_of(br.to).unwrap();
        let (sf, st) = gridflow_testkit::dense_branch_flow(
            br.r, br.x, br.b_charging, br.tap, br.shift, v[f], v[t],
        );
        losses += sf.re + st.re;
        if f == slack_i {
            slack_pg += sf.re;
        }
        if t == slack_i {
            slack_pg += st.re;
        }
    }
    balance += slack_pg;
    balance -= losses;
    let bound = gnet.n_bus() as f64 * tol;
    println!(
        "  synthetic grid global P balance: {balance:.4e} pu (bound {bound:.3e})"
    );
    if balance.abs() > bound {
        failures.push(format!("global balance {balance:.4e} exceeds {bound:.3e}"));
    }
    verdict(7, "physical consistency re-checks", failures);
}

#[test]
fn criterion_8_determinism_across_thread_counts() {
    let mut failures = Vec::new();
    let net = case118();
    let map = case118_map();

    let run = |threads: usize| -> (String, String) {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mono = fdpf_solve(net, &SolverOptions::default(), None).unwrap();
            let dist = run_distributed(net, map, &mono.state, &SolverOptions::default()).unwrap();
            (
                SolutionReport::new(net, &mono).without_timing().to_json(),
                DistributedReport::new(net, &dist).without_timing().to_json(),
            )
        })
    };
    let (mono1, dist1) = run(1);
    for threads in [2usize, 4] {
        let (mono_t, dist_t) = run(threads);
        if mono_t != mono1 {
            failures.push(format!("monolithic report differs between 1 and {threads} threads"));
        }
        if dist_t != dist1 {
            failures.push(format!("distributed report differs between 1 and {threads} threads"));
        }
    }
    println!("  reports byte-identical across 1/2/4 worker threads");
    verdict(8, "byte-for-byte determinism across thread counts", failures);
}
