//! The fast decoupled iteration loop: mismatches, alternating solves of the
//! two constant coefficient systems, state updates, convergence testing and
//! branch flows.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admittance::{build_fdpf_matrices, build_ybus, AdmittanceError, FdpfMatrices};
use crate::model::{BusKind, Network};
use crate::partition::BoundaryInjectionSet;
use crate::sparse::{
    min_degree_order, numeric_factorize, symbolic_factorize, CholeskyFactor, SparseComplexMatrix,
    SparseError,
};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Admittance(#[from] AdmittanceError),
    #[error("factorization of {matrix} failed: {source}")]
    Factorization {
        matrix: &'static str,
        source: SparseError,
    },
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartMode {
    Flat,
    NonFlat,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on the raw P/Q mismatches, per-unit.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub start: StartMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-3,
            max_iterations: 30,
            start: StartMode::NonFlat,
        }
    }
}

/// Per-bus voltage magnitude (per-unit) and angle (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowState {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
}

impl PowerFlowState {
    /// Initial state for a network. Generator buses start at their voltage
    /// setpoint in both modes; the rest comes from the case file (non-flat)
    /// or `1.0 ∠ 0` (flat).
    pub fn initial(net: &Network, start: StartMode) -> PowerFlowState {
        let mut vm: Vec<f64> = net
            .buses
            .iter()
            .map(|b| match start {
                StartMode::NonFlat => b.vm0,
                StartMode::Flat => 1.0,
            })
            .collect();
        let va: Vec<f64> = net
            .buses
            .iter()
            .map(|b| match start {
                StartMode::NonFlat => b.va0,
                StartMode::Flat => {
                    if b.kind == BusKind::Slack {
                        b.va0
                    } else {
                        0.0
                    }
                }
            })
            .collect();
        for g in &net.generators {
            let i = net.index_of(g.bus).expect("validated generator bus");
            if net.buses[i].kind != BusKind::Pq {
                vm[i] = g.vset;
            }
        }
        PowerFlowState { vm, va }
    }

    pub fn complex_voltages(&self) -> Vec<Complex64> {
        self.vm
            .iter()
            .zip(&self.va)
            .map(|(&m, &a)| Complex64::from_polar(m, a))
            .collect()
    }
}

/// Power mismatches at the current state.
#[derive(Debug, Clone)]
pub struct Mismatch {
    /// ΔP/|V| over non-slack buses (the P-system right-hand side).
    pub dp_over_v: Vec<f64>,
    /// ΔQ/|V| over PQ buses (the Q-system right-hand side).
    pub dq_over_v: Vec<f64>,
    /// Infinity norm of the raw ΔP over non-slack buses.
    pub max_p: f64,
    /// Infinity norm of the raw ΔQ over PQ buses.
    pub max_q: f64,
}

/// Per-branch complex end flows in per-unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFlow {
    pub from: i64,
    pub to: i64,
    pub p_from: f64,
    pub q_from: f64,
    pub p_to: f64,
    pub q_to: f64,
}

/// Wall-clock phase breakdown, milliseconds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timing {
    pub build_ms: f64,
    pub factorize_ms: f64,
    pub iterate_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub state: PowerFlowState,
    pub converged: bool,
    /// Completed P/Q half-iteration pairs.
    pub iterations: usize,
    /// `(max_p, max_q)` recorded at every mismatch evaluation, both halves.
    pub max_mismatch_history: Vec<(f64, f64)>,
    pub branch_flows: Vec<BranchFlow>,
    pub timing: Timing,
}

/// Specified injections per bus: generation minus load minus any boundary
/// equivalents, in per-unit.
fn specified(net: &Network, injections: Option<&BoundaryInjectionSet>) -> (Vec<f64>, Vec<f64>) {
    let n = net.n_bus();
    let mut p = vec![0.0f64; n];
    let mut q = vec![0.0f64; n];
    for (i, bus) in net.buses.iter().enumerate() {
        p[i] -= bus.pd;
        q[i] -= bus.qd;
    }
    for g in &net.generators {
        let i = net.index_of(g.bus).unwrap();
        p[i] += g.pg;
        q[i] += g.qg;
    }
    if let Some(inj) = injections {
        for i in 0..n {
            p[i] -= inj.p_extra[i];
            q[i] -= inj.q_extra[i];
        }
    }
    (p, q)
}

/// Computes the power mismatch at `state`.
///
/// `ybus_rows` is the row-compressed admittance matrix (the transpose of the
/// assembled Ybus), so each bus reads exactly its own row: the computation is
/// node-local and runs bus-parallel.
pub fn compute_mismatch(
    net: &Network,
    ybus_rows: &SparseComplexMatrix,
    state: &PowerFlowState,
    injections: Option<&BoundaryInjectionSet>,
) -> Mismatch {
    let n = net.n_bus();
    debug_assert_eq!(state.vm.len(), n);
    let v = state.complex_voltages();
    let (p_spec, q_spec) = specified(net, injections);

    let computed: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut current = Complex64::new(0.0, 0.0);
            for (j, y) in ybus_rows.col(i) {
                current += y * v[j];
            }
            v[i] * current.conj()
        })
        .collect();

    let mut dp_over_v = Vec::new();
    let mut dq_over_v = Vec::new();
    let mut max_p = 0.0f64;
    let mut max_q = 0.0f64;
    for i in 0..n {
        match net.buses[i].kind {
            BusKind::Slack => {}
            BusKind::Pv => {
                let dp = p_spec[i] - computed[i].re;
                max_p = max_p.max(dp.abs());
                dp_over_v.push(dp / state.vm[i]);
            }
            BusKind::Pq => {
                let dp = p_spec[i] - computed[i].re;
                let dq = q_spec[i] - computed[i].im;
                max_p = max_p.max(dp.abs());
                max_q = max_q.max(dq.abs());
                dp_over_v.push(dp / state.vm[i]);
                dq_over_v.push(dq / state.vm[i]);
            }
        }
    }
    // entries follow ascending dense bus order, matching the row maps of
    // FdpfMatrices
    Mismatch {
        dp_over_v,
        dq_over_v,
        max_p,
        max_q,
    }
}

/// Per-branch π-model flows at both ends; each branch reads only its own
/// endpoints, so the computation is branch-parallel.
pub fn branch_flows(net: &Network, state: &PowerFlowState) -> Vec<BranchFlow> {
    let v = state.complex_voltages();
    net.branches
        .par_iter()
        .map(|br| {
            if !br.status {
                return BranchFlow {
                    from: br.from,
                    to: br.to,
                    p_from: 0.0,
                    q_from: 0.0,
                    p_to: 0.0,
                    q_to: 0.0,
                };
            }
            let f = net.index_of(br.from).unwrap();
            let t = net.index_of(br.to).unwrap();
            let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
            let bc = Complex64::new(0.0, br.b_charging / 2.0);
            let tap = Complex64::from_polar(br.tap, br.shift);
            let i_f = (ys + bc) / (tap * tap.conj()) * v[f] - ys / tap.conj() * v[t];
            let i_t = -ys / tap * v[f] + (ys + bc) * v[t];
            let sf = v[f] * i_f.conj();
            let st = v[t] * i_t.conj();
            BranchFlow {
                from: br.from,
                to: br.to,
                p_from: sf.re,
                q_from: sf.im,
                p_to: st.re,
                q_to: st.im,
            }
        })
        .collect()
}

struct Factors {
    b_prime: Option<CholeskyFactor>,
    b_double_prime: Option<CholeskyFactor>,
}

fn factorize(matrices: &FdpfMatrices) -> Result<Factors, SolveError> {
    let factor_one = |m: &crate::sparse::SparseRealMatrix,
                      name: &'static str|
     -> Result<Option<CholeskyFactor>, SolveError> {
        if m.n() == 0 {
            return Ok(None);
        }
        let perm = min_degree_order(m).map_err(|source| SolveError::Factorization {
            matrix: name,
            source,
        })?;
        let sym = symbolic_factorize(m, &perm).map_err(|source| SolveError::Factorization {
            matrix: name,
            source,
        })?;
        numeric_factorize(m, &sym)
            .map(Some)
            .map_err(|source| SolveError::Factorization {
                matrix: name,
                source,
            })
    };
    Ok(Factors {
        b_prime: factor_one(&matrices.b_prime, "B'")?,
        b_double_prime: factor_one(&matrices.b_double_prime, "B''")?,
    })
}

/// Runs the fast decoupled power flow.
///
/// Both coefficient matrices are factorized exactly once and reused across
/// all iterations. One iteration is a P half (angle update) followed by a Q
/// half (magnitude update), with the mismatch recomputed between halves.
pub fn fdpf_solve(
    net: &Network,
    options: &SolverOptions,
    injections: Option<&BoundaryInjectionSet>,
) -> Result<Solution, SolveError> {
    fdpf_solve_from(net, options, injections, None)
}

/// As [`fdpf_solve`], but optionally starting from an explicit state instead
/// of the mode in `options` (used by the distributed runner to seed area
/// solves from the reference snapshot).
pub fn fdpf_solve_from(
    net: &Network,
    options: &SolverOptions,
    injections: Option<&BoundaryInjectionSet>,
    initial: Option<&PowerFlowState>,
) -> Result<Solution, SolveError> {
    let t0 = std::time::Instant::now();
    let ybus = build_ybus(net)?;
    let ybus_rows = ybus.transpose();
    let matrices = build_fdpf_matrices(net)?;
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = std::time::Instant::now();
    let factors = factorize(&matrices)?;
    let factorize_ms = t1.elapsed().as_secs_f64() * 1e3;

    let t2 = std::time::Instant::now();
    let mut state = match initial {
        Some(s) => s.clone(),
        None => PowerFlowState::initial(net, options.start),
    };
    let tol = options.tolerance;
    let mut history = Vec::new();
    let mut mis = compute_mismatch(net, &ybus_rows, &state, injections);
    history.push((mis.max_p, mis.max_q));
    let mut converged = mis.max_p < tol && mis.max_q < tol;
    let mut iterations = 0usize;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        // P half: B'·Δθ = ΔP/|V|
        if let Some(f) = &factors.b_prime {
            let dth = f.solve(&mis.dp_over_v)?;
            for (r, &i) in matrices.non_slack.iter().enumerate() {
                state.va[i] += dth[r];
            }
            mis = compute_mismatch(net, &ybus_rows, &state, injections);
            history.push((mis.max_p, mis.max_q));
            if mis.max_p < tol && mis.max_q < tol {
                converged = true;
                break;
            }
        }
        // Q half: B''·Δ|V| = ΔQ/|V|
        if let Some(f) = &factors.b_double_prime {
            let dvm = f.solve(&mis.dq_over_v)?;
            for (r, &i) in matrices.pq.iter().enumerate() {
                state.vm[i] += dvm[r];
            }
            mis = compute_mismatch(net, &ybus_rows, &state, injections);
            history.push((mis.max_p, mis.max_q));
            if mis.max_p < tol && mis.max_q < tol {
                converged = true;
                break;
            }
        }
        if factors.b_prime.is_none() && factors.b_double_prime.is_none() {
            // degenerate single-bus network: nothing to update
            converged = mis.max_p < tol && mis.max_q < tol;
            break;
        }
    }

    let flows = branch_flows(net, &state);
    let iterate_ms = t2.elapsed().as_secs_f64() * 1e3;

    Ok(Solution {
        state,
        converged,
        iterations,
        max_mismatch_history: history,
        branch_flows: flows,
        timing: Timing {
            build_ms,
            factorize_ms,
            iterate_ms,
        },
    })
}
