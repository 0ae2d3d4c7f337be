//! Dense brute-force oracles used by the test suites.
//!
//! Everything here is intentionally naive: dense storage, textbook
//! algorithms, no sharing with the sparse/decoupled implementation paths it
//! is used to check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gridflow::model::{BusKind, Network};

/// Random symmetric positive definite matrix via `AᵀA + n·I`, with a sparse
/// random A so the result has exploitable structure.
pub fn random_spd(seed: u64, max_n: usize) -> (usize, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let mut a = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        a[i][i] = rng.gen_range(0.5..2.0);
        for j in 0..n {
            if i != j && rng.gen_bool(0.12) {
                a[i][j] = rng.gen_range(-1.0..1.0);
            }
        }
    }
    let mut m = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[k][i] * a[k][j];
            }
            m[i][j] = s;
        }
        m[i][i] += n as f64;
    }
    // symmetrize the pattern exactly (drop tiny asymmetries from fp noise)
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    (n, m)
}

/// Dense LU solve with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&p, &q| m[p][k].abs().partial_cmp(&m[q][k].abs()).unwrap())
            .unwrap();
        m.swap(k, piv);
        x.swap(k, piv);
        assert!(m[k][k] != 0.0, "singular matrix in dense oracle");
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..n {
                    let v = m[k][j];
                    m[i][j] -= f * v;
                }
                x[i] -= f * x[k];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    x
}

/// Dense Cholesky; returns `None` if a pivot is non-positive.
pub fn dense_cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d <= 0.0 {
            return None;
        }
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Some(l)
}

/// Brute-force symbolic Gaussian elimination of a permuted symmetric pattern.
///
/// Returns the filled lower-triangular pattern (in permuted coordinates,
/// `fill[i][j]` for i > j) and the elimination tree as
/// `parent[j] = min{i > j : L(i,j)}`.
pub fn symbolic_elimination_oracle(
    pattern: &[Vec<bool>],
    perm: &[usize],
) -> (Vec<Vec<bool>>, Vec<Option<usize>>) {
    let n = pattern.len();
    let mut work = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            work[i][j] = pattern[perm[i]][perm[j]];
        }
        work[i][i] = true;
    }
    for k in 0..n {
        for i in k + 1..n {
            if work[i][k] {
                for j in k + 1..n {
                    if work[j][k] {
                        work[i][j] = true;
                        work[j][i] = true;
                    }
                }
            }
        }
    }
    let mut etree = vec![None; n];
    for j in 0..n {
        for i in j + 1..n {
            if work[i][j] {
                etree[j] = Some(i);
                break;
            }
        }
    }
    (work, etree)
}

/// Longest path to a leaf below `j`, by direct recursion over the parent array.
pub fn etree_depth_oracle(etree: &[usize], j: usize) -> usize {
    let children: Vec<usize> = (0..etree.len()).filter(|&c| etree[c] == j).collect();
    children
        .iter()
        .map(|&c| 1 + etree_depth_oracle(etree, c))
        .max()
        .unwrap_or(0)
}

/// Dense bus admittance matrix by naive summation over branches and shunts.
pub fn dense_ybus(net: &Network) -> Vec<Vec<Complex64>> {
    let n = net.buses.len();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for br in &net.branches {
        if !br.status {
            continue;
        }
        let f = net.index_of(br.from).unwrap();
        let t = net.index_of(br.to).unwrap();
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let bc = Complex64::new(0.0, br.b_charging / 2.0);
        let tap = Complex64::from_polar(br.tap, br.shift);
        y[f][f] += (ys + bc) / (tap * tap.conj());
        y[f][t] += -ys / tap.conj();
        y[t][f] += -ys / tap;
        y[t][t] += ys + bc;
    }
    for (i, bus) in net.buses.iter().enumerate() {
        y[i][i] += Complex64::new(bus.gs, bus.bs);
    }
    y
}

/// Complex power injections `S = diag(V)·conj(Y·V)` from a dense Ybus.
pub fn dense_injections(
    y: &[Vec<Complex64>],
    vm: &[f64],
    va: &[f64],
) -> Vec<Complex64> {
    let n = vm.len();
    let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
    (0..n)
        .map(|i| {
            let mut current = Complex64::new(0.0, 0.0);
            for j in 0..n {
                current += y[i][j] * v[j];
            }
            v[i] * current.conj()
        })
        .collect()
}

/// Per-bus specified injections (generation minus load) in per-unit.
pub fn specified_injections(net: &Network) -> (Vec<f64>, Vec<f64>) {
    let n = net.buses.len();
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
    (p, q)
}

/// Result of the dense Newton-Raphson reference solve.
pub struct NewtonSolution {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Full-Jacobian Newton-Raphson power flow on dense matrices.
///
/// Used as the independent accuracy reference; tolerance applies to the
/// infinity norm of the raw P/Q mismatches.
pub fn newton_solve(net: &Network, tol: f64, max_iter: usize) -> NewtonSolution {
    let n = net.buses.len();
    let y = dense_ybus(net);
    let (p_spec, q_spec) = specified_injections(net);

    let mut vm: Vec<f64> = net.buses.iter().map(|b| b.vm0).collect();
    let mut va: Vec<f64> = net.buses.iter().map(|b| b.va0).collect();
    for g in &net.generators {
        let i = net.index_of(g.bus).unwrap();
        if net.buses[i].kind != BusKind::Pq {
            vm[i] = g.vset;
        }
    }

    let pvpq: Vec<usize> = (0..n).filter(|&i| net.buses[i].kind != BusKind::Slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| net.buses[i].kind == BusKind::Pq).collect();

    let mut converged = false;
    let mut iterations = 0;
    for it in 0..=max_iter {
        let s = dense_injections(&y, &vm, &va);
        let dp: Vec<f64> = pvpq.iter().map(|&i| p_spec[i] - s[i].re).collect();
        let dq: Vec<f64> = pq.iter().map(|&i| q_spec[i] - s[i].im).collect();
        let max_p = dp.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let max_q = dq.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if max_p < tol && max_q < tol {
            converged = true;
            iterations = it;
            break;
        }
        if it == max_iter {
            iterations = it;
            break;
        }

        // Jacobian in polar form: unknowns [va(pvpq); vm(pq)]
        let m = pvpq.len() + pq.len();
        let mut jac = vec![vec![0.0f64; m]; m];
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
        // dS/dva and dS/dvm, dense textbook formulas
        let mut ibus = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                ibus[i] += y[i][j] * v[j];
            }
        }
        let ds_dva = |i: usize, j: usize| -> Complex64 {
            if i == j {
                let term = ibus[i] - y[i][i] * v[i];
                Complex64::new(0.0, 1.0) * v[i] * (-term).conj() * Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0) * v[i] * (y[i][j] * v[j]).conj() * Complex64::new(-1.0, 0.0)
            }
        };
        let ds_dvm = |i: usize, j: usize| -> Complex64 {
            let ej = v[j] / vm[j];
            if i == j {
                v[i] * (y[i][j] * ej).conj() + ej * ibus[i].conj()
            } else {
                v[i] * (y[i][j] * ej).conj()
            }
        };
        for (r, &i) in pvpq.iter().enumerate() {
            for (c, &j) in pvpq.iter().enumerate() {
                jac[r][c] = ds_dva(i, j).re;
            }
            for (c, &j) in pq.iter().enumerate() {
                jac[r][pvpq.len() + c] = ds_dvm(i, j).re;
            }
        }
        for (r, &i) in pq.iter().enumerate() {
            for (c, &j) in pvpq.iter().enumerate() {
                jac[pvpq.len() + r][c] = ds_dva(i, j).im;
            }
            for (c, &j) in pq.iter().enumerate() {
                jac[pvpq.len() + r][pvpq.len() + c] = ds_dvm(i, j).im;
            }
        }
        let rhs: Vec<f64> = dp.iter().chain(dq.iter()).copied().collect();
        let dx = dense_solve(&jac, &rhs);
        for (c, &j) in pvpq.iter().enumerate() {
            va[j] += dx[c];
        }
        for (c, &j) in pq.iter().enumerate() {
            vm[j] += dx[pvpq.len() + c];
        }
    }

    NewtonSolution {
        vm,
        va,
        iterations,
        converged,
    }
}

/// Branch end flows by direct complex arithmetic.
pub fn dense_branch_flow(
    r: f64,
    x: f64,
    b_charging: f64,
    tap: f64,
    shift: f64,
    vf: Complex64,
    vt: Complex64,
) -> (Complex64, Complex64) {
    let ys = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
    let bc = Complex64::new(0.0, b_charging / 2.0);
    let t = Complex64::from_polar(tap, shift);
    let i_f = (ys + bc) / (t * t.conj()) * vf - ys / t.conj() * vt;
    let i_t = -ys / t * vf + (ys + bc) * vt;
    (vf * i_f.conj(), vt * i_t.conj())
}
