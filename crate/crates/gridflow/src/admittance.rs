//! Bus admittance matrix and the constant decoupled coefficient matrices.
//!
//! Every entry is computable from one bus plus its incident branches, so
//! per-row assembly can run concurrently; [`ybus_row`] exposes that node-local
//! contract directly.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{BusKind, Network};
use crate::sparse::{CscBuilder, SparseComplexMatrix, SparseRealMatrix};

#[derive(Debug, Error)]
pub enum AdmittanceError {
    #[error("branch {from}-{to} has zero impedance (r = x = 0)")]
    ZeroImpedance { from: i64, to: i64 },
}

/// Constant decoupled coefficient matrices and their bus/row index maps.
///
/// `b_prime` spans non-slack buses and is built from series reactance only;
/// `b_double_prime` spans PQ buses and is the negated imaginary part of the
/// full Ybus restricted to those rows and columns.
#[derive(Debug, Clone)]
pub struct FdpfMatrices {
    pub b_prime: SparseRealMatrix,
    pub b_double_prime: SparseRealMatrix,
    /// Dense bus index per `b_prime` row.
    pub non_slack: Vec<usize>,
    /// Dense bus index per `b_double_prime` row.
    pub pq: Vec<usize>,
    /// `b_prime` row per dense bus index, if any.
    pub p_row_of: Vec<Option<usize>>,
    /// `b_double_prime` row per dense bus index, if any.
    pub q_row_of: Vec<Option<usize>>,
}

struct BranchAdmittance {
    yff: Complex64,
    yft: Complex64,
    ytf: Complex64,
    ytt: Complex64,
}

fn branch_admittance(r: f64, x: f64, b_charging: f64, tap: f64, shift: f64) -> BranchAdmittance {
    let ys = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
    let bc = Complex64::new(0.0, b_charging / 2.0);
    let t = Complex64::from_polar(tap, shift);
    BranchAdmittance {
        yff: (ys + bc) / (t * t.conj()),
        yft: -ys / t.conj(),
        ytf: -ys / t,
        ytt: ys + bc,
    }
}

/// Builds the complex bus admittance matrix over all buses.
///
/// Standard branch model: series admittance `1/(r+jx)`, half the line
/// charging at each end, off-nominal tap and phase shift applied on the from
/// side; bus shunts are added to the diagonal. Out-of-service branches are
/// skipped.
pub fn build_ybus(net: &Network) -> Result<SparseComplexMatrix, AdmittanceError> {
    let n = net.n_bus();
    let mut b = CscBuilder::new(n);
    for br in &net.branches {
        if !br.status {
            continue;
        }
        if br.r == 0.0 && br.x == 0.0 {
            return Err(AdmittanceError::ZeroImpedance {
                from: br.from,
                to: br.to,
            });
        }
        let f = net.index_of(br.from).expect("validated branch endpoint");
        let t = net.index_of(br.to).expect("validated branch endpoint");
        let ya = branch_admittance(br.r, br.x, br.b_charging, br.tap, br.shift);
        b.push(f, f, ya.yff);
        b.push(f, t, ya.yft);
        b.push(t, f, ya.ytf);
        b.push(t, t, ya.ytt);
    }
    for (i, bus) in net.buses.iter().enumerate() {
        let shunt = Complex64::new(bus.gs, bus.bs);
        if shunt.re != 0.0 || shunt.im != 0.0 {
            b.push(i, i, shunt);
        }
    }
    Ok(b.finalize())
}

/// Rebuilds one row of Ybus from only that bus's incident branches,
/// independently of the assembled matrix.
pub fn ybus_row(net: &Network, bus: usize) -> Vec<(usize, Complex64)> {
    let n = net.n_bus();
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for br in &net.branches {
        if !br.status {
            continue;
        }
        let f = net.index_of(br.from).unwrap();
        let t = net.index_of(br.to).unwrap();
        if f != bus && t != bus {
            continue;
        }
        let ya = branch_admittance(br.r, br.x, br.b_charging, br.tap, br.shift);
        if f == bus {
            row[f] += ya.yff;
            row[t] += ya.yft;
        }
        if t == bus {
            row[f] += ya.ytf;
            row[t] += ya.ytt;
        }
    }
    row[bus] += Complex64::new(net.buses[bus].gs, net.buses[bus].bs);
    (0..n)
        .filter(|&j| row[j].re != 0.0 || row[j].im != 0.0)
        .map(|j| (j, row[j]))
        .collect()
}

/// Builds the pair of constant decoupled matrices for a network with its
/// slack set designated.
///
/// A degenerate single-bus area yields empty matrices; callers treat that as
/// trivially solved.
pub fn build_fdpf_matrices(net: &Network) -> Result<FdpfMatrices, AdmittanceError> {
    let n = net.n_bus();
    let non_slack: Vec<usize> = (0..n).filter(|&i| net.buses[i].kind != BusKind::Slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| net.buses[i].kind == BusKind::Pq).collect();
    let mut p_row_of = vec![None; n];
    for (r, &i) in non_slack.iter().enumerate() {
        p_row_of[i] = Some(r);
    }
    let mut q_row_of = vec![None; n];
    for (r, &i) in pq.iter().enumerate() {
        q_row_of[i] = Some(r);
    }

    // B': graph Laplacian of 1/x over non-slack buses; resistance, charging,
    // shunts and tap magnitudes ignored, phase shifters treated as nominal
    let mut bp = CscBuilder::new(non_slack.len());
    bp.set_symmetric(true);
    for br in &net.branches {
        if !br.status {
            continue;
        }
        let f = net.index_of(br.from).unwrap();
        let t = net.index_of(br.to).unwrap();
        let w = 1.0 / br.x;
        if let Some(rf) = p_row_of[f] {
            bp.push(rf, rf, w);
        }
        if let Some(rt) = p_row_of[t] {
            bp.push(rt, rt, w);
        }
        if let (Some(rf), Some(rt)) = (p_row_of[f], p_row_of[t]) {
            bp.push(rf, rt, -w);
            bp.push(rt, rf, -w);
        }
    }

    // B'': -Im(Ybus) restricted to PQ rows and columns
    let ybus = build_ybus(net)?;
    let mut bpp = CscBuilder::new(pq.len());
    bpp.set_symmetric(true);
    for (cq, &j) in pq.iter().enumerate() {
        for (i, v) in ybus.col(j) {
            if let Some(rq) = q_row_of[i] {
                bpp.push(rq, cq, -v.im);
            }
        }
    }

    Ok(FdpfMatrices {
        b_prime: bp.finalize(),
        b_double_prime: bpp.finalize(),
        non_slack,
        pq,
        p_row_of,
        q_row_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_case, Branch, Bus, Generator};

    fn two_bus(r: f64, x: f64, b_charging: f64, tap: f64) -> Network {
        let buses = vec![
            Bus {
                id: 1,
                kind: BusKind::Slack,
                pd: 0.0,
                qd: 0.0,
                gs: 0.0,
                bs: 0.0,
                vm0: 1.0,
                va0: 0.0,
                base_kv: 138.0,
                area_hint: None,
            },
            Bus {
                id: 2,
                kind: BusKind::Pq,
                pd: 0.5,
                qd: 0.1,
                gs: 0.0,
                bs: 0.0,
                vm0: 1.0,
                va0: 0.0,
                base_kv: 138.0,
                area_hint: None,
            },
        ];
        let branches = vec![Branch {
            from: 1,
            to: 2,
            r,
            x,
            b_charging,
            tap,
            shift: 0.0,
            status: true,
        }];
        let gens = vec![Generator {
            bus: 1,
            pg: 0.0,
            qg: 0.0,
            vset: 1.0,
            pmax: 3.0,
        }];
        Network::assemble(100.0, buses, branches, gens, true).unwrap()
    }

    #[test]
    fn lossless_branch_analytic_ybus() {
        let net = two_bus(0.0, 0.1, 0.0, 1.0);
        let y = build_ybus(&net).unwrap();
        let expect = Complex64::new(0.0, -10.0);
        assert!((y.get(0, 0) - expect).norm() < 1e-14);
        assert!((y.get(1, 1) - expect).norm() < 1e-14);
        assert!((y.get(0, 1) + expect).norm() < 1e-14);
        assert!((y.get(1, 0) + expect).norm() < 1e-14);
    }

    #[test]
    fn tap_ratio_scales_from_side() {
        let net = two_bus(0.0, 0.1, 0.0, 2.0);
        let y = build_ybus(&net).unwrap();
        assert!((y.get(0, 0) - Complex64::new(0.0, -2.5)).norm() < 1e-14);
        assert!((y.get(0, 1) - Complex64::new(0.0, 5.0)).norm() < 1e-14);
        assert!((y.get(1, 0) - Complex64::new(0.0, 5.0)).norm() < 1e-14);
        assert!((y.get(1, 1) - Complex64::new(0.0, -10.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_impedance_branch_rejected() {
        let mut net = two_bus(0.0, 0.1, 0.0, 1.0);
        // bypass model validation to hit the build-time check
        net.branches[0].r = 0.0;
        net.branches[0].x = 0.0;
        assert!(matches!(
            build_ybus(&net),
            Err(AdmittanceError::ZeroImpedance { from: 1, to: 2 })
        ));
    }

    #[test]
    fn two_bus_decoupled_matrices_analytic() {
        let net = two_bus(0.01, 0.1, 0.02, 1.0);
        let m = build_fdpf_matrices(&net).unwrap();
        assert_eq!(m.b_prime.n(), 1);
        assert!((m.b_prime.get(0, 0) - 10.0).abs() < 1e-14);
        assert_eq!(m.b_double_prime.n(), 1);
        // -Im(1/(r+jx)) minus the charging half at this end
        let expect = 0.1 / (0.01f64.powi(2) + 0.1f64.powi(2)) - 0.01;
        assert!((m.b_double_prime.get(0, 0) - expect).abs() < 1e-14);
    }

    #[test]
    fn three_bus_chain_b_prime_is_reactance_laplacian() {
        let text = r#"function mpc = case3
mpc.baseMVA = 100;
mpc.bus = [
    1  3  0   0  0  0  1  1.0  0  138  1  1.1  0.9;
    2  1  30  10 0  0  1  1.0  0  138  1  1.1  0.9;
    3  1  30  10 0  0  1  1.0  0  138  1  1.1  0.9;
];
mpc.gen = [
    1  0  0  100  -100  1.0  100  1  200  0;
];
mpc.branch = [
    1  2  0  0.1  0  0  0  0  0  0  1;
    2  3  0  0.1  0  0  0  0  0  0  1;
];
"#;
        let net = parse_case(text).unwrap();
        let m = build_fdpf_matrices(&net).unwrap();
        assert_eq!(m.b_prime.n(), 2);
        assert!((m.b_prime.get(0, 0) - 20.0).abs() < 1e-12);
        assert!((m.b_prime.get(0, 1) + 10.0).abs() < 1e-12);
        assert!((m.b_prime.get(1, 0) + 10.0).abs() < 1e-12);
        assert!((m.b_prime.get(1, 1) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn single_bus_area_yields_empty_matrices() {
        let buses = vec![Bus {
            id: 1,
            kind: BusKind::Slack,
            pd: 0.0,
            qd: 0.0,
            gs: 0.0,
            bs: 0.0,
            vm0: 1.0,
            va0: 0.0,
            base_kv: 138.0,
            area_hint: None,
        }];
        let gens = vec![Generator {
            bus: 1,
            pg: 0.0,
            qg: 0.0,
            vset: 1.0,
            pmax: 1.0,
        }];
        let net = Network::assemble(100.0, buses, vec![], gens, true).unwrap();
        let m = build_fdpf_matrices(&net).unwrap();
        assert_eq!(m.b_prime.n(), 0);
        assert_eq!(m.b_double_prime.n(), 0);
    }

    #[test]
    fn rebuilt_rows_match_assembled_matrix() {
        let net = two_bus(0.02, 0.15, 0.04, 1.05);
        let y = build_ybus(&net).unwrap();
        let yt = y.transpose();
        for i in 0..net.n_bus() {
            let rebuilt = ybus_row(&net, i);
            let assembled: Vec<(usize, Complex64)> = yt.col(i).collect();
            assert_eq!(rebuilt.len(), assembled.len());
            for ((j1, v1), (j2, v2)) in rebuilt.iter().zip(&assembled) {
                assert_eq!(j1, j2);
                assert!((v1 - v2).norm() < 1e-14);
            }
        }
    }
}
