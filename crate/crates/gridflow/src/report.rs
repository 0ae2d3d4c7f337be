//! Human- and machine-readable rendering of solutions, distributed runs,
//! comparisons and benchmark tables. The machine form is JSON and round-trips,
//! so `compare` can consume files produced by `solve`/`distsolve`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributed::{BenchmarkTable, BusDiff, DiffReport, DistributedSolution};
use crate::fdpf::{Solution, Timing};
use crate::model::{BusKind, Network};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("reports cover different bus sets ({0} vs {1} buses)")]
    BusSetMismatch(usize, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BusRecord {
    pub id: i64,
    pub kind: BusKind,
    pub vm_pu: f64,
    pub va_deg: f64,
    /// Net load at the bus in MW/MVAr (boundary equivalents included).
    pub pd_mw: f64,
    pub qd_mvar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowRecord {
    pub from: i64,
    pub to: i64,
    pub p_from_mw: f64,
    pub q_from_mvar: f64,
    pub p_to_mw: f64,
    pub q_to_mvar: f64,
}

/// Self-contained rendering of one solve: physical units at the boundary
/// (degrees, MW, MVAr), per-unit magnitudes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionReport {
    pub converged: bool,
    pub iterations: usize,
    /// `(max ΔP, max ΔQ)` per-unit at every mismatch evaluation.
    pub mismatch_history: Vec<(f64, f64)>,
    pub buses: Vec<BusRecord>,
    pub branches: Vec<FlowRecord>,
    /// Absent when timing has been stripped for reproducible output.
    pub timing_ms: Option<Timing>,
}

impl SolutionReport {
    pub fn new(net: &Network, sol: &Solution) -> SolutionReport {
        let s = net.base_mva;
        let buses = net
            .buses
            .iter()
            .enumerate()
            .map(|(i, b)| BusRecord {
                id: b.id,
                kind: b.kind,
                vm_pu: sol.state.vm[i],
                va_deg: sol.state.va[i].to_degrees(),
                pd_mw: b.pd * s,
                qd_mvar: b.qd * s,
            })
            .collect();
        let branches = sol
            .branch_flows
            .iter()
            .map(|f| FlowRecord {
                from: f.from,
                to: f.to,
                p_from_mw: f.p_from * s,
                q_from_mvar: f.q_from * s,
                p_to_mw: f.p_to * s,
                q_to_mvar: f.q_to * s,
            })
            .collect();
        SolutionReport {
            converged: sol.converged,
            iterations: sol.iterations,
            mismatch_history: sol.max_mismatch_history.clone(),
            buses,
            branches,
            timing_ms: Some(sol.timing.clone()),
        }
    }

    /// Drops wall-clock timing so repeated runs serialize byte-identically.
    pub fn without_timing(mut self) -> SolutionReport {
        self.timing_ms = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn from_json(text: &str) -> Result<SolutionReport, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "status     {}\niterations {}\n",
            if self.converged { "converged" } else { "NOT CONVERGED" },
            self.iterations
        ));
        if let Some((p, q)) = self.mismatch_history.last() {
            out.push_str(&format!("mismatch   max|dP| {p:.3e}  max|dQ| {q:.3e} pu\n"));
        }
        if let Some(t) = &self.timing_ms {
            out.push_str(&format!(
                "timing     build {:.2} ms  factorize {:.2} ms  iterate {:.2} ms\n",
                t.build_ms, t.factorize_ms, t.iterate_ms
            ));
        }
        out.push_str("\n   bus  kind     vm [pu]    va [deg]     pd [MW]  qd [MVAr]\n");
        for b in &self.buses {
            let kind = match b.kind {
                BusKind::Slack => "slack",
                BusKind::Pv => "pv",
                BusKind::Pq => "pq",
            };
            out.push_str(&format!(
                "{:>6}  {:<5} {:>9.4} {:>11.4} {:>11.2} {:>10.2}\n",
                b.id, kind, b.vm_pu, b.va_deg, b.pd_mw, b.qd_mvar
            ));
        }
        out.push_str("\n  from     to     p_from      q_from        p_to        q_to  [MW/MVAr]\n");
        for f in &self.branches {
            out.push_str(&format!(
                "{:>6} {:>6} {:>10.2} {:>11.2} {:>11.2} {:>11.2}\n",
                f.from, f.to, f.p_from_mw, f.q_from_mvar, f.p_to_mw, f.q_to_mvar
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaSummary {
    pub area: i64,
    pub buses: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributedReport {
    pub merged: SolutionReport,
    pub areas: Vec<AreaSummary>,
    pub failed_areas: Vec<i64>,
    /// Absent when run metadata has been stripped for reproducible output.
    pub thread_count: Option<usize>,
    /// Absent when run metadata has been stripped for reproducible output.
    pub wall_time_ms: Option<f64>,
}

impl DistributedReport {
    pub fn new(net: &Network, sol: &DistributedSolution) -> DistributedReport {
        DistributedReport {
            merged: SolutionReport::new(net, &sol.merged),
            areas: sol
                .per_area
                .iter()
                .map(|(id, s)| AreaSummary {
                    area: *id,
                    buses: s.state.vm.len(),
                    iterations: s.iterations,
                    converged: s.converged,
                })
                .collect(),
            failed_areas: sol.failed_areas.clone(),
            thread_count: Some(sol.thread_count),
            wall_time_ms: Some(sol.wall_time_ms),
        }
    }

    /// Drops wall-clock timing and worker-count metadata so repeated runs
    /// serialize byte-identically regardless of the execution environment.
    pub fn without_timing(mut self) -> DistributedReport {
        self.merged = self.merged.without_timing();
        self.wall_time_ms = None;
        self.thread_count = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn from_json(text: &str) -> Result<DistributedReport, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(t) = self.thread_count {
            out.push_str(&format!("workers    {t}\n"));
        }
        if let Some(w) = self.wall_time_ms {
            out.push_str(&format!("wall time  {w:.2} ms\n"));
        }
        out.push_str("\n  area   buses  iters  status\n");
        for a in &self.areas {
            out.push_str(&format!(
                "{:>6} {:>7} {:>6}  {}\n",
                a.area,
                a.buses,
                a.iterations,
                if a.converged { "converged" } else { "NOT CONVERGED" }
            ));
        }
        out.push('\n');
        out.push_str(&self.merged.to_text());
        out
    }
}

/// Per-bus diff of two reports matched by bus id.
pub fn compare_reports(a: &SolutionReport, b: &SolutionReport) -> Result<DiffReport, ReportError> {
    if a.buses.len() != b.buses.len()
        || a.buses.iter().zip(&b.buses).any(|(x, y)| x.id != y.id)
    {
        return Err(ReportError::BusSetMismatch(a.buses.len(), b.buses.len()));
    }
    let mut diffs: Vec<BusDiff> = a
        .buses
        .iter()
        .zip(&b.buses)
        .enumerate()
        .map(|(i, (x, y))| {
            let mut da = (x.va_deg - y.va_deg) % 360.0;
            if da > 180.0 {
                da -= 360.0;
            }
            if da < -180.0 {
                da += 360.0;
            }
            BusDiff {
                bus_index: i,
                angle_diff_deg: da.abs(),
                vm_diff_pu: (x.vm_pu - y.vm_pu).abs(),
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

pub fn diff_to_text(diff: &DiffReport, bus_ids: Option<&[i64]>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "max angle deviation {:.6} deg\nmax magnitude deviation {:.6} pu\n",
        diff.max_angle_diff_deg, diff.max_vm_diff_pu
    ));
    out.push_str("worst buses:\n");
    for d in &diff.worst {
        let label = match bus_ids {
            Some(ids) => ids[d.bus_index].to_string(),
            None => format!("#{}", d.bus_index),
        };
        out.push_str(&format!(
            "  bus {:>6}  angle {:.6} deg  vm {:.6} pu\n",
            label, d.angle_diff_deg, d.vm_diff_pu
        ));
    }
    out
}

pub fn benchmark_to_text(table: &BenchmarkTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("median of {} runs, times in ms\n", table.runs));
    out.push_str("threads  monolithic  distributed   m.build  m.factor  m.iterate   d.build  d.factor  d.iterate\n");
    for c in &table.columns {
        out.push_str(&format!(
            "{:>7} {:>11.3} {:>12.3} {:>9.3} {:>9.3} {:>10.3} {:>9.3} {:>9.3} {:>10.3}\n",
            c.threads,
            c.monolithic_ms,
            c.distributed_ms,
            c.monolithic_phases.build_ms,
            c.monolithic_phases.factorize_ms,
            c.monolithic_phases.iterate_ms,
            c.distributed_phases.build_ms,
            c.distributed_phases.factorize_ms,
            c.distributed_phases.iterate_ms,
        ));
    }
    out
}
