//! Multi-area partitioning: remove inter-area branches, convert their
//! reference-state flows into equivalent extra load injections at the
//! boundary buses, and designate a pinned-angle slack per area.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdpf::PowerFlowState;
use crate::model::{BusKind, ModelError, Network};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("bus {0} unassigned in the area map")]
    UnassignedBus(i64),
    #[error("area map references unknown bus {0}")]
    UnknownBus(i64),
    #[error("area {0} is internally disconnected after removing inter-area branches")]
    DisconnectedArea(i64),
    #[error("area {0} contains no generator bus; revise the area map")]
    NoGenerator(i64),
    #[error("area map line {line}: {message}")]
    MapSyntax { line: usize, message: String },
    #[error("reference state covers {got} buses, network has {expected}")]
    StateDimension { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One area's sub-network view plus the mapping back to global bus indices.
#[derive(Debug, Clone)]
pub struct AreaView {
    pub id: i64,
    pub network: Network,
    /// Global dense bus index per area-local dense index.
    pub global_of_local: Vec<usize>,
}

/// The partitioned system: bus→area assignment, removed inter-area branches
/// and per-area sub-network views.
#[derive(Debug, Clone)]
pub struct AreaPartition {
    /// Area id per global dense bus index.
    pub area_of: Vec<i64>,
    /// Indices into `Network::branches` of branches whose endpoints lie in
    /// different areas.
    pub inter_area_branches: Vec<usize>,
    pub areas: Vec<AreaView>,
}

/// One removed-branch-end contribution to a boundary bus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectionContribution {
    pub branch: usize,
    pub from: i64,
    pub to: i64,
    /// Bus receiving this contribution.
    pub bus: i64,
    pub p: f64,
    pub q: f64,
}

/// Equivalent extra load injections per global bus, with per-branch-end
/// provenance for audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryInjectionSet {
    /// Extra active load per global dense bus index (positive = power
    /// leaving the area), per-unit.
    pub p_extra: Vec<f64>,
    pub q_extra: Vec<f64>,
    pub provenance: Vec<InjectionContribution>,
}

impl BoundaryInjectionSet {
    pub fn empty(n_bus: usize) -> Self {
        BoundaryInjectionSet {
            p_extra: vec![0.0; n_bus],
            q_extra: vec![0.0; n_bus],
            provenance: Vec::new(),
        }
    }
}

/// Per-area slack designation with the angle pinned from the reference frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaSlack {
    pub area: i64,
    pub bus: i64,
    /// Pinned angle, radians, equal to the reference-state angle at `bus`.
    pub angle: f64,
    /// Reference-state magnitude at `bus`, used as the slack setpoint.
    pub vm: f64,
}

/// Parses an area-map file: one `<bus_id> <area_id>` pair per line,
/// `#` comments allowed.
pub fn parse_area_map(text: &str) -> Result<BTreeMap<i64, i64>, PartitionError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let mut toks = code.split_whitespace();
        let (Some(bus), Some(area), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(PartitionError::MapSyntax {
                line,
                message: "expected '<bus_id> <area_id>'".into(),
            });
        };
        let bus: i64 = bus.parse().map_err(|_| PartitionError::MapSyntax {
            line,
            message: format!("invalid bus id '{bus}'"),
        })?;
        let area: i64 = area.parse().map_err(|_| PartitionError::MapSyntax {
            line,
            message: format!("invalid area id '{area}'"),
        })?;
        map.insert(bus, area);
    }
    Ok(map)
}

/// Splits the network into isolated area sub-networks.
///
/// Inter-area branches are identified and excluded from the area views;
/// intra-area branches, shunts and generators are copied in. Every area must
/// remain internally connected over its in-service branches.
pub fn split_areas(
    net: &Network,
    area_map: &BTreeMap<i64, i64>,
) -> Result<AreaPartition, PartitionError> {
    for &bus in area_map.keys() {
        if net.index_of(bus).is_none() {
            return Err(PartitionError::UnknownBus(bus));
        }
    }
    let mut area_of = Vec::with_capacity(net.n_bus());
    for bus in &net.buses {
        match area_map.get(&bus.id) {
            Some(&a) => area_of.push(a),
            None => return Err(PartitionError::UnassignedBus(bus.id)),
        }
    }

    let mut inter_area_branches = Vec::new();
    for (k, br) in net.branches.iter().enumerate() {
        let f = net.index_of(br.from).unwrap();
        let t = net.index_of(br.to).unwrap();
        if area_of[f] != area_of[t] {
            inter_area_branches.push(k);
        }
    }

    let mut area_ids: Vec<i64> = area_of.clone();
    area_ids.sort_unstable();
    area_ids.dedup();

    let mut areas = Vec::with_capacity(area_ids.len());
    for &aid in &area_ids {
        let global_of_local: Vec<usize> =
            (0..net.n_bus()).filter(|&i| area_of[i] == aid).collect();
        let buses = global_of_local
            .iter()
            .map(|&i| net.buses[i].clone())
            .collect();
        let branches = net
            .branches
            .iter()
            .filter(|br| {
                let f = net.index_of(br.from).unwrap();
                let t = net.index_of(br.to).unwrap();
                area_of[f] == aid && area_of[t] == aid
            })
            .cloned()
            .collect();
        let generators = net
            .generators
            .iter()
            .filter(|g| area_of[net.index_of(g.bus).unwrap()] == aid)
            .cloned()
            .collect();
        let network = Network::assemble(net.base_mva, buses, branches, generators, false)?;
        if network.components().len() > 1 {
            return Err(PartitionError::DisconnectedArea(aid));
        }
        areas.push(AreaView {
            id: aid,
            network,
            global_of_local,
        });
    }

    Ok(AreaPartition {
        area_of,
        inter_area_branches,
        areas,
    })
}

/// Converts each removed branch's reference-state flow into extra load at its
/// two endpoints: the from-end flow lands on the from bus and the to-end flow
/// on the to bus. Out-of-service branches contribute nothing.
pub fn boundary_injections(
    net: &Network,
    partition: &AreaPartition,
    reference_state: &PowerFlowState,
) -> Result<BoundaryInjectionSet, PartitionError> {
    if reference_state.vm.len() != net.n_bus() {
        return Err(PartitionError::StateDimension {
            expected: net.n_bus(),
            got: reference_state.vm.len(),
        });
    }
    let flows = crate::fdpf::branch_flows(net, reference_state);
    let mut set = BoundaryInjectionSet::empty(net.n_bus());
    for &k in &partition.inter_area_branches {
        let br = &net.branches[k];
        if !br.status {
            continue;
        }
        let flow = &flows[k];
        let f = net.index_of(br.from).unwrap();
        let t = net.index_of(br.to).unwrap();
        set.p_extra[f] += flow.p_from;
        set.q_extra[f] += flow.q_from;
        set.p_extra[t] += flow.p_to;
        set.q_extra[t] += flow.q_to;
        set.provenance.push(InjectionContribution {
            branch: k,
            from: br.from,
            to: br.to,
            bus: br.from,
            p: flow.p_from,
            q: flow.q_from,
        });
        set.provenance.push(InjectionContribution {
            branch: k,
            from: br.from,
            to: br.to,
            bus: br.to,
            p: flow.p_to,
            q: flow.q_to,
        });
    }
    Ok(set)
}

/// Designates one slack per area: the area holding the global slack keeps it,
/// every other area promotes its largest-capacity generator bus (ties broken
/// by lowest bus id). Angles are pinned from the reference state, so all
/// areas share one angle frame.
pub fn select_area_slacks(
    partition: &AreaPartition,
    net: &Network,
    reference_state: &PowerFlowState,
) -> Result<Vec<AreaSlack>, PartitionError> {
    if reference_state.vm.len() != net.n_bus() {
        return Err(PartitionError::StateDimension {
            expected: net.n_bus(),
            got: reference_state.vm.len(),
        });
    }
    let mut slacks = Vec::with_capacity(partition.areas.len());
    for area in &partition.areas {
        let global_slack = area
            .network
            .buses
            .iter()
            .find(|b| b.kind == BusKind::Slack)
            .map(|b| b.id);
        let bus_id = match global_slack {
            Some(id) => id,
            None => {
                let mut best: Option<(f64, i64)> = None;
                for g in &area.network.generators {
                    let better = match best {
                        None => true,
                        Some((cap, id)) => {
                            g.pmax > cap || (g.pmax == cap && g.bus < id)
                        }
                    };
                    if better {
                        best = Some((g.pmax, g.bus));
                    }
                }
                best.ok_or(PartitionError::NoGenerator(area.id))?.1
            }
        };
        let gi = net.index_of(bus_id).unwrap();
        slacks.push(AreaSlack {
            area: area.id,
            bus: bus_id,
            angle: reference_state.va[gi],
            vm: reference_state.vm[gi],
        });
    }
    Ok(slacks)
}

/// Builds the ready-to-solve network for one area: extra injections folded
/// into bus loads, the designated slack applied with its pinned angle.
pub fn area_problem(
    area: &AreaView,
    injections: &BoundaryInjectionSet,
    slack: &AreaSlack,
) -> Result<Network, PartitionError> {
    let mut buses = area.network.buses.clone();
    for (local, bus) in buses.iter_mut().enumerate() {
        let g = area.global_of_local[local];
        bus.pd += injections.p_extra[g];
        bus.qd += injections.q_extra[g];
        if bus.id == slack.bus {
            bus.kind = BusKind::Slack;
            bus.va0 = slack.angle;
            bus.vm0 = slack.vm;
        } else if bus.kind == BusKind::Slack {
            bus.kind = BusKind::Pv;
        }
    }
    let mut generators = area.network.generators.clone();
    for g in generators.iter_mut() {
        if g.bus == slack.bus {
            g.vset = slack.vm;
        }
    }
    Ok(Network::assemble(
        area.network.base_mva,
        buses,
        area.network.branches.clone(),
        generators,
        true,
    )?)
}
