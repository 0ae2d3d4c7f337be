//! Native structured case format: a JSON document with `base_mva`, `buses`,
//! `branches` and `generators`, field names matching the domain types.
//! Angles are in degrees and powers in MW/MVAr at the file boundary.

use serde::{Deserialize, Serialize};

use super::{aggregate_generators, Branch, Bus, BusKind, Generator, ModelError, Network};

#[derive(Serialize, Deserialize)]
struct NativeCase {
    base_mva: f64,
    buses: Vec<NativeBus>,
    branches: Vec<NativeBranch>,
    generators: Vec<NativeGenerator>,
}

#[derive(Serialize, Deserialize)]
struct NativeBus {
    id: i64,
    kind: BusKind,
    pd: f64,
    qd: f64,
    gs: f64,
    bs: f64,
    vm0: f64,
    va0: f64,
    base_kv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area_hint: Option<i64>,
}

#[derive(Serialize, Deserialize)]
struct NativeBranch {
    from: i64,
    to: i64,
    r: f64,
    x: f64,
    b_charging: f64,
    tap: f64,
    shift: f64,
    status: bool,
}

#[derive(Serialize, Deserialize)]
struct NativeGenerator {
    bus: i64,
    pg: f64,
    qg: f64,
    vset: f64,
    pmax: f64,
}

pub fn parse_native(text: &str) -> Result<Network, ModelError> {
    let case: NativeCase = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        line: e.line(),
        message: e.to_string(),
    })?;
    let base = case.base_mva;
    let buses = case
        .buses
        .into_iter()
        .map(|b| Bus {
            id: b.id,
            kind: b.kind,
            pd: b.pd / base,
            qd: b.qd / base,
            gs: b.gs / base,
            bs: b.bs / base,
            vm0: b.vm0,
            va0: b.va0.to_radians(),
            base_kv: b.base_kv,
            area_hint: b.area_hint,
        })
        .collect();
    let branches = case
        .branches
        .into_iter()
        .map(|b| Branch {
            from: b.from,
            to: b.to,
            r: b.r,
            x: b.x,
            b_charging: b.b_charging,
            tap: b.tap,
            shift: b.shift.to_radians(),
            status: b.status,
        })
        .collect();
    let generators = case
        .generators
        .into_iter()
        .map(|g| Generator {
            bus: g.bus,
            pg: g.pg / base,
            qg: g.qg / base,
            vset: g.vset,
            pmax: g.pmax / base,
        })
        .collect();
    Network::assemble(base, buses, branches, aggregate_generators(generators), true)
}

/// Serializes a network to the native format (degrees and MW/MVAr).
pub fn to_native_text(net: &Network) -> String {
    let base = net.base_mva;
    let case = NativeCase {
        base_mva: base,
        buses: net
            .buses
            .iter()
            .map(|b| NativeBus {
                id: b.id,
                kind: b.kind,
                pd: b.pd * base,
                qd: b.qd * base,
                gs: b.gs * base,
                bs: b.bs * base,
                vm0: b.vm0,
                va0: b.va0.to_degrees(),
                base_kv: b.base_kv,
                area_hint: b.area_hint,
            })
            .collect(),
        branches: net
            .branches
            .iter()
            .map(|b| NativeBranch {
                from: b.from,
                to: b.to,
                r: b.r,
                x: b.x,
                b_charging: b.b_charging,
                tap: b.tap,
                shift: b.shift.to_degrees(),
                status: b.status,
            })
            .collect(),
        generators: net
            .generators
            .iter()
            .map(|g| NativeGenerator {
                bus: g.bus,
                pg: g.pg * base,
                qg: g.qg * base,
                vset: g.vset,
                pmax: g.pmax * base,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&case).expect("native case serialization")
}
