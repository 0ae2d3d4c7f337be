//! Reader for the MatPower-style case dialect: `mpc.baseMVA`, `mpc.bus`,
//! `mpc.gen` and `mpc.branch` matrices with the standard column layout.

use super::{aggregate_generators, Branch, Bus, BusKind, Generator, ModelError, Network};

pub fn parse_matpower(text: &str) -> Result<Network, ModelError> {
    let mut base_mva = None;
    let mut bus_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut gen_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut branch_rows: Vec<(usize, Vec<f64>)> = Vec::new();

    let mut section: Option<&str> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let code = raw.split('%').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        if let Some(rest) = code.strip_prefix("mpc.baseMVA") {
            let value = rest
                .trim_start_matches(|c: char| c.is_whitespace() || c == '=')
                .trim_end_matches(';')
                .trim();
            base_mva = Some(value.parse::<f64>().map_err(|_| ModelError::Syntax {
                line,
                message: format!("invalid baseMVA value '{value}'"),
            })?);
            continue;
        }
        if code.starts_with("mpc.bus") && code.contains('[') {
            section = Some("bus");
            continue;
        }
        if code.starts_with("mpc.gen") && !code.starts_with("mpc.gencost") && code.contains('[') {
            section = Some("gen");
            continue;
        }
        if code.starts_with("mpc.branch") && code.contains('[') {
            section = Some("branch");
            continue;
        }
        if code.starts_with("mpc.") || code.starts_with("function") {
            section = None; // unrecognized tables (gencost etc.) are skipped
            continue;
        }
        if code.starts_with("];") || code == "]" {
            section = None;
            continue;
        }
        let Some(sec) = section else { continue };
        let row: Result<Vec<f64>, _> = code
            .trim_end_matches(';')
            .split_whitespace()
            .map(|tok| tok.parse::<f64>())
            .collect();
        let row = row.map_err(|_| ModelError::Syntax {
            line,
            message: format!("expected numeric row in mpc.{sec} table"),
        })?;
        match sec {
            "bus" => bus_rows.push((line, row)),
            "gen" => gen_rows.push((line, row)),
            "branch" => branch_rows.push((line, row)),
            _ => unreachable!(),
        }
    }

    let base = base_mva.ok_or(ModelError::Syntax {
        line: 0,
        message: "missing mpc.baseMVA".into(),
    })?;

    let need = |line: usize, row: &[f64], cols: usize, what: &str| {
        if row.len() < cols {
            Err(ModelError::Syntax {
                line,
                message: format!("{what} row needs at least {cols} columns, got {}", row.len()),
            })
        } else {
            Ok(())
        }
    };

    let mut buses = Vec::with_capacity(bus_rows.len());
    for (line, row) in &bus_rows {
        need(*line, row, 10, "bus")?;
        let kind = match row[1] as i64 {
            1 => BusKind::Pq,
            2 => BusKind::Pv,
            3 => BusKind::Slack,
            other => {
                return Err(ModelError::Syntax {
                    line: *line,
                    message: format!("unknown bus type {other}"),
                })
            }
        };
        buses.push(Bus {
            id: row[0] as i64,
            kind,
            pd: row[2] / base,
            qd: row[3] / base,
            gs: row[4] / base,
            bs: row[5] / base,
            vm0: row[7],
            va0: row[8].to_radians(),
            base_kv: row[9],
            area_hint: if row[6] != 0.0 { Some(row[6] as i64) } else { None },
        });
    }

    let mut generators = Vec::with_capacity(gen_rows.len());
    for (line, row) in &gen_rows {
        need(*line, row, 8, "gen")?;
        if row[7] <= 0.0 {
            continue; // out-of-service unit
        }
        generators.push(Generator {
            bus: row[0] as i64,
            pg: row[1] / base,
            qg: row[2] / base,
            vset: row[5],
            pmax: row.get(8).copied().unwrap_or(0.0) / base,
        });
    }

    let mut branches = Vec::with_capacity(branch_rows.len());
    for (line, row) in &branch_rows {
        need(*line, row, 11, "branch")?;
        let tap = if row[8] == 0.0 { 1.0 } else { row[8] };
        branches.push(Branch {
            from: row[0] as i64,
            to: row[1] as i64,
            r: row[2],
            x: row[3],
            b_charging: row[4],
            tap,
            shift: row[9].to_radians(),
            status: row[10] != 0.0,
        });
    }

    Network::assemble(base, buses, branches, aggregate_generators(generators), true)
}
