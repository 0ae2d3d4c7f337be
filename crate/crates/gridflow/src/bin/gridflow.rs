use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gridflow::distributed::{
    benchmark, compare_solutions, perturb_state, run_distributed,
};
use gridflow::fdpf::{fdpf_solve, SolverOptions, StartMode};
use gridflow::model::{parse_case, Network};
use gridflow::partition::{
    boundary_injections, parse_area_map, select_area_slacks, split_areas,
};
use gridflow::report::{
    benchmark_to_text, compare_reports, diff_to_text, DistributedReport, SolutionReport,
};

#[derive(Parser)]
#[command(name = "gridflow", version, about = "Fast decoupled power flow engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Flat,
    Nonflat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct SolveFlags {
    /// Convergence threshold on raw P/Q mismatches, per-unit.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    /// Initial state: voltages from the case file or a flat 1.0 ∠ 0 profile.
    #[arg(long, value_enum, default_value_t = StartArg::Nonflat)]
    start: StartArg,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Omit wall-clock timing from the output for reproducible files.
    #[arg(long)]
    strip_timing: bool,
}

impl SolveFlags {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tol,
            max_iterations: self.max_iter,
            start: match self.start {
                StartArg::Flat => StartMode::Flat,
                StartArg::Nonflat => StartMode::NonFlat,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a case monolithically.
    Solve {
        case: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
        /// Re-verify the solution against independently recomputed mismatches.
        #[arg(long)]
        check: bool,
    },
    /// Solve a case area-by-area from a reference monolithic solution.
    Distsolve {
        case: PathBuf,
        /// Area map file: one `<bus_id> <area_id>` per line.
        #[arg(long)]
        areas: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
        /// Gaussian noise (standard deviation, per-unit/radians) added to the
        /// reference state before computing boundary injections.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also print the deviation from the monolithic solution.
        #[arg(long)]
        check: bool,
    },
    /// Audit a partition: areas, cut branches, boundary injections.
    Partition {
        case: PathBuf,
        #[arg(long)]
        areas: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Compare two solution reports (JSON files produced with --format json).
    Compare {
        report_a: PathBuf,
        report_b: PathBuf,
        /// Fail (exit 2) if deviations exceed 0.01 deg / 0.001 pu.
        #[arg(long)]
        strict: bool,
    },
    /// Time monolithic vs distributed solves over a sweep of thread counts.
    Bench {
        case: PathBuf,
        #[arg(long)]
        areas: PathBuf,
        /// Comma-separated worker counts, e.g. 1,2,4,8.
        #[arg(long, default_value = "1,2,4", value_delimiter = ',')]
        threads: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 30)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = StartArg::Nonflat)]
        start: StartArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn read_case(path: &PathBuf) -> Result<Network, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_case(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_area_map(path: &PathBuf) -> Result<BTreeMap<i64, i64>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_area_map(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn install_pool(threads: Option<usize>) -> Result<(), String> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    Ok(())
}

fn run() -> Result<ExitCode, String> {
    match Cli::parse().command {
        Command::Solve { case, flags, check } => {
            install_pool(flags.threads)?;
            let net = read_case(&case)?;
            let sol = fdpf_solve(&net, &flags.options(), None).map_err(|e| e.to_string())?;
            let mut report = SolutionReport::new(&net, &sol);
            if flags.strip_timing {
                report = report.without_timing();
            }
            match flags.format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!("{}", report.to_json()),
            }
            if check {
                let ybus_rows = gridflow::admittance::build_ybus(&net)
                    .map_err(|e| e.to_string())?
                    .transpose();
                let mis = gridflow::fdpf::compute_mismatch(&net, &ybus_rows, &sol.state, None);
                eprintln!(
                    "check: recomputed max|dP| {:.3e}  max|dQ| {:.3e} pu",
                    mis.max_p, mis.max_q
                );
                if sol.converged && (mis.max_p >= flags.tol || mis.max_q >= flags.tol) {
                    return Err("check failed: recomputed mismatch exceeds tolerance".into());
                }
            }
            Ok(if sol.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Distsolve {
            case,
            areas,
            flags,
            noise,
            seed,
            check,
        } => {
            install_pool(flags.threads)?;
            let net = read_case(&case)?;
            let map = read_area_map(&areas)?;
            let opts = flags.options();
            let mono = fdpf_solve(&net, &opts, None).map_err(|e| e.to_string())?;
            if !mono.converged {
                return Err("reference monolithic solve did not converge".into());
            }
            let reference = if noise > 0.0 {
                perturb_state(&mono.state, noise, seed)
            } else {
                mono.state.clone()
            };
            let dist =
                run_distributed(&net, &map, &reference, &opts).map_err(|e| e.to_string())?;
            let mut report = DistributedReport::new(&net, &dist);
            if flags.strip_timing {
                report = report.without_timing();
            }
            match flags.format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!("{}", report.to_json()),
            }
            if check {
                let diff =
                    compare_solutions(&dist.merged, &mono).map_err(|e| e.to_string())?;
                let ids: Vec<i64> = net.buses.iter().map(|b| b.id).collect();
                eprint!("{}", diff_to_text(&diff, Some(&ids)));
            }
            Ok(if dist.merged.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Partition { case, areas, flags } => {
            install_pool(flags.threads)?;
            let net = read_case(&case)?;
            let map = read_area_map(&areas)?;
            let part = split_areas(&net, &map).map_err(|e| e.to_string())?;
            let opts = flags.options();
            let reference = fdpf_solve(&net, &opts, None).map_err(|e| e.to_string())?;
            if !reference.converged {
                return Err("reference solve did not converge".into());
            }
            let inj =
                boundary_injections(&net, &part, &reference.state).map_err(|e| e.to_string())?;
            let slacks =
                select_area_slacks(&part, &net, &reference.state).map_err(|e| e.to_string())?;
            println!("areas: {}", part.areas.len());
            for (area, slack) in part.areas.iter().zip(&slacks) {
                println!(
                    "  area {:>4}: {:>5} buses, {:>5} branches, slack bus {} (pinned {:.4} deg)",
                    area.id,
                    area.network.n_bus(),
                    area.network.branches.len(),
                    slack.bus,
                    slack.angle.to_degrees()
                );
            }
            println!("cut branches: {}", part.inter_area_branches.len());
            let s = net.base_mva;
            for c in &inj.provenance {
                println!(
                    "  branch {}-{}: {:>9.2} MW {:>9.2} MVAr -> bus {}",
                    c.from,
                    c.to,
                    c.p * s,
                    c.q * s,
                    c.bus
                );
            }
            let boundary = inj
                .p_extra
                .iter()
                .zip(&inj.q_extra)
                .filter(|(p, q)| **p != 0.0 || **q != 0.0)
                .count();
            println!(
                "boundary buses: {} of {} ({:.4})",
                boundary,
                net.n_bus(),
                boundary as f64 / net.n_bus() as f64
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            report_a,
            report_b,
            strict,
        } => {
            let load = |p: &PathBuf| -> Result<SolutionReport, String> {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                SolutionReport::from_json(&text)
                    .or_else(|_| DistributedReport::from_json(&text).map(|d| d.merged))
                    .map_err(|e| format!("{}: {e}", p.display()))
            };
            let a = load(&report_a)?;
            let b = load(&report_b)?;
            let diff = compare_reports(&a, &b).map_err(|e| e.to_string())?;
            let ids: Vec<i64> = a.buses.iter().map(|r| r.id).collect();
            print!("{}", diff_to_text(&diff, Some(&ids)));
            if strict && (diff.max_angle_diff_deg > 0.01 || diff.max_vm_diff_pu > 0.001) {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            case,
            areas,
            threads,
            runs,
            tol,
            max_iter,
            start,
            format,
        } => {
            let net = read_case(&case)?;
            let map = read_area_map(&areas)?;
            let opts = SolverOptions {
                tolerance: tol,
                max_iterations: max_iter,
                start: match start {
                    StartArg::Flat => StartMode::Flat,
                    StartArg::Nonflat => StartMode::NonFlat,
                },
            };
            let mono = fdpf_solve(&net, &opts, None).map_err(|e| e.to_string())?;
            if !mono.converged {
                return Err("reference solve did not converge".into());
            }
            let table = benchmark(&net, &map, &mono.state, &opts, &threads, runs)
                .map_err(|e| e.to_string())?;
            match format {
                Format::Text => print!("{}", benchmark_to_text(&table)),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&table).expect("table serialization")
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
