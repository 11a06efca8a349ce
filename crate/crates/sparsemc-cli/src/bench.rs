//! The `bench` subcommand: dense-versus-lsa timing over a directory of
//! DIMACS instances. Report-only; speedups depend on the solver and the
//! instances, so nothing here passes or fails.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use serde_json::json;

use sparsemc::counter::{approxmc5, CounterParams};
use sparsemc::formula::XorEncoding;
use sparsemc::hashgen::{derive_iteration_seed, ScheduleKind};

use crate::count::{oracle_config, parse_xor_mode, read_formula, render_xor_mode};
use crate::report::RunReport;
use crate::USAGE;

#[derive(Args)]
pub struct BenchArgs {
    /// Directory scanned (non-recursively) for *.cnf instances.
    pub dir: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 1)]
    pub qs: usize,
    /// Master seed; each instance gets a seed derived from it and the
    /// instance's position in sorted order.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// External solver command template, as in `count`.
    #[arg(long)]
    pub solver_cmd: Option<String>,
    #[arg(long, default_value = "native", value_parser = parse_xor_mode)]
    pub xor_mode: XorEncoding,
    #[arg(long)]
    pub improved_t: bool,
    /// Wrap the results in a JSON run report instead of printing CSV.
    #[arg(long)]
    pub json: bool,
}

struct Row {
    instance: String,
    dense_seconds: f64,
    lsa_seconds: f64,
    dense_estimate: u128,
    lsa_estimate: u128,
}

impl Row {
    fn speedup(&self) -> f64 {
        self.dense_seconds / self.lsa_seconds
    }
}

const HEADER: &str = "instance,dense_seconds,lsa_seconds,speedup,dense_estimate,lsa_estimate";

pub fn run(args: BenchArgs) -> anyhow::Result<u8> {
    let entries = match std::fs::read_dir(&args.dir) {
        Ok(iter) => iter,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.dir.display());
            return Ok(USAGE);
        }
    };
    let mut instances: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "cnf"))
        .collect();
    instances.sort();

    let oracle = oracle_config(&args.solver_cmd, args.xor_mode);
    let mut rows = Vec::with_capacity(instances.len());
    for (index, path) in instances.iter().enumerate() {
        let formula = match read_formula(path) {
            Ok(f) => f,
            Err(code) => return Ok(code),
        };
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let seed = derive_iteration_seed(args.seed, index as u64);

        let timed = |kind: ScheduleKind| -> anyhow::Result<(f64, u128)> {
            let mut params = CounterParams::new(args.epsilon, args.delta);
            params.rho = args.rho;
            params.qs = args.qs;
            params.schedule_kind = kind;
            params.master_seed = seed;
            params.improved_t = args.improved_t;
            let started = Instant::now();
            let est = approxmc5(&formula, &params, &oracle)
                .with_context(|| format!("counting {name} with {kind:?} schedule"))?;
            Ok((started.elapsed().as_secs_f64(), est.value))
        };

        let (dense_seconds, dense_estimate) = timed(ScheduleKind::Dense)?;
        let (lsa_seconds, lsa_estimate) = timed(ScheduleKind::Lsa)?;
        eprintln!(
            "{name}: dense {dense_seconds:.3}s, lsa {lsa_seconds:.3}s ({} of {})",
            index + 1,
            instances.len()
        );
        rows.push(Row { instance: name, dense_seconds, lsa_seconds, dense_estimate, lsa_estimate });
    }

    let mut csv = String::from(HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.3},{},{}\n",
            r.instance,
            r.dense_seconds,
            r.lsa_seconds,
            r.speedup(),
            r.dense_estimate,
            r.lsa_estimate
        ));
    }

    if args.json {
        RunReport {
            command: "bench",
            seed: args.seed,
            parameters: json!({
                "dir": args.dir.display().to_string(),
                "epsilon": args.epsilon,
                "delta": args.delta,
                "rho": args.rho,
                "qs": args.qs,
                "seed": args.seed,
                "solver_cmd": args.solver_cmd,
                "xor_mode": render_xor_mode(args.xor_mode),
                "improved_t": args.improved_t,
            }),
            // Estimates are reproducible; every timing figure stays out of
            // the results payload.
            results: json!({
                "instances": rows
                    .iter()
                    .map(|r| json!({
                        "instance": r.instance,
                        "dense_estimate": r.dense_estimate.to_string(),
                        "lsa_estimate": r.lsa_estimate.to_string(),
                    }))
                    .collect::<Vec<_>>(),
            }),
            timings: json!({
                "per_instance": rows
                    .iter()
                    .map(|r| json!({
                        "instance": r.instance,
                        "dense_seconds": r.dense_seconds,
                        "lsa_seconds": r.lsa_seconds,
                        "speedup": r.speedup(),
                    }))
                    .collect::<Vec<_>>(),
            }),
        }
        .print();
    } else {
        print!("{csv}");
    }
    Ok(0)
}
