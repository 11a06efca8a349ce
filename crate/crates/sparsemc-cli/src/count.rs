//! The `count` subcommand: one approximate counting run over a DIMACS
//! file.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sparsemc::counter::{
    approxmc5, compute_inithresh, compute_iterations, compute_pivot, compute_thresh,
    improved_iterations, CountEstimate, CounterParams,
};
use sparsemc::formula::{parse_dimacs, CnfXorFormula, XorEncoding};
use sparsemc::hashgen::ScheduleKind;
use sparsemc::oracle::{Backend, OracleConfig};

use crate::report::{value, RunReport};
use crate::USAGE;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleArg {
    Dense,
    Lsa,
    Solved,
}

impl From<ScheduleArg> for ScheduleKind {
    fn from(s: ScheduleArg) -> ScheduleKind {
        match s {
            ScheduleArg::Dense => ScheduleKind::Dense,
            ScheduleArg::Lsa => ScheduleKind::Lsa,
            ScheduleArg::Solved => ScheduleKind::Solved,
        }
    }
}

pub fn parse_xor_mode(s: &str) -> Result<XorEncoding, String> {
    if s == "native" {
        return Ok(XorEncoding::Native);
    }
    if s == "tseitin" {
        return Ok(XorEncoding::tseitin_default());
    }
    if let Some(width) = s.strip_prefix("tseitin:") {
        let max_width: usize =
            width.parse().map_err(|_| format!("bad tseitin width {width:?}"))?;
        if max_width < 3 {
            return Err("tseitin width must be at least 3".into());
        }
        return Ok(XorEncoding::Tseitin { max_width });
    }
    Err(format!("expected `native`, `tseitin`, or `tseitin:<width>`, got {s:?}"))
}

pub fn render_xor_mode(e: XorEncoding) -> String {
    match e {
        XorEncoding::Native => "native".into(),
        XorEncoding::Tseitin { max_width } => format!("tseitin:{max_width}"),
    }
}

#[derive(Args)]
pub struct CountArgs {
    /// DIMACS CNF input, optionally with `x` parity lines and `c ind`
    /// projection lines.
    pub input: PathBuf,
    /// Relative tolerance of the estimate.
    #[arg(long, default_value_t = 0.8)]
    pub epsilon: f64,
    /// Failure probability budget.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Dispersion ceiling the hash family is taken to satisfy.
    #[arg(long, default_value_t = 1.1)]
    pub rho: f64,
    /// Shortest prefix length covered by the dispersion guarantee.
    #[arg(long, default_value_t = 1)]
    pub qs: usize,
    /// Hash row density schedule.
    #[arg(long, value_enum, default_value_t = ScheduleArg::Dense)]
    pub schedule: ScheduleArg,
    /// Master seed; everything random derives from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// External solver command; `{input}` expands to the scratch DIMACS
    /// path (appended when absent). Omit to use the builtin solver.
    #[arg(long)]
    pub solver_cmd: Option<String>,
    /// How hash constraints reach the solver: `native` parity lines or
    /// `tseitin:<width>` clause expansion.
    #[arg(long, default_value = "native", value_parser = parse_xor_mode)]
    pub xor_mode: XorEncoding,
    /// Use the exact-binomial iteration table instead of
    /// ceil(17 log2(3/delta)).
    #[arg(long)]
    pub improved_t: bool,
    /// Emit the full run report as JSON on stdout instead of the bare
    /// estimate.
    #[arg(long)]
    pub json: bool,
}

pub fn read_formula(path: &PathBuf) -> Result<CnfXorFormula, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(USAGE);
        }
    };
    match parse_dimacs(&text) {
        Ok(f) => Ok(f),
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            Err(USAGE)
        }
    }
}

pub fn oracle_config(solver_cmd: &Option<String>, xor_mode: XorEncoding) -> OracleConfig {
    OracleConfig {
        backend: match solver_cmd {
            Some(command) => Backend::External { command: command.clone() },
            None => Backend::Builtin,
        },
        encoding: xor_mode,
        timeout: None,
    }
}

fn summarize(est: &CountEstimate) -> String {
    if est.exact_shortcut {
        format!("exact count {} from the initial enumeration", est.value)
    } else {
        let failures = est.iterations.iter().filter(|r| r.failed).count();
        format!(
            "estimate {} (2^{:.3}), median of {} iterations, {} failed",
            est.value,
            est.log2_value,
            est.iterations.len(),
            failures
        )
    }
}

pub fn run(args: CountArgs) -> anyhow::Result<u8> {
    let formula = match read_formula(&args.input) {
        Ok(f) => f,
        Err(code) => return Ok(code),
    };

    let mut params = CounterParams::new(args.epsilon, args.delta);
    params.rho = args.rho;
    params.qs = args.qs;
    params.schedule_kind = args.schedule.into();
    params.master_seed = args.seed;
    params.improved_t = args.improved_t;
    let oracle = oracle_config(&args.solver_cmd, args.xor_mode);

    let started = Instant::now();
    let estimate = approxmc5(&formula, &params, &oracle)
        .with_context(|| format!("counting {}", args.input.display()))?;
    let wall = started.elapsed().as_secs_f64();

    eprintln!(
        "{} [{} projected vars, schedule {:?}, {:.3}s]",
        summarize(&estimate),
        formula.projection().len(),
        params.schedule_kind,
        wall
    );

    if args.json {
        let thresh = compute_thresh(args.epsilon, args.rho);
        let pivot = compute_pivot(args.epsilon, args.rho);
        let budget = if args.improved_t {
            improved_iterations(args.delta)
        } else {
            compute_iterations(args.delta)
        };
        let report = RunReport {
            command: "count",
            seed: args.seed,
            parameters: json!({
                "input": args.input.display().to_string(),
                "epsilon": args.epsilon,
                "delta": args.delta,
                "rho": args.rho,
                "qs": args.qs,
                "schedule": value(&args.schedule),
                "seed": args.seed,
                "solver_cmd": args.solver_cmd,
                "xor_mode": render_xor_mode(args.xor_mode),
                "improved_t": args.improved_t,
            }),
            results: json!({
                // Decimal string: the estimate can exceed what JSON
                // numbers carry exactly.
                "estimate": estimate.value.to_string(),
                "log2_estimate": estimate.log2_value,
                "exact_shortcut": estimate.exact_shortcut,
                "thresh": thresh,
                "inithresh": compute_inithresh(thresh, args.qs),
                "pivot_raw": pivot.raw,
                "pivot": pivot.rounded,
                "iteration_budget": budget,
                "iterations": value(&estimate.iterations),
            }),
            timings: json!({ "wall_seconds": wall }),
        };
        report.print();
    } else {
        println!("{}", estimate.value);
    }
    Ok(0)
}
