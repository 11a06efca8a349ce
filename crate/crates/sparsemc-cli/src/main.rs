//! `sparsemc`: approximate model counting from the shell.
//!
//! Machine-readable output goes to stdout, human-readable progress to
//! stderr. Exit codes: 0 success, 1 runtime failure (solver, oracle, or a
//! failed verification sweep), 2 usage errors. The `solve` subcommand
//! follows solver conventions instead (10 satisfiable, 20 unsatisfiable).

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bench;
mod count;
mod density_table;
mod lemmas;
mod report;
mod solve;

#[derive(Parser)]
#[command(name = "sparsemc", version, about = "Approximate model counter with sparse prefix hashing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximately count the projected models of a DIMACS CNF file.
    Count(count::CountArgs),
    /// Print the density schedules for a given width as CSV.
    DensityTable(density_table::TableArgs),
    /// Run the brute-force lemma sweeps and report pass/fail per lemma.
    Verify(lemmas::VerifyArgs),
    /// Time dense versus lsa schedules over a directory of instances.
    Bench(bench::BenchArgs),
    /// Decide one DIMACS instance, printing competition-style output.
    Solve(solve::SolveArgs),
}

/// Commands signal a usage problem by returning this code after printing
/// their own message; anyhow errors map to 1.
pub const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Count(args) => count::run(args),
        Command::DensityTable(args) => density_table::run(args),
        Command::Verify(args) => lemmas::run(args),
        Command::Bench(args) => bench::run(args),
        Command::Solve(args) => solve::run(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
