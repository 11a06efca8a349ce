//! The `solve` subcommand: a single satisfiability decision with
//! competition-style output (`s` verdict line, `v` model lines, exit 10 or
//! 20). This makes the binary usable as its own external solver, which the
//! test suite relies on for hermetic `--solver-cmd` coverage.

use std::path::PathBuf;

use clap::Args;

use sparsemc::oracle::{solve, OracleConfig, SolveOutcome};

use crate::count::read_formula;

#[derive(Args)]
pub struct SolveArgs {
    /// DIMACS CNF input, `x` parity lines supported.
    pub input: PathBuf,
}

pub fn run(args: SolveArgs) -> anyhow::Result<u8> {
    let formula = match read_formula(&args.input) {
        Ok(f) => f,
        Err(code) => return Ok(code),
    };

    match solve(&formula, &OracleConfig::default())? {
        SolveOutcome::Unsat => {
            println!("s UNSATISFIABLE");
            Ok(20)
        }
        SolveOutcome::Sat(model) => {
            println!("s SATISFIABLE");
            let lits: Vec<String> = (1..=formula.num_vars())
                .map(|v| {
                    let value = model.get(v).unwrap_or(false);
                    if value { format!("{v}") } else { format!("-{v}") }
                })
                .collect();
            for chunk in lits.chunks(16) {
                println!("v {}", chunk.join(" "));
            }
            println!("v 0");
            Ok(10)
        }
    }
}
