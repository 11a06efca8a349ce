//! Satisfiability oracles and bounded model enumeration.
//!
//! The counting loop needs one primitive: "does this formula have at least
//! `cap` projected models, and if not, how many?". [`bounded_count`] answers
//! it by iterated solving with blocking clauses over the projection, on top
//! of either the builtin DPLL solver (native XOR support, fully
//! deterministic) or an external subprocess solver.

mod dpll;
mod external;

pub use dpll::{DpllSolver, DpllStats};
pub use external::{external_solve, parse_solver_output, OutputParseError, SolverVerdict};
pub use external::SCRATCH_DIR_ENV;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::formula::{
    blocking_clause, tseitinize_all, Assignment, CnfXorFormula, FormulaError, XorEncoding,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("failed to launch solver {command:?}: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("i/o error running the solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exceeded its time limit of {0:?}")]
    Timeout(Duration),
    #[error("unusable solver output: {0}")]
    Output(#[from] OutputParseError),
    #[error("solver {command:?} exited with code {code:?} and no verdict; stderr: {stderr:?}")]
    SolverFailed {
        command: String,
        code: Option<i32>,
        stderr: String,
    },
    #[error("solver returned an assignment that does not satisfy the formula")]
    BogusModel,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Which engine answers satisfiability queries.
#[derive(Clone, Debug)]
pub enum Backend {
    Builtin,
    /// Whitespace-split command template; `{input}` marks the DIMACS path.
    External { command: String },
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub backend: Backend,
    /// How XOR constraints reach the engine. The builtin solver handles
    /// both modes; an external solver needs [`XorEncoding::Tseitin`] unless
    /// it understands `x` lines natively.
    pub encoding: XorEncoding,
    /// Per-call limit, enforced for external solves only; the builtin
    /// solver is left to run (it has no kill point and desk-scale inputs).
    pub timeout: Option<Duration>,
}

impl Default for OracleConfig {
    fn default() -> OracleConfig {
        OracleConfig {
            backend: Backend::Builtin,
            encoding: XorEncoding::Native,
            timeout: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A total assignment over the formula's variables.
    Sat(Assignment),
    Unsat,
}

/// Applies the configured XOR encoding. Native mode is free; Tseitin mode
/// rewrites every stored XOR into clauses over fresh variables.
fn encode(f: &CnfXorFormula, encoding: XorEncoding) -> Result<CnfXorFormula, FormulaError> {
    match encoding {
        XorEncoding::Native => Ok(f.clone()),
        XorEncoding::Tseitin { max_width } => tseitinize_all(f, max_width),
    }
}

fn lits_to_assignment(lits: &[i32], num_vars: u32) -> Assignment {
    let mut a = Assignment::from_pairs((1..=num_vars).map(|v| (v, false)));
    for &l in lits {
        let var = l.unsigned_abs();
        if (1..=num_vars).contains(&var) {
            a.set(var, l > 0);
        }
    }
    a
}

/// One satisfiability query against the configured engine.
pub fn solve(f: &CnfXorFormula, cfg: &OracleConfig) -> Result<SolveOutcome, OracleError> {
    let work = encode(f, cfg.encoding)?;
    match &cfg.backend {
        Backend::Builtin => {
            let mut solver = DpllSolver::from_formula(&work);
            Ok(match solver.solve() {
                Some(a) => SolveOutcome::Sat(a),
                None => SolveOutcome::Unsat,
            })
        }
        Backend::External { command } => {
            match external_solve(&work, command, cfg.timeout)? {
                SolverVerdict::Unsat => Ok(SolveOutcome::Unsat),
                SolverVerdict::Sat(lits) => {
                    let a = lits_to_assignment(&lits, work.num_vars());
                    if !work.is_model(&a) {
                        return Err(OracleError::BogusModel);
                    }
                    Ok(SolveOutcome::Sat(a))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoundedCountResult {
    /// Projected models found, at most the cap.
    pub count: u64,
    /// True iff enumeration stopped at the cap; there may be more models.
    pub saturated: bool,
    pub solver_calls: u64,
    pub wall: Duration,
}

/// Counts projected models up to `cap`: enumerate-and-block until either
/// `cap` models are found (`saturated`) or the formula is exhausted. Uses
/// at most `cap + 1` solver calls. Blocking clauses live only for the
/// duration of the call; the input formula is untouched.
pub fn bounded_count(
    f: &CnfXorFormula,
    cap: u64,
    cfg: &OracleConfig,
) -> Result<BoundedCountResult, OracleError> {
    let started = Instant::now();
    let mut count = 0u64;
    let mut calls = 0u64;
    if cap == 0 {
        return Ok(BoundedCountResult {
            count: 0,
            saturated: true,
            solver_calls: 0,
            wall: started.elapsed(),
        });
    }
    let mut work = encode(f, cfg.encoding)?;
    let projection: Vec<u32> = work.projection().to_vec();

    let saturated = match &cfg.backend {
        Backend::Builtin => {
            let mut solver = DpllSolver::from_formula(&work);
            loop {
                calls += 1;
                match solver.solve() {
                    None => break false,
                    Some(model) => {
                        count += 1;
                        if count == cap {
                            break true;
                        }
                        solver.add_clause(&blocking_clause(&model, &projection));
                    }
                }
            }
        }
        Backend::External { command } => loop {
            calls += 1;
            match external_solve(&work, command, cfg.timeout)? {
                SolverVerdict::Unsat => break false,
                SolverVerdict::Sat(lits) => {
                    let a = lits_to_assignment(&lits, work.num_vars());
                    if !work.is_model(&a) {
                        return Err(OracleError::BogusModel);
                    }
                    count += 1;
                    if count == cap {
                        break true;
                    }
                    work.cnf.add_clause(blocking_clause(&a, &projection))?;
                }
            }
        },
    };

    Ok(BoundedCountResult {
        count,
        saturated,
        solver_calls: calls,
        wall: started.elapsed(),
    })
}
