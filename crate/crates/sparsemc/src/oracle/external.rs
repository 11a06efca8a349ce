//! Subprocess adapter for external SAT solvers.
//!
//! The solver is launched from a whitespace-split command template; every
//! `{input}` occurrence is replaced by the path of a scratch DIMACS file
//! (written under `SPARSEMC_TMPDIR` when set, the system temp dir
//! otherwise). Without a `{input}` placeholder the path is appended as the
//! final argument. Verdicts come from the standard competition output:
//! an `s SATISFIABLE` / `s UNSATISFIABLE` line plus `v` literal lines
//! terminated by `0`, with exit codes 10/20 as a fallback when a solver
//! prints no `s` line. All other output lines are ignored.

use std::io::{Read, Write as _};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::formula::{render_dimacs, CnfXorFormula};

use super::OracleError;

/// Environment variable overriding where scratch DIMACS files are written.
pub const SCRATCH_DIR_ENV: &str = "SPARSEMC_TMPDIR";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverVerdict {
    /// Satisfiable, with the literals the solver printed (possibly empty if
    /// it printed a bare terminated `v 0` line).
    Sat(Vec<i32>),
    Unsat,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OutputParseError {
    #[error("no verdict line in solver output")]
    NoVerdict,
    #[error("solver printed contradictory verdict lines")]
    ConflictingVerdicts,
    #[error("unrecognized verdict {0:?}")]
    UnknownVerdict(String),
    #[error("bad token {0:?} in a `v` line")]
    BadModelToken(String),
    #[error("satisfiable verdict but the model is missing its terminating 0")]
    UnterminatedModel,
}

/// Parses SAT-competition solver output.
///
/// Lenient about everything except the `s` and `v` lines: comments, timing
/// chatter, and unknown lines pass through silently. Model literals may
/// span multiple `v` lines and end at the first `0`; later `v` lines are
/// ignored once the model is terminated.
pub fn parse_solver_output(text: &str) -> Result<SolverVerdict, OutputParseError> {
    let mut sat: Option<bool> = None;
    let mut lits: Vec<i32> = Vec::new();
    let mut model_done = false;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('s') {
            if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
                continue;
            }
            let verdict = match rest.trim() {
                "SATISFIABLE" => true,
                "UNSATISFIABLE" => false,
                other => return Err(OutputParseError::UnknownVerdict(other.to_string())),
            };
            match sat {
                None => sat = Some(verdict),
                Some(prev) if prev != verdict => {
                    return Err(OutputParseError::ConflictingVerdicts)
                }
                Some(_) => {}
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('v') {
            if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
                continue;
            }
            if model_done {
                continue;
            }
            for tok in rest.split_whitespace() {
                let lit: i32 = tok
                    .parse()
                    .map_err(|_| OutputParseError::BadModelToken(tok.to_string()))?;
                if lit == 0 {
                    model_done = true;
                    break;
                }
                lits.push(lit);
            }
        }
    }
    match sat {
        None => Err(OutputParseError::NoVerdict),
        Some(false) => Ok(SolverVerdict::Unsat),
        Some(true) => {
            if !model_done {
                return Err(OutputParseError::UnterminatedModel);
            }
            Ok(SolverVerdict::Sat(lits))
        }
    }
}

fn scratch_dir() -> PathBuf {
    match std::env::var_os(SCRATCH_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => std::env::temp_dir(),
    }
}

fn build_command(template: &str, input: &str) -> Result<Command, OracleError> {
    let mut parts = template.split_whitespace();
    let Some(program) = parts.next() else {
        return Err(OracleError::EmptyCommand);
    };
    let mut cmd = Command::new(program.replace("{input}", input));
    let mut used_placeholder = program.contains("{input}");
    for part in parts {
        if part.contains("{input}") {
            used_placeholder = true;
        }
        cmd.arg(part.replace("{input}", input));
    }
    if !used_placeholder {
        cmd.arg(input);
    }
    Ok(cmd)
}

/// Drains a child stream on a helper thread so a chatty solver can never
/// fill the pipe and deadlock against the timeout poll.
fn drain<R: Read + Send + 'static>(stream: R) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = String::new();
        let mut stream = stream;
        let _ = stream.read_to_string(&mut buf);
        buf
    })
}

/// Runs one external solve on the given formula.
pub fn external_solve(
    f: &CnfXorFormula,
    command: &str,
    timeout: Option<Duration>,
) -> Result<SolverVerdict, OracleError> {
    let mut scratch = tempfile::Builder::new()
        .prefix("sparsemc-")
        .suffix(".cnf")
        .tempfile_in(scratch_dir())?;
    scratch.write_all(render_dimacs(f).as_bytes())?;
    scratch.flush()?;
    let path = scratch.path().to_string_lossy().into_owned();

    let mut cmd = build_command(command, &path)?;
    cmd.stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().map_err(|source| OracleError::Spawn {
        command: command.to_string(),
        source,
    })?;
    let stdout = drain(child.stdout.take().expect("stdout was piped"));
    let stderr = drain(child.stderr.take().expect("stderr was piped"));

    let started = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if let Some(limit) = timeout {
            if started.elapsed() > limit {
                let _ = child.kill();
                let _ = child.wait();
                return Err(OracleError::Timeout(limit));
            }
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let out = stdout.join().unwrap_or_default();
    let err = stderr.join().unwrap_or_default();

    match parse_solver_output(&out) {
        Ok(v) => Ok(v),
        Err(OutputParseError::NoVerdict) => match status.code() {
            Some(10) => Err(OutputParseError::UnterminatedModel.into()),
            Some(20) => Ok(SolverVerdict::Unsat),
            _ => Err(OracleError::SolverFailed {
                command: command.to_string(),
                code: status.code(),
                stderr: err.chars().take(400).collect(),
            }),
        },
        Err(e) => Err(e.into()),
    }
}
