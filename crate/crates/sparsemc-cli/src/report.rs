//! The JSON envelope every subcommand emits in `--json` mode.

use serde::Serialize;
use serde_json::Value;

/// One run, fully described: the resolved configuration under
/// `parameters`, the deterministic outputs under `results`, and wall-clock
/// measurements under `timings`. Re-running with the same inputs and seed
/// reproduces `results` byte for byte; `timings` is the only field allowed
/// to differ.
#[derive(Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub seed: u64,
    pub parameters: Value,
    pub results: Value,
    pub timings: Value,
}

impl RunReport {
    pub fn print(&self) {
        println!("{}", serde_json::to_string_pretty(self).expect("report serializes"));
    }
}

/// Serializes through `serde_json::Value` so report fields can be built
/// from any Serialize type.
pub fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report fragment serializes")
}
