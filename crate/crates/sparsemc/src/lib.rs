//! Approximate model counting for CNF and CNF-XOR formulas via random XOR
//! hashing, with support for sparse prefix-sliceable hash families.
//!
//! The crate is organized around the counting pipeline:
//!
//! - [`formula`]: CNF/CNF-XOR representation, DIMACS parsing and rendering,
//!   XOR augmentation (native or Tseitin-encoded), blocking clauses.
//! - [`hashgen`]: row-density schedules and prefix hash sampling; a sampled
//!   hash can be sliced to its first `m` rows without resampling.
//! - [`density`]: the numerical machinery that justifies sparse schedules:
//!   collision products, dispersion bounds, and schedule solvers.
//! - [`oracle`]: bounded model enumeration on top of either a builtin
//!   DPLL solver with native XOR propagation or an external subprocess
//!   solver speaking the SAT-competition output format.
//! - [`counter`]: the approximate counting loop itself (threshold and
//!   iteration-count arithmetic, galloping search over prefix lengths,
//!   median amplification).
//! - [`verify`]: brute-force cross-checks used by the test suite and the
//!   `verify` CLI subcommand: exhaustive hash moments, exact counts,
//!   set-compression operators, tail-bound checks, Monte Carlo estimates.

pub mod bits;
pub mod counter;
pub mod density;
pub mod formula;
pub mod hashgen;
pub mod oracle;
pub mod verify;
