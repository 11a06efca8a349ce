//! Brute-force ground truth for the hashing machinery.
//!
//! Everything in this module trades scale for certainty: solution sets are
//! stored point by point, hash moments are obtained by enumerating every
//! matrix/offset draw with exact rational weights, and model counts come
//! from walking the full assignment space. The closed-form code in
//! [`crate::density`] and the samplers in [`crate::hashgen`] are tested
//! against these oracles, never the other way around.
//!
//! All enumeration entry points carry hard guards ([`MAX_SET_DIM`],
//! [`MAX_ENUM_BITS`], [`MAX_PAIRSUM_DIM`]) so a typo in a test cannot turn
//! into an accidental 2^60 loop.

mod count;
mod moments;
mod sets;

use thiserror::Error;

pub use count::{exact_count, observed_epsilon};
pub use moments::{
    check_probability_bounds, collision_q_exact, collision_r_exact, exhaustive_cell_distribution,
    exhaustive_hash_moments, monte_carlo_dispersion, rational_from_f64, variance_formula,
    CellDistribution, HashMoments, MonteCarloDispersion, ProbabilityBoundsReport,
};
pub use sets::{
    canonicalize, cs, cs_profile, down_operator, is_down_set, is_left_compressed, left_compress,
    max_weighted_pairsum, weighted_pairsum, ExplicitSet, PairsumReport,
};

/// Exact rational scalar used throughout the verification oracles.
pub type Rational = num_rational::Ratio<num_bigint::BigInt>;

/// Largest dimension accepted for explicit point sets and exact counts.
pub const MAX_SET_DIM: usize = 26;

/// Largest number of random bits the exhaustive hash enumeration will walk.
pub const MAX_ENUM_BITS: usize = 24;

/// Largest dimension for the exhaustive weighted-pairsum search.
pub const MAX_PAIRSUM_DIM: usize = 4;

/// Smallest trial count accepted by the Monte Carlo dispersion estimator.
pub const MIN_MC_TRIALS: usize = 1000;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("dimension {n} exceeds the brute-force limit of {max}")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("enumeration needs {bits} random bits, above the limit of {max}")]
    EnumerationTooLarge { bits: usize, max: usize },
    #[error("point string {0:?} is not a fixed-width row of '0'/'1' characters")]
    BadPointString(String),
    #[error("point mask {mask:#x} has bits outside dimension {n}")]
    PointOutOfRange { mask: u32, n: usize },
    #[error("operation requires a non-empty set")]
    EmptySet,
    #[error("subset size {size} is outside 1..={max}")]
    SizeOutOfRange { size: usize, max: usize },
    #[error("schedule supplies {got} densities but the set dimension is {need}")]
    ScheduleLength { need: usize, got: usize },
    #[error("prefix length {m} exceeds the schedule length {n}")]
    PrefixTooLong { m: usize, n: usize },
    #[error("density at row {row} is outside (0, 1/2]")]
    BadDensity { row: usize },
    #[error("beta must lie strictly between 0 and 1")]
    BadBeta,
    #[error("{got} trials requested, need at least {min}")]
    TooFewTrials { got: usize, min: usize },
    #[error("observed epsilon needs strictly positive inputs")]
    NonPositiveCount,
}
