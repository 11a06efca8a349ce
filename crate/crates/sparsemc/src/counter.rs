//! The approximate counting loop: analysis constants, the prefix-length
//! search, per-iteration cell estimates, and the median aggregator.
//!
//! One run hashes the projected solution space with a sampled prefix
//! family, finds the shortest prefix whose cell is small, and scales the
//! cell count back up by the number of cells. Repeating with independent
//! hashes and taking the median turns the per-iteration constant failure
//! probability into the requested confidence.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::density::{
    lsa_schedule, solve_schedule, CsBoundKind, DensityError, DispersionBoundConfig,
};
use crate::formula::{augment_with_xors, CnfXorFormula, FormulaError, XorEncoding};
use crate::hashgen::{
    derive_iteration_seed, sample_prefix_hash, slice_to_xors, DensitySchedule, PrefixHash,
    ScheduleKind,
};
use crate::oracle::{bounded_count, OracleConfig, OracleError};

#[derive(Debug, Error)]
pub enum CounterError {
    #[error("epsilon must be a finite positive number, got {0}")]
    BadEpsilon(f64),
    #[error("delta must lie in (0, 1], got {0}")]
    BadDelta(f64),
    #[error("rho must be finite and exceed 1, got {0}")]
    BadRho(f64),
    #[error("qs must be at least 1 and keep thresh * 2^(qs+3) within u64, got {0}")]
    BadQs(usize),
    #[error("the theoretical schedule is diagnostic-only; count with dense, lsa, or solved")]
    UnsupportedSchedule,
    #[error("projection spans {n} variables, beyond the {max} the estimate arithmetic supports")]
    ProjectionTooWide { n: usize, max: usize },
    #[error("prefix search returned {m} rows but the cell verdicts there are not a crossing")]
    NotACrossing { m: usize },
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("initial bounded count failed")]
    Oracle {
        #[source]
        source: OracleError,
    },
    #[error("counting iteration {index} failed")]
    IterationOracle {
        index: u64,
        #[source]
        source: OracleError,
    },
}

impl CounterError {
    fn with_iteration(self, index: u64) -> CounterError {
        match self {
            CounterError::Oracle { source } => CounterError::IterationOracle { index, source },
            other => other,
        }
    }
}

/// Cell-size cutoff before rounding: 1 + 9.84 rho (1 + eps/(1+eps))(1 + 1/eps)^2.
pub fn compute_thresh_raw(epsilon: f64, rho: f64) -> f64 {
    1.0 + 9.84 * rho * (1.0 + epsilon / (1.0 + epsilon)) * (1.0 + 1.0 / epsilon).powi(2)
}

/// Cell-size cutoff used by the search, ceiled since it gates an integer
/// count.
pub fn compute_thresh(epsilon: f64, rho: f64) -> u64 {
    compute_thresh_raw(epsilon, rho).ceil() as u64
}

/// Target cell size 78.72 rho (1 + 1/eps)^2, raw and rounded up to a power
/// of two. The rounded value parameterizes the hash family (its k), the raw
/// value stays visible for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pivot {
    pub raw: f64,
    pub rounded: u64,
}

pub fn compute_pivot(epsilon: f64, rho: f64) -> Pivot {
    let raw = 78.72 * rho * (1.0 + 1.0 / epsilon).powi(2);
    Pivot { raw, rounded: (raw.ceil() as u64).next_power_of_two() }
}

/// Exact-count gate thresh * 2^(qs+3); `None` when it does not fit in u64.
pub fn compute_inithresh(thresh: u64, qs: usize) -> Option<u64> {
    u32::try_from(qs + 3).ok().and_then(|shift| thresh.checked_shl(shift)).filter(|v| {
        // checked_shl only rejects shift >= 64; verify no bits fell off.
        v >> (qs + 3) == thresh
    })
}

/// Iteration count ceil(17 log2(3/delta)).
pub fn compute_iterations(delta: f64) -> u64 {
    (17.0 * (3.0 / delta).log2()).ceil() as u64
}

/// Smallest odd iteration count whose majority vote meets the confidence
/// target, assuming each iteration independently fails with probability at
/// most 9/25: the least odd t with Pr[Binomial(t, 9/25) >= ceil(t/2)] <=
/// delta, evaluated in exact arithmetic.
pub fn improved_iterations(delta: f64) -> u64 {
    let target = Ratio::from_float(delta).expect("delta validated finite");
    let p_num = BigInt::from(9);
    let q_num = BigInt::from(16);
    let denom_base = BigInt::from(25);
    let mut t: u64 = 1;
    loop {
        // Tail numerator: sum_{k >= ceil(t/2)} C(t, k) 9^k 16^(t-k).
        let mut tail = BigInt::ZERO;
        let mut binom = BigInt::one();
        // Walk k downward from t so the binomial update stays integral.
        let mut p_pow = p_num.pow(t as u32);
        let mut q_pow = BigInt::one();
        for k in (0..=t).rev() {
            if k >= t.div_ceil(2) {
                tail += &binom * &p_pow * &q_pow;
            } else {
                break;
            }
            if k > 0 {
                binom = binom * k / (t - k + 1);
                p_pow /= &p_num;
                q_pow *= &q_num;
            }
        }
        if Ratio::new(tail, denom_base.pow(t as u32)) <= target {
            return t;
        }
        t += 2;
    }
}

/// Diagnostic prefix length floor(log2 count - log2(4.92 rho (1+1/eps)^2)):
/// where the search is expected to land when the estimate is accurate.
pub fn compute_mstar(log2_count: f64, epsilon: f64, rho: f64) -> i64 {
    (log2_count - (4.92 * rho * (1.0 + 1.0 / epsilon).powi(2)).log2()).floor() as i64
}

/// Lower median; `None` on an empty slice.
pub fn median(values: &[u128]) -> Option<u128> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Some(sorted[(sorted.len() - 1) / 2])
}

/// Knobs for one counting run.
#[derive(Debug, Clone)]
pub struct CounterParams {
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    pub qs: usize,
    pub schedule_kind: ScheduleKind,
    pub master_seed: u64,
    /// Replaces the ceil(17 log2(3/delta)) iteration count with the smaller
    /// exact-binomial table from [`improved_iterations`].
    pub improved_t: bool,
}

impl CounterParams {
    /// Defaults: rho 1.1, qs 1, dense schedule, seed 1, classic iteration
    /// count.
    pub fn new(epsilon: f64, delta: f64) -> CounterParams {
        CounterParams {
            epsilon,
            delta,
            rho: 1.1,
            qs: 1,
            schedule_kind: ScheduleKind::Dense,
            master_seed: 1,
            improved_t: false,
        }
    }

    pub fn validate(&self) -> Result<(), CounterError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(CounterError::BadEpsilon(self.epsilon));
        }
        if !(self.delta.is_finite() && self.delta > 0.0 && self.delta <= 1.0) {
            return Err(CounterError::BadDelta(self.delta));
        }
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return Err(CounterError::BadRho(self.rho));
        }
        if self.qs == 0 {
            return Err(CounterError::BadQs(self.qs));
        }
        if matches!(self.schedule_kind, ScheduleKind::Theoretical) {
            return Err(CounterError::UnsupportedSchedule);
        }
        Ok(())
    }
}

/// One core iteration in the final estimate.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub index: usize,
    pub seed: u64,
    /// Prefix length the search settled on; the full prefix when `failed`.
    pub m: usize,
    /// Cell count at `m`, capped at thresh when `failed`.
    pub n_sols: u64,
    /// Whether even the full-prefix cell stayed at or above thresh, making
    /// this iteration contribute the 2^n sentinel.
    pub failed: bool,
}

/// Final output of a counting run.
#[derive(Debug, Clone)]
pub struct CountEstimate {
    pub value: u128,
    /// log2 of `value`; negative infinity when the count is zero.
    pub log2_value: f64,
    /// Whether the initial bounded count already settled the answer
    /// exactly. Implies `iterations` is empty.
    pub exact_shortcut: bool,
    pub iterations: Vec<IterationRecord>,
}

fn log2_of(value: u128) -> f64 {
    if value == 0 {
        f64::NEG_INFINITY
    } else {
        (value as f64).log2()
    }
}

/// Memoizing prober: augments the formula with the first m hash rows and
/// counts the cell up to thresh, asking the oracle at most once per m.
struct CellProber<'a> {
    f: &'a CnfXorFormula,
    hash: &'a PrefixHash,
    thresh: u64,
    oracle: &'a OracleConfig,
    probes: Vec<Option<(u64, bool)>>,
}

impl<'a> CellProber<'a> {
    fn new(
        f: &'a CnfXorFormula,
        hash: &'a PrefixHash,
        thresh: u64,
        oracle: &'a OracleConfig,
    ) -> CellProber<'a> {
        let n = f.projection().len();
        CellProber { f, hash, thresh, oracle, probes: vec![None; n + 1] }
    }

    /// Cell count at prefix length m, capped at thresh, plus the saturation
    /// flag.
    fn probe(&mut self, m: usize) -> Result<(u64, bool), CounterError> {
        if let Some(hit) = self.probes[m] {
            return Ok(hit);
        }
        let slice = slice_to_xors(self.hash, m, self.f.projection());
        let cell = augment_with_xors(self.f, &slice, XorEncoding::Native)?;
        let result = bounded_count(&cell, self.thresh, self.oracle)
            .map_err(|source| CounterError::Oracle { source })?;
        let entry = (result.count, result.saturated);
        self.probes[m] = Some(entry);
        Ok(entry)
    }
}

/// Finds the crossing prefix length: the m with a small cell at m and a
/// large cell at m-1. Galloping search from `prev_m` with doubling strides,
/// then binary search over the bracketed interval; each prefix length is
/// queried at most once.
///
/// The caller guarantees the cell at n is small and the cell at 0 (the
/// whole solution space) is large; those two verdicts are pinned, not
/// queried. Cell verdicts must be monotone in m, which prefix nesting
/// provides structurally.
pub fn log_sat_search<F>(
    n: usize,
    prev_m: usize,
    mut cell_is_small: F,
) -> Result<usize, CounterError>
where
    F: FnMut(usize) -> Result<bool, CounterError>,
{
    fn query<F>(
        m: usize,
        verdicts: &mut [Option<bool>],
        cell_is_small: &mut F,
    ) -> Result<bool, CounterError>
    where
        F: FnMut(usize) -> Result<bool, CounterError>,
    {
        if let Some(v) = verdicts[m] {
            return Ok(v);
        }
        let v = cell_is_small(m)?;
        verdicts[m] = Some(v);
        Ok(v)
    }

    let mut verdicts: Vec<Option<bool>> = vec![None; n + 1];
    verdicts[0] = Some(false);
    verdicts[n] = Some(true);

    let start = prev_m.clamp(1, n);
    // Bracket the crossing: lo has a large cell, hi a small one.
    let mut lo;
    let mut hi;
    if query(start, &mut verdicts, &mut cell_is_small)? {
        hi = start;
        let mut stride = 1;
        loop {
            let cand = start.saturating_sub(stride);
            if !query(cand, &mut verdicts, &mut cell_is_small)? {
                lo = cand;
                break;
            }
            hi = cand;
            stride *= 2;
        }
    } else {
        lo = start;
        let mut stride = 1;
        loop {
            let cand = (start + stride).min(n);
            if query(cand, &mut verdicts, &mut cell_is_small)? {
                hi = cand;
                break;
            }
            lo = cand;
            stride *= 2;
        }
    }

    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if query(mid, &mut verdicts, &mut cell_is_small)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

struct CoreOutcome {
    estimate: u128,
    m: usize,
    n_sols: u64,
    failed: bool,
}

/// One estimation round against a fixed sampled hash.
fn core_with_hash(
    f: &CnfXorFormula,
    hash: &PrefixHash,
    thresh: u64,
    prev_m: usize,
    oracle: &OracleConfig,
) -> Result<CoreOutcome, CounterError> {
    let n = f.projection().len();
    assert_eq!(hash.n(), n, "hash width must match the projection");
    let mut prober = CellProber::new(f, hash, thresh, oracle);

    let (full_count, full_saturated) = prober.probe(n)?;
    if full_saturated {
        // Even the finest cell is large: report the sentinel.
        return Ok(CoreOutcome { estimate: 1u128 << n, m: n, n_sols: full_count, failed: true });
    }

    let m = log_sat_search(n, prev_m, |m| Ok(!prober.probe(m)?.1))?;
    let (n_sols, saturated_at_m) = prober.probe(m)?;
    let below_large = m == 1 || prober.probe(m - 1)?.1;
    if saturated_at_m || !below_large {
        return Err(CounterError::NotACrossing { m });
    }
    Ok(CoreOutcome { estimate: (n_sols as u128) << m, m, n_sols, failed: false })
}

/// Samples a hash from the schedule and runs one estimation round. Returns
/// either 2^m times the cell count at the crossing, or the 2^n sentinel
/// when every cell is large.
pub fn approxmc5_core(
    f: &CnfXorFormula,
    schedule: &DensitySchedule,
    seed: u64,
    thresh: u64,
    prev_m: usize,
    oracle: &OracleConfig,
) -> Result<(u128, IterationRecord), CounterError> {
    let hash = sample_prefix_hash(schedule, seed);
    let outcome = core_with_hash(f, &hash, thresh, prev_m, oracle)?;
    let record = IterationRecord {
        index: 0,
        seed,
        m: outcome.m,
        n_sols: outcome.n_sols,
        failed: outcome.failed,
    };
    Ok((outcome.estimate, record))
}

fn build_schedule(params: &CounterParams, n: usize, k: u64) -> Result<DensitySchedule, CounterError> {
    match params.schedule_kind {
        ScheduleKind::Dense => Ok(DensitySchedule::dense(n)),
        ScheduleKind::Lsa => Ok(lsa_schedule(n)),
        ScheduleKind::Solved => {
            let cfg = DispersionBoundConfig::new(
                n,
                k as f64,
                params.rho,
                params.qs,
                CsBoundKind::ClosedForm,
            )?;
            Ok(solve_schedule(&cfg).schedule)
        }
        ScheduleKind::Theoretical => Err(CounterError::UnsupportedSchedule),
    }
}

/// Approximately counts the projected models of `f`.
///
/// First gates on an exact bounded count: when the solution space is
/// already small the exact answer comes back with `exact_shortcut` set.
/// Otherwise runs the iterated core estimator with a fresh hash per
/// iteration, seeds derived from the master seed, and the lower median of
/// the per-iteration values as the final estimate. With a hash family
/// matching the (rho, qs) parameters the estimate lands within a factor
/// 1 + epsilon of the true count with probability at least 1 - delta.
pub fn approxmc5(
    f: &CnfXorFormula,
    params: &CounterParams,
    oracle: &OracleConfig,
) -> Result<CountEstimate, CounterError> {
    params.validate()?;
    let n = f.projection().len();
    let thresh = compute_thresh(params.epsilon, params.rho);
    // 2^m * count and the 2^n sentinel must fit in u128.
    let thresh_bits = 64 - thresh.leading_zeros() as usize;
    if n + thresh_bits > 127 {
        return Err(CounterError::ProjectionTooWide { n, max: 127 - thresh_bits });
    }
    let inithresh =
        compute_inithresh(thresh, params.qs).ok_or(CounterError::BadQs(params.qs))?;

    let initial = bounded_count(f, inithresh, oracle)
        .map_err(|source| CounterError::Oracle { source })?;
    if !initial.saturated {
        let value = initial.count as u128;
        return Ok(CountEstimate {
            value,
            log2_value: log2_of(value),
            exact_shortcut: true,
            iterations: Vec::new(),
        });
    }

    let pivot = compute_pivot(params.epsilon, params.rho);
    let schedule = build_schedule(params, n, pivot.rounded)?;
    let t = if params.improved_t {
        improved_iterations(params.delta)
    } else {
        compute_iterations(params.delta)
    };

    let mut prev_m = params.qs.max(1).min(n);
    let mut estimates = Vec::with_capacity(t as usize);
    let mut records = Vec::with_capacity(t as usize);
    for index in 0..t {
        let seed = derive_iteration_seed(params.master_seed, index);
        let (estimate, mut record) =
            approxmc5_core(f, &schedule, seed, thresh, prev_m, oracle)
                .map_err(|e| e.with_iteration(index))?;
        record.index = index as usize;
        if !record.failed {
            prev_m = record.m;
        }
        estimates.push(estimate);
        records.push(record);
    }

    let value = median(&estimates).expect("at least one iteration ran");
    Ok(CountEstimate {
        value,
        log2_value: log2_of(value),
        exact_shortcut: false,
        iterations: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::formula::{Clause, CnfFormula};
    use crate::hashgen::PrefixHash;

    fn free_formula(n: u32) -> CnfXorFormula {
        CnfXorFormula::from_cnf(CnfFormula::new(n, vec![], None).unwrap())
    }

    #[test]
    fn constants_match_the_analysis() {
        assert_eq!(compute_thresh(0.8, 1.1), 81);
        assert_eq!(compute_thresh(0.8, 1.0), 73);

        let pivot = compute_pivot(0.8, 1.1);
        assert!((pivot.raw - 438.372).abs() < 1e-9);
        assert_eq!(pivot.rounded, 512);
        assert!((compute_pivot(0.8, 1.0).raw - 398.52).abs() < 1e-9);

        assert_eq!(compute_inithresh(81, 1), Some(1296));
        assert_eq!(compute_inithresh(81, 2), Some(2592));
        assert_eq!(compute_inithresh(u64::MAX / 2, 60), None);

        assert_eq!(compute_iterations(0.1), 84);
        assert_eq!(compute_iterations(0.75), 34);

        assert_eq!(improved_iterations(0.1), 21);
        assert_eq!(improved_iterations(0.75), 1);

        assert_eq!(compute_mstar(14.0, 0.8, 1.1), 9);
    }

    #[test]
    fn thresh_decreases_and_tracks_pivot() {
        let grid = [0.1, 0.3, 0.8, 1.0, 2.0, 5.0];
        for pair in grid.windows(2) {
            assert!(compute_thresh(pair[0], 1.1) > compute_thresh(pair[1], 1.1));
        }
        // 78.72 is 8 * 9.84, so raw pivot over (raw thresh - 1) collapses
        // to 8 / (1 + eps/(1+eps)).
        for &eps in &grid {
            for rho in [1.01, 1.1, 2.0] {
                let ratio = compute_pivot(eps, rho).raw / (compute_thresh_raw(eps, rho) - 1.0);
                let expect = 8.0 / (1.0 + eps / (1.0 + eps));
                assert!((ratio - expect).abs() < 1e-9 * expect);
            }
        }
    }

    #[test]
    fn median_is_lower_median() {
        assert_eq!(median(&[3]), Some(3));
        assert_eq!(median(&[1, 2, 100]), Some(2));
        assert_eq!(median(&[1, 2, 3, 4]), Some(2));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn search_finds_every_crossing_with_few_queries() {
        let n = 20;
        for crossing in 1..=n {
            for prev in 1..=n {
                let mut queries = 0;
                let m = log_sat_search(n, prev, |m| {
                    queries += 1;
                    Ok(m >= crossing)
                })
                .unwrap();
                assert_eq!(m, crossing, "crossing {crossing} from prev {prev}");
                assert!(queries <= 12, "{queries} queries for crossing {crossing} from {prev}");
            }
        }
    }

    #[test]
    fn search_memoizes_each_length() {
        let mut asked = vec![0u32; 17];
        log_sat_search(16, 4, |m| {
            asked[m] += 1;
            Ok(m >= 11)
        })
        .unwrap();
        assert!(asked.iter().all(|&c| c <= 1));
    }

    #[test]
    fn degenerate_hash_yields_zero_estimate() {
        // All-zero rows with offset 1 on every row contradict immediately:
        // each cell is empty from m = 1 on, so the search stops at 1 with
        // zero solutions.
        let f = free_formula(3);
        let rows = vec![Bits::zeros(3); 3];
        let b = Bits::from_fn(3, |_| true);
        let alpha = Bits::zeros(3);
        let hash = PrefixHash::from_parts(rows, b, alpha, 0);
        let outcome =
            core_with_hash(&f, &hash, 81, 1, &OracleConfig::default()).unwrap();
        assert_eq!(outcome.estimate, 0);
        assert_eq!(outcome.m, 1);
        assert_eq!(outcome.n_sols, 0);
        assert!(!outcome.failed);
    }

    #[test]
    fn oversized_full_cell_returns_sentinel() {
        // All-zero rows with zero offsets keep every cell equal to the full
        // 32-point space, which stays at or above a thresh of 23.
        let f = free_formula(5);
        let rows = vec![Bits::zeros(5); 5];
        let hash = PrefixHash::from_parts(rows, Bits::zeros(5), Bits::zeros(5), 0);
        let outcome =
            core_with_hash(&f, &hash, 23, 1, &OracleConfig::default()).unwrap();
        assert!(outcome.failed);
        assert_eq!(outcome.estimate, 1 << 5);
        assert_eq!(outcome.m, 5);
        assert_eq!(outcome.n_sols, 23);
    }

    #[test]
    fn shortcut_returns_exact_counts() {
        let params = CounterParams::new(0.8, 0.1);
        let oracle = OracleConfig::default();

        let est = approxmc5(&free_formula(3), &params, &oracle).unwrap();
        assert_eq!(est.value, 8);
        assert!(est.exact_shortcut);
        assert!(est.iterations.is_empty());
        assert_eq!(est.log2_value, 3.0);

        let unsat = CnfXorFormula::from_cnf(
            CnfFormula::new(
                2,
                vec![Clause::new([1]).unwrap(), Clause::new([-1]).unwrap()],
                None,
            )
            .unwrap(),
        );
        let est = approxmc5(&unsat, &params, &oracle).unwrap();
        assert_eq!(est.value, 0);
        assert!(est.exact_shortcut);
        assert_eq!(est.log2_value, f64::NEG_INFINITY);
    }

    #[test]
    fn estimates_are_deterministic_per_seed() {
        // 2^12 free models saturate the exact gate (1296), forcing the
        // iterated path; the improved table keeps it to one iteration.
        let f = free_formula(12);
        let mut params = CounterParams::new(0.8, 0.75);
        params.improved_t = true;
        let oracle = OracleConfig::default();

        let a = approxmc5(&f, &params, &oracle).unwrap();
        let b = approxmc5(&f, &params, &oracle).unwrap();
        assert!(!a.exact_shortcut);
        assert_eq!(a.value, b.value);
        assert_eq!(a.iterations.len(), 1);
        let (ra, rb) = (&a.iterations[0], &b.iterations[0]);
        assert_eq!((ra.seed, ra.m, ra.n_sols, ra.failed), (rb.seed, rb.m, rb.n_sols, rb.failed));

        params.master_seed = 2;
        let c = approxmc5(&f, &params, &oracle).unwrap();
        assert_ne!(a.iterations[0].seed, c.iterations[0].seed);
    }

    #[test]
    fn params_validation_rejects_bad_ranges() {
        let oracle = OracleConfig::default();
        let f = free_formula(2);
        for (params, check) in [
            (CounterParams { epsilon: 0.0, ..CounterParams::new(0.8, 0.1) }, "epsilon"),
            (CounterParams { delta: 0.0, ..CounterParams::new(0.8, 0.1) }, "delta"),
            (CounterParams { delta: 1.5, ..CounterParams::new(0.8, 0.1) }, "delta"),
            (CounterParams { rho: 1.0, ..CounterParams::new(0.8, 0.1) }, "rho"),
            (CounterParams { qs: 0, ..CounterParams::new(0.8, 0.1) }, "qs"),
            (
                CounterParams {
                    schedule_kind: ScheduleKind::Theoretical,
                    ..CounterParams::new(0.8, 0.1)
                },
                "schedule",
            ),
        ] {
            let err = approxmc5(&f, &params, &oracle).unwrap_err();
            assert!(
                err.to_string().contains(check),
                "expected {check} in {err}",
            );
        }
    }
}
