//! Exact hash-cell moments by full enumeration, the rational form of the
//! collision product, tail-probability checks, and a sampled fallback for
//! cases past the enumeration guard.
//!
//! The enumeration fixes the target cell to zero. The offset vector is
//! uniform, so shifting it by any cell relabels draws without changing the
//! distribution of the cell count; nothing is lost and the draw space
//! halves.

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::distributions::{Bernoulli, Distribution};
use rand::Rng;

use crate::hashgen::DensitySchedule;
use crate::verify::sets::{cs_profile, ExplicitSet};
use crate::verify::{Rational, VerifyError, MAX_ENUM_BITS, MIN_MC_TRIALS};

/// Converts a finite float to the exact dyadic rational it denotes. The
/// result is the binary value, so 0.1 becomes 3602879701896397/2^55 rather
/// than 1/10.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

fn validate_schedule(densities: &[Rational], n: usize, m: usize) -> Result<(), VerifyError> {
    if densities.len() != n {
        return Err(VerifyError::ScheduleLength { need: n, got: densities.len() });
    }
    if m > n {
        return Err(VerifyError::PrefixTooLong { m, n });
    }
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for (row, p) in densities.iter().take(m).enumerate() {
        if !p.is_positive() || *p > half {
            return Err(VerifyError::BadDensity { row: row + 1 });
        }
    }
    Ok(())
}

/// Collision probability q(w, m) = prod_{j<=m} (1/2 + (1-2 p_j)^w / 2) in
/// exact arithmetic: the probability that one prefix row agrees on two
/// points at Hamming distance w, multiplied across the first m rows.
pub fn collision_q_exact(densities: &[Rational], w: usize, m: usize) -> Rational {
    assert!(m <= densities.len(), "prefix {m} exceeds schedule length");
    let one = Rational::one();
    let two = Rational::from_integer(BigInt::from(2));
    let mut q = Rational::one();
    for p in &densities[..m] {
        let x = &one - &two * p;
        q *= (&one + x.pow(w as i32)) / &two;
    }
    q
}

/// Excess collision mass r(w, m) = q(w, m) - 2^{-m} in exact arithmetic.
pub fn collision_r_exact(densities: &[Rational], w: usize, m: usize) -> Rational {
    collision_q_exact(densities, w, m) - Rational::new(BigInt::one(), BigInt::one() << m)
}

/// Exact evaluation of the cell-count variance formula
/// sigma^2 = 2^{-m} sum_w c_S(w) r(w, m).
pub fn variance_formula(
    s: &ExplicitSet,
    densities: &[Rational],
    m: usize,
) -> Result<Rational, VerifyError> {
    validate_schedule(densities, s.n(), m)?;
    let mut sum = Rational::zero();
    for (w, &pairs) in cs_profile(s).iter().enumerate() {
        if pairs > 0 {
            sum += Rational::from_integer(BigInt::from(pairs)) * collision_r_exact(densities, w, m);
        }
    }
    Ok(sum * Rational::new(BigInt::one(), BigInt::one() << m))
}

/// Exact first and second central moments of the cell count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashMoments {
    pub mean: Rational,
    pub variance: Rational,
}

impl HashMoments {
    /// Variance over mean; `None` when the mean is zero.
    pub fn dispersion(&self) -> Option<Rational> {
        if self.mean.is_zero() {
            None
        } else {
            Some(&self.variance / &self.mean)
        }
    }

    pub fn mean_f64(&self) -> f64 {
        self.mean.to_f64().unwrap_or(f64::NAN)
    }

    pub fn variance_f64(&self) -> f64 {
        self.variance.to_f64().unwrap_or(f64::NAN)
    }

    pub fn dispersion_f64(&self) -> f64 {
        self.dispersion().and_then(|d| d.to_f64()).unwrap_or(f64::NAN)
    }
}

/// Full distribution of the cell count Cnt(S, m) over every matrix/offset
/// draw: `weights[c]` is the integer numerator of Pr[Cnt = c] over the
/// common denominator `denom`.
#[derive(Debug, Clone)]
pub struct CellDistribution {
    weights: Vec<BigInt>,
    denom: BigInt,
}

impl CellDistribution {
    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn probability(&self, count: usize) -> Rational {
        let numer = self.weights.get(count).cloned().unwrap_or_else(BigInt::zero);
        Rational::new(numer, self.denom.clone())
    }

    pub fn mean(&self) -> Rational {
        let mut sum = BigInt::zero();
        for (c, w) in self.weights.iter().enumerate() {
            sum += w * BigInt::from(c);
        }
        Rational::new(sum, self.denom.clone())
    }

    pub fn second_moment(&self) -> Rational {
        let mut sum = BigInt::zero();
        for (c, w) in self.weights.iter().enumerate() {
            sum += w * BigInt::from(c * c);
        }
        Rational::new(sum, self.denom.clone())
    }

    pub fn variance(&self) -> Rational {
        let mean = self.mean();
        self.second_moment() - &mean * &mean
    }

    pub fn moments(&self) -> HashMoments {
        HashMoments { mean: self.mean(), variance: self.variance() }
    }
}

/// Enumerates every (matrix, offset) draw of an m-row prefix hash over
/// {0,1}^n and tallies the exact probability of each cell count. Matrix
/// entries in row i are Bernoulli(p_i), offsets are uniform, and the cell
/// is fixed to zero. Guarded to m(n+1) <= [`MAX_ENUM_BITS`] random bits.
pub fn exhaustive_cell_distribution(
    s: &ExplicitSet,
    densities: &[Rational],
    m: usize,
) -> Result<CellDistribution, VerifyError> {
    let n = s.n();
    validate_schedule(densities, n, m)?;
    let bits = m * (n + 1);
    if bits > MAX_ENUM_BITS {
        return Err(VerifyError::EnumerationTooLarge { bits, max: MAX_ENUM_BITS });
    }

    // Row weights depend only on the number of ones: a row with w ones has
    // probability numerator num^w (den-num)^{n-w} over den^n.
    let mut row_tables: Vec<Vec<BigInt>> = Vec::with_capacity(m);
    let mut denom = BigInt::one();
    for p in &densities[..m] {
        let num = p.numer();
        let comp = p.denom() - num;
        row_tables.push(
            (0..=n)
                .map(|w| Pow::pow(num, w as u32) * Pow::pow(&comp, (n - w) as u32))
                .collect(),
        );
        denom *= Pow::pow(p.denom(), n as u32);
    }
    denom <<= m;

    let row_mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut weights = vec![BigInt::zero(); s.len() + 1];
    let mut rows = vec![0u32; m];
    for draw in 0..1u64 << bits {
        for (i, row) in rows.iter_mut().enumerate() {
            *row = (draw >> (i * n) & row_mask) as u32;
        }
        let offsets = (draw >> (m * n)) as u32;
        let count = s
            .masks()
            .iter()
            .filter(|&&x| {
                rows.iter()
                    .enumerate()
                    .all(|(i, &row)| (row & x).count_ones() & 1 == offsets >> i & 1)
            })
            .count();
        let mut weight = BigInt::one();
        for (i, &row) in rows.iter().enumerate() {
            weight *= &row_tables[i][row.count_ones() as usize];
        }
        weights[count] += weight;
    }
    debug_assert_eq!(weights.iter().sum::<BigInt>(), denom);
    Ok(CellDistribution { weights, denom })
}

/// Exact mean and variance of the cell count by full enumeration.
pub fn exhaustive_hash_moments(
    s: &ExplicitSet,
    densities: &[Rational],
    m: usize,
) -> Result<HashMoments, VerifyError> {
    Ok(exhaustive_cell_distribution(s, densities, m)?.moments())
}

/// Exact tail probabilities of the cell count against the two closed-form
/// bounds, everything as rationals.
#[derive(Debug, Clone)]
pub struct ProbabilityBoundsReport {
    pub beta: Rational,
    pub mean: Rational,
    pub variance: Rational,
    pub dispersion: Rational,
    /// Pr[|Cnt - E| >= beta E], exact.
    pub chebyshev_tail: Rational,
    /// dispersion / (beta^2 E).
    pub chebyshev_bound: Rational,
    pub chebyshev_holds: bool,
    /// Pr[Cnt <= beta E], exact.
    pub paley_zygmund_tail: Rational,
    /// dispersion / (dispersion + (1 - beta)^2 E).
    pub paley_zygmund_bound: Rational,
    pub paley_zygmund_holds: bool,
}

impl ProbabilityBoundsReport {
    pub fn holds(&self) -> bool {
        self.chebyshev_holds && self.paley_zygmund_holds
    }
}

/// Computes the exact two-sided and lower tails of the cell count from the
/// full draw distribution and checks them against the Chebyshev-style and
/// Paley-Zygmund bounds with the exact dispersion of this (S, schedule, m).
pub fn check_probability_bounds(
    s: &ExplicitSet,
    densities: &[Rational],
    m: usize,
    beta: &Rational,
) -> Result<ProbabilityBoundsReport, VerifyError> {
    if s.is_empty() {
        return Err(VerifyError::EmptySet);
    }
    if !beta.is_positive() || *beta >= Rational::one() {
        return Err(VerifyError::BadBeta);
    }
    let dist = exhaustive_cell_distribution(s, densities, m)?;
    let mean = dist.mean();
    let variance = dist.variance();
    let dispersion = &variance / &mean;
    let threshold = beta * &mean;

    let mut chebyshev_numer = BigInt::zero();
    let mut paley_zygmund_numer = BigInt::zero();
    for (c, w) in dist.weights().iter().enumerate() {
        let count = Rational::from_integer(BigInt::from(c));
        if (&count - &mean).abs() >= threshold {
            chebyshev_numer += w;
        }
        if count <= threshold {
            paley_zygmund_numer += w;
        }
    }
    let chebyshev_tail = Rational::new(chebyshev_numer, dist.denom().clone());
    let paley_zygmund_tail = Rational::new(paley_zygmund_numer, dist.denom().clone());

    let chebyshev_bound = &dispersion / (beta * beta * &mean);
    let one_minus = Rational::one() - beta;
    let paley_zygmund_bound = &dispersion / (&dispersion + &one_minus * &one_minus * &mean);

    Ok(ProbabilityBoundsReport {
        beta: beta.clone(),
        mean,
        variance,
        chebyshev_holds: chebyshev_tail <= chebyshev_bound,
        paley_zygmund_holds: paley_zygmund_tail <= paley_zygmund_bound,
        dispersion,
        chebyshev_tail,
        chebyshev_bound,
        paley_zygmund_tail,
        paley_zygmund_bound,
    })
}

/// Sampled estimate of the cell-count dispersion.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloDispersion {
    pub mean: f64,
    pub variance: f64,
    pub dispersion: f64,
    /// Spread of ten batch dispersions, scaled to a standard error.
    pub stderr: f64,
    pub trials: usize,
}

/// Estimates the cell-count dispersion by sampling hashes from the
/// schedule: rows in ascending order with Bernoulli(p_i) entries per
/// coordinate, then uniform offset bits, cell fixed to zero. The standard
/// error comes from splitting the trials into ten batches. Deterministic
/// for a fixed generator state.
pub fn monte_carlo_dispersion<R: Rng>(
    s: &ExplicitSet,
    schedule: &DensitySchedule,
    m: usize,
    trials: usize,
    rng: &mut R,
) -> Result<MonteCarloDispersion, VerifyError> {
    let n = s.n();
    if s.is_empty() {
        return Err(VerifyError::EmptySet);
    }
    if schedule.len() != n {
        return Err(VerifyError::ScheduleLength { need: n, got: schedule.len() });
    }
    if m > n {
        return Err(VerifyError::PrefixTooLong { m, n });
    }
    if trials < MIN_MC_TRIALS {
        return Err(VerifyError::TooFewTrials { got: trials, min: MIN_MC_TRIALS });
    }

    let samplers: Vec<Bernoulli> = schedule.densities()[..m]
        .iter()
        .map(|&p| Bernoulli::new(p).expect("schedule densities lie in (0, 1/2]"))
        .collect();

    let mut rows = vec![0u32; m];
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        for (i, row) in rows.iter_mut().enumerate() {
            let mut mask = 0u32;
            for b in 0..n {
                if samplers[i].sample(rng) {
                    mask |= 1 << b;
                }
            }
            *row = mask;
        }
        let mut offsets = 0u32;
        for i in 0..m {
            if rng.gen::<bool>() {
                offsets |= 1 << i;
            }
        }
        let count = s
            .masks()
            .iter()
            .filter(|&&x| {
                rows.iter()
                    .enumerate()
                    .all(|(i, &row)| (row & x).count_ones() & 1 == offsets >> i & 1)
            })
            .count();
        counts.push(count as f64);
    }

    let stats = |samples: &[f64]| -> (f64, f64, f64) {
        let len = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / len;
        let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0);
        (mean, variance, variance / mean)
    };

    let (mean, variance, dispersion) = stats(&counts);

    let batches = 10;
    let mut batch_dispersions = Vec::with_capacity(batches);
    for k in 0..batches {
        let lo = k * trials / batches;
        let hi = (k + 1) * trials / batches;
        batch_dispersions.push(stats(&counts[lo..hi]).2);
    }
    let batch_mean = batch_dispersions.iter().sum::<f64>() / batches as f64;
    let batch_var = batch_dispersions
        .iter()
        .map(|d| (d - batch_mean).powi(2))
        .sum::<f64>()
        / (batches as f64 - 1.0);
    let stderr = (batch_var / batches as f64).sqrt();

    Ok(MonteCarloDispersion { mean, variance, dispersion, stderr, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn ratio(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn dense(n: usize) -> Vec<Rational> {
        vec![ratio(1, 2); n]
    }

    #[test]
    fn eight_draw_distribution_by_hand() {
        // Two points at distance 1, one dense row: 4 matrices times 2
        // offsets, each draw weight 1/8. Counts per draw: {2,0,1,1,2,0,1,1}.
        let s = ExplicitSet::from_strs(&["00", "01"]).unwrap();
        let dist = exhaustive_cell_distribution(&s, &dense(2), 1).unwrap();
        assert_eq!(dist.denom(), &BigInt::from(8));
        assert_eq!(
            dist.weights(),
            &[BigInt::from(2), BigInt::from(4), BigInt::from(2)]
        );
        let moments = dist.moments();
        assert_eq!(moments.mean, Rational::one());
        assert_eq!(moments.variance, ratio(1, 2));
        assert_eq!(moments.dispersion(), Some(ratio(1, 2)));
    }

    #[test]
    fn mean_is_size_over_cells_exactly() {
        let s = ExplicitSet::from_strs(&["000", "011", "101", "110", "111"]).unwrap();
        let schedule = vec![ratio(1, 10), ratio(1, 10), ratio(1, 10)];
        for m in 0..=3 {
            let moments = exhaustive_hash_moments(&s, &schedule, m).unwrap();
            assert_eq!(moments.mean, ratio(5, 1 << m));
        }
    }

    #[test]
    fn enumeration_matches_variance_formula_exactly() {
        let s = ExplicitSet::from_strs(&["0000", "0001", "0011", "1011"]).unwrap();
        for schedule in [
            dense(4),
            vec![ratio(1, 2), ratio(1, 4), ratio(1, 4), ratio(1, 10)],
            vec![ratio(1, 10); 4],
        ] {
            for m in 1..=2 {
                let enumerated = exhaustive_hash_moments(&s, &schedule, m).unwrap();
                let formula = variance_formula(&s, &schedule, m).unwrap();
                assert_eq!(enumerated.variance, formula);
            }
        }
    }

    #[test]
    fn exact_collision_product_matches_float_path() {
        let q = collision_q_exact(&[ratio(1, 4)], 2, 1);
        assert_eq!(q, ratio(5, 8));
        assert_eq!(collision_r_exact(&[ratio(1, 4)], 2, 1), ratio(1, 8));

        // 1/4 is dyadic, so the f64 evaluation is bit-exact here.
        let f = crate::density::collision_q(&[0.25], 2, 1);
        assert_eq!(q.to_f64().unwrap(), f);
    }

    #[test]
    fn probability_bounds_hold_on_dense_cube() {
        let s = ExplicitSet::new(3, 0..8).unwrap();
        let report =
            check_probability_bounds(&s, &dense(3), 1, &ratio(1, 2)).unwrap();
        // Dense single row on the full cube: 14 of the 16 draws split the
        // cube in half, the all-zero row gives cells of 8 or 0. So the mean
        // is 4, the variance 2, and both tails are the two extreme draws.
        assert_eq!(report.mean, ratio(4, 1));
        assert_eq!(report.variance, ratio(2, 1));
        assert_eq!(report.chebyshev_tail, ratio(1, 8));
        assert_eq!(report.chebyshev_bound, ratio(1, 2));
        assert_eq!(report.paley_zygmund_tail, ratio(1, 16));
        assert_eq!(report.paley_zygmund_bound, ratio(1, 3));
        assert!(report.holds());

        // A lopsided set makes both tails positive; the bounds still hold.
        let s = ExplicitSet::from_strs(&["000", "001", "010", "100"]).unwrap();
        let report =
            check_probability_bounds(&s, &vec![ratio(1, 4); 3], 2, &ratio(3, 10)).unwrap();
        assert!(report.chebyshev_tail.is_positive());
        assert!(report.holds());
    }

    #[test]
    fn monte_carlo_tracks_enumeration() {
        let s = ExplicitSet::from_strs(&["000", "001", "010", "100", "111"]).unwrap();
        let schedule = DensitySchedule::dense(3);
        let exact = exhaustive_hash_moments(&s, &dense(3), 2)
            .unwrap()
            .dispersion_f64();

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let mc = monte_carlo_dispersion(&s, &schedule, 2, 20_000, &mut rng).unwrap();
        assert!((mc.dispersion - exact).abs() <= 3.0 * mc.stderr);

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let again = monte_carlo_dispersion(&s, &schedule, 2, 20_000, &mut rng).unwrap();
        assert_eq!(mc.dispersion, again.dispersion);
        assert_eq!(mc.stderr, again.stderr);
    }

    #[test]
    fn guards_reject_oversized_and_malformed_requests() {
        let s = ExplicitSet::new(5, 0..4).unwrap();
        assert!(matches!(
            exhaustive_cell_distribution(&s, &dense(5), 5),
            Err(VerifyError::EnumerationTooLarge { bits: 30, .. })
        ));
        assert!(matches!(
            exhaustive_hash_moments(&s, &dense(4), 2),
            Err(VerifyError::ScheduleLength { need: 5, got: 4 })
        ));
        assert!(matches!(
            variance_formula(&s, &vec![ratio(3, 4); 5], 2),
            Err(VerifyError::BadDensity { row: 1 })
        ));
        assert!(matches!(
            check_probability_bounds(&s, &dense(5), 2, &ratio(3, 2)),
            Err(VerifyError::BadBeta)
        ));
        let schedule = DensitySchedule::dense(5);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        assert!(matches!(
            monte_carlo_dispersion(&s, &schedule, 2, 10, &mut rng),
            Err(VerifyError::TooFewTrials { got: 10, min: MIN_MC_TRIALS })
        ));
    }
}
