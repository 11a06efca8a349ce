//! Explicit point sets, ordered pair-distance counts, and the compression
//! operators used to certify which sets extremize weighted pair sums.

use std::fmt;

use crate::verify::{VerifyError, MAX_PAIRSUM_DIM, MAX_SET_DIM};

/// Subset of {0,1}^n stored as sorted point masks.
///
/// Coordinate i (1-based) lives at bit i-1 of a mask, so the first character
/// of a point string like "100" is coordinate 1. This matches the bit order
/// of [`crate::bits::Bits`].
#[derive(Clone, PartialEq, Eq)]
pub struct ExplicitSet {
    n: usize,
    masks: Vec<u32>,
}

impl ExplicitSet {
    /// Builds a set from raw point masks. Duplicates collapse.
    pub fn new(n: usize, masks: impl IntoIterator<Item = u32>) -> Result<ExplicitSet, VerifyError> {
        if n == 0 || n > MAX_SET_DIM {
            return Err(VerifyError::DimensionTooLarge { n, max: MAX_SET_DIM });
        }
        let mut masks: Vec<u32> = masks.into_iter().collect();
        let limit = 1u32 << n;
        for &m in &masks {
            if m >= limit {
                return Err(VerifyError::PointOutOfRange { mask: m, n });
            }
        }
        masks.sort_unstable();
        masks.dedup();
        Ok(ExplicitSet { n, masks })
    }

    /// Builds a set from 0/1 strings, all of the same width.
    pub fn from_strs<S: AsRef<str>>(points: &[S]) -> Result<ExplicitSet, VerifyError> {
        let n = points
            .first()
            .map(|s| s.as_ref().len())
            .ok_or(VerifyError::EmptySet)?;
        let mut masks = Vec::with_capacity(points.len());
        for s in points {
            let s = s.as_ref();
            if s.len() != n {
                return Err(VerifyError::BadPointString(s.to_string()));
            }
            let mut mask = 0u32;
            for (pos, ch) in s.chars().enumerate() {
                match ch {
                    '1' => mask |= 1 << pos,
                    '0' => {}
                    _ => return Err(VerifyError::BadPointString(s.to_string())),
                }
            }
            masks.push(mask);
        }
        ExplicitSet::new(n, masks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.masks.binary_search(&mask).is_ok()
    }

    /// Points rendered in string form, in sorted mask order.
    pub fn to_strings(&self) -> Vec<String> {
        self.masks
            .iter()
            .map(|&m| {
                (0..self.n)
                    .map(|b| if m >> b & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Debug for ExplicitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_strings().join(", "))
    }
}

/// Number of ordered pairs (x, y) in S x S at Hamming distance exactly w.
///
/// cs(0) equals |S| and the counts over all w sum to |S|^2.
pub fn cs(w: usize, s: &ExplicitSet) -> u64 {
    let mut pairs = 0;
    for &x in s.masks() {
        for &y in s.masks() {
            if (x ^ y).count_ones() as usize == w {
                pairs += 1;
            }
        }
    }
    pairs
}

/// All ordered pair-distance counts in one pass; index w holds cs(w, s).
pub fn cs_profile(s: &ExplicitSet) -> Vec<u64> {
    let mut profile = vec![0u64; s.n() + 1];
    for &x in s.masks() {
        for &y in s.masks() {
            profile[(x ^ y).count_ones() as usize] += 1;
        }
    }
    profile
}

/// Pushes every point of S down along coordinate i: a point with a 1 at i
/// moves to its lower neighbor unless that neighbor is already in S. All
/// moves are judged against the input set, so the operator is simultaneous.
/// Cardinality is preserved.
pub fn down_operator(s: &ExplicitSet, i: usize) -> ExplicitSet {
    assert!(i >= 1 && i <= s.n(), "coordinate {i} outside 1..={}", s.n());
    let bit = 1u32 << (i - 1);
    let mut out = Vec::with_capacity(s.len());
    for &z in s.masks() {
        if z & bit != 0 && !s.contains(z & !bit) {
            out.push(z & !bit);
        } else {
            out.push(z);
        }
    }
    out.sort_unstable();
    debug_assert_eq!(out.len(), s.len());
    ExplicitSet { n: s.n(), masks: out }
}

/// Swaps coordinates i < j in every point that has a 0 at i and a 1 at j,
/// unless the swapped point is already in S. Judged against the input set.
/// Cardinality is preserved; ones migrate toward lower coordinates.
pub fn left_compress(s: &ExplicitSet, i: usize, j: usize) -> ExplicitSet {
    assert!(
        i >= 1 && i < j && j <= s.n(),
        "coordinate pair ({i}, {j}) outside 1 <= i < j <= {}",
        s.n()
    );
    let (bi, bj) = (1u32 << (i - 1), 1u32 << (j - 1));
    let mut out = Vec::with_capacity(s.len());
    for &z in s.masks() {
        if z & bi == 0 && z & bj != 0 {
            let swapped = (z & !bj) | bi;
            if !s.contains(swapped) {
                out.push(swapped);
                continue;
            }
        }
        out.push(z);
    }
    out.sort_unstable();
    debug_assert_eq!(out.len(), s.len());
    ExplicitSet { n: s.n(), masks: out }
}

/// Whether S is closed downward: clearing any 1 bit of a member lands in S.
pub fn is_down_set(s: &ExplicitSet) -> bool {
    s.masks().iter().all(|&z| {
        (0..s.n()).all(|b| z >> b & 1 == 0 || s.contains(z & !(1 << b)))
    })
}

/// Whether S is fixed by every left compression: for all i < j, any member
/// with a 0 at i and a 1 at j has its swapped partner in S.
pub fn is_left_compressed(s: &ExplicitSet) -> bool {
    for &z in s.masks() {
        for j in 1..s.n() {
            if z >> j & 1 == 0 {
                continue;
            }
            for i in 0..j {
                if z >> i & 1 == 0 && !s.contains((z & !(1 << j)) | (1 << i)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Iterates down sweeps (coordinates n down to 1) and left-compression
/// sweeps (pairs (n-1, n) through (1, 2), then wider gaps) until a full
/// sweep changes nothing. Returns the fixed point and the number of sweeps.
///
/// Termination: every move strictly lowers the sum of point masks, and that
/// sum is a non-negative integer. The result is a left-compressed down-set.
pub fn canonicalize(s: &ExplicitSet) -> (ExplicitSet, usize) {
    let n = s.n();
    let mut cur = s.clone();
    let mut sweeps = 0;
    loop {
        let before = cur.clone();
        for i in (1..=n).rev() {
            cur = down_operator(&cur, i);
        }
        for i in (1..n).rev() {
            for j in i + 1..=n {
                cur = left_compress(&cur, i, j);
            }
        }
        sweeps += 1;
        if cur == before {
            break;
        }
    }
    debug_assert!(is_down_set(&cur) && is_left_compressed(&cur));
    (cur, sweeps)
}

/// The weighted ordered pair sum of S under weight t(w) on pair distance w.
pub fn weighted_pairsum<F: Fn(usize) -> f64>(s: &ExplicitSet, t: F) -> f64 {
    cs_profile(s)
        .iter()
        .enumerate()
        .map(|(w, &c)| c as f64 * t(w))
        .sum()
}

/// Outcome of the exhaustive weighted-pairsum search over all size-subsets.
#[derive(Debug, Clone)]
pub struct PairsumReport {
    /// Largest pair sum found.
    pub max: f64,
    /// First subset attaining the maximum, in enumeration order.
    pub witness: ExplicitSet,
    /// Number of subsets within tolerance of the maximum.
    pub maximizers: usize,
    /// Whether some maximizer is itself a left-compressed down-set.
    pub canonical_maximizer_exists: bool,
    /// Whether canonicalizing some maximizer again attains the maximum.
    pub canonicalize_attains: bool,
}

/// Exhaustively maximizes the weighted pair sum over every size-subset of
/// {0,1}^n. Ties within a relative 1e-9 tolerance count as co-maximizers,
/// absorbing the rounding spread of float weights.
pub fn max_weighted_pairsum<F>(
    n: usize,
    size: usize,
    t: F,
) -> Result<PairsumReport, VerifyError>
where
    F: Fn(usize) -> f64,
{
    if n == 0 || n > MAX_PAIRSUM_DIM {
        return Err(VerifyError::DimensionTooLarge { n, max: MAX_PAIRSUM_DIM });
    }
    let points = 1usize << n;
    if size == 0 || size > points {
        return Err(VerifyError::SizeOutOfRange { size, max: points });
    }
    let tvals: Vec<f64> = (0..=n).map(&t).collect();

    let pairsum = |subset: u32| -> (Vec<u32>, f64) {
        let members: Vec<u32> = (0..points as u32).filter(|&p| subset >> p & 1 == 1).collect();
        let mut value = 0.0;
        for &x in &members {
            for &y in &members {
                value += tvals[(x ^ y).count_ones() as usize];
            }
        }
        (members, value)
    };

    // Gosper's hack walks all size-subsets of the 2^n point space in
    // ascending mask order.
    let limit = 1u64 << points;
    let mut evaluated: Vec<(u32, f64)> = Vec::new();
    let mut subset = (1u64 << size) - 1;
    let mut max = f64::NEG_INFINITY;
    while subset < limit {
        let (_, value) = pairsum(subset as u32);
        if value > max {
            max = value;
        }
        evaluated.push((subset as u32, value));
        let low = subset & subset.wrapping_neg();
        let ripple = subset + low;
        subset = ripple | (((subset ^ ripple) / low) >> 2);
    }

    let tol = 1e-9 * max.abs().max(1.0);
    let mut witness = None;
    let mut maximizers = 0;
    let mut canonical_maximizer_exists = false;
    let mut canonicalize_attains = false;
    for &(mask, value) in &evaluated {
        if value < max - tol {
            continue;
        }
        maximizers += 1;
        let members = (0..points as u32).filter(|&p| mask >> p & 1 == 1);
        let set = ExplicitSet::new(n, members).expect("members lie in {0,1}^n");
        if is_down_set(&set) && is_left_compressed(&set) {
            canonical_maximizer_exists = true;
        }
        if !canonicalize_attains {
            let (canon, _) = canonicalize(&set);
            if weighted_pairsum(&canon, &t) >= max - tol {
                canonicalize_attains = true;
            }
        }
        if witness.is_none() {
            witness = Some(set);
        }
    }

    Ok(PairsumReport {
        max,
        witness: witness.expect("at least one subset attains the maximum"),
        maximizers,
        canonical_maximizer_exists,
        canonicalize_attains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[&str]) -> ExplicitSet {
        ExplicitSet::from_strs(points).unwrap()
    }

    #[test]
    fn pair_counts_match_hand_enumeration() {
        let s = set(&["00", "01"]);
        assert_eq!(cs(0, &s), 2);
        assert_eq!(cs(1, &s), 2);
        assert_eq!(cs(2, &s), 0);

        let s = set(&["000", "001", "100"]);
        assert_eq!(cs_profile(&s), vec![3, 4, 2, 0]);

        let singleton = set(&["1010"]);
        assert_eq!(cs_profile(&singleton), vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn pair_counts_sum_to_size_squared() {
        let s = set(&["0000", "0110", "1011", "1111", "0001"]);
        assert_eq!(cs_profile(&s).iter().sum::<u64>(), 25);
    }

    #[test]
    fn down_operator_follows_worked_example() {
        let s = set(&["100", "011", "101"]);
        assert_eq!(down_operator(&s, 3), set(&["100", "010", "101"]));
    }

    #[test]
    fn compression_chain_reaches_canonical_form() {
        // Full chain for {100, 011, 101}: downs in coordinate order 3, 2, 1,
        // then the (2, 3) compression, landing on {000, 100, 010}.
        let s0 = set(&["100", "011", "101"]);
        let s1 = down_operator(&s0, 3);
        let s2 = down_operator(&s1, 2);
        assert_eq!(s2, set(&["100", "000", "101"]));
        let s3 = down_operator(&s2, 1);
        assert_eq!(s3, set(&["100", "000", "001"]));
        let s4 = left_compress(&s3, 2, 3);
        assert_eq!(s4, set(&["100", "000", "010"]));

        let (canon, sweeps) = canonicalize(&s0);
        assert_eq!(canon, s4);
        assert!(is_down_set(&canon) && is_left_compressed(&canon));
        assert!(sweeps <= 9 * s0.len());
    }

    #[test]
    fn canonical_sets_are_fixed_points() {
        // Down but not left-compressed: swapping coordinates 1, 2 of 011
        // gives 101, which is absent.
        let s = set(&["000", "001", "010", "100", "011"]);
        let (canon, _) = canonicalize(&s);
        let (again, sweeps) = canonicalize(&canon);
        assert_eq!(again, canon);
        assert_eq!(sweeps, 1);
    }

    #[test]
    fn operators_preserve_cardinality_on_random_sets() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=5usize);
            let size = rng.gen_range(1..=1usize << n);
            let mut masks: Vec<u32> = (0..1u32 << n).collect();
            masks.shuffle(&mut rng);
            masks.truncate(size);
            let s = ExplicitSet::new(n, masks).unwrap();

            let i = rng.gen_range(1..=n);
            assert_eq!(down_operator(&s, i).len(), s.len());
            if n >= 2 {
                let i = rng.gen_range(1..n);
                let j = rng.gen_range(i + 1..=n);
                assert_eq!(left_compress(&s, i, j).len(), s.len());
            }
        }
    }

    #[test]
    fn pairsum_constant_weight_is_size_squared() {
        let report = max_weighted_pairsum(3, 4, |_| 1.0).unwrap();
        assert_eq!(report.max, 16.0);
        // Every 4-subset of {0,1}^3 attains |S|^2.
        assert_eq!(report.maximizers, 70);
        assert!(report.canonical_maximizer_exists);
        assert!(report.canonicalize_attains);
    }

    #[test]
    fn pairsum_geometric_weight_has_canonical_maximizer() {
        let report = max_weighted_pairsum(3, 4, |w| (0.5f64).powi(w as i32)).unwrap();
        assert!(report.canonical_maximizer_exists);
        assert!(report.canonicalize_attains);
        let witness_sum = weighted_pairsum(&report.witness, |w| (0.5f64).powi(w as i32));
        assert!((witness_sum - report.max).abs() <= 1e-9 * report.max);
    }

    #[test]
    fn set_construction_rejects_bad_input() {
        assert!(matches!(
            ExplicitSet::from_strs(&["01", "0"]),
            Err(VerifyError::BadPointString(_))
        ));
        assert!(matches!(
            ExplicitSet::from_strs(&["21"]),
            Err(VerifyError::BadPointString(_))
        ));
        assert!(matches!(
            ExplicitSet::new(2, [4u32]),
            Err(VerifyError::PointOutOfRange { .. })
        ));
        assert!(matches!(
            ExplicitSet::new(27, []),
            Err(VerifyError::DimensionTooLarge { .. })
        ));
    }
}
