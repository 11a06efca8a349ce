//! Sparse prefix hash sampling.
//!
//! A hash is an affine map `h(y) = Ay + b` over GF(2) on the projected
//! point space `{0,1}^n`, together with a target cell `alpha`. Row `i` of
//! `A` is sampled with independent Bernoulli(`p[i]`) entries, so a schedule
//! with small late densities yields short XOR constraints for deep prefixes.
//! The prefix of length `m` keeps the first `m` rows: a point is in the cell
//! iff `(Ay + b)` agrees with `alpha` on those rows. Prefixes are nested by
//! construction, which is what lets the search over `m` reuse one sample.

use std::fmt::Write as _;

use rand::distributions::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::Bits;
use crate::formula::Assignment;
pub use crate::formula::XorConstraint;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule for {n} rows has {len} densities")]
    LengthMismatch { n: usize, len: usize },
    #[error("density p[{index}] = {value} is outside (0, 1/2]")]
    OutOfRange { index: usize, value: f64 },
    #[error("densities must be non-increasing, but p[{index}] rises to {value}")]
    NotMonotone { index: usize, value: f64 },
}

/// How a density schedule was produced. Dense means `p = 1/2` everywhere,
/// the classic uniform family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScheduleKind {
    Dense,
    Lsa,
    Solved,
    Theoretical,
}

/// Per-row Bernoulli densities for hash matrix sampling.
///
/// Valid schedules have every density in `(0, 1/2]` and non-increasing,
/// which is what makes prefix slices of one matrix usable at every depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensitySchedule {
    n: usize,
    p: Vec<f64>,
    kind: ScheduleKind,
}

impl DensitySchedule {
    pub fn new(p: Vec<f64>, kind: ScheduleKind) -> Result<DensitySchedule, ScheduleError> {
        for (index, &value) in p.iter().enumerate() {
            if !(value > 0.0 && value <= 0.5) {
                return Err(ScheduleError::OutOfRange { index, value });
            }
            if index > 0 && value > p[index - 1] {
                return Err(ScheduleError::NotMonotone { index, value });
            }
        }
        Ok(DensitySchedule {
            n: p.len(),
            p,
            kind,
        })
    }

    /// The uniform schedule: every row density exactly `1/2`.
    pub fn dense(n: usize) -> DensitySchedule {
        DensitySchedule {
            n,
            p: vec![0.5; n],
            kind: ScheduleKind::Dense,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Density of row `i`, 0-based.
    pub fn density(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn densities(&self) -> &[f64] {
        &self.p
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }
}

/// One sampled hash: matrix rows, affine offset, and target cell, all at
/// full length `n` so any prefix `m <= n` can be sliced out later.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixHash {
    n: usize,
    rows: Vec<Bits>,
    b: Bits,
    alpha: Bits,
    seed: u64,
}

impl PrefixHash {
    /// Assembles a hash from explicit parts. Panics on length mismatches;
    /// this is a testing and inspection constructor, sampling goes through
    /// [`sample_prefix_hash`].
    pub fn from_parts(rows: Vec<Bits>, b: Bits, alpha: Bits, seed: u64) -> PrefixHash {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must be n x n");
        assert_eq!(b.len(), n, "offset length");
        assert_eq!(alpha.len(), n, "target length");
        PrefixHash {
            n,
            rows,
            b,
            alpha,
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Bits] {
        &self.rows
    }

    pub fn offset(&self) -> &Bits {
        &self.b
    }

    pub fn target(&self) -> &Bits {
        &self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Right-hand side of row `i`'s cell constraint: `(Ay)_i = alpha_i + b_i`.
    pub fn row_rhs(&self, i: usize) -> bool {
        self.alpha.get(i) ^ self.b.get(i)
    }
}

/// Samples a hash for the given schedule. The draw order is fixed (matrix
/// rows top to bottom, entries left to right, then the offset, then the
/// target) so a seed pins down the hash exactly.
pub fn sample_prefix_hash(schedule: &DensitySchedule, seed: u64) -> PrefixHash {
    let n = schedule.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let dist = Bernoulli::new(schedule.density(i)).expect("densities validated in (0, 1/2]");
        let mut row = Bits::zeros(n);
        for j in 0..n {
            if dist.sample(&mut rng) {
                row.set(j, true);
            }
        }
        rows.push(row);
    }
    let b = Bits::from_fn(n, |_| rng.gen::<bool>());
    let alpha = Bits::from_fn(n, |_| rng.gen::<bool>());
    PrefixHash {
        n,
        rows,
        b,
        alpha,
        seed,
    }
}

/// Evaluates the length-`m` prefix on a projected point and reports whether
/// it lands in the target cell.
///
/// Bit `j` of `y` is the value of the `j`-th projection variable.
pub fn in_cell(hash: &PrefixHash, m: usize, y: &Bits) -> bool {
    assert!(m <= hash.n, "prefix length exceeds hash size");
    assert_eq!(y.len(), hash.n, "point dimension");
    (0..m).all(|i| hash.rows[i].dot_parity(y) == hash.row_rhs(i))
}

/// The hash value `(Ay + b)` restricted to the first `m` rows.
pub fn apply_hash(hash: &PrefixHash, m: usize, y: &Bits) -> Bits {
    assert!(m <= hash.n, "prefix length exceeds hash size");
    assert_eq!(y.len(), hash.n, "point dimension");
    Bits::from_fn(m, |i| hash.rows[i].dot_parity(y) ^ hash.b.get(i))
}

/// Converts the first `m` rows into XOR constraints over the projection
/// variables, one per row: row `i` yields `xor of selected vars = alpha_i +
/// b_i`. Rows with no selected variable still appear (an empty row with
/// right-hand side true is the unsatisfiable cell).
pub fn slice_to_xors(hash: &PrefixHash, m: usize, projection: &[u32]) -> Vec<XorConstraint> {
    assert!(m <= hash.n, "prefix length exceeds hash size");
    assert_eq!(projection.len(), hash.n, "projection dimension");
    (0..m)
        .map(|i| {
            let vars = hash.rows[i].iter_ones().map(|j| projection[j]);
            XorConstraint::new(vars, hash.row_rhs(i))
        })
        .collect()
}

/// Packs a total assignment's values on the projection into point-space bits.
pub fn projection_point(a: &Assignment, projection: &[u32]) -> Bits {
    Bits::from_fn(projection.len(), |j| {
        a.get(projection[j])
            .unwrap_or_else(|| panic!("projection variable {} unassigned", projection[j]))
    })
}

/// Human-readable dump of a sliced hash, one row per line:
/// `i : v1 v2 ... = rhs` with variables from the projection.
pub fn dump_slice(hash: &PrefixHash, m: usize, projection: &[u32]) -> String {
    let mut out = String::new();
    for (i, xor) in slice_to_xors(hash, m, projection).iter().enumerate() {
        write!(out, "{} :", i + 1).unwrap();
        for v in xor.vars() {
            write!(out, " {v}").unwrap();
        }
        writeln!(out, " = {}", u8::from(xor.rhs())).unwrap();
    }
    out
}

/// Derives the seed for iteration `index` from a master seed, spreading
/// consecutive indices across the seed space (splitmix-style finalizer).
pub fn derive_iteration_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert!(DensitySchedule::new(vec![0.5, 0.4, 0.4], ScheduleKind::Lsa).is_ok());
        assert!(matches!(
            DensitySchedule::new(vec![0.5, 0.6], ScheduleKind::Lsa),
            Err(ScheduleError::OutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            DensitySchedule::new(vec![0.4, 0.5], ScheduleKind::Lsa),
            Err(ScheduleError::NotMonotone { index: 1, .. })
        ));
        assert!(matches!(
            DensitySchedule::new(vec![0.5, 0.0], ScheduleKind::Lsa),
            Err(ScheduleError::OutOfRange { index: 1, .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let s = DensitySchedule::dense(16);
        let a = sample_prefix_hash(&s, 7);
        let b = sample_prefix_hash(&s, 7);
        let c = sample_prefix_hash(&s, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn dense_rows_have_mean_weight_near_half() {
        let n = 20;
        let s = DensitySchedule::dense(n);
        let mut total_ones = 0usize;
        let mut total_rows = 0usize;
        for seed in 0..500 {
            let h = sample_prefix_hash(&s, seed);
            for r in h.rows() {
                total_ones += r.count_ones();
                total_rows += 1;
            }
        }
        let mean = total_ones as f64 / total_rows as f64;
        assert!((mean - 10.0).abs() < 0.5, "mean row weight {mean}");
    }

    #[test]
    fn sparse_rows_are_lighter_than_dense_rows() {
        let n = 64;
        let sparse =
            DensitySchedule::new(vec![0.05; n], ScheduleKind::Solved).unwrap();
        let mut ones = 0usize;
        for seed in 0..50 {
            let h = sample_prefix_hash(&sparse, seed);
            ones += h.rows().iter().map(Bits::count_ones).sum::<usize>();
        }
        let mean = ones as f64 / (50.0 * n as f64);
        assert!((mean - 3.2).abs() < 0.5, "mean sparse row weight {mean}");
    }

    #[test]
    fn slice_matches_direct_evaluation() {
        let s = DensitySchedule::dense(6);
        let h = sample_prefix_hash(&s, 42);
        let projection: Vec<u32> = (1..=6).collect();
        let xors = slice_to_xors(&h, 4, &projection);
        assert_eq!(xors.len(), 4);
        for point in 0u32..64 {
            let y = Bits::from_fn(6, |j| point >> j & 1 == 1);
            let mut a = Assignment::new();
            for (j, &v) in projection.iter().enumerate() {
                a.set(v, y.get(j));
            }
            let via_xors = xors.iter().all(|x| x.satisfied_by(&a) == Some(true));
            assert_eq!(via_xors, in_cell(&h, 4, &y), "point {point:06b}");
        }
    }

    #[test]
    fn dump_format_lists_rows_with_rhs() {
        let rows = vec![
            Bits::from_str01("110"),
            Bits::from_str01("011"),
            Bits::from_str01("000"),
        ];
        let b = Bits::from_str01("100");
        let alpha = Bits::from_str01("000");
        let h = PrefixHash::from_parts(rows, b, alpha, 0);
        let dump = dump_slice(&h, 3, &[2, 5, 9]);
        assert_eq!(dump, "1 : 2 5 = 1\n2 : 5 9 = 0\n3 : = 0\n");
    }

    #[test]
    fn iteration_seeds_spread() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..1000 {
            assert!(seen.insert(derive_iteration_seed(12345, i)));
        }
        assert_ne!(
            derive_iteration_seed(1, 0),
            derive_iteration_seed(2, 0),
            "different masters must diverge"
        );
    }
}
