//! Density-schedule numerics: collision products, dispersion bounds, and
//! schedule construction.
//!
//! For a hash whose row `j` has density `p_j`, two points at Hamming
//! distance `w` collide on the first `m` rows with probability
//! `q(w, m) = prod_{j<=m} (1/2 + 1/2 (1 - 2 p_j)^w)`, and the excess over
//! the independent-cell probability is `r(w, m) = q(w, m) - 2^-m`. The
//! variance of a cell count decomposes over pair distances with `r` as the
//! per-distance weight, so a worst-case pair-count profile turns `r` into a
//! dispersion bound, and a schedule solver can push densities down until a
//! target dispersion is met.
//!
//! Everything here works with the scaled dispersion (variance over mean),
//! whose worst-case bound at prefix length `m` is
//! `(1 - 2^-m) + sum_{w=1}^{ell} c(w) r(w, m)` with `ell = ceil(m + log2 k)`
//! and `c(w)` a per-element bound on pairs at distance `w`. Terms are
//! evaluated in the log2 domain: the closed-form `c(w)` overflows `f64`
//! long before the products it multiplies stop mattering.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::hashgen::{DensitySchedule, ScheduleKind};

/// Absolute tolerance of the per-row density bisection in [`solve_schedule`].
pub const SOLVE_TOL: f64 = 1e-4;

/// Absolute tolerance of the [`inv_binary_entropy`] bisection.
pub const ENTROPY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("k must be finite and > 1, got {0}")]
    BadK(f64),
    #[error("rho must be finite and > 1, got {0}")]
    BadRho(f64),
    #[error("qs must be at least 1")]
    BadQs,
    #[error("n must be at least 1")]
    BadN,
}

/// Binary entropy `H(x) = -x log2 x - (1-x) log2 (1-x)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "entropy argument {x} outside [0, 1]");
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Inverse of [`binary_entropy`] on `[0, 1/2]`, by bisection.
pub fn inv_binary_entropy(y: f64) -> f64 {
    assert!((0.0..=1.0).contains(&y), "entropy value {y} outside [0, 1]");
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > ENTROPY_TOL {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sum of `ln(1 + x_j^w)` over the first `m` rows, the log-domain core of
/// the collision product: `q(w, m) = 2^-m exp(S)` and
/// `r(w, m) = 2^-m expm1(S)`.
fn ln1p_sum(p: &[f64], w: u32, m: usize) -> f64 {
    assert!(m <= p.len(), "prefix {m} exceeds schedule length {}", p.len());
    p[..m]
        .iter()
        .map(|&pj| (1.0 - 2.0 * pj).powi(w as i32).ln_1p())
        .sum()
}

/// `log2(expm1(s))` for `s >= 0` without overflowing at large `s`.
fn log2_expm1(s: f64) -> f64 {
    if s > 36.0 {
        // expm1(s) = e^s (1 - e^-s); the correction is below f64 epsilon
        s * std::f64::consts::LOG2_E
    } else {
        s.exp_m1().log2()
    }
}

/// Collision probability `q(w, m)` of two points at distance `w` under the
/// first `m` rows of a schedule.
pub fn collision_q(p: &[f64], w: u32, m: usize) -> f64 {
    (ln1p_sum(p, w, m) - m as f64 * std::f64::consts::LN_2).exp()
}

/// `log2` of [`collision_q`], usable past the `f64` underflow range of `q`.
pub fn log2_collision_q(p: &[f64], w: u32, m: usize) -> f64 {
    ln1p_sum(p, w, m) * std::f64::consts::LOG2_E - m as f64
}

/// Collision excess `r(w, m) = q(w, m) - 2^-m`, computed difference-free:
/// the subtraction would cancel catastrophically for near-dense schedules.
pub fn collision_r(p: &[f64], w: u32, m: usize) -> f64 {
    ln1p_sum(p, w, m).exp_m1() * (-(m as f64)).exp2()
}

/// `log2` of [`collision_r`]; `-inf` when the excess is exactly zero.
pub fn log2_collision_r(p: &[f64], w: u32, m: usize) -> f64 {
    log2_expm1(ln1p_sum(p, w, m)) - m as f64
}

/// Closed-form per-element bound on pairs at distance `w >= 1` in an
/// `n`-dimensional point set of size at most `2^ell`:
/// `2 (8 e sqrt(n ell) / w)^w`. Overflows to infinity for large `w`; bound
/// evaluation uses [`log2_cs_bound`] instead.
pub fn cs_bound(w: u32, n: usize, ell: usize) -> f64 {
    log2_cs_bound(w, n, ell).exp2()
}

/// `log2` of [`cs_bound`].
pub fn log2_cs_bound(w: u32, n: usize, ell: usize) -> f64 {
    assert!(w >= 1, "pair distance starts at 1");
    assert!(n >= 1 && ell >= 1);
    let log2_8e = 3.0 + std::f64::consts::LOG2_E;
    1.0 + w as f64 * (log2_8e + 0.5 * ((n * ell) as f64).log2() - (w as f64).log2())
}

/// `C(n, w)` as `f64`, saturating to infinity; exactness is not needed, the
/// value only caps a bound.
pub fn binomial(n: usize, w: u32) -> f64 {
    if w as usize > n {
        return 0.0;
    }
    let w = (w as usize).min(n - w as usize);
    let mut acc = 1.0f64;
    for i in 0..w {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Sound tightening of [`cs_bound`]: pairs at distance `w` are also limited
/// by the `C(n, w)` spheres around each element and by the set size `2^ell`,
/// and distance beyond `n` is impossible.
pub fn tightened_cs_bound(w: u32, n: usize, ell: usize) -> f64 {
    if w as usize > n {
        return 0.0;
    }
    cs_bound(w, n, ell)
        .min(binomial(n, w))
        .min((ell as f64).exp2())
}

/// Which per-distance pair-count bound the dispersion machinery plugs in.
#[derive(Clone)]
pub enum CsBoundKind {
    /// The closed-form expression, evaluated in the log2 domain.
    ClosedForm,
    /// Caller-supplied bound `f(w, n, ell)`; must be sound for the sets the
    /// caller cares about.
    Pluggable(Arc<dyn Fn(u32, usize, usize) -> f64 + Send + Sync>),
}

impl CsBoundKind {
    /// The built-in tightened variant as a pluggable bound.
    pub fn tightened() -> CsBoundKind {
        CsBoundKind::Pluggable(Arc::new(tightened_cs_bound))
    }

    fn log2_coeff(&self, w: u32, n: usize, ell: usize) -> f64 {
        match self {
            CsBoundKind::ClosedForm => log2_cs_bound(w, n, ell),
            CsBoundKind::Pluggable(f) => f(w, n, ell).log2(),
        }
    }
}

impl fmt::Debug for CsBoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsBoundKind::ClosedForm => f.write_str("ClosedForm"),
            CsBoundKind::Pluggable(_) => f.write_str("Pluggable(..)"),
        }
    }
}

/// Parameters of a dispersion-bound evaluation: point-space dimension `n`,
/// set-size slack `k` (sets up to `k 2^m` elements), dispersion target
/// `rho`, the prefix length `qs` from which the target must hold, and the
/// pair-count bound to plug in.
#[derive(Clone, Debug)]
pub struct DispersionBoundConfig {
    pub n: usize,
    pub k: f64,
    pub rho: f64,
    pub qs: usize,
    pub kind: CsBoundKind,
}

impl DispersionBoundConfig {
    pub fn new(
        n: usize,
        k: f64,
        rho: f64,
        qs: usize,
        kind: CsBoundKind,
    ) -> Result<DispersionBoundConfig, DensityError> {
        if n == 0 {
            return Err(DensityError::BadN);
        }
        if !(k.is_finite() && k > 1.0) {
            return Err(DensityError::BadK(k));
        }
        if !(rho.is_finite() && rho > 1.0) {
            return Err(DensityError::BadRho(rho));
        }
        if qs == 0 {
            return Err(DensityError::BadQs);
        }
        Ok(DispersionBoundConfig { n, k, rho, qs, kind })
    }

    /// Distance cutoff `ell = ceil(m + log2 k)` at prefix length `m`.
    pub fn ell(&self, m: usize) -> usize {
        (m as f64 + self.k.log2()).ceil() as usize
    }
}

/// One distance's contribution to a dispersion bound, kept in the log2
/// domain so exploding coefficients stay inspectable.
#[derive(Clone, Debug)]
pub struct BoundTerm {
    pub w: u32,
    pub log2_coeff: f64,
    pub log2_r: f64,
}

impl BoundTerm {
    /// Linear-domain value, zero whenever the excess `r` is zero (a dense
    /// row prefix) regardless of the coefficient.
    pub fn value(&self) -> f64 {
        if self.log2_r == f64::NEG_INFINITY {
            0.0
        } else {
            (self.log2_coeff + self.log2_r).exp2()
        }
    }
}

/// A dispersion bound at one prefix length, with its term breakdown.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub m: usize,
    pub ell: usize,
    /// The distance-zero self-pair term `1 - 2^-m`.
    pub base: f64,
    pub terms: Vec<BoundTerm>,
    pub total: f64,
}

/// Evaluates the worst-case scaled dispersion at prefix length `m` for the
/// schedule prefix `p` (only `p[..m]` is read).
pub fn dispersion_bound(p: &[f64], m: usize, cfg: &DispersionBoundConfig) -> BoundReport {
    assert!(m >= 1 && m <= p.len(), "prefix length {m} out of range");
    let ell = cfg.ell(m);
    let base = 1.0 - (-(m as f64)).exp2();
    let mut terms = Vec::with_capacity(ell);
    let mut total = base;
    for w in 1..=ell as u32 {
        let term = BoundTerm {
            w,
            log2_coeff: cfg.kind.log2_coeff(w, cfg.n, ell),
            log2_r: log2_collision_r(p, w, m),
        };
        total += term.value();
        terms.push(term);
    }
    BoundReport {
        m,
        ell,
        base,
        terms,
        total,
    }
}

/// Smallest prefix length from which the schedule's dispersion bound stays
/// at or below `cfg.rho` through length `n`, or `None` if even the full
/// length fails. `cfg.qs` is ignored; this function computes it.
pub fn find_qs(schedule: &DensitySchedule, cfg: &DispersionBoundConfig) -> Option<usize> {
    let n = schedule.len();
    assert_eq!(n, cfg.n, "schedule length must match the configured dimension");
    let p = schedule.densities();
    let mut last_fail = 0;
    for m in 1..=n {
        if dispersion_bound(p, m, cfg).total > cfg.rho {
            last_fail = m;
        }
    }
    if last_fail == n {
        None
    } else {
        Some(last_fail + 1)
    }
}

/// A solved schedule plus the rows where even the densest admissible value
/// failed the target and the solver kept the cap.
#[derive(Clone, Debug)]
pub struct SolvedSchedule {
    pub schedule: DensitySchedule,
    pub saturated_rows: Vec<usize>,
}

/// Greedy sparsest-schedule construction: row by row, bisect the smallest
/// density in `(0, min(1/2, previous))` keeping the dispersion bound at that
/// prefix within `cfg.rho`. Rows before `cfg.qs` carry no constraint and
/// stay at the cap, as do rows where the cap itself fails (recorded in
/// `saturated_rows`).
///
/// Row `i`'s bound only involves densities up to `i`, so fixed rows never
/// need revisiting. The per-candidate evaluation reuses running `ln(1+x^w)`
/// prefix sums rather than re-walking fixed rows.
pub fn solve_schedule(cfg: &DispersionBoundConfig) -> SolvedSchedule {
    let n = cfg.n;
    let ell_max = cfg.ell(n);
    let mut p: Vec<f64> = Vec::with_capacity(n);
    let mut saturated_rows = Vec::new();
    // sums[w - 1] = sum over fixed rows j of ln(1 + x_j^w)
    let mut sums = vec![0.0f64; ell_max];

    for i in 1..=n {
        let cap = if i == 1 { 0.5 } else { p[i - 2].min(0.5) };
        let ell = cfg.ell(i);
        let log2_coeffs: Vec<f64> = (1..=ell as u32)
            .map(|w| cfg.kind.log2_coeff(w, n, ell))
            .collect();
        let base = 1.0 - (-(i as f64)).exp2();
        let feasible = |cand: f64| -> bool {
            let x = 1.0 - 2.0 * cand;
            let mut total = base;
            for w in 1..=ell as u32 {
                let s = sums[w as usize - 1] + x.powi(w as i32).ln_1p();
                let log2_r = log2_expm1(s) - i as f64;
                if log2_r > f64::NEG_INFINITY {
                    total += (log2_coeffs[w as usize - 1] + log2_r).exp2();
                }
                if total > cfg.rho {
                    return false;
                }
            }
            total <= cfg.rho
        };

        let chosen = if i < cfg.qs {
            cap
        } else if !feasible(cap) {
            saturated_rows.push(i);
            cap
        } else {
            let (mut lo, mut hi) = (0.0f64, cap);
            while hi - lo > SOLVE_TOL {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let x = 1.0 - 2.0 * chosen;
        for w in 1..=ell_max as u32 {
            sums[w as usize - 1] += x.powi(w as i32).ln_1p();
        }
        p.push(chosen);
    }

    let schedule = DensitySchedule::new(p, ScheduleKind::Solved)
        .expect("solver output is monotone and in range by construction");
    SolvedSchedule {
        schedule,
        saturated_rows,
    }
}

/// The fitted log-over-index schedule `p_i = min(1/2, 1.6 log2(i+1) / i)`.
pub fn lsa_schedule(n: usize) -> DensitySchedule {
    let p = (1..=n)
        .map(|i| (1.6 * ((i + 1) as f64).log2() / i as f64).min(0.5))
        .collect();
    DensitySchedule::new(p, ScheduleKind::Lsa).expect("lsa densities are monotone and in range")
}

/// The analytical schedule: `p_1 = 1/2` and for `i >= 2`
/// `p_i = min(1/2, p_{i-1}, (16 / H^-1(i / (i + log2 k))) log2(i) / i)`.
pub fn theoretical_schedule(n: usize, k: f64) -> DensitySchedule {
    assert!(k.is_finite() && k > 1.0, "k must be > 1, got {k}");
    let log2k = k.log2();
    let mut p = Vec::with_capacity(n);
    if n >= 1 {
        p.push(0.5);
    }
    for i in 2..=n {
        let delta = i as f64 / (i as f64 + log2k);
        let raw = 16.0 / inv_binary_entropy(delta) * (i as f64).log2() / i as f64;
        let prev = p[i - 2];
        p.push(raw.min(0.5).min(prev));
    }
    DensitySchedule::new(p, ScheduleKind::Theoretical)
        .expect("clamped densities are monotone and in range")
}
