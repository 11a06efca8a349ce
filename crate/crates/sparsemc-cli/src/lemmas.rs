//! The `verify` subcommand: exhaustive desk-scale sweeps of every lemma
//! the counting analysis leans on, each reported pass/fail with case and
//! violation counts. Exit code 1 when anything fails.

use std::time::Instant;

use clap::Args;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use serde_json::json;

use sparsemc::density::{
    collision_r, dispersion_bound, lsa_schedule, CsBoundKind, DispersionBoundConfig,
};
use sparsemc::hashgen::{derive_iteration_seed, DensitySchedule};
use sparsemc::verify::{
    canonicalize, check_probability_bounds, exhaustive_hash_moments, is_down_set,
    is_left_compressed, max_weighted_pairsum, monte_carlo_dispersion, rational_from_f64,
    variance_formula, ExplicitSet, Rational,
};

use crate::report::{value, RunReport};

#[derive(Args)]
pub struct VerifyArgs {
    /// Monte Carlo trials per calibration case.
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub trials: u64,
    /// Seed for the Monte Carlo calibration lemma; every exhaustive sweep
    /// is deterministic regardless.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Serialize)]
struct Lemma {
    name: &'static str,
    pass: bool,
    cases: usize,
    violations: usize,
    detail: String,
}

impl Lemma {
    fn new(name: &'static str, cases: usize, violations: usize, detail: String) -> Lemma {
        Lemma { name, pass: violations == 0, cases, violations, detail }
    }
}

fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// All 255 non-empty subsets of {0,1}^3.
fn all_cube_sets() -> Vec<ExplicitSet> {
    (1u32..256)
        .map(|selector| {
            let members = (0..8).filter(|&p| selector >> p & 1 == 1).map(|p| p as u32);
            ExplicitSet::new(3, members).expect("masks fit dimension 3")
        })
        .collect()
}

/// Density pairs (p1, p2) from the grid {1/10, 1/4, 1/2} with p1 >= p2;
/// prefix length 1 reads p1 alone, prefix length 2 both.
fn grid_families() -> Vec<(Rational, Rational)> {
    let grid = [ratio(1, 10), ratio(1, 4), ratio(1, 2)];
    let mut families = Vec::new();
    for p1 in &grid {
        for p2 in &grid {
            if p2 <= p1 {
                families.push((p1.clone(), p2.clone()));
            }
        }
    }
    families
}

/// One exhaustively measured cell distribution within the sweep.
struct MomentCase {
    family: usize,
    m: usize,
    size: usize,
    dispersion: f64,
}

struct MomentSweep {
    lemmas: Vec<Lemma>,
    cases: Vec<MomentCase>,
}

/// Walks every (set, family, prefix length) combination once, feeding the
/// mean, variance, dense-dispersion, bound-soundness, and probability
/// lemmas from the same exhaustive distributions.
fn sweep_moments(sets: &[ExplicitSet], families: &[(Rational, Rational)]) -> MomentSweep {
    // Cross-representation slack: exact rational dispersions are compared
    // against f64 bound evaluations, and the tightened bound is attained
    // exactly by the full cube, so equality cases must survive rounding.
    const SLACK: f64 = 1e-12;

    let mut total = 0usize;
    let mut mean_bad = 0usize;
    let mut var_bad = 0usize;
    let mut dense_cases = 0usize;
    let mut dense_bad = 0usize;
    let mut bound_cases = 0usize;
    let mut bound_bad = 0usize;
    let mut min_margin = f64::INFINITY;
    let mut prob_cases = 0usize;
    let mut prob_bad = 0usize;
    let mut cases = Vec::new();

    let betas = [ratio(3, 10), ratio(1, 2), ratio(7, 10)];
    let half = ratio(1, 2);

    for (fam_idx, (p1, p2)) in families.iter().enumerate() {
        let densities = vec![p1.clone(), p2.clone(), p2.clone()];
        let densities_f64: Vec<f64> = densities.iter().map(to_f64).collect();
        for m in 1..=2usize {
            let is_dense = densities[..m].iter().all(|p| *p == half);
            for s in sets {
                total += 1;
                let moments = exhaustive_hash_moments(s, &densities, m)
                    .expect("sweep cases satisfy the enumeration guard");

                if moments.mean != ratio(s.len() as i64, 1 << m) {
                    mean_bad += 1;
                }
                if moments.variance != variance_formula(s, &densities, m).expect("guarded") {
                    var_bad += 1;
                }

                let dispersion = moments.dispersion().expect("non-empty set has positive mean");
                let dispersion_f64 = to_f64(&dispersion);
                if is_dense {
                    dense_cases += 1;
                    if dispersion > Rational::from_integer(BigInt::from(1)) {
                        dense_bad += 1;
                    }
                }

                for kind in [CsBoundKind::ClosedForm, CsBoundKind::tightened()] {
                    let cfg = DispersionBoundConfig::new(3, 512.0, 1.1, 1, kind)
                        .expect("static sweep configuration is valid");
                    let bound = dispersion_bound(&densities_f64, m, &cfg).total;
                    bound_cases += 1;
                    min_margin = min_margin.min(bound - dispersion_f64);
                    if dispersion_f64 > bound * (1.0 + SLACK) + SLACK {
                        bound_bad += 1;
                    }
                }

                for beta in &betas {
                    prob_cases += 1;
                    let report = check_probability_bounds(s, &densities, m, beta)
                        .expect("guarded sweep case");
                    if !report.holds() {
                        prob_bad += 1;
                    }
                }

                cases.push(MomentCase { family: fam_idx, m, size: s.len(), dispersion: dispersion_f64 });
            }
        }
    }

    let lemmas = vec![
        Lemma::new(
            "mean-identity",
            total,
            mean_bad,
            "exhaustive mean vs set size over cell count, exact rationals".into(),
        ),
        Lemma::new(
            "variance-identity",
            total,
            var_bad,
            "exhaustive variance vs pair-count formula, exact rationals".into(),
        ),
        Lemma::new(
            "dense-dispersion-unit-bound",
            dense_cases,
            dense_bad,
            "dispersion of half-density schedules stays at or below 1".into(),
        ),
        Lemma::new(
            "dispersion-bound-soundness",
            bound_cases,
            bound_bad,
            format!("closed-form and tightened bounds, tightest margin {min_margin:.3e}"),
        ),
        Lemma::new(
            "probability-bounds",
            prob_cases,
            prob_bad,
            "exact tails vs concentration and anti-concentration bounds, beta in {0.3, 0.5, 0.7}"
                .into(),
        ),
    ];
    MomentSweep { lemmas, cases }
}

/// Monotone non-increasing weight panel for the extremal-set lemma: unit
/// weights, geometric decay, and kernel-excess weights of the sparse and
/// half-density schedules at both swept prefix lengths.
fn weight_panel(n: usize) -> Vec<(String, Vec<f64>)> {
    let lsa: Vec<f64> = lsa_schedule(n).densities().to_vec();
    let dense = vec![0.5; n];
    let mut panel: Vec<(String, Vec<f64>)> = vec![
        ("unit".into(), vec![1.0; n + 1]),
        ("geometric".into(), (0..=n).map(|w| 0.5f64.powi(w as i32)).collect()),
    ];
    for (label, schedule) in [("lsa", &lsa), ("dense", &dense)] {
        for m in 1..=2usize {
            let weights = (0..=n).map(|w| collision_r(schedule, w as u32, m)).collect();
            panel.push((format!("r-{label}-m{m}"), weights));
        }
    }
    panel
}

fn sweep_downleftset() -> Lemma {
    let mut cases = 0usize;
    let mut violations = 0usize;
    let mut attains = 0usize;
    for n in 2..=4usize {
        for (_, weights) in weight_panel(n) {
            for size in 1..=1usize << n {
                cases += 1;
                let report = max_weighted_pairsum(n, size, |w| weights[w])
                    .expect("sweep sizes are within range");
                if !report.canonical_maximizer_exists {
                    violations += 1;
                }
                if report.canonicalize_attains {
                    attains += 1;
                }
            }
        }
    }
    Lemma::new(
        "downleftset-extremal",
        cases,
        violations,
        format!("canonicalize re-attains the maximum in {attains} of {cases} cases"),
    )
}

fn sweep_canonicalize_closure() -> Lemma {
    let mut cases = 0usize;
    let mut violations = 0usize;
    for n in [3usize, 4] {
        let points = 1usize << n;
        for selector in 1u32..(1u32 << points) {
            cases += 1;
            let members = (0..points as u32).filter(|&p| selector >> p & 1 == 1);
            let s = ExplicitSet::new(n, members).expect("masks fit dimension");
            let (canon, _) = canonicalize(&s);
            if canon.len() != s.len() || !is_down_set(&canon) || !is_left_compressed(&canon) {
                violations += 1;
            }
        }
    }
    Lemma::new(
        "canonicalize-closure",
        cases,
        violations,
        "output is a left-compressed down-set of unchanged size".into(),
    )
}

/// Checks the parameter-direction property on the recorded sweep: once a
/// family meets a dispersion ceiling for every guarded (m, size) case, it
/// also meets any looser ceiling, later starting row, or smaller load.
fn sweep_concentration_direction(families: usize, cases: &[MomentCase]) -> Lemma {
    let rho_grid = [1.05, 1.2, 2.0];
    let qs_grid = [1usize, 2];
    let k_grid = [1.0f64, 4.0, 512.0];

    let passes = |family: usize, rho: f64, qs: usize, k: f64| -> bool {
        cases
            .iter()
            .filter(|c| c.family == family && c.m >= qs && c.size as f64 <= k * (1 << c.m) as f64)
            .all(|c| c.dispersion <= rho)
    };

    let mut checked = 0usize;
    let mut violations = 0usize;
    for family in 0..families {
        for &rho in &rho_grid {
            for &qs in &qs_grid {
                for &k in &k_grid {
                    if !passes(family, rho, qs, k) {
                        continue;
                    }
                    for &rho2 in rho_grid.iter().filter(|&&r| r >= rho) {
                        for &qs2 in qs_grid.iter().filter(|&&q| q >= qs) {
                            for &k2 in k_grid.iter().filter(|&&kk| kk <= k) {
                                checked += 1;
                                if !passes(family, rho2, qs2, k2) {
                                    violations += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Lemma::new(
        "concentration-direction",
        checked,
        violations,
        "guarantee survives larger rho, larger qs, smaller k on recorded sweeps".into(),
    )
}

fn sweep_monte_carlo(trials: usize, seed: u64) -> Lemma {
    let lsa3 = lsa_schedule(3);
    let dense3 = DensitySchedule::dense(3);
    let sets = [
        ExplicitSet::from_strs(&["000", "001", "010", "100"]).unwrap(),
        ExplicitSet::from_strs(&["000", "011", "101", "110"]).unwrap(),
    ];
    let cases: [(&ExplicitSet, &DensitySchedule, usize); 4] = [
        (&sets[0], &lsa3, 1),
        (&sets[0], &lsa3, 2),
        (&sets[1], &dense3, 2),
        (&sets[1], &lsa3, 2),
    ];

    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for (idx, (s, schedule, m)) in cases.iter().enumerate() {
        let densities: Vec<Rational> = schedule
            .densities()
            .iter()
            .map(|&p| rational_from_f64(p).expect("densities are finite"))
            .collect();
        let exact = exhaustive_hash_moments(s, &densities, *m)
            .expect("guarded case")
            .dispersion()
            .map(|d| to_f64(&d))
            .unwrap_or(0.0);

        let mut rng = ChaCha12Rng::seed_from_u64(derive_iteration_seed(seed, idx as u64));
        let mc = monte_carlo_dispersion(s, schedule, *m, trials, &mut rng)
            .expect("trial count validated by the flag parser");
        let gap = (mc.dispersion - exact).abs();
        // Tiny absolute floor so an exactly-converged case with zero
        // spread cannot fail on roundoff.
        if gap > 3.0 * mc.stderr + 1e-9 {
            violations += 1;
        }
        if mc.stderr > 0.0 {
            worst = worst.max(gap / mc.stderr);
        }

        let mut rng = ChaCha12Rng::seed_from_u64(derive_iteration_seed(seed, idx as u64));
        let again = monte_carlo_dispersion(s, schedule, *m, trials, &mut rng).expect("same case");
        if again.dispersion != mc.dispersion || again.stderr != mc.stderr {
            violations += 1;
        }
    }
    Lemma::new(
        "monte-carlo-calibration",
        cases.len(),
        violations,
        format!("sampled dispersion within 3 standard errors, worst gap {worst:.2} stderr"),
    )
}

pub fn run(args: VerifyArgs) -> anyhow::Result<u8> {
    let started = Instant::now();
    let sets = all_cube_sets();
    let families = grid_families();

    let sweep = sweep_moments(&sets, &families);
    let mut lemmas = sweep.lemmas;
    lemmas.push(sweep_downleftset());
    lemmas.push(sweep_canonicalize_closure());
    lemmas.push(sweep_concentration_direction(families.len(), &sweep.cases));
    lemmas.push(sweep_monte_carlo(args.trials as usize, args.seed));

    for lemma in &lemmas {
        eprintln!(
            "{}: {} ({} cases, {} violations)",
            lemma.name,
            if lemma.pass { "pass" } else { "FAIL" },
            lemma.cases,
            lemma.violations
        );
    }
    let all_pass = lemmas.iter().all(|l| l.pass);

    RunReport {
        command: "verify",
        seed: args.seed,
        parameters: json!({ "trials": args.trials, "seed": args.seed }),
        results: json!({ "lemmas": value(&lemmas), "all_pass": all_pass }),
        timings: json!({ "wall_seconds": started.elapsed().as_secs_f64() }),
    }
    .print();

    Ok(if all_pass { 0 } else { 1 })
}
