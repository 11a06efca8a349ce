//! End-to-end counting behavior: shortcut agreement with the exhaustive
//! counter, tolerance on a mid-size instance, and input guards.

mod common;

use sparsemc::counter::{approxmc5, compute_mstar, CounterError, CounterParams};
use sparsemc::formula::{Clause, CnfFormula, CnfXorFormula};
use sparsemc::oracle::OracleConfig;
use sparsemc::verify::{exact_count, observed_epsilon};

/// Mixed bag of seeded instances whose exact counts stay below the
/// shortcut gate of 1296 at the default parameters.
#[test]
fn small_instances_resolve_exactly_through_the_shortcut() {
    let params = CounterParams::new(0.8, 0.1);
    let oracle = OracleConfig::default();
    let mut checked = 0;
    for seed in 0..20u64 {
        let f = match seed % 3 {
            0 => common::random_cnf(10, 14 + (seed % 5) as usize, seed),
            1 => common::parity_block(9, 2 + (seed % 3) as usize, seed),
            _ => common::random_cnf(12, 20, seed),
        };
        let exact = exact_count(&f).unwrap();
        if exact >= 1296 {
            continue;
        }
        let estimate = approxmc5(&f, &params, &oracle).unwrap();
        assert!(estimate.exact_shortcut, "seed {seed} should gate on the initial count");
        assert_eq!(estimate.value, exact as u128, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 10, "instance family drifted out of shortcut range");
}

#[test]
fn mid_size_estimate_lands_within_tolerance() {
    // (x1 | x2 | x3) & (!x1 | !x2) over 14 variables: 5 * 2^11 models,
    // far enough past the shortcut gate to exercise the full pipeline.
    let f = CnfXorFormula::from_cnf(
        CnfFormula::new(
            14,
            vec![Clause::new([1, 2, 3]).unwrap(), Clause::new([-1, -2]).unwrap()],
            None,
        )
        .unwrap(),
    );
    let exact = exact_count(&f).unwrap() as f64;
    assert_eq!(exact, 10240.0);

    let params = CounterParams::new(0.8, 0.1);
    let oracle = OracleConfig::default();
    let first = approxmc5(&f, &params, &oracle).unwrap();
    assert!(!first.exact_shortcut);
    assert_eq!(first.iterations.len(), 84);

    let eps = observed_epsilon(first.value as f64, exact).unwrap();
    assert!(eps <= 0.8, "observed epsilon {eps} blew the budget");

    // Search diagnostics: iteration prefix lengths should cluster around
    // the predicted landing zone. Logged, not asserted.
    let mstar = compute_mstar(exact.log2(), params.epsilon, params.rho);
    let mut histogram = std::collections::BTreeMap::new();
    for r in &first.iterations {
        *histogram.entry(r.m).or_insert(0u32) += 1;
    }
    println!("m* = {mstar}, landing histogram {histogram:?}");

    let second = approxmc5(&f, &params, &oracle).unwrap();
    assert_eq!(first.value, second.value, "same seed must reproduce the estimate");
}

#[test]
fn estimates_respect_projections_with_parity_structure() {
    // Parity ties halve the space; projection hides the last variable.
    let f = CnfXorFormula::new(
        CnfFormula::new(11, vec![], Some((1..=10).collect())).unwrap(),
        vec![
            sparsemc::formula::XorConstraint::from_lits(&[1, 2, 3]),
            sparsemc::formula::XorConstraint::from_lits(&[4, 5]),
        ],
    )
    .unwrap();
    let exact = exact_count(&f).unwrap();
    assert_eq!(exact, 256);

    let estimate = approxmc5(&f, &CounterParams::new(0.8, 0.1), &OracleConfig::default()).unwrap();
    assert!(estimate.exact_shortcut);
    assert_eq!(estimate.value, 256);
}

#[test]
fn oversized_projections_are_rejected_up_front() {
    let f = common::free_block(130);
    let err = approxmc5(&f, &CounterParams::new(0.8, 0.1), &OracleConfig::default()).unwrap_err();
    assert!(matches!(err, CounterError::ProjectionTooWide { n: 130, .. }), "got: {err}");
}
