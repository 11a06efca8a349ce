//! Solver-facing differentials: the bounded enumerator against the
//! exhaustive counter, parity handling across encodings, and the external
//! adapter's failure surface.

mod common;

use proptest::prelude::*;

use sparsemc::formula::XorEncoding;
use sparsemc::oracle::{
    bounded_count, parse_solver_output, solve, Backend, OracleConfig, SolveOutcome, SolverVerdict,
};
use sparsemc::verify::exact_count;

proptest! {
    /// Blocking-clause enumeration with an unreachable cap returns the
    /// exhaustive projected count, one solver call per model plus the
    /// closing refutation.
    #[test]
    fn bounded_count_matches_exhaustive_count(f in common::arb_formula(12)) {
        let cfg = OracleConfig::default();
        let exact = exact_count(&f).expect("12 variables fit the guard");
        let result = bounded_count(&f, 1 << 13, &cfg).expect("builtin never errors");
        prop_assert_eq!(result.count, exact);
        prop_assert!(!result.saturated);
        prop_assert_eq!(result.solver_calls, exact + 1);
    }

    /// Satisfiability agrees between native parity propagation and clause
    /// expansion, and so do projected counts.
    #[test]
    fn native_and_tseitin_encodings_agree(f in common::arb_formula(10)) {
        let native = OracleConfig::default();
        let tseitin = OracleConfig {
            encoding: XorEncoding::tseitin_default(),
            ..OracleConfig::default()
        };
        let sat_native = matches!(solve(&f, &native).unwrap(), SolveOutcome::Sat(_));
        let sat_tseitin = matches!(solve(&f, &tseitin).unwrap(), SolveOutcome::Sat(_));
        prop_assert_eq!(sat_native, sat_tseitin);
        prop_assert_eq!(
            bounded_count(&f, 1 << 11, &native).unwrap().count,
            bounded_count(&f, 1 << 11, &tseitin).unwrap().count,
        );
    }

    /// Models the solver returns satisfy the formula they came from.
    #[test]
    fn returned_models_check_out(f in common::arb_formula(12)) {
        if let SolveOutcome::Sat(model) = solve(&f, &OracleConfig::default()).unwrap() {
            prop_assert!(f.is_model(&model));
        }
    }
}

#[test]
fn cap_saturation_reports_partial_count() {
    let f = common::free_block(8);
    let result = bounded_count(&f, 10, &OracleConfig::default()).unwrap();
    assert_eq!(result.count, 10);
    assert!(result.saturated);
    assert_eq!(result.solver_calls, 10);
}

#[test]
fn silent_external_solver_surfaces_as_an_error() {
    let cfg = OracleConfig {
        backend: Backend::External { command: "true".into() },
        encoding: XorEncoding::tseitin_default(),
        timeout: None,
    };
    let err = solve(&common::free_block(3), &cfg).unwrap_err();
    assert!(err.to_string().contains("solver"), "got: {err}");
}

#[test]
fn fuzz_corpus_seeds_parse_as_solver_output() {
    let dir = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fuzz/corpus/fuzz_parse_solver_output"
    );
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).expect("corpus directory exists") {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let verdict = parse_solver_output(&text)
            .unwrap_or_else(|e| panic!("seed {} must parse: {e}", path.display()));
        match verdict {
            SolverVerdict::Sat(_) | SolverVerdict::Unsat => {}
        }
        seen += 1;
    }
    assert!(seen >= 4, "corpus lost its seeds");
}
