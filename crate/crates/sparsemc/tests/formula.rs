//! Round-trip, encoding, and blocking-clause properties of the formula
//! layer, cross-checked against the exhaustive counter.

mod common;

use proptest::prelude::*;

use sparsemc::formula::{
    blocking_clause, parse_dimacs, render_dimacs, tseitinize_all, Clause, CnfFormula,
    CnfXorFormula,
};
use sparsemc::oracle::{solve, OracleConfig, SolveOutcome};
use sparsemc::verify::exact_count;

proptest! {
    /// Rendering fixes a canonical form: parsing it back and re-rendering
    /// reproduces the exact bytes.
    #[test]
    fn dimacs_render_is_a_fixed_point(f in common::arb_formula(10)) {
        let rendered = render_dimacs(&f);
        let reparsed = parse_dimacs(&rendered).expect("rendered DIMACS parses");
        prop_assert_eq!(render_dimacs(&reparsed), rendered);
    }

    /// Clause expansion of parity constraints preserves the projected
    /// model count, whatever chunk width drives the chaining.
    #[test]
    fn tseitin_expansion_preserves_projected_counts(
        f in common::arb_formula(8),
        width in 3usize..=5,
    ) {
        let expanded = tseitinize_all(&f, width).expect("width is valid");
        prop_assert!(expanded.xors().is_empty());
        prop_assert_eq!(
            exact_count(&expanded).expect("connector growth stays in the guard"),
            exact_count(&f).expect("base formula is in the guard"),
        );
    }

    /// Adding the blocking clause of a model removes exactly that one
    /// point of the projected solution space.
    #[test]
    fn blocking_a_model_removes_one_projected_point(f in common::arb_formula(8)) {
        let cfg = OracleConfig::default();
        if let SolveOutcome::Sat(model) = solve(&f, &cfg).expect("builtin solve") {
            let before = exact_count(&f).unwrap();
            let mut blocked = f.clone();
            blocked.cnf.add_clause(blocking_clause(&model, f.projection()))
                .expect("blocking literals are in range");
            let after = exact_count(&blocked).unwrap();
            prop_assert_eq!(after, before - 1);
            prop_assert!(!blocked.is_model(&model));
        }
    }
}

#[test]
fn fuzz_corpus_seeds_parse_and_round_trip() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fuzz/corpus/fuzz_parse_dimacs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).expect("corpus directory exists") {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let f = parse_dimacs(&text)
            .unwrap_or_else(|e| panic!("seed {} must parse: {e}", path.display()));
        let rendered = render_dimacs(&f);
        let again = parse_dimacs(&rendered).expect("rendered seed reparses");
        assert_eq!(render_dimacs(&again), rendered, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 4, "corpus lost its seeds");
}

#[test]
fn projection_survives_clause_expansion() {
    let cnf = CnfFormula::new(6, vec![Clause::new([1, 2]).unwrap()], Some(vec![1, 2, 3])).unwrap();
    let f = CnfXorFormula::new(
        cnf,
        vec![sparsemc::formula::XorConstraint::from_lits(&[1, 2, 3, 4, 5, 6])],
    )
    .unwrap();
    let expanded = tseitinize_all(&f, 3).unwrap();
    assert!(expanded.num_vars() > f.num_vars(), "chaining must add connectors");
    assert_eq!(expanded.projection(), f.projection());
}
