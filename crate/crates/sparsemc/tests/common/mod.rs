//! Instance builders shared by the integration tests.

#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use sparsemc::formula::{Clause, CnfFormula, CnfXorFormula, XorConstraint};

/// Random formulas small enough for exhaustive cross-checks: a handful of
/// short clauses, up to two narrow parity constraints, and an optional
/// projection.
pub fn arb_formula(max_vars: u32) -> impl Strategy<Value = CnfXorFormula> {
    (1..=max_vars).prop_flat_map(|n| {
        let lit = (1..=n, any::<bool>()).prop_map(|(v, neg)| if neg { -(v as i32) } else { v as i32 });
        let clauses = proptest::collection::vec(proptest::collection::vec(lit, 1..=3), 0..=6);
        let xors = proptest::collection::vec(
            (
                proptest::collection::btree_set(1..=n, 1..=(n as usize).min(4)),
                any::<bool>(),
            ),
            0..=2,
        );
        let projection = proptest::option::of(proptest::collection::btree_set(1..=n, 1..=n as usize));
        (Just(n), clauses, xors, projection).prop_map(|(n, clauses, xors, projection)| {
            let clauses: Vec<Clause> =
                clauses.into_iter().filter_map(Clause::new).collect();
            let cnf = CnfFormula::new(n, clauses, projection.map(|p| p.into_iter().collect()))
                .expect("generated formulas are in range");
            let xors: Vec<XorConstraint> = xors
                .into_iter()
                .map(|(vars, rhs)| XorConstraint::new(vars, rhs))
                .collect();
            CnfXorFormula::new(cnf, xors).expect("generated parity vars are in range")
        })
    })
}

/// Seeded random CNF of 3-literal clauses, projected onto all variables.
pub fn random_cnf(num_vars: u32, num_clauses: usize, seed: u64) -> CnfXorFormula {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(num_clauses);
    while clauses.len() < num_clauses {
        let lits: Vec<i32> = (0..3)
            .map(|_| {
                let v = rng.gen_range(1..=num_vars) as i32;
                if rng.gen() { v } else { -v }
            })
            .collect();
        if let Some(c) = Clause::new(lits) {
            clauses.push(c);
        }
    }
    CnfXorFormula::from_cnf(
        CnfFormula::new(num_vars, clauses, None).expect("literals are in range"),
    )
}

/// Unconstrained block: every assignment is a model.
pub fn free_block(num_vars: u32) -> CnfXorFormula {
    CnfXorFormula::from_cnf(CnfFormula::new(num_vars, vec![], None).expect("positive width"))
}

/// Free variables cut down by seeded random parity constraints; each
/// independent parity row halves the count.
pub fn parity_block(num_vars: u32, rows: usize, seed: u64) -> CnfXorFormula {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let xors: Vec<XorConstraint> = (0..rows)
        .map(|_| {
            let vars: Vec<u32> =
                (1..=num_vars).filter(|_| rng.gen_bool(0.5)).collect();
            let vars = if vars.is_empty() { vec![1] } else { vars };
            XorConstraint::new(vars, rng.gen())
        })
        .collect();
    CnfXorFormula::new(
        CnfFormula::new(num_vars, vec![], None).expect("positive width"),
        xors,
    )
    .expect("parity vars are in range")
}
