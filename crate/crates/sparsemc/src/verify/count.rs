//! Exact projected model counting by exhaustive assignment enumeration,
//! plus the relative-error measure used to score approximate counts.

use crate::formula::CnfXorFormula;
use crate::verify::{VerifyError, MAX_SET_DIM};

/// Counts projected models by walking all 2^n assignments, pruning on the
/// first falsified clause, and deduplicating on the projection variables.
/// Guarded to n <= [`MAX_SET_DIM`] variables.
pub fn exact_count(f: &CnfXorFormula) -> Result<u64, VerifyError> {
    let n = f.num_vars() as usize;
    if n > MAX_SET_DIM {
        return Err(VerifyError::DimensionTooLarge { n, max: MAX_SET_DIM });
    }

    // Variable v lives at bit v-1. A clause is satisfied when some positive
    // literal's bit is set or some negative literal's bit is clear.
    let clauses: Vec<(u32, u32)> = f
        .cnf
        .clauses()
        .iter()
        .map(|c| {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for &lit in c.lits() {
                let bit = 1u32 << (lit.unsigned_abs() - 1);
                if lit > 0 {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg)
        })
        .collect();
    let xors: Vec<(u32, u32)> = f
        .xors()
        .iter()
        .map(|x| {
            let mask = x.vars().iter().fold(0u32, |acc, &v| acc | 1 << (v - 1));
            (mask, x.rhs() as u32)
        })
        .collect();
    let projection_mask = f
        .projection()
        .iter()
        .fold(0u32, |acc, &v| acc | 1 << (v - 1));

    let mut seen = vec![0u64; (1usize << n).div_ceil(64)];
    for assignment in 0..1u64 << n {
        let assignment = assignment as u32;
        let satisfied = clauses
            .iter()
            .all(|&(pos, neg)| assignment & pos != 0 || !assignment & neg != 0)
            && xors
                .iter()
                .all(|&(mask, rhs)| (assignment & mask).count_ones() & 1 == rhs);
        if satisfied {
            let key = (assignment & projection_mask) as usize;
            seen[key >> 6] |= 1 << (key & 63);
        }
    }
    Ok(seen.iter().map(|w| w.count_ones() as u64).sum())
}

/// Relative error of an estimate against an exact count, symmetric in over-
/// and underestimation: max(exact/estimate, estimate/exact) - 1.
pub fn observed_epsilon(estimate: f64, exact: f64) -> Result<f64, VerifyError> {
    if !(estimate > 0.0 && exact > 0.0) || !estimate.is_finite() || !exact.is_finite() {
        return Err(VerifyError::NonPositiveCount);
    }
    Ok((exact / estimate).max(estimate / exact) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, CnfFormula, XorConstraint};

    fn cnf(num_vars: u32, clauses: Vec<Clause>, projection: Option<Vec<u32>>) -> CnfFormula {
        CnfFormula::new(num_vars, clauses, projection).unwrap()
    }

    #[test]
    fn counts_free_variables_and_clauses() {
        let free = CnfXorFormula::from_cnf(cnf(3, vec![], None));
        assert_eq!(exact_count(&free).unwrap(), 8);

        let or = CnfXorFormula::from_cnf(cnf(
            2,
            vec![Clause::new([1, 2]).unwrap()],
            None,
        ));
        assert_eq!(exact_count(&or).unwrap(), 3);
    }

    #[test]
    fn projection_deduplicates_extensions() {
        // (x1 or x2) projected onto x1: both x1 values extend to a model.
        let f = CnfXorFormula::from_cnf(cnf(
            2,
            vec![Clause::new([1, 2]).unwrap()],
            Some(vec![1]),
        ));
        assert_eq!(exact_count(&f).unwrap(), 2);
    }

    #[test]
    fn xor_constraints_halve_the_space() {
        let f = CnfXorFormula::new(
            cnf(3, vec![], None),
            vec![XorConstraint::new([1, 2], true)],
        )
        .unwrap();
        assert_eq!(exact_count(&f).unwrap(), 4);

        let contradiction = CnfXorFormula::new(
            cnf(2, vec![], None),
            vec![
                XorConstraint::new([1, 2], true),
                XorConstraint::new([1, 2], false),
            ],
        )
        .unwrap();
        assert_eq!(exact_count(&contradiction).unwrap(), 0);
    }

    #[test]
    fn dimension_guard_rejects_wide_formulas() {
        let f = CnfXorFormula::from_cnf(cnf(27, vec![], None));
        assert!(matches!(
            exact_count(&f),
            Err(VerifyError::DimensionTooLarge { n: 27, max: MAX_SET_DIM })
        ));
    }

    #[test]
    fn epsilon_is_symmetric_relative_error() {
        assert_eq!(observed_epsilon(64.0, 64.0).unwrap(), 0.0);
        assert_eq!(observed_epsilon(128.0, 64.0).unwrap(), 1.0);
        assert_eq!(observed_epsilon(64.0, 128.0).unwrap(), 1.0);
        let eps = observed_epsilon(900.0, 1000.0).unwrap();
        assert!((eps - 1.0 / 9.0).abs() < 1e-12);
        assert!(observed_epsilon(0.0, 4.0).is_err());
        assert!(observed_epsilon(4.0, -1.0).is_err());
    }
}
