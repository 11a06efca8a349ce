//! DIMACS CNF reader and writer, with two extensions:
//!
//! * `c ind v1 v2 ... 0` lines declare the projection (sampling) set; the
//!   union of all such lines is taken. Without any, the projection is every
//!   variable.
//! * `x` lines carry parity constraints: `x1 -2 3 0` asserts that the listed
//!   literals XOR to true. Negating a literal flips the parity, so a
//!   constraint with right-hand side false is written by negating its first
//!   literal. A bare `x 0` is the unsatisfiable empty parity.
//!
//! The header's constraint count covers clauses and `x` lines together.
//! Ordinary clauses may span lines; `x` and `c ind` lines must carry their
//! terminating `0` on the same line. Tautological clauses are accepted (they
//! count against the header) and then dropped. Anything past the declared
//! constraint count is an error.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Clause, CnfFormula, CnfXorFormula, FormulaError, XorConstraint};

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("line {line}: expected `p cnf <vars> <constraints>`, got {found:?}")]
    BadHeader { line: usize, found: String },
    #[error("line {line}: constraint data before the `p cnf` header")]
    MissingHeader { line: usize },
    #[error("line {line}: duplicate `p cnf` header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: header declares zero variables")]
    ZeroVars { line: usize },
    #[error("line {line}: bad token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range for {num_vars} variables")]
    LitOutOfRange {
        line: usize,
        lit: i64,
        num_vars: u32,
    },
    #[error("line {line}: xor line missing its terminating 0")]
    UnterminatedXor { line: usize },
    #[error("line {line}: `c ind` line missing its terminating 0")]
    UnterminatedInd { line: usize },
    #[error("line {line}: data after the terminating 0")]
    TrailingInLine { line: usize },
    #[error("clause starting on line {line} is missing its terminating 0")]
    UnterminatedClause { line: usize },
    #[error("header declares {declared} constraints but the file has {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("line {line}: constraint past the declared count")]
    TrailingGarbage { line: usize },
    #[error("no `p cnf` header found")]
    NoHeader,
    #[error(transparent)]
    Invalid(#[from] FormulaError),
}

/// Splits a line into whitespace tokens expected to be integers terminated
/// by `0`, all on this line. Returns the literals before the terminator.
fn parse_terminated_line(
    tokens: &[&str],
    line: usize,
    missing: DimacsError,
) -> Result<Vec<i64>, DimacsError> {
    let mut lits = Vec::with_capacity(tokens.len());
    let mut terminated = false;
    for (i, tok) in tokens.iter().enumerate() {
        let val: i64 = tok.parse().map_err(|_| DimacsError::BadToken {
            line,
            token: tok.to_string(),
        })?;
        if val == 0 {
            if i + 1 != tokens.len() {
                return Err(DimacsError::TrailingInLine { line });
            }
            terminated = true;
        } else {
            lits.push(val);
        }
    }
    if !terminated {
        return Err(missing);
    }
    Ok(lits)
}

pub fn parse_dimacs(input: &str) -> Result<CnfXorFormula, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut xors: Vec<XorConstraint> = Vec::new();
    let mut projection: Vec<u32> = Vec::new();
    // constraints closed so far, dropped tautologies included
    let mut closed = 0usize;
    let mut pending: Vec<i32> = Vec::new();
    let mut pending_line = 0usize;

    let check_lit = |lit: i64, line: usize, num_vars: u32| -> Result<i32, DimacsError> {
        if lit.unsigned_abs() > u64::from(num_vars) {
            return Err(DimacsError::LitOutOfRange {
                line,
                lit,
                num_vars,
            });
        }
        Ok(lit as i32)
    };

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            let rest = rest.trim_start();
            let is_ind = rest == "ind"
                || rest
                    .strip_prefix("ind")
                    .is_some_and(|t| t.starts_with(char::is_whitespace));
            if !is_ind {
                continue;
            }
            let Some((num_vars, _)) = header else {
                return Err(DimacsError::MissingHeader { line });
            };
            let tokens: Vec<&str> = rest["ind".len()..].split_whitespace().collect();
            let lits =
                parse_terminated_line(&tokens, line, DimacsError::UnterminatedInd { line })?;
            for v in lits {
                if v < 0 {
                    return Err(DimacsError::BadToken {
                        line,
                        token: v.to_string(),
                    });
                }
                check_lit(v, line, num_vars)?;
                projection.push(v as u32);
            }
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line });
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            let bad = || DimacsError::BadHeader {
                line,
                found: trimmed.to_string(),
            };
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(bad());
            }
            let num_vars: u32 = toks[2].parse().map_err(|_| bad())?;
            let declared: usize = toks[3].parse().map_err(|_| bad())?;
            if num_vars == 0 {
                return Err(DimacsError::ZeroVars { line });
            }
            header = Some((num_vars, declared));
            continue;
        }
        let Some((num_vars, declared)) = header else {
            return Err(DimacsError::MissingHeader { line });
        };
        if let Some(rest) = trimmed.strip_prefix(['x', 'X']) {
            if !pending.is_empty() {
                return Err(DimacsError::UnterminatedClause { line: pending_line });
            }
            if closed == declared {
                return Err(DimacsError::TrailingGarbage { line });
            }
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            let lits =
                parse_terminated_line(&tokens, line, DimacsError::UnterminatedXor { line })?;
            let mut checked = Vec::with_capacity(lits.len());
            for l in lits {
                checked.push(check_lit(l, line, num_vars)?);
            }
            xors.push(XorConstraint::from_lits(&checked));
            closed += 1;
            continue;
        }
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| DimacsError::BadToken {
                line,
                token: tok.to_string(),
            })?;
            if pending.is_empty() {
                if closed == declared {
                    return Err(DimacsError::TrailingGarbage { line });
                }
                pending_line = line;
            }
            if lit == 0 {
                if let Some(c) = Clause::new(pending.drain(..)) {
                    clauses.push(c);
                }
                closed += 1;
            } else {
                pending.push(check_lit(lit, line, num_vars)?);
            }
        }
    }

    let Some((num_vars, declared)) = header else {
        return Err(DimacsError::NoHeader);
    };
    if !pending.is_empty() {
        return Err(DimacsError::UnterminatedClause { line: pending_line });
    }
    if closed != declared {
        return Err(DimacsError::CountMismatch {
            declared,
            found: closed,
        });
    }
    let projection = if projection.is_empty() {
        None
    } else {
        Some(projection)
    };
    let cnf = CnfFormula::new(num_vars, clauses, projection)?;
    Ok(CnfXorFormula::new(cnf, xors)?)
}

pub fn render_dimacs(f: &CnfXorFormula) -> String {
    let mut out = String::new();
    let count = f.cnf.clauses().len() + f.xors().len();
    writeln!(out, "p cnf {} {}", f.num_vars(), count).unwrap();
    if !f.cnf.projects_onto_all_vars() {
        for chunk in f.projection().chunks(10) {
            out.push_str("c ind");
            for v in chunk {
                write!(out, " {v}").unwrap();
            }
            out.push_str(" 0\n");
        }
    }
    for clause in f.cnf.clauses() {
        for l in clause.lits() {
            write!(out, "{l} ").unwrap();
        }
        out.push_str("0\n");
    }
    for xor in f.xors() {
        out.push('x');
        let vars = xor.vars();
        for (i, &v) in vars.iter().enumerate() {
            let lit = if i == 0 && !xor.rhs() {
                -(v as i64)
            } else {
                v as i64
            };
            write!(out, " {lit}").unwrap();
        }
        out.push_str(" 0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_clauses_xors_and_projection() {
        let text = "c a comment\n\
                    p cnf 4 4\n\
                    c ind 1 2 3 0\n\
                    1 -2 0\n\
                    3\n\
                    4 0\n\
                    x1 -2 0\n\
                    x 3 4 0\n";
        let f = parse_dimacs(text).unwrap();
        assert_eq!(f.num_vars(), 4);
        assert_eq!(f.cnf.clauses().len(), 2);
        assert_eq!(f.cnf.clauses()[1].lits(), &[3, 4]);
        assert_eq!(f.projection(), &[1, 2, 3]);
        assert_eq!(f.xors().len(), 2);
        assert_eq!(f.xors()[0].vars(), &[1, 2]);
        assert!(!f.xors()[0].rhs());
        assert!(f.xors()[1].rhs());
    }

    #[test]
    fn tautologies_count_against_header_but_are_dropped() {
        let f = parse_dimacs("p cnf 2 2\n1 -1 0\n2 0\n").unwrap();
        assert_eq!(f.cnf.clauses().len(), 1);
        assert_eq!(f.cnf.clauses()[0].lits(), &[2]);
    }

    #[test]
    fn round_trips() {
        let text = "p cnf 5 3\nc ind 2 4 0\n1 -3 5 0\n-2 0\nx 2 -4 5 0\n";
        let f = parse_dimacs(text).unwrap();
        let rendered = render_dimacs(&f);
        let g = parse_dimacs(&rendered).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn renders_false_rhs_by_negating_first_literal() {
        let f = parse_dimacs("p cnf 3 1\nx -1 2 3 0\n").unwrap();
        assert!(!f.xors()[0].rhs());
        let rendered = render_dimacs(&f);
        assert!(rendered.contains("x -1 2 3 0"), "{rendered}");
    }

    #[test]
    fn empty_xor_round_trips_as_contradiction() {
        let f = parse_dimacs("p cnf 1 1\nx 0\n").unwrap();
        assert!(f.xors()[0].is_contradiction());
        assert!(render_dimacs(&f).contains("x 0\n"));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            parse_dimacs("1 2 0\n"),
            Err(DimacsError::MissingHeader { line: 1 })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n"),
            Err(DimacsError::CountMismatch {
                declared: 1,
                found: 0
            })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2 0\n1 0\n"),
            Err(DimacsError::TrailingGarbage { line: 3 })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2\n"),
            Err(DimacsError::UnterminatedClause { line: 2 })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\nx1 2\n"),
            Err(DimacsError::UnterminatedXor { line: 2 })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n3 0\n"),
            Err(DimacsError::LitOutOfRange { lit: 3, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 0 0\n"),
            Err(DimacsError::ZeroVars { line: 1 })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 a 0\n"),
            Err(DimacsError::BadToken { line: 2, .. })
        ));
    }

    #[test]
    fn ind_lines_accumulate() {
        let f = parse_dimacs("p cnf 4 1\nc ind 4 0\nc ind 1 0\n1 0\n").unwrap();
        assert_eq!(f.projection(), &[1, 4]);
    }
}
