//! CNF and CNF-XOR formulas with projection (sampling) sets.
//!
//! Variables are 1-based `u32`s, literals are signed nonzero `i32`s in the
//! DIMACS convention: `v` for the positive literal, `-v` for the negation.
//! The projection is the set of variables the model count is taken over;
//! two satisfying assignments count once if they agree on the projection.

mod dimacs;

pub use dimacs::{parse_dimacs, render_dimacs, DimacsError};

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Errors from formula construction and augmentation.
#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("literal references variable {var} but the formula has {num_vars} variables")]
    VarOutOfRange { var: u32, num_vars: u32 },
    #[error("projection must be non-empty")]
    EmptyProjection,
    #[error("projection variable {var} exceeds variable count {num_vars}")]
    ProjectionOutOfRange { var: u32, num_vars: u32 },
    #[error("a formula must have at least one variable")]
    NoVariables,
    #[error("tseitin max_width must be at least 3, got {0}")]
    BadMaxWidth(usize),
}

/// A disjunction of literals, stored as a set: sorted by variable, no
/// duplicates, never containing both `v` and `-v`.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct Clause(Vec<i32>);

impl Clause {
    /// Normalizes a literal list into a clause. Duplicate literals collapse;
    /// a clause containing both `v` and `-v` is a tautology and yields `None`.
    ///
    /// Panics on a zero literal: `0` is a terminator in the file format, not
    /// a literal.
    pub fn new(lits: impl IntoIterator<Item = i32>) -> Option<Clause> {
        let mut v: Vec<i32> = lits.into_iter().collect();
        assert!(v.iter().all(|&l| l != 0), "literal 0 is not a literal");
        v.sort_unstable_by_key(|&l| (l.unsigned_abs(), l < 0));
        v.dedup();
        let tautology = v.windows(2).any(|w| w[0] == -w[1]);
        if tautology {
            None
        } else {
            Some(Clause(v))
        }
    }

    pub fn lits(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// The empty clause is unsatisfiable.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff some literal is satisfied under a total assignment.
    pub fn satisfied_by(&self, a: &Assignment) -> bool {
        self.0.iter().any(|&l| a.lit_value(l) == Some(true))
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// An XOR (parity) constraint: the variables in `vars` must sum to `rhs`
/// over GF(2).
///
/// `vars` is sorted and duplicate-free; repeated variables cancel during
/// normalization. An empty constraint with `rhs = true` is unsatisfiable,
/// one with `rhs = false` is trivially true.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct XorConstraint {
    vars: Vec<u32>,
    rhs: bool,
}

impl XorConstraint {
    /// Normalizes a variable list: pairs of equal variables cancel.
    pub fn new(vars: impl IntoIterator<Item = u32>, rhs: bool) -> XorConstraint {
        let mut v: Vec<u32> = vars.into_iter().collect();
        assert!(v.iter().all(|&x| x != 0), "variables are 1-based");
        v.sort_unstable();
        let mut out = Vec::with_capacity(v.len());
        let mut i = 0;
        while i < v.len() {
            let mut run = 1;
            while i + run < v.len() && v[i + run] == v[i] {
                run += 1;
            }
            if run % 2 == 1 {
                out.push(v[i]);
            }
            i += run;
        }
        XorConstraint { vars: out, rhs }
    }

    /// Builds a constraint from signed literals: `x1 ^ !x2 ^ x3 = true`
    /// normalizes to `x1 ^ x2 ^ x3 = false`.
    pub fn from_lits(lits: &[i32]) -> XorConstraint {
        let mut rhs = true;
        let mut vars = Vec::with_capacity(lits.len());
        for &l in lits {
            assert!(l != 0, "literal 0 is not a literal");
            if l < 0 {
                rhs = !rhs;
            }
            vars.push(l.unsigned_abs());
        }
        XorConstraint::new(vars, rhs)
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    /// True iff this constraint can never be satisfied (`0 = 1`).
    pub fn is_contradiction(&self) -> bool {
        self.vars.is_empty() && self.rhs
    }

    /// True iff this constraint is vacuous (`0 = 0`).
    pub fn is_trivial(&self) -> bool {
        self.vars.is_empty() && !self.rhs
    }

    pub fn satisfied_by(&self, a: &Assignment) -> Option<bool> {
        let mut acc = false;
        for &v in &self.vars {
            acc ^= a.get(v)?;
        }
        Some(acc == self.rhs)
    }
}

impl fmt::Debug for XorConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xor{:?} = {}", self.vars, u8::from(self.rhs))
    }
}

/// A partial (or total) truth assignment, variable to value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Assignment(BTreeMap<u32, bool>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, bool)>) -> Assignment {
        Assignment(pairs.into_iter().collect())
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.0.get(&var).copied()
    }

    /// Value of a signed literal, `None` if the variable is unassigned.
    pub fn lit_value(&self, lit: i32) -> Option<bool> {
        self.get(lit.unsigned_abs()).map(|v| v == (lit > 0))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// The restriction of this assignment to the given variables.
    ///
    /// Panics if one of them is unassigned: restriction is only meaningful
    /// for assignments total over `vars`.
    pub fn restrict(&self, vars: &[u32]) -> Assignment {
        Assignment(
            vars.iter()
                .map(|&v| {
                    let val = self
                        .get(v)
                        .unwrap_or_else(|| panic!("variable {v} unassigned in restriction"));
                    (v, val)
                })
                .collect(),
        )
    }
}

/// A CNF formula with a projection set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    /// Sorted, duplicate-free, non-empty, every entry in `1..=num_vars`.
    projection: Vec<u32>,
}

impl CnfFormula {
    /// Builds a formula, validating literal ranges and the projection.
    /// `projection = None` means "project onto all variables".
    pub fn new(
        num_vars: u32,
        clauses: Vec<Clause>,
        projection: Option<Vec<u32>>,
    ) -> Result<CnfFormula, FormulaError> {
        if num_vars == 0 {
            return Err(FormulaError::NoVariables);
        }
        for c in &clauses {
            for &l in c.lits() {
                let var = l.unsigned_abs();
                if var > num_vars {
                    return Err(FormulaError::VarOutOfRange { var, num_vars });
                }
            }
        }
        let projection = match projection {
            None => (1..=num_vars).collect(),
            Some(mut p) => {
                p.sort_unstable();
                p.dedup();
                if p.is_empty() {
                    return Err(FormulaError::EmptyProjection);
                }
                if let Some(&var) = p.iter().find(|&&v| v == 0 || v > num_vars) {
                    return Err(FormulaError::ProjectionOutOfRange { var, num_vars });
                }
                p
            }
        };
        Ok(CnfFormula {
            num_vars,
            clauses,
            projection,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn projection(&self) -> &[u32] {
        &self.projection
    }

    pub fn projects_onto_all_vars(&self) -> bool {
        self.projection.len() == self.num_vars as usize
    }

    /// Appends a clause, validating its literal range.
    pub fn add_clause(&mut self, c: Clause) -> Result<(), FormulaError> {
        for &l in c.lits() {
            let var = l.unsigned_abs();
            if var > self.num_vars {
                return Err(FormulaError::VarOutOfRange {
                    var,
                    num_vars: self.num_vars,
                });
            }
        }
        self.clauses.push(c);
        Ok(())
    }
}

/// A CNF formula together with native XOR constraints.
///
/// Plain CNF is the `xors.is_empty()` case. Trivially-true empty XOR
/// constraints are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CnfXorFormula {
    pub cnf: CnfFormula,
    xors: Vec<XorConstraint>,
}

impl CnfXorFormula {
    pub fn new(cnf: CnfFormula, xors: Vec<XorConstraint>) -> Result<CnfXorFormula, FormulaError> {
        let num_vars = cnf.num_vars();
        for x in &xors {
            if let Some(&var) = x.vars().iter().find(|&&v| v > num_vars) {
                return Err(FormulaError::VarOutOfRange { var, num_vars });
            }
        }
        Ok(CnfXorFormula {
            cnf,
            xors: xors.into_iter().filter(|x| !x.is_trivial()).collect(),
        })
    }

    pub fn from_cnf(cnf: CnfFormula) -> CnfXorFormula {
        CnfXorFormula { cnf, xors: vec![] }
    }

    pub fn num_vars(&self) -> u32 {
        self.cnf.num_vars()
    }

    pub fn projection(&self) -> &[u32] {
        self.cnf.projection()
    }

    pub fn xors(&self) -> &[XorConstraint] {
        &self.xors
    }

    /// True iff a total assignment satisfies every clause and XOR.
    pub fn is_model(&self, a: &Assignment) -> bool {
        self.cnf.clauses.iter().all(|c| c.satisfied_by(a))
            && self.xors.iter().all(|x| x.satisfied_by(a) == Some(true))
    }
}

/// How XOR constraints reach the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum XorEncoding {
    /// Keep XOR constraints as-is; requires a solver with parity support.
    Native,
    /// Expand into CNF clauses, cutting wide XORs into chained chunks of at
    /// most `max_width` literals (connector variables included) so no chunk
    /// blows up past `2^(max_width-1)` clauses.
    Tseitin { max_width: usize },
}

impl XorEncoding {
    /// Default chunk width. Width-5 chunks cost 16 clauses each, which keeps
    /// the clause blow-up and the chunk count balanced at desk scale.
    pub const DEFAULT_MAX_WIDTH: usize = 5;

    pub fn tseitin_default() -> XorEncoding {
        XorEncoding::Tseitin {
            max_width: Self::DEFAULT_MAX_WIDTH,
        }
    }
}

/// Attaches XOR constraints to a formula.
///
/// With [`XorEncoding::Native`] the constraints are appended verbatim. With
/// [`XorEncoding::Tseitin`] each constraint is cut into chained XOR chunks
/// over fresh auxiliary variables (appended past `num_vars` and excluded from
/// the projection), and every chunk of width `w` is expanded into its
/// `2^(w-1)` CNF clauses.
///
/// Counting callers attach hash constraints here, and those range over the
/// projection by construction; the projected model count is preserved either
/// way because each auxiliary variable is functionally determined.
pub fn augment_with_xors(
    f: &CnfXorFormula,
    xors: &[XorConstraint],
    encoding: XorEncoding,
) -> Result<CnfXorFormula, FormulaError> {
    let num_vars = f.num_vars();
    for x in xors {
        if let Some(&var) = x.vars().iter().find(|&&v| v > num_vars) {
            return Err(FormulaError::VarOutOfRange { var, num_vars });
        }
    }
    match encoding {
        XorEncoding::Native => {
            let mut out = f.clone();
            out.xors
                .extend(xors.iter().filter(|x| !x.is_trivial()).cloned());
            Ok(out)
        }
        XorEncoding::Tseitin { max_width } => {
            if max_width < 3 {
                return Err(FormulaError::BadMaxWidth(max_width));
            }
            let mut clauses = f.cnf.clauses.clone();
            let mut next_var = f.num_vars();
            for x in xors {
                encode_xor_chain(x, max_width, &mut next_var, &mut clauses);
            }
            let cnf = CnfFormula {
                num_vars: next_var,
                clauses,
                projection: f.cnf.projection.clone(),
            };
            Ok(CnfXorFormula {
                cnf,
                xors: f.xors.clone(),
            })
        }
    }
}

/// Rewrites every stored XOR of a formula into CNF, leaving none behind.
/// Used when the backend cannot handle parity constraints natively.
pub fn tseitinize_all(f: &CnfXorFormula, max_width: usize) -> Result<CnfXorFormula, FormulaError> {
    let stripped = CnfXorFormula {
        cnf: f.cnf.clone(),
        xors: vec![],
    };
    augment_with_xors(&stripped, &f.xors, XorEncoding::Tseitin { max_width })
}

/// Cuts one XOR into chained chunks of width at most `max_width` and expands
/// each chunk into CNF.
///
/// Chunk layout for `w = x.vars().len()` source variables:
/// one chunk when `w <= max_width`, otherwise `ceil((w-2)/(max_width-2))`
/// chunks: the first carries `max_width - 1` sources plus its connector,
/// middle chunks carry two connectors and `max_width - 2` sources, the last
/// carries one connector and the remaining sources.
fn encode_xor_chain(
    x: &XorConstraint,
    max_width: usize,
    next_var: &mut u32,
    out: &mut Vec<Clause>,
) {
    let vars = x.vars();
    let w = vars.len();
    if w <= max_width {
        expand_xor_chunk(vars, x.rhs(), out);
        return;
    }
    let mut chunks: Vec<(Vec<u32>, bool)> = Vec::new();
    let first: Vec<u32> = vars[..max_width - 1].to_vec();
    let mut rest = &vars[max_width - 1..];
    *next_var += 1;
    let mut carry = *next_var;
    let mut chunk0 = first;
    chunk0.push(carry);
    chunks.push((chunk0, false));
    while rest.len() > max_width - 1 {
        let take = max_width - 2;
        *next_var += 1;
        let next_carry = *next_var;
        let mut chunk = vec![carry];
        chunk.extend_from_slice(&rest[..take]);
        chunk.push(next_carry);
        chunks.push((chunk, false));
        carry = next_carry;
        rest = &rest[take..];
    }
    let mut last = vec![carry];
    last.extend_from_slice(rest);
    chunks.push((last, x.rhs()));
    for (chunk_vars, rhs) in chunks {
        debug_assert!(chunk_vars.len() <= max_width);
        expand_xor_chunk(&chunk_vars, rhs, out);
    }
}

/// Emits the `2^(w-1)` clauses of `xor(vars) = rhs`: one clause forbidding
/// each assignment of the wrong parity.
fn expand_xor_chunk(vars: &[u32], rhs: bool, out: &mut Vec<Clause>) {
    let w = vars.len();
    if w == 0 {
        if rhs {
            out.push(Clause::new([]).unwrap());
        }
        return;
    }
    assert!(w < 32, "xor chunk too wide to expand");
    for pattern in 0u32..1 << w {
        if (pattern.count_ones() % 2 == 1) != rhs {
            // wrong parity: forbid this assignment
            let clause = Clause::new(vars.iter().enumerate().map(|(i, &v)| {
                if pattern >> i & 1 == 1 {
                    -(v as i32)
                } else {
                    v as i32
                }
            }))
            .expect("pattern clauses are never tautologies");
            out.push(clause);
        }
    }
}

/// The clause ruling out one projected assignment: the disjunction of the
/// negations of `a`'s values on `projection`.
///
/// Panics if `a` does not assign every projection variable.
pub fn blocking_clause(a: &Assignment, projection: &[u32]) -> Clause {
    Clause::new(projection.iter().map(|&v| {
        let val = a
            .get(v)
            .unwrap_or_else(|| panic!("projection variable {v} unassigned in blocking clause"));
        if val {
            -(v as i32)
        } else {
            v as i32
        }
    }))
    .expect("a blocking clause has one literal per distinct variable")
}
