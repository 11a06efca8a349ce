//! Builtin DPLL solver with native parity-constraint propagation.
//!
//! Chronological backtracking, two-watched-literal clause propagation, and
//! counter-based XOR propagation: each parity constraint tracks how many of
//! its variables are unassigned and the running parity of the assigned ones,
//! forcing the last variable or flagging a conflict without re-walking the
//! constraint. Decisions take variables in ascending order, false phase
//! first, so runs are deterministic. Built for hash-cell enumeration at tens
//! of variables, not industrial workloads.

use crate::formula::{Assignment, Clause, CnfXorFormula, XorConstraint};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Value {
    Unassigned,
    True,
    False,
}

impl Value {
    fn from_bool(b: bool) -> Value {
        if b {
            Value::True
        } else {
            Value::False
        }
    }
}

struct XorData {
    vars: Vec<u32>,
    rhs: bool,
    /// Number of variables currently unassigned.
    unassigned: usize,
    /// Parity of the currently assigned variables' values.
    parity: bool,
}

struct Decision {
    var: u32,
    flipped: bool,
}

/// Cumulative search-effort counters, never reset across solves.
#[derive(Clone, Copy, Debug, Default)]
pub struct DpllStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

pub struct DpllSolver {
    num_vars: u32,
    values: Vec<Value>,
    trail: Vec<u32>,
    qhead: usize,
    trail_lim: Vec<usize>,
    decisions: Vec<Decision>,
    /// Clauses with at least two literals; positions 0 and 1 are watched.
    clauses: Vec<Vec<i32>>,
    /// Watch lists indexed by literal code, clause indices.
    watches: Vec<Vec<usize>>,
    root_units: Vec<i32>,
    xors: Vec<XorData>,
    xor_occ: Vec<Vec<usize>>,
    /// Set once a root-level conflict is established; permanent because
    /// constraints are only ever added.
    unsat: bool,
    stats: DpllStats,
}

fn lit_code(lit: i32) -> usize {
    debug_assert!(lit != 0);
    2 * (lit.unsigned_abs() as usize - 1) + usize::from(lit < 0)
}

impl DpllSolver {
    pub fn new(num_vars: u32) -> DpllSolver {
        DpllSolver {
            num_vars,
            values: vec![Value::Unassigned; num_vars as usize],
            trail: Vec::new(),
            qhead: 0,
            trail_lim: Vec::new(),
            decisions: Vec::new(),
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars as usize],
            root_units: Vec::new(),
            xors: Vec::new(),
            xor_occ: vec![Vec::new(); num_vars as usize],
            unsat: false,
            stats: DpllStats::default(),
        }
    }

    pub fn from_formula(f: &CnfXorFormula) -> DpllSolver {
        let mut s = DpllSolver::new(f.num_vars());
        for c in f.cnf.clauses() {
            s.add_clause(c);
        }
        for x in f.xors() {
            s.add_xor(x);
        }
        s
    }

    pub fn stats(&self) -> DpllStats {
        self.stats
    }

    /// Adds a clause. Callable between solves; takes effect from the next
    /// [`solve`](Self::solve), which restarts from the root anyway.
    pub fn add_clause(&mut self, c: &Clause) {
        match c.lits() {
            [] => self.unsat = true,
            [l] => self.root_units.push(*l),
            lits => {
                let idx = self.clauses.len();
                self.watches[lit_code(lits[0])].push(idx);
                self.watches[lit_code(lits[1])].push(idx);
                self.clauses.push(lits.to_vec());
            }
        }
    }

    /// Adds a parity constraint. Empty and singleton constraints degrade to
    /// an unsat flag or a root unit.
    pub fn add_xor(&mut self, x: &XorConstraint) {
        match x.vars() {
            [] => {
                if x.rhs() {
                    self.unsat = true;
                }
            }
            [v] => {
                let lit = if x.rhs() { *v as i32 } else { -(*v as i32) };
                self.root_units.push(lit);
            }
            vars => {
                let idx = self.xors.len();
                for &v in vars {
                    self.xor_occ[v as usize - 1].push(idx);
                }
                self.xors.push(XorData {
                    vars: vars.to_vec(),
                    rhs: x.rhs(),
                    unassigned: vars.len(),
                    parity: false,
                });
            }
        }
    }

    fn value_of(&self, lit: i32) -> Value {
        match self.values[lit.unsigned_abs() as usize - 1] {
            Value::Unassigned => Value::Unassigned,
            v => {
                if (v == Value::True) == (lit > 0) {
                    Value::True
                } else {
                    Value::False
                }
            }
        }
    }

    fn assign(&mut self, var: u32, value: bool) {
        let slot = &mut self.values[var as usize - 1];
        debug_assert_eq!(*slot, Value::Unassigned);
        *slot = Value::from_bool(value);
        self.trail.push(var);
        for i in 0..self.xor_occ[var as usize - 1].len() {
            let xi = self.xor_occ[var as usize - 1][i];
            self.xors[xi].unassigned -= 1;
            if value {
                self.xors[xi].parity = !self.xors[xi].parity;
            }
        }
    }

    fn unassign(&mut self, var: u32) {
        let value = self.values[var as usize - 1] == Value::True;
        self.values[var as usize - 1] = Value::Unassigned;
        for i in 0..self.xor_occ[var as usize - 1].len() {
            let xi = self.xor_occ[var as usize - 1][i];
            self.xors[xi].unassigned += 1;
            if value {
                self.xors[xi].parity = !self.xors[xi].parity;
            }
        }
    }

    /// Enqueues a forced literal. False means the literal is already
    /// falsified (conflict).
    fn enqueue(&mut self, lit: i32) -> bool {
        match self.value_of(lit) {
            Value::True => true,
            Value::False => false,
            Value::Unassigned => {
                self.assign(lit.unsigned_abs(), lit > 0);
                true
            }
        }
    }

    /// Propagates until fixpoint or conflict. False on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let var = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let assigned_true = self.values[var as usize - 1] == Value::True;
            // the literal that just became false
            let false_lit = if assigned_true {
                -(var as i32)
            } else {
                var as i32
            };
            if !self.propagate_clauses(false_lit) {
                return false;
            }
            if !self.propagate_xors(var) {
                return false;
            }
        }
        true
    }

    fn propagate_clauses(&mut self, false_lit: i32) -> bool {
        let code = lit_code(false_lit);
        let mut i = 0;
        while i < self.watches[code].len() {
            let ci = self.watches[code][i];
            let clause = &mut self.clauses[ci];
            if clause[0] == false_lit {
                clause.swap(0, 1);
            }
            debug_assert_eq!(clause[1], false_lit);
            let first = clause[0];
            if self.value_of(first) == Value::True {
                i += 1;
                continue;
            }
            // look for a replacement watch among the tail literals
            let mut moved = false;
            for j in 2..self.clauses[ci].len() {
                let lj = self.clauses[ci][j];
                if self.value_of(lj) != Value::False {
                    self.clauses[ci].swap(1, j);
                    self.watches[code].swap_remove(i);
                    self.watches[lit_code(lj)].push(ci);
                    moved = true;
                    break;
                }
            }
            if moved {
                continue;
            }
            // clause is unit or conflicting on its first literal
            if !self.enqueue(first) {
                self.stats.conflicts += 1;
                return false;
            }
            i += 1;
        }
        true
    }

    fn propagate_xors(&mut self, var: u32) -> bool {
        for i in 0..self.xor_occ[var as usize - 1].len() {
            let xi = self.xor_occ[var as usize - 1][i];
            match self.xors[xi].unassigned {
                0 => {
                    if self.xors[xi].parity != self.xors[xi].rhs {
                        self.stats.conflicts += 1;
                        return false;
                    }
                }
                1 => {
                    let needed = self.xors[xi].rhs != self.xors[xi].parity;
                    let u = self.xors[xi]
                        .vars
                        .iter()
                        .copied()
                        .find(|&v| self.values[v as usize - 1] == Value::Unassigned)
                        .expect("count says one variable is unassigned");
                    let lit = if needed { u as i32 } else { -(u as i32) };
                    if !self.enqueue(lit) {
                        self.stats.conflicts += 1;
                        return false;
                    }
                }
                _ => {}
            }
        }
        true
    }

    fn backtrack_to(&mut self, level: usize) {
        let lim = self.trail_lim[level];
        while self.trail.len() > lim {
            let var = self.trail.pop().unwrap();
            self.unassign(var);
        }
        self.qhead = lim;
        self.trail_lim.truncate(level);
        self.decisions.truncate(level);
    }

    /// Resolves a conflict chronologically: walks up the decision stack to
    /// the deepest unflipped decision and asserts its opposite phase at the
    /// same level. False when both phases are exhausted everywhere.
    fn resolve_conflict(&mut self) -> bool {
        loop {
            let Some(d) = self.decisions.last_mut() else {
                return false;
            };
            if d.flipped {
                let level = self.decisions.len() - 1;
                self.backtrack_to(level);
            } else {
                d.flipped = true;
                let var = d.var;
                let lim = *self.trail_lim.last().unwrap();
                while self.trail.len() > lim {
                    let v = self.trail.pop().unwrap();
                    self.unassign(v);
                }
                self.qhead = lim;
                self.assign(var, true);
                return true;
            }
        }
    }

    fn restart(&mut self) {
        while let Some(var) = self.trail.pop() {
            self.unassign(var);
        }
        self.qhead = 0;
        self.trail_lim.clear();
        self.decisions.clear();
    }

    fn next_unassigned(&self) -> Option<u32> {
        self.values
            .iter()
            .position(|&v| v == Value::Unassigned)
            .map(|i| i as u32 + 1)
    }

    /// Searches for a model, starting fresh from the root (prior trail
    /// state is discarded, prior clauses all apply). Returns a total
    /// assignment, or `None` when unsatisfiable.
    pub fn solve(&mut self) -> Option<Assignment> {
        if self.unsat {
            return None;
        }
        self.restart();
        for i in 0..self.root_units.len() {
            let lit = self.root_units[i];
            if !self.enqueue(lit) {
                self.unsat = true;
                return None;
            }
        }
        loop {
            if !self.propagate() {
                if self.decisions.is_empty() {
                    self.unsat = true;
                    return None;
                }
                if !self.resolve_conflict() {
                    self.unsat = true;
                    return None;
                }
                continue;
            }
            match self.next_unassigned() {
                None => {
                    return Some(Assignment::from_pairs((1..=self.num_vars).map(|v| {
                        (v, self.values[v as usize - 1] == Value::True)
                    })));
                }
                Some(var) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.decisions.push(Decision {
                        var,
                        flipped: false,
                    });
                    self.assign(var, false);
                }
            }
        }
    }
}
