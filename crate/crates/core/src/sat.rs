//! Incremental SAT with assumptions, backed by CaDiCaL.

use crate::cnf::{Clause, Cnf, Cube, Var};
use crate::{Error, Result};

/// One incremental solver. Clauses are only ever added.
pub struct SatSession {
    solver: cadical::Solver,
    max_var: u32,
    last: Option<bool>,
    calls: u64,
}

impl Default for SatSession {
    fn default() -> Self {
        SatSession::new()
    }
}

impl SatSession {
    pub fn new() -> SatSession {
        SatSession {
            solver: cadical::Solver::new(),
            max_var: 0,
            last: None,
            calls: 0,
        }
    }

    pub fn from_cnf(f: &Cnf) -> SatSession {
        let mut s = SatSession::new();
        s.add_cnf(f);
        s
    }

    pub fn add_clause(&mut self, c: &Clause) {
        for l in c.lits() {
            self.max_var = self.max_var.max(l.var().id());
        }
        self.solver.add_clause(c.lits().iter().map(|l| l.to_dimacs()));
        self.last = None;
    }

    pub fn add_cnf(&mut self, f: &Cnf) {
        for c in f.clauses() {
            self.add_clause(c);
        }
    }

    /// Number of solve calls so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn solve(&mut self, assumptions: &Cube) -> bool {
        self.calls += 1;
        for l in assumptions.lits() {
            self.max_var = self.max_var.max(l.var().id());
        }
        let r = self
            .solver
            .solve_with(assumptions.lits().iter().map(|l| l.to_dimacs()))
            .expect("solver runs without limits");
        self.last = Some(r);
        r
    }

    /// Model value of `v` after a SAT answer. Unconstrained variables read as
    /// false.
    pub fn value(&self, v: Var) -> bool {
        debug_assert_eq!(self.last, Some(true), "no model available");
        if v.id() > self.max_var {
            return false;
        }
        self.solver.value(v.pos().to_dimacs()).unwrap_or(false)
    }

    /// The model restricted to `projection`, in that order.
    pub fn model(&self, projection: &[Var]) -> Cube {
        projection.iter().map(|&v| v.lit(self.value(v))).collect()
    }

    /// Assumptions that took part in the last UNSAT answer, in the order
    /// they appear in `assumptions`.
    pub fn failed(&self, assumptions: &Cube) -> Cube {
        debug_assert_eq!(self.last, Some(false), "no core available");
        assumptions
            .lits()
            .iter()
            .copied()
            .filter(|l| self.solver.failed(l.to_dimacs()))
            .collect()
    }

    /// `(sat, model over projection)`; the model is empty on UNSAT.
    pub fn solve_assuming(&mut self, assumptions: &Cube, projection: &[Var]) -> (bool, Cube) {
        if self.solve(assumptions) {
            (true, self.model(projection))
        } else {
            (false, Cube::top())
        }
    }

    /// Smallest sub-cube of `start` found by dropping literals one at a time,
    /// starting from the solver's failed set. Fails if `start` is consistent
    /// with the database.
    pub fn core_min(&mut self, start: &Cube) -> Result<Cube> {
        if self.solve(start) {
            return Err(Error::Contract(
                "core requested for a satisfiable assumption set".into(),
            ));
        }
        let mut core = self.failed(start);
        let mut i = 0;
        while i < core.len() {
            let candidate = core.without(core.lits()[i]);
            if self.solve(&candidate) {
                i += 1;
            } else {
                // Later literals may also have dropped out; the ones before
                // `i` are still necessary, so the index stays valid.
                core = self.failed(&candidate);
            }
        }
        debug_assert!(core.is_subcube_of(start));
        debug_assert!(!self.solve(&core));
        Ok(core)
    }
}

/// Minimal subset of `start` that is still inconsistent with `f`.
pub fn unsat_core_min(start: &Cube, f: &Cnf) -> Result<Cube> {
    SatSession::from_cnf(f).core_min(start)
}

pub fn is_satisfiable(f: &Cnf) -> bool {
    SatSession::from_cnf(f).solve(&Cube::top())
}

/// Removes clauses, then literals, as long as the formula stays equivalent.
/// Each clause sits behind its own activation literal so both passes run in
/// one solver.
pub fn simplify_cnf(f: &Cnf) -> Cnf {
    let mut pool = crate::cnf::VarPool::above(f.max_var());
    let mut s = SatSession::new();
    let mut clauses: Vec<Option<(Clause, Var)>> = Vec::new();
    for c in f.clauses() {
        let a = pool.fresh();
        let mut guarded = c.clone();
        guarded.push(a.neg());
        s.add_clause(&guarded);
        clauses.push(Some((c.clone(), a)));
    }
    let active = |clauses: &[Option<(Clause, Var)>], skip: usize| -> Cube {
        clauses
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .filter_map(|(_, e)| e.as_ref().map(|(_, a)| a.pos()))
            .collect()
    };

    // (f∖c) ⇒ c
    for j in 0..clauses.len() {
        let (c, _) = clauses[j].clone().expect("not yet removed");
        let mut assume = active(&clauses, j);
        assume.extend(&c.negate());
        if !s.solve(&assume) {
            clauses[j] = None;
        }
    }

    // f ⇒ (c∖l). Strengthening an earlier clause can make this one
    // redundant, so that is re-checked first.
    for j in 0..clauses.len() {
        let Some((mut c, mut a)) = clauses[j].clone() else {
            continue;
        };
        let mut assume = active(&clauses, j);
        assume.extend(&c.negate());
        if !s.solve(&assume) {
            clauses[j] = None;
            continue;
        }
        let mut k = 0;
        while k < c.len() {
            let shorter = c.without(c.lits()[k]);
            let mut assume = active(&clauses, usize::MAX);
            assume.extend(&shorter.negate());
            if s.solve(&assume) {
                k += 1;
                continue;
            }
            let fresh = pool.fresh();
            let mut guarded = shorter.clone();
            guarded.push(fresh.neg());
            s.add_clause(&guarded);
            s.add_clause(&Clause::unit(a.neg()));
            c = shorter;
            a = fresh;
            clauses[j] = Some((c.clone(), a));
        }
    }

    clauses.into_iter().flatten().map(|(c, _)| c).collect()
}
