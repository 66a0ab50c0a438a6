//! Incremental QBF solving for prefixes `∃u ∀a ∃e` by counterexample-guided
//! expansion.
//!
//! Three SAT solvers cooperate:
//!
//! * the abstraction holds one copy of the matrix per universal
//!   counterexample found so far (universal variables fixed, inner ones
//!   renamed) and proposes outer candidates;
//! * the refuter searches for a universal assignment that defeats a given
//!   candidate, constrained by every inner witness it has already seen;
//! * the checker holds the plain matrix and either confirms a refutation or
//!   produces a new inner witness.
//!
//! Inner variables that the caller declares as functionally defined (for
//! example Tseitin variables of a transition relation) are left symbolic in
//! refuter refinements. A witness then rules out every universal assignment
//! it answers, rather than only those agreeing with its gate values.

mod qdimacs;

pub use qdimacs::parse_qdimacs;

use std::collections::{HashMap, HashSet};

use crate::cnf::{negation_parts, Clause, Cnf, Cube, Negation, Var, VarPool};
use crate::sat::SatSession;
use crate::{Deadline, Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Prefix {
    pub outer: Vec<Var>,
    pub forall: Vec<Var>,
    pub inner: Vec<Var>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Block {
    Outer,
    Forall,
    Inner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QAnswer {
    /// The formula is true; the cube assigns every outer variable.
    Sat(Cube),
    /// The formula is false under the given subset of the assumptions.
    Unsat(Cube),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct QbfStats {
    pub queries: u64,
    pub expansions: u64,
    pub refinements: u64,
    pub refuter_resets: u64,
}

/// One expanded copy of the matrix inside the abstraction.
struct Copy {
    fixed: HashMap<Var, bool>,
    rename: HashMap<Var, Var>,
}

impl Copy {
    fn instantiate(&self, c: &Clause) -> Option<Clause> {
        let mut out = Clause::empty();
        for &l in c.lits() {
            match self.fixed.get(&l.var()) {
                Some(&val) if l.holds(val) => return None,
                Some(_) => {}
                None => match self.rename.get(&l.var()) {
                    Some(&v) => out.push(v.lit(l.is_positive())),
                    None => out.push(l),
                },
            }
        }
        Some(out)
    }
}

pub struct QbfSession {
    prefix: Prefix,
    block: HashMap<Var, Block>,
    matrix: Cnf,
    defs: Cnf,
    rest: Cnf,
    defined: HashSet<Var>,
    free_inner: Vec<Var>,
    pool: VarPool,
    abstraction: SatSession,
    copies: Vec<Copy>,
    checker: SatSession,
    refuter: SatSession,
    refuter_dirty: bool,
    deadline: Deadline,
    stats: QbfStats,
}

impl QbfSession {
    pub fn new(prefix: Prefix, matrix: &Cnf) -> Result<QbfSession> {
        QbfSession::with_definitions(prefix, &Cnf::new(), &[], matrix)
    }

    /// Like [`QbfSession::new`] with matrix `defs ∧ matrix`, where `defs`
    /// uniquely and totally defines the `defined` inner variables from all
    /// other variables.
    pub fn with_definitions(
        prefix: Prefix,
        defs: &Cnf,
        defined: &[Var],
        matrix: &Cnf,
    ) -> Result<QbfSession> {
        let mut block = HashMap::new();
        for (vars, b) in [
            (&prefix.outer, Block::Outer),
            (&prefix.forall, Block::Forall),
            (&prefix.inner, Block::Inner),
        ] {
            for &v in vars {
                if block.insert(v, b).is_some() {
                    return Err(Error::Contract(format!("{v} quantified twice")));
                }
            }
        }
        let defined: HashSet<Var> = defined.iter().copied().collect();
        if let Some(v) = defined.iter().find(|v| block.get(v) != Some(&Block::Inner)) {
            return Err(Error::Contract(format!("defined variable {v} is not inner")));
        }
        let free_inner = prefix
            .inner
            .iter()
            .copied()
            .filter(|v| !defined.contains(v))
            .collect();
        let max = block.keys().map(|v| v.id()).max().unwrap_or(0);
        let mut s = QbfSession {
            prefix,
            block,
            matrix: Cnf::new(),
            defs: Cnf::new(),
            rest: Cnf::new(),
            defined,
            free_inner,
            pool: VarPool::above(max),
            abstraction: SatSession::new(),
            copies: Vec::new(),
            checker: SatSession::new(),
            refuter: SatSession::new(),
            refuter_dirty: false,
            deadline: Deadline::none(),
            stats: QbfStats::default(),
        };
        // The first copy leaves every universal open, so the abstraction
        // starts out as "the matrix is satisfiable at all".
        s.expand(HashMap::new());
        for c in defs.clauses() {
            s.add_clause(c)?;
        }
        s.defs = s.rest.clone();
        s.rest = Cnf::new();
        for c in matrix.clauses() {
            s.add_clause(c)?;
        }
        Ok(s)
    }

    pub fn set_deadline(&mut self, deadline: Deadline) {
        self.deadline = deadline;
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn matrix(&self) -> &Cnf {
        &self.matrix
    }

    pub fn stats(&self) -> QbfStats {
        self.stats
    }

    pub fn add_cnf(&mut self, f: &Cnf) -> Result<()> {
        for c in f.clauses() {
            self.add_clause(c)?;
        }
        Ok(())
    }

    /// Conjoins a clause to the matrix. Every variable must be quantified.
    pub fn add_clause(&mut self, c: &Clause) -> Result<()> {
        let mut pure_outer = true;
        for l in c.lits() {
            match self.block.get(&l.var()) {
                None => {
                    return Err(Error::Contract(format!(
                        "matrix variable {} is not in the prefix",
                        l.var()
                    )))
                }
                Some(Block::Outer) => {}
                Some(_) => pure_outer = false,
            }
        }
        if c.is_tautology() {
            return Ok(());
        }
        self.matrix.push(c.clone());
        self.rest.push(c.clone());
        if pure_outer {
            // Identical in every copy, and any candidate already satisfies
            // it, so the checker and refuter need not see it.
            self.abstraction.add_clause(c);
            return Ok(());
        }
        self.checker.add_clause(c);
        for copy in &self.copies {
            if let Some(inst) = copy.instantiate(c) {
                self.abstraction.add_clause(&inst);
            }
        }
        // Refinements taken against the old matrix are too strong now.
        if self.refuter_dirty {
            self.refuter = SatSession::new();
            self.refuter_dirty = false;
            self.stats.refuter_resets += 1;
        }
        Ok(())
    }

    fn expand(&mut self, fixed: HashMap<Var, bool>) {
        let mut rename = HashMap::new();
        for &v in self.prefix.forall.iter().chain(&self.prefix.inner) {
            if !fixed.contains_key(&v) {
                rename.insert(v, self.pool.fresh());
            }
        }
        let copy = Copy { fixed, rename };
        for c in self.matrix.clauses() {
            if let Some(inst) = copy.instantiate(c) {
                self.abstraction.add_clause(&inst);
            }
        }
        self.copies.push(copy);
        self.stats.expansions += 1;
    }

    /// Adds `¬∃d M[p ← p*]` to the refuter, where `p*` assigns the free inner
    /// variables and `d` is a fresh copy of the defined ones.
    fn refine(&mut self, witness: &Cube) {
        let val: HashMap<Var, bool> = witness.lits().iter().map(|l| (l.var(), l.is_positive())).collect();
        let mut rename = HashMap::new();
        for &d in &self.defined {
            rename.insert(d, self.pool.fresh());
        }
        let subst = |c: &Clause| -> Option<Clause> {
            let mut out = Clause::empty();
            for &l in c.lits() {
                match val.get(&l.var()) {
                    Some(&b) if l.holds(b) => return None,
                    Some(_) => {}
                    None => match rename.get(&l.var()) {
                        Some(&v) => out.push(v.lit(l.is_positive())),
                        None => out.push(l),
                    },
                }
            }
            Some(out)
        };
        for c in self.defs.clauses() {
            if let Some(r) = subst(c) {
                self.refuter.add_clause(&r);
            }
        }
        let reduced: Cnf = self.rest.clauses().iter().filter_map(subst).collect();
        match negation_parts(&reduced, &mut self.pool) {
            Negation::Top => {}
            Negation::Parts {
                implications,
                selector,
            } => {
                for c in &implications {
                    self.refuter.add_clause(c);
                }
                self.refuter.add_clause(&selector);
            }
        }
        self.refuter_dirty = true;
        self.stats.refinements += 1;
    }

    pub fn qsat(&mut self) -> Result<Option<Cube>> {
        match self.qsat_assuming(&Cube::top())? {
            QAnswer::Sat(m) => Ok(Some(m)),
            QAnswer::Unsat(_) => Ok(None),
        }
    }

    /// Decides the formula with some outer variables fixed by `assume`.
    pub fn qsat_assuming(&mut self, assume: &Cube) -> Result<QAnswer> {
        self.stats.queries += 1;
        loop {
            self.deadline.check()?;
            if !self.abstraction.solve(assume) {
                return Ok(QAnswer::Unsat(self.abstraction.failed(assume)));
            }
            let candidate = self.abstraction.model(&self.prefix.outer);
            loop {
                self.deadline.check()?;
                if !self.refuter.solve(&candidate) {
                    return Ok(QAnswer::Sat(candidate));
                }
                let counter = self.refuter.model(&self.prefix.forall);
                let mut both = candidate.clone();
                both.extend(&counter);
                if self.checker.solve(&both) {
                    let witness = self.checker.model(&self.free_inner);
                    self.refine(&witness);
                    continue;
                }
                let core = self.checker.failed(&counter);
                let fixed = core.lits().iter().map(|l| (l.var(), l.is_positive())).collect();
                self.expand(fixed);
                break;
            }
        }
    }

    /// Locally minimal subset of `start` under which the formula is false.
    pub fn qcore(&mut self, start: &Cube) -> Result<Cube> {
        let mut core = match self.qsat_assuming(start)? {
            QAnswer::Sat(_) => {
                return Err(Error::Contract(
                    "qcore requested for an assignment that leaves the formula true".into(),
                ))
            }
            QAnswer::Unsat(core) => core,
        };
        let mut i = 0;
        while i < core.len() {
            let candidate = core.without(core.lits()[i]);
            match self.qsat_assuming(&candidate)? {
                QAnswer::Sat(_) => i += 1,
                QAnswer::Unsat(smaller) => core = smaller,
            }
        }
        Ok(core)
    }
}
