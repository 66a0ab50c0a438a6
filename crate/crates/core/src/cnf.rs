//! Propositional literals, clauses, cubes and CNF formulas.
//!
//! Variables are dense positive integers handed out by a [`VarPool`]. AIGER
//! variable `k` (literal `2k`/`2k+1`) maps to [`Var`] `k`, so AIG node ids and
//! CNF variables coincide for everything read from a circuit.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Not;

use crate::aiger::{Aig, NodeKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics on 0; variable ids start at 1.
    pub fn new(id: u32) -> Var {
        assert!(id >= 1, "variable ids start at 1");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    pub fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            self.pos()
        } else {
            self.neg()
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A variable together with a polarity, packed as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn from_dimacs(value: i32) -> Lit {
        assert!(value != 0, "0 is not a DIMACS literal");
        Var::new(value.unsigned_abs()).lit(value > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().id() as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// Evaluates the literal under a value for its variable.
    pub fn holds(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

fn push_unique(lits: &mut Vec<Lit>, lit: Lit) {
    if !lits.contains(&lit) {
        lits.push(lit);
    }
}

/// A disjunction of literals. Literal order is preserved as given; duplicates
/// are removed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new<I: IntoIterator<Item = Lit>>(lits: I) -> Clause {
        let mut out = Vec::new();
        for l in lits {
            push_unique(&mut out, l);
        }
        Clause { lits: out }
    }

    /// The empty clause, i.e. false.
    pub fn empty() -> Clause {
        Clause::default()
    }

    pub fn unit(lit: Lit) -> Clause {
        Clause { lits: vec![lit] }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.lits.iter().any(|&l| self.lits.contains(&!l))
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    pub fn push(&mut self, lit: Lit) {
        push_unique(&mut self.lits, lit);
    }

    pub fn without(&self, lit: Lit) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|&l| l != lit).collect(),
        }
    }

    /// The cube `¬self`.
    pub fn negate(&self) -> Cube {
        Cube {
            lits: self.lits.iter().map(|&l| !l).collect(),
        }
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Clause {
        Clause::new(self.lits.iter().map(|&l| rename_lit(l, map)))
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.lits.iter().any(|&l| l.holds(value(l.var())))
    }
}

impl FromIterator<Lit> for Clause {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        Clause::new(iter)
    }
}

/// A conjunction of literals. Order matters for core minimization, which
/// drops literals in the order they appear.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cube {
    lits: Vec<Lit>,
}

impl Cube {
    pub fn new<I: IntoIterator<Item = Lit>>(lits: I) -> Cube {
        let mut out = Vec::new();
        for l in lits {
            push_unique(&mut out, l);
        }
        Cube { lits: out }
    }

    /// The empty cube, i.e. true.
    pub fn top() -> Cube {
        Cube::default()
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// True when the cube contains both `l` and `¬l`.
    pub fn is_contradictory(&self) -> bool {
        self.lits.iter().any(|&l| self.lits.contains(&!l))
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    pub fn push(&mut self, lit: Lit) {
        push_unique(&mut self.lits, lit);
    }

    pub fn without(&self, lit: Lit) -> Cube {
        Cube {
            lits: self.lits.iter().copied().filter(|&l| l != lit).collect(),
        }
    }

    pub fn extend(&mut self, other: &Cube) {
        for &l in &other.lits {
            push_unique(&mut self.lits, l);
        }
    }

    /// The clause `¬self`.
    pub fn negate(&self) -> Clause {
        Clause {
            lits: self.lits.iter().map(|&l| !l).collect(),
        }
    }

    /// Restricts the cube to literals over `vars`, preserving order.
    pub fn project(&self, vars: &HashSet<Var>) -> Cube {
        Cube {
            lits: self
                .lits
                .iter()
                .copied()
                .filter(|l| vars.contains(&l.var()))
                .collect(),
        }
    }

    pub fn is_subcube_of(&self, other: &Cube) -> bool {
        self.lits.iter().all(|l| other.contains(*l))
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Cube {
        Cube::new(self.lits.iter().map(|&l| rename_lit(l, map)))
    }

    /// Value of `var` in this cube, if assigned.
    pub fn value(&self, var: Var) -> Option<bool> {
        self.lits
            .iter()
            .find(|l| l.var() == var)
            .map(|l| l.is_positive())
    }
}

impl FromIterator<Lit> for Cube {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        Cube::new(iter)
    }
}

fn rename_lit(l: Lit, map: &HashMap<Var, Var>) -> Lit {
    match map.get(&l.var()) {
        Some(&v) => v.lit(l.is_positive()),
        None => l,
    }
}

/// Conjunction of clauses. Tautological clauses are dropped on insertion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new() -> Cnf {
        Cnf::default()
    }

    /// The formula `{()}`, i.e. false.
    pub fn bottom() -> Cnf {
        Cnf {
            clauses: vec![Clause::empty()],
        }
    }

    pub fn from_clauses<I: IntoIterator<Item = Clause>>(clauses: I) -> Cnf {
        let mut cnf = Cnf::new();
        for c in clauses {
            cnf.push(c);
        }
        cnf
    }

    /// Builds a CNF from DIMACS-style integer clauses.
    pub fn from_dimacs(clauses: &[&[i32]]) -> Cnf {
        Cnf::from_clauses(
            clauses
                .iter()
                .map(|c| Clause::new(c.iter().map(|&l| Lit::from_dimacs(l)))),
        )
    }

    pub fn push(&mut self, clause: Clause) {
        if !clause.is_tautology() {
            self.clauses.push(clause);
        }
    }

    pub fn extend(&mut self, other: &Cnf) {
        self.clauses.extend(other.clauses.iter().cloned());
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for c in &self.clauses {
            for l in c.lits() {
                if seen.insert(l.var()) {
                    out.push(l.var());
                }
            }
        }
        out
    }

    pub fn max_var(&self) -> u32 {
        self.clauses
            .iter()
            .flat_map(|c| c.lits())
            .map(|l| l.var().id())
            .max()
            .unwrap_or(0)
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Cnf {
        Cnf::from_clauses(self.clauses.iter().map(|c| c.rename(map)))
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.clauses.iter().all(|c| c.eval(&value))
    }
}

impl FromIterator<Clause> for Cnf {
    fn from_iter<I: IntoIterator<Item = Clause>>(iter: I) -> Self {
        Cnf::from_clauses(iter)
    }
}

/// Allocator for fresh variables plus a registry of named, pairwise disjoint
/// variable groups.
#[derive(Clone, Debug)]
pub struct VarPool {
    next_free: u32,
    groups: BTreeMap<String, Vec<Var>>,
}

impl Default for VarPool {
    fn default() -> Self {
        VarPool::new()
    }
}

impl VarPool {
    pub fn new() -> VarPool {
        VarPool {
            next_free: 1,
            groups: BTreeMap::new(),
        }
    }

    /// Pool whose fresh variables start strictly above `max_used`.
    pub fn above(max_used: u32) -> VarPool {
        VarPool {
            next_free: max_used + 1,
            groups: BTreeMap::new(),
        }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::new(self.next_free);
        self.next_free += 1;
        v
    }

    pub fn fresh_vec(&mut self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.fresh()).collect()
    }

    /// Marks every id up to and including `max_used` as taken.
    pub fn reserve_through(&mut self, max_used: u32) {
        self.next_free = self.next_free.max(max_used + 1);
    }

    pub fn next_free(&self) -> u32 {
        self.next_free
    }

    /// Registers a named group. Fails if it overlaps an existing group or
    /// contains ids that were never allocated.
    pub fn add_group(&mut self, name: &str, vars: Vec<Var>) -> Result<()> {
        if let Some(v) = vars.iter().find(|v| v.id() >= self.next_free) {
            return Err(Error::Contract(format!(
                "group {name} contains unallocated variable {v}"
            )));
        }
        let new: HashSet<Var> = vars.iter().copied().collect();
        for (other, members) in &self.groups {
            if other != name && members.iter().any(|v| new.contains(v)) {
                return Err(Error::Contract(format!(
                    "group {name} overlaps group {other}"
                )));
            }
        }
        self.groups.insert(name.to_string(), vars);
        Ok(())
    }

    pub fn group(&self, name: &str) -> Option<&[Var]> {
        self.groups.get(name).map(Vec::as_slice)
    }
}

/// Negation of a CNF split into its defining implications and the selector
/// clause that asserts "some clause is false".
pub(crate) enum Negation {
    /// The input contained the empty clause, so its negation is true.
    Top,
    Parts {
        implications: Vec<Clause>,
        selector: Clause,
    },
}

/// One auxiliary `k` per non-unit clause `c` with `k → ¬c`; unit clauses
/// contribute their negated literal to the selector directly.
pub(crate) fn negation_parts(f: &Cnf, pool: &mut VarPool) -> Negation {
    if f.has_empty_clause() {
        return Negation::Top;
    }
    let mut implications = Vec::new();
    let mut selector = Clause::empty();
    for c in f.clauses() {
        if c.len() == 1 {
            selector.push(!c.lits()[0]);
        } else {
            let k = pool.fresh();
            for &l in c.lits() {
                implications.push(Clause::new([k.neg(), !l]));
            }
            selector.push(k.pos());
        }
    }
    Negation::Parts {
        implications,
        selector,
    }
}

/// CNF of `¬f` using one fresh auxiliary variable per non-unit clause of `f`.
pub fn negate_cnf_with_aux(f: &Cnf, pool: &mut VarPool) -> Cnf {
    match negation_parts(f, pool) {
        Negation::Top => Cnf::new(),
        Negation::Parts {
            implications,
            selector,
        } => {
            let mut out = Cnf::from_clauses(implications);
            out.push(selector);
            out
        }
    }
}

/// Replaces every variable of `group` by a fresh copy.
pub fn rename_apart(f: &Cnf, group: &[Var], pool: &mut VarPool) -> (Cnf, HashMap<Var, Var>) {
    let map: HashMap<Var, Var> = group.iter().map(|&v| (v, pool.fresh())).collect();
    (f.rename(&map), map)
}

/// Result of encoding AIG cones into CNF.
#[derive(Clone, Debug)]
pub struct TseitinEncoding {
    pub cnf: Cnf,
    /// AIGER variable index to CNF literal.
    pub node_lits: HashMap<u32, Lit>,
    /// Variables of encoded AND gates (plus the constant, if used).
    pub aux: Vec<Var>,
    pub const_var: Option<Var>,
}

impl TseitinEncoding {
    /// CNF literal for an AIGER literal that was part of the encoded cones.
    pub fn lit(&self, aiger_lit: u32) -> Lit {
        let base = self.node_lits[&(aiger_lit >> 1)];
        if aiger_lit & 1 == 1 {
            !base
        } else {
            base
        }
    }
}

/// Encodes the fan-in cones of `roots` (AIGER literals). Inputs and latches
/// become free variables; each AND gate `g = a ∧ b` yields `(¬g∨a)`, `(¬g∨b)`
/// and `(g∨¬a∨¬b)`. The constant is a fresh variable fixed by a unit clause.
pub fn tseitin_encode_aig(aig: &Aig, roots: &[u32], pool: &mut VarPool) -> Result<TseitinEncoding> {
    pool.reserve_through(aig.max_var);
    let kinds = aig.node_kinds()?;

    let mut needed = vec![false; aig.max_var as usize + 1];
    let mut stack: Vec<u32> = roots.iter().map(|l| l >> 1).collect();
    while let Some(v) = stack.pop() {
        if v > aig.max_var {
            return Err(Error::MalformedGraph(format!(
                "literal {} exceeds maximum variable {}",
                2 * v,
                aig.max_var
            )));
        }
        if needed[v as usize] {
            continue;
        }
        needed[v as usize] = true;
        match kinds[v as usize] {
            NodeKind::And { rhs0, rhs1 } => {
                stack.push(rhs0 >> 1);
                stack.push(rhs1 >> 1);
            }
            NodeKind::Undefined => {
                return Err(Error::MalformedGraph(format!(
                    "variable {v} is referenced but never defined"
                )))
            }
            _ => {}
        }
    }

    let mut enc = TseitinEncoding {
        cnf: Cnf::new(),
        node_lits: HashMap::new(),
        aux: Vec::new(),
        const_var: None,
    };
    // AND gates are topologically ordered, so increasing ids visit fan-ins first.
    for v in 0..=aig.max_var {
        if !needed[v as usize] {
            continue;
        }
        match kinds[v as usize] {
            NodeKind::Constant => {
                let c = pool.fresh();
                enc.cnf.push(Clause::unit(c.neg()));
                enc.node_lits.insert(0, c.pos());
                enc.aux.push(c);
                enc.const_var = Some(c);
            }
            NodeKind::Input(_) | NodeKind::Latch(_) => {
                enc.node_lits.insert(v, Var::new(v).pos());
            }
            NodeKind::And { rhs0, rhs1 } => {
                let g = Var::new(v).pos();
                let a = enc.lit(rhs0);
                let b = enc.lit(rhs1);
                enc.cnf.push(Clause::new([!g, a]));
                enc.cnf.push(Clause::new([!g, b]));
                enc.cnf.push(Clause::new([g, !a, !b]));
                enc.node_lits.insert(v, g);
                enc.aux.push(Var::new(v));
            }
            NodeKind::Undefined => unreachable!("checked during marking"),
        }
    }
    Ok(enc)
}
