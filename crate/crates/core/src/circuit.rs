//! Resubstitution of learned functions and assembly of the implementation
//! AIG.

use std::collections::HashMap;

use crate::aiger::{Aig, AndGate, Latch, NodeKind, SafetySpec};
use crate::cnf::{negation_parts, Cnf, Negation, Var, VarPool};
use crate::{Error, Result};

/// Clauses for `v ↔ f`, with one auxiliary per non-unit clause of `f` for the
/// `¬f → ¬v` direction.
pub fn resubstitute(v: Var, f: &Cnf, pool: &mut VarPool) -> Cnf {
    let mut out = Cnf::new();
    for c in f.clauses() {
        let mut d = c.clone();
        d.push(v.neg());
        out.push(d);
    }
    match negation_parts(f, pool) {
        Negation::Top => {}
        Negation::Parts {
            implications,
            selector,
        } => {
            for c in implications {
                out.push(c);
            }
            let mut s = selector;
            s.push(v.pos());
            out.push(s);
        }
    }
    out
}

const FALSE: u32 = 0;
const TRUE: u32 = 1;

/// Builds an AIG with constant propagation and structural hashing. All
/// inputs and latches must be created before the first AND gate.
#[derive(Debug, Default)]
pub struct AigBuilder {
    max_var: u32,
    inputs: Vec<u32>,
    latches: Vec<Latch>,
    ands: Vec<AndGate>,
    hash: HashMap<(u32, u32), u32>,
}

impl AigBuilder {
    pub fn new() -> AigBuilder {
        AigBuilder::default()
    }

    pub fn input(&mut self) -> u32 {
        assert!(self.ands.is_empty(), "inputs precede AND gates");
        self.max_var += 1;
        let l = 2 * self.max_var;
        self.inputs.push(l);
        l
    }

    /// A latch whose next-state function is set later with [`set_next`].
    ///
    /// [`set_next`]: AigBuilder::set_next
    pub fn latch(&mut self) -> u32 {
        assert!(self.ands.is_empty(), "latches precede AND gates");
        self.max_var += 1;
        let l = 2 * self.max_var;
        self.latches.push(Latch { lit: l, next: FALSE });
        l
    }

    pub fn set_next(&mut self, latch: usize, next: u32) {
        self.latches[latch].next = next;
    }

    pub fn and(&mut self, a: u32, b: u32) -> u32 {
        if a == FALSE || b == FALSE || a == b ^ 1 {
            return FALSE;
        }
        if a == TRUE || a == b {
            return b;
        }
        if b == TRUE {
            return a;
        }
        let key = (a.max(b), a.min(b));
        if let Some(&g) = self.hash.get(&key) {
            return g;
        }
        self.max_var += 1;
        let g = 2 * self.max_var;
        self.ands.push(AndGate {
            lhs: g,
            rhs0: key.0,
            rhs1: key.1,
        });
        self.hash.insert(key, g);
        g
    }

    pub fn or(&mut self, a: u32, b: u32) -> u32 {
        self.and(a ^ 1, b ^ 1) ^ 1
    }

    pub fn and_all(&mut self, lits: impl IntoIterator<Item = u32>) -> u32 {
        lits.into_iter().fold(TRUE, |acc, l| self.and(acc, l))
    }

    pub fn or_all(&mut self, lits: impl IntoIterator<Item = u32>) -> u32 {
        lits.into_iter().fold(FALSE, |acc, l| self.or(acc, l))
    }

    /// Drops AND gates outside the cones of the outputs and latch next-state
    /// functions, and renumbers the survivors densely.
    pub fn finish(self, outputs: Vec<u32>) -> Aig {
        let base = (self.inputs.len() + self.latches.len()) as u32;
        let mut used = vec![false; self.max_var as usize + 1];
        let mut stack: Vec<u32> = outputs
            .iter()
            .chain(self.latches.iter().map(|l| &l.next))
            .map(|l| l >> 1)
            .collect();
        let first_and = base + 1;
        while let Some(v) = stack.pop() {
            if used[v as usize] {
                continue;
            }
            used[v as usize] = true;
            if v >= first_and {
                let g = &self.ands[(v - first_and) as usize];
                stack.push(g.rhs0 >> 1);
                stack.push(g.rhs1 >> 1);
            }
        }
        let mut remap: Vec<u32> = (0..=self.max_var).collect();
        let mut next = first_and;
        for g in &self.ands {
            let v = g.lhs >> 1;
            if used[v as usize] {
                remap[v as usize] = next;
                next += 1;
            }
        }
        let map = |l: u32| (2 * remap[(l >> 1) as usize]) | (l & 1);
        let ands = self
            .ands
            .iter()
            .filter(|g| used[(g.lhs >> 1) as usize])
            .map(|g| AndGate {
                lhs: map(g.lhs),
                rhs0: map(g.rhs0),
                rhs1: map(g.rhs1),
            })
            .collect();
        Aig {
            max_var: next - 1,
            inputs: self.inputs,
            latches: self
                .latches
                .iter()
                .map(|l| Latch {
                    lit: l.lit,
                    next: map(l.next),
                })
                .collect(),
            outputs: outputs.into_iter().map(map).collect(),
            ands,
            ..Aig::default()
        }
    }
}

/// Assembles the implementation: the spec's uncontrollable inputs and
/// latches, each controllable input replaced by its learned CNF, and the
/// spec's bad output re-expressed over the result.
///
/// Learned CNFs may mention state, uncontrollable inputs, other outputs
/// and AND gates of the spec; referenced gates are rebuilt from the spec.
pub fn build_implementation(spec: &SafetySpec, functions: &[(Var, Cnf)]) -> Result<Aig> {
    let (mut b, lit) = assemble(spec, functions)?;
    let aig = &spec.aig;
    for (k, l) in aig.latches.iter().enumerate() {
        let next = aiger_lit(l.next, &lit);
        b.set_next(k, next);
    }
    let bad = aiger_lit(aig.outputs[0], &lit);
    let mut out = b.finish(vec![bad]);

    let mut k = 0;
    for (idx, _) in aig.inputs.iter().enumerate() {
        if aig.is_controllable(idx) {
            continue;
        }
        if let Some(name) = aig.symbols.inputs.get(&idx) {
            out.symbols.inputs.insert(k, name.clone());
        }
        k += 1;
    }
    out.symbols.latches = aig.symbols.latches.clone();
    out.symbols.outputs = aig.symbols.outputs.clone();
    Ok(out)
}

/// Builder with every output function and referenced spec gate in place,
/// plus the AIG literal of each resolved variable.
fn assemble(spec: &SafetySpec, functions: &[(Var, Cnf)]) -> Result<(AigBuilder, HashMap<Var, u32>)> {
    let aig = &spec.aig;
    let kinds = aig.node_kinds()?;
    let mut b = AigBuilder::new();
    let mut lit: HashMap<Var, u32> = HashMap::new();
    for &i in &spec.inputs {
        lit.insert(i, b.input());
    }
    for l in &aig.latches {
        lit.insert(Var::new(l.lit >> 1), b.latch());
    }
    if let Some(c) = spec.const_var {
        lit.insert(c, FALSE);
    }
    if spec.synthetic_error {
        // A run that has not yet failed has the error latch low.
        lit.insert(spec.state[spec.state.len() - 1], FALSE);
    }
    let f_of: HashMap<Var, &Cnf> = functions.iter().map(|(v, f)| (*v, f)).collect();
    for o in &spec.outputs {
        if !f_of.contains_key(o) {
            return Err(Error::Contract(format!("no function for output {o}")));
        }
    }

    let deps = |v: Var| -> Result<Vec<Var>> {
        if let Some(f) = f_of.get(&v) {
            return Ok(f.vars());
        }
        match kinds.get(v.id() as usize) {
            Some(NodeKind::And { rhs0, rhs1 }) => Ok([rhs0 >> 1, rhs1 >> 1]
                .into_iter()
                .filter(|&r| r != 0)
                .map(Var::new)
                .collect()),
            _ => Err(Error::Contract(format!(
                "variable {v} cannot appear in an implementation"
            ))),
        }
    };

    let mut roots: Vec<Var> = spec.outputs.clone();
    roots.extend(
        aig.latches
            .iter()
            .map(|l| l.next)
            .chain(aig.outputs.iter().copied())
            .filter(|&l| l >> 1 != 0)
            .map(|l| Var::new(l >> 1)),
    );
    let mut expanded: HashMap<Var, bool> = HashMap::new();
    for root in roots {
        let mut stack = vec![root];
        while let Some(&v) = stack.last() {
            if lit.contains_key(&v) {
                stack.pop();
                continue;
            }
            if !expanded.contains_key(&v) {
                expanded.insert(v, true);
                for d in deps(v)? {
                    if lit.contains_key(&d) {
                        continue;
                    }
                    if expanded.contains_key(&d) {
                        let culprit = if f_of.contains_key(&d) { d } else { v };
                        return Err(Error::CyclicDependency(culprit.id()));
                    }
                    stack.push(d);
                }
                continue;
            }
            let out = if let Some(f) = f_of.get(&v) {
                let clauses: Vec<u32> = f
                    .clauses()
                    .iter()
                    .map(|c| {
                        let ls: Vec<u32> = c
                            .lits()
                            .iter()
                            .map(|l| lit[&l.var()] ^ (!l.is_positive()) as u32)
                            .collect();
                        b.or_all(ls)
                    })
                    .collect();
                b.and_all(clauses)
            } else {
                let NodeKind::And { rhs0, rhs1 } = kinds[v.id() as usize] else {
                    unreachable!("deps accepted only AND gates");
                };
                let a = aiger_lit(rhs0, &lit);
                let c = aiger_lit(rhs1, &lit);
                b.and(a, c)
            };
            lit.insert(v, out);
            expanded.remove(&v);
            stack.pop();
        }
    }

    Ok((b, lit))
}

/// AND gates of the controller alone: the networks computing the outputs,
/// including any spec gates they reference.
pub fn controller_gates(spec: &SafetySpec, functions: &[(Var, Cnf)]) -> Result<usize> {
    let (b, lit) = assemble(spec, functions)?;
    let outs = spec.outputs.iter().map(|o| lit[o]).collect();
    Ok(b.finish(outs).ands.len())
}

fn aiger_lit(l: u32, lit: &HashMap<Var, u32>) -> u32 {
    if l >> 1 == 0 {
        l
    } else {
        lit[&Var::new(l >> 1)] ^ (l & 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Clause;

    fn projected(f: &Cnf, vars: &[Var]) -> Vec<u32> {
        let all = f.vars();
        let rest: Vec<Var> = all.into_iter().filter(|v| !vars.contains(v)).collect();
        (0u32..1 << vars.len())
            .filter(|m| {
                (0u32..1 << rest.len()).any(|r| {
                    f.eval(|v| match vars.iter().position(|&x| x == v) {
                        Some(i) => m >> i & 1 == 1,
                        None => r >> rest.iter().position(|&x| x == v).unwrap() & 1 == 1,
                    })
                })
            })
            .collect()
    }

    #[test]
    fn resubstitute_unit() {
        let (o, i) = (Var::new(1), Var::new(2));
        let mut pool = VarPool::above(2);
        let r = resubstitute(o, &Cnf::from_clauses([Clause::unit(i.pos())]), &mut pool);
        assert_eq!(r, Cnf::from_dimacs(&[&[2, -1], &[-2, 1]]));
    }

    #[test]
    fn resubstitute_constants() {
        let o = Var::new(1);
        let mut pool = VarPool::above(1);
        assert_eq!(resubstitute(o, &Cnf::new(), &mut pool), Cnf::from_dimacs(&[&[1]]));
        assert_eq!(resubstitute(o, &Cnf::bottom(), &mut pool), Cnf::from_dimacs(&[&[-1]]));
    }

    #[test]
    fn resubstitute_binary_clause() {
        let v = Var::new(1);
        let mut pool = VarPool::above(3);
        let f = Cnf::from_dimacs(&[&[2, 3]]);
        let r = resubstitute(v, &f, &mut pool);
        assert_eq!(pool.next_free(), 5);
        let vars = [Var::new(1), Var::new(2), Var::new(3)];
        let expected: Vec<u32> = (0u32..8)
            .filter(|m| (m & 1 == 1) == (m & 0b110 != 0))
            .collect();
        assert_eq!(projected(&r, &vars), expected);
    }

    #[test]
    fn builder_hashes_and_propagates() {
        let mut b = AigBuilder::new();
        let x = b.input();
        let y = b.input();
        let g1 = b.and(x, y);
        let g2 = b.and(y, x);
        assert_eq!(g1, g2);
        assert_eq!(b.and(x, x ^ 1), FALSE);
        assert_eq!(b.and(x, TRUE), x);
        assert_eq!(b.or(x, TRUE), TRUE);
        let aig = b.finish(vec![g1]);
        assert_eq!(aig.ands.len(), 1);
    }

    #[test]
    fn two_binary_clauses_need_at_most_three_gates() {
        let mut b = AigBuilder::new();
        let ins: Vec<u32> = (0..4).map(|_| b.input()).collect();
        let c1 = b.or(ins[0], ins[1]);
        let c2 = b.or(ins[2], ins[3]);
        let f = b.and(c1, c2);
        let aig = b.finish(vec![f]);
        assert!(aig.ands.len() <= 3);
    }

    #[test]
    fn sweep_drops_dead_gates() {
        let mut b = AigBuilder::new();
        let x = b.input();
        let y = b.input();
        let z = b.input();
        let _dead = b.and(x, y);
        let live = b.and(y, z);
        let aig = b.finish(vec![live]);
        assert_eq!(aig.ands.len(), 1);
        assert_eq!(aig.ands[0].lhs, 8);
        assert_eq!(aig.outputs, vec![8]);
    }

    fn xor_spec() -> SafetySpec {
        // error latch set when o ≠ i; o is controllable
        // vars: i=1, o=2, err=3, g4=i∧¬o, g5=¬i∧o, g6 = ¬g4∧¬g5 (xnor), g7 = err ∨ ¬g6 = ¬(¬err ∧ g6)
        let text = "aag 7 2 1 1 4\n2\n4\n6 15\n6\n8 2 5\n10 3 4\n12 9 11\n14 7 12\ni1 controllable_o\n";
        SafetySpec::from_aig(Aig::parse(text.as_bytes()).unwrap()).unwrap()
    }

    #[test]
    fn wired_output() {
        let spec = xor_spec();
        let i = spec.inputs[0];
        let o = spec.outputs[0];
        let f = Cnf::from_clauses([Clause::unit(i.pos())]);
        let aig = build_implementation(&spec, &[(o, f)]).unwrap();
        assert_eq!(aig.inputs.len(), 1);
        assert_eq!(aig.latches.len(), 1);
        // the comparator folds away: err' = err
        assert_eq!(aig.latches[0].next, aig.latches[0].lit);
        assert!(aig.ands.is_empty());
    }

    #[test]
    fn constant_true_output() {
        let spec = xor_spec();
        let o = spec.outputs[0];
        let aig = build_implementation(&spec, &[(o, Cnf::new())]).unwrap();
        // err' = err ∨ ¬i
        assert_eq!(aig.ands.len(), 1);
    }

    #[test]
    fn controller_counts_only_output_logic() {
        let spec = xor_spec();
        let (i, o, err) = (spec.inputs[0], spec.outputs[0], spec.state[0]);
        let wire = Cnf::from_clauses([Clause::unit(i.pos())]);
        assert_eq!(controller_gates(&spec, &[(o, wire)]).unwrap(), 0);
        // i ∧ (¬i ∨ err)
        let f = Cnf::from_clauses([Clause::unit(i.pos()), Clause::new([i.neg(), err.pos()])]);
        assert_eq!(controller_gates(&spec, &[(o, f)]).unwrap(), 2);
    }

    #[test]
    fn cyclic_functions_are_rejected() {
        let text = "aag 3 3 0 1 0\n2\n4\n6\n2\ni1 controllable_a\ni2 controllable_b\n";
        let spec = SafetySpec::from_aig(Aig::parse(text.as_bytes()).unwrap()).unwrap();
        let (a, b) = (spec.outputs[0], spec.outputs[1]);
        let fa = Cnf::from_clauses([Clause::unit(b.pos())]);
        let fb = Cnf::from_clauses([Clause::unit(a.neg())]);
        assert!(matches!(
            build_implementation(&spec, &[(a, fa), (b, fb)]),
            Err(Error::CyclicDependency(_))
        ));
    }
}
