//! Independent check of an implementation against the specification's
//! winning region, plus bit-parallel random simulation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};

use crate::aiger::{Aig, SafetySpec};
use crate::cnf::{negate_cnf_with_aux, tseitin_encode_aig, Clause, Cnf, Cube, Lit, Var, VarPool};
use crate::game::WinningRegion;
use crate::sat::SatSession;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// `check` is 1 (initial state outside W), 2 (bad reachable inside W) or
    /// 3 (W not closed under the implementation).
    Fail { check: u8, counterexample: Cube },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Transition relation of `imp` over the spec's state, input and next-state
/// variables, and the literal of its bad output.
fn impl_relation(spec: &SafetySpec, imp: &Aig) -> Result<(Cnf, Lit)> {
    if imp.inputs.len() != spec.inputs.len() {
        return Err(Error::InterfaceMismatch(format!(
            "implementation has {} inputs, specification has {} uncontrollable inputs",
            imp.inputs.len(),
            spec.inputs.len()
        )));
    }
    if imp.latches.len() != spec.latch_count() {
        return Err(Error::InterfaceMismatch(format!(
            "implementation has {} latches, specification has {}",
            imp.latches.len(),
            spec.latch_count()
        )));
    }
    if imp.outputs.len() != 1 {
        return Err(Error::InterfaceMismatch(format!(
            "implementation has {} outputs, expected 1",
            imp.outputs.len()
        )));
    }

    let mut local = VarPool::above(imp.max_var);
    let mut roots: Vec<u32> = imp.latches.iter().map(|l| l.next).collect();
    roots.push(imp.outputs[0]);
    let enc = tseitin_encode_aig(imp, &roots, &mut local)?;

    let mut pool = spec.pool.clone();
    let mut map: HashMap<Var, Var> = HashMap::new();
    for (k, &l) in imp.inputs.iter().enumerate() {
        map.insert(Var::new(l >> 1), spec.inputs[k]);
    }
    for (k, l) in imp.latches.iter().enumerate() {
        map.insert(Var::new(l.lit >> 1), spec.state[k]);
    }
    for &a in &enc.aux {
        map.insert(a, pool.fresh());
    }
    let rename = |l: Lit| map.get(&l.var()).map_or(l, |&v| v.lit(l.is_positive()));

    let mut t = enc.cnf.rename(&map);
    for (k, l) in imp.latches.iter().enumerate() {
        let nx = spec.next[k];
        let f = rename(enc.lit(l.next));
        t.push(Clause::new([nx.neg(), f]));
        t.push(Clause::new([nx.pos(), !f]));
    }
    let bad = rename(enc.lit(imp.outputs[0]));
    if spec.synthetic_error {
        let err = spec.state[spec.state.len() - 1];
        let err_next = spec.next[spec.next.len() - 1];
        t.push(Clause::new([err_next.neg(), err.pos(), bad]));
        t.push(Clause::new([err_next.pos(), err.neg()]));
        t.push(Clause::new([err_next.pos(), !bad]));
    }
    Ok((t, bad))
}

/// Three SAT checks: the initial state is in W, the bad output cannot fire
/// inside W, and W is closed under the implementation's transitions.
pub fn verify_implementation(spec: &SafetySpec, imp: &Aig, w: &WinningRegion) -> Result<Verdict> {
    let (t, bad) = impl_relation(spec, imp)?;
    let visible: Vec<Var> = spec.inputs_and_state();

    let init = spec.initial_cube();
    if !SatSession::from_cnf(&w.w).solve(&init) {
        return Ok(Verdict::Fail {
            check: 1,
            counterexample: init,
        });
    }

    let mut s = SatSession::from_cnf(&w.w);
    s.add_cnf(&t);
    if s.solve(&Cube::new([bad])) {
        return Ok(Verdict::Fail {
            check: 2,
            counterexample: s.model(&visible),
        });
    }

    let mut pool = spec.pool.clone();
    pool.reserve_through(t.max_var());
    s.add_cnf(&negate_cnf_with_aux(&w.w_next, &mut pool));
    if s.solve(&Cube::top()) {
        return Ok(Verdict::Fail {
            check: 3,
            counterexample: s.model(&visible),
        });
    }
    Ok(Verdict::Pass)
}

/// Runs `runs` random input sequences of `steps` steps from the initial
/// state, 64 at a time. Returns `(run, step)` of the first run whose bad
/// output fires.
pub fn simulate(imp: &Aig, runs: usize, steps: usize, seed: u64) -> Result<Option<(usize, usize)>> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    imp.node_kinds()?;
    let n = imp.max_var as usize + 1;
    let read = |val: &[u64], l: u32| -> u64 {
        let v = val[(l >> 1) as usize];
        if l & 1 == 1 {
            !v
        } else {
            v
        }
    };
    let mut batch = 0;
    while batch * 64 < runs {
        let lanes = (runs - batch * 64).min(64);
        let mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
        let mut val = vec![0u64; n];
        for step in 0..steps {
            for &i in &imp.inputs {
                val[(i >> 1) as usize] = rng.gen();
            }
            for g in &imp.ands {
                val[(g.lhs >> 1) as usize] = read(&val, g.rhs0) & read(&val, g.rhs1);
            }
            let bad = read(&val, imp.outputs[0]) & mask;
            if bad != 0 {
                return Ok(Some((batch * 64 + bad.trailing_zeros() as usize, step)));
            }
            let next: Vec<u64> = imp.latches.iter().map(|l| read(&val, l.next)).collect();
            for (l, v) in imp.latches.iter().zip(next) {
                val[(l.lit >> 1) as usize] = v;
            }
        }
        batch += 1;
    }
    Ok(None)
}
