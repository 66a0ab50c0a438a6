use std::collections::{BTreeSet, HashMap};

use super::{Aig, NodeKind};
use crate::cnf::{tseitin_encode_aig, Clause, Cnf, Lit, Var, VarPool};
use crate::{Error, Result};

/// A safety game extracted from an AIGER file.
///
/// Variables of inputs, latches and AND gates are the AIGER variable ids.
/// Next-state variables (and the synthetic error latch, when one is needed)
/// are fresh.
#[derive(Clone, Debug)]
pub struct SafetySpec {
    pub aig: Aig,
    /// One per AIGER latch, in order, followed by the synthetic error latch
    /// if the bad output was combinational.
    pub state: Vec<Var>,
    /// Parallel to `state`.
    pub next: Vec<Var>,
    /// Uncontrollable inputs in AIGER order.
    pub inputs: Vec<Var>,
    /// Controllable inputs in AIGER order.
    pub outputs: Vec<Var>,
    /// Tseitin variables of T (encoded AND gates and the constant).
    pub aux: Vec<Var>,
    /// Transition relation over state, inputs, outputs, next and aux.
    pub trans: Cnf,
    /// True in exactly the unsafe states. Literal over `state`.
    pub error: Lit,
    pub synthetic_error: bool,
    pub const_var: Option<Var>,
    /// Fresh variables for any derived formula start here.
    pub pool: VarPool,
    /// For each aux: the state/input/output variables its AIG cone reads.
    pub support: HashMap<Var, Vec<Var>>,
    /// For each aux AND gate: its two fan-in literals in CNF form.
    pub gate_inputs: HashMap<Var, (Lit, Lit)>,
}

impl SafetySpec {
    /// Builds the game from an AIGER file with exactly one output (the bad
    /// signal) and at least one input named `controllable_*`.
    pub fn from_aig(aig: Aig) -> Result<SafetySpec> {
        if aig.outputs.len() != 1 {
            return Err(Error::UnsupportedSpec(format!(
                "expected exactly one output (the bad signal), found {}",
                aig.outputs.len()
            )));
        }
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (idx, &lit) in aig.inputs.iter().enumerate() {
            let v = Var::new(lit >> 1);
            if aig.is_controllable(idx) {
                outputs.push(v);
            } else {
                inputs.push(v);
            }
        }
        if outputs.is_empty() {
            return Err(Error::UnsupportedSpec("no controllable input".into()));
        }

        let mut pool = VarPool::above(aig.max_var);
        let bad = aig.outputs[0];
        let mut roots: Vec<u32> = aig.latches.iter().map(|l| l.next).collect();
        roots.push(bad);
        let enc = tseitin_encode_aig(&aig, &roots, &mut pool)?;

        let mut trans = enc.cnf.clone();
        let mut state: Vec<Var> = aig.latches.iter().map(|l| Var::new(l.lit >> 1)).collect();
        let mut next = Vec::with_capacity(state.len() + 1);
        for l in &aig.latches {
            let nx = pool.fresh();
            let f = enc.lit(l.next);
            trans.push(Clause::new([nx.neg(), f]));
            trans.push(Clause::new([nx.pos(), !f]));
            next.push(nx);
        }

        let kinds = aig.node_kinds()?;
        let bad_var = bad >> 1;
        let (error, synthetic_error) = match kinds[bad_var as usize] {
            NodeKind::Latch(_) => {
                let l = Var::new(bad_var).lit(bad & 1 == 0);
                (l, false)
            }
            _ => {
                // err' = err ∨ bad; absorbing, reset 0
                let err = pool.fresh();
                let err_next = pool.fresh();
                let b = enc.lit(bad);
                trans.push(Clause::new([err_next.neg(), err.pos(), b]));
                trans.push(Clause::new([err_next.pos(), err.neg()]));
                trans.push(Clause::new([err_next.pos(), !b]));
                state.push(err);
                next.push(err_next);
                (err.pos(), true)
            }
        };

        let mut support: HashMap<Var, Vec<Var>> = HashMap::new();
        let mut gate_inputs = HashMap::new();
        let mut cone: HashMap<u32, BTreeSet<Var>> = HashMap::new();
        for &aux in &enc.aux {
            if Some(aux) == enc.const_var {
                support.insert(aux, Vec::new());
                continue;
            }
            let NodeKind::And { rhs0, rhs1 } = kinds[aux.id() as usize] else {
                unreachable!("aux variables are AND gates");
            };
            let mut s = BTreeSet::new();
            for r in [rhs0 >> 1, rhs1 >> 1] {
                match kinds[r as usize] {
                    NodeKind::Input(_) | NodeKind::Latch(_) => {
                        s.insert(Var::new(r));
                    }
                    NodeKind::And { .. } => s.extend(cone[&r].iter().copied()),
                    _ => {}
                }
            }
            support.insert(aux, s.iter().copied().collect());
            cone.insert(aux.id(), s);
            gate_inputs.insert(aux, (enc.lit(rhs0), enc.lit(rhs1)));
        }

        pool.add_group("x", state.clone())?;
        pool.add_group("i", inputs.clone())?;
        pool.add_group("o", outputs.clone())?;
        pool.add_group("x'", next.clone())?;
        pool.add_group("aux", enc.aux.clone())?;

        Ok(SafetySpec {
            aig,
            state,
            next,
            inputs,
            outputs,
            aux: enc.aux,
            trans,
            error,
            synthetic_error,
            const_var: enc.const_var,
            pool,
            support,
            gate_inputs,
        })
    }

    /// Number of latches in the AIGER file (excludes the synthetic latch).
    pub fn latch_count(&self) -> usize {
        self.aig.latches.len()
    }

    /// Map from current-state to next-state variables.
    pub fn state_to_next(&self) -> HashMap<Var, Var> {
        self.state.iter().copied().zip(self.next.iter().copied()).collect()
    }

    /// `x̄ ∪ ī`.
    pub fn inputs_and_state(&self) -> Vec<Var> {
        self.state.iter().chain(&self.inputs).copied().collect()
    }

    /// Initial state as a cube (all latches 0).
    pub fn initial_cube(&self) -> crate::Cube {
        self.state.iter().map(|v| v.neg()).collect()
    }
}
