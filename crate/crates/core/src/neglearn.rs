//! CNF negation without auxiliary variables, learned one blocking clause at a
//! time.

use crate::cnf::{negate_cnf_with_aux, Clause, Cnf, VarPool};
use crate::sat::SatSession;
use crate::{Error, Result};

/// How `¬W'` is represented when a method needs it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NegWEncoding {
    /// One auxiliary per clause (see [`negate_cnf_with_aux`]).
    #[default]
    Aux,
    /// Learned by [`neg_learn`], over the original variables only.
    Learn,
}

/// CNF over the variables of `f` equivalent to `¬f`.
///
/// Each round takes a model of `f ∧ N`, shrinks it to a core that is still
/// inconsistent with `¬f`, and blocks that core.
pub fn neg_learn(f: &Cnf) -> Result<Cnf> {
    let vars = f.vars();
    let mut pool = VarPool::above(f.max_var());
    let mut models = SatSession::from_cnf(f);
    let mut negated = SatSession::from_cnf(&negate_cnf_with_aux(f, &mut pool));
    let cap = 1u128.checked_shl(vars.len() as u32).unwrap_or(u128::MAX);

    let mut out = Cnf::new();
    let mut rounds = 0u128;
    while models.solve(&crate::Cube::top()) {
        rounds += 1;
        if rounds > cap {
            return Err(Error::Contract(format!(
                "neg_learn exceeded {cap} iterations over {} variables",
                vars.len()
            )));
        }
        let x = models.model(&vars);
        let core = negated.core_min(&x)?;
        let clause: Clause = core.negate();
        models.add_clause(&clause);
        out.push(clause);
    }
    Ok(out)
}

/// `¬f` in the requested encoding. Auxiliaries come from `pool`.
pub fn negate(f: &Cnf, encoding: NegWEncoding, pool: &mut VarPool) -> Result<Cnf> {
    match encoding {
        NegWEncoding::Aux => Ok(negate_cnf_with_aux(f, pool)),
        NegWEncoding::Learn => neg_learn(f),
    }
}
