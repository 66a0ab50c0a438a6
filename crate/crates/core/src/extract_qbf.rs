//! Output functions by QBF-driven CNF learning.
//!
//! For each controllable input `v`, `f_v` starts as true and gains one clause
//! per environment situation in which `v = 1` loses whatever the remaining
//! outputs do. The clause is the QBF core of that situation against "`v = 0`
//! loses as well", so it covers every situation where `v = 0` is safe.

use crate::aiger::SafetySpec;
use crate::circuit::resubstitute;
use crate::cnf::{Clause, Cnf, Var};
use crate::game::WinningRegion;
use crate::neglearn::{negate, NegWEncoding};
use crate::qbf::{Prefix, QbfSession};
use crate::{Deadline, Error, Result};

#[derive(Clone, Debug)]
pub struct LearnedFunction {
    pub output: Var,
    pub f: Cnf,
    /// Learning rounds, one per clause added.
    pub iterations: usize,
}

/// Learns one CNF over `x̄ ∪ ī` per controllable input, in declaration order.
pub fn sy_learn_qbf(
    spec: &SafetySpec,
    w: &WinningRegion,
    negw: NegWEncoding,
    deadline: Deadline,
) -> Result<Vec<LearnedFunction>> {
    let mut pool = spec.pool.clone();
    // ¬S = W ∧ T ∧ ¬W', later conjoined with v_j ↔ f_j for processed outputs.
    let first_aux = pool.next_free();
    let mut not_s = w.w.clone();
    not_s.extend(&negate(&w.w_next, negw, &mut pool)?);
    let defined: Vec<Var> = spec.next.iter().chain(&spec.aux).copied().collect();
    let outer = spec.inputs_and_state();

    let mut out = Vec::new();
    for (k, &v) in spec.outputs.iter().enumerate() {
        deadline.check()?;
        let forall: Vec<Var> = spec.outputs[k + 1..].to_vec();
        let mut inner: Vec<Var> = spec.outputs[..=k].to_vec();
        inner.extend(&defined);
        inner.extend((first_aux..pool.next_free()).map(Var::new));
        let prefix = Prefix {
            outer: outer.clone(),
            forall,
            inner,
        };

        let mut must_be_false = not_s.clone();
        must_be_false.push(Clause::unit(v.pos()));
        let mut check = QbfSession::with_definitions(prefix.clone(), &spec.trans, &defined, &must_be_false)?;
        check.set_deadline(deadline);

        let mut zero_bad = not_s.clone();
        zero_bad.push(Clause::unit(v.neg()));
        let mut core = QbfSession::with_definitions(prefix, &spec.trans, &defined, &zero_bad)?;
        core.set_deadline(deadline);

        let mut f = Cnf::new();
        let mut iterations = 0;
        while let Some(u) = check.qsat()? {
            let u2 = core.qcore(&u).map_err(|e| match e {
                Error::Contract(_) => Error::InconsistentStrategy(format!(
                    "both values of {v} lose under {u:?}"
                )),
                other => other,
            })?;
            let clause = u2.negate();
            check.add_clause(&clause)?;
            f.push(clause);
            iterations += 1;
        }
        log::debug!("ql: {v} learned {} clauses", f.len());
        not_s.extend(&resubstitute(v, &f, &mut pool));
        out.push(LearnedFunction {
            output: v,
            f,
            iterations,
        });
    }
    Ok(out)
}
