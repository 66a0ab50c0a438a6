//! Winning region of the safety game as a CNF over the state variables.

use std::collections::HashSet;

use crate::aiger::SafetySpec;
use crate::cnf::{Clause, Cnf, Cube, Var, VarPool};
use crate::neglearn::{negate, NegWEncoding};
use crate::qbf::{Prefix, QbfSession};
use crate::sat::{simplify_cnf, SatSession};
use crate::{Deadline, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinningRegion {
    /// Over the current-state variables.
    pub w: Cnf,
    /// The same clauses over the next-state variables.
    pub w_next: Cnf,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RegionStats {
    /// Blocking clauses learned.
    pub iterations: usize,
    /// Clause count before simplification.
    pub raw_clauses: usize,
}

impl WinningRegion {
    pub fn new(spec: &SafetySpec, w: Cnf) -> WinningRegion {
        let w_next = w.rename(&spec.state_to_next());
        WinningRegion { w, w_next }
    }
}

/// The QBF `∃x,i ∀o ∃x',aux: W ∧ T ∧ ¬W'`, false exactly when `w` is
/// inductive for the controller. T's variables are passed as definitions.
pub fn inductiveness_session(
    spec: &SafetySpec,
    w: &Cnf,
    negw: NegWEncoding,
    pool: &mut VarPool,
) -> Result<QbfSession> {
    let w_next = w.rename(&spec.state_to_next());
    let first_aux = pool.next_free();
    let not_w_next = negate(&w_next, negw, pool)?;
    let neg_aux = (first_aux..pool.next_free()).map(Var::new);
    let defined: Vec<Var> = spec.next.iter().chain(&spec.aux).copied().collect();
    let prefix = Prefix {
        outer: spec.inputs_and_state(),
        forall: spec.outputs.clone(),
        inner: defined.iter().copied().chain(neg_aux).collect(),
    };
    let mut matrix = w.clone();
    matrix.extend(&not_w_next);
    QbfSession::with_definitions(prefix, &spec.trans, &defined, &matrix)
}

/// Learns W by blocking states from which the environment can force the
/// play out of the current candidate, starting from "not in error".
pub fn compute_winning_region(
    spec: &SafetySpec,
    negw: NegWEncoding,
    deadline: Deadline,
) -> Result<(WinningRegion, RegionStats)> {
    let to_next = spec.state_to_next();
    let state: HashSet<Var> = spec.state.iter().copied().collect();
    let mut w = Cnf::from_clauses([Clause::unit(!spec.error)]);

    // ∃x ∀i ∃o,x',aux: T ∧ W'; false under x iff the environment wins one step.
    let defined: Vec<Var> = spec.next.iter().chain(&spec.aux).copied().collect();
    let prefix = Prefix {
        outer: spec.state.clone(),
        forall: spec.inputs.clone(),
        inner: spec.outputs.iter().chain(&defined).copied().collect(),
    };
    let mut stay = QbfSession::with_definitions(prefix, &spec.trans, &defined, &w.rename(&to_next))?;
    stay.set_deadline(deadline);

    let mut stats = RegionStats::default();
    loop {
        deadline.check()?;
        let mut pool = spec.pool.clone();
        let mut check = inductiveness_session(spec, &w, negw, &mut pool)?;
        check.set_deadline(deadline);
        let Some(model) = check.qsat()? else {
            break;
        };
        let x: Cube = model.project(&state);
        let losing = stay.qcore(&x).map_err(|e| match e {
            Error::Contract(_) => Error::Contract(format!(
                "state {x:?} escapes the candidate region but the environment cannot force it"
            )),
            other => other,
        })?;
        let clause = losing.negate();
        log::debug!("winning region: blocking {losing:?}");
        stay.add_clause(&clause.rename(&to_next))?;
        w.push(clause);
        stats.iterations += 1;
        if losing.is_empty() {
            break;
        }
    }
    stats.raw_clauses = w.len();
    let w = simplify_cnf(&w);
    Ok((WinningRegion::new(spec, w), stats))
}

/// True iff the all-zero initial state lies in W.
pub fn check_realizability(spec: &SafetySpec, w: &WinningRegion) -> bool {
    SatSession::from_cnf(&w.w).solve(&spec.initial_cube())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiger::Aig;

    fn spec(text: &str) -> SafetySpec {
        SafetySpec::from_aig(Aig::parse(text.as_bytes()).unwrap()).unwrap()
    }

    fn models_over_state(spec: &SafetySpec, w: &Cnf) -> Vec<u32> {
        let n = spec.state.len();
        (0u32..1 << n)
            .filter(|m| {
                w.eval(|v| {
                    let k = spec.state.iter().position(|&s| s == v).unwrap();
                    m >> k & 1 == 1
                })
            })
            .collect()
    }

    #[test]
    fn untouchable_error_latch() {
        // err' = err, bad = err; the controllable input is unused
        let s = spec("aag 2 1 1 1 0\n2\n4 4\n4\ni0 controllable_o\n");
        let (w, _) = compute_winning_region(&s, NegWEncoding::Aux, Deadline::none()).unwrap();
        assert_eq!(w.w, Cnf::from_clauses([Clause::unit(Var::new(2).neg())]));
        assert!(check_realizability(&s, &w));
    }

    #[test]
    fn controller_keeps_latch_high() {
        // x' = o, bad = ¬x: from x=1 the controller plays o=1; x=0 is bad
        let s = spec("aag 2 1 1 1 0\n2\n4 2\n5\ni0 controllable_o\n");
        let (w, _) = compute_winning_region(&s, NegWEncoding::Aux, Deadline::none()).unwrap();
        assert_eq!(models_over_state(&s, &w.w), vec![1]);
        assert!(!check_realizability(&s, &w));
        let mut pool = s.pool.clone();
        let mut q = inductiveness_session(&s, &w.w, NegWEncoding::Aux, &mut pool).unwrap();
        assert!(q.qsat().unwrap().is_none());
    }

    #[test]
    fn environment_forces_error() {
        // x' = i (uncontrollable), bad = x
        let s = spec("aag 3 2 1 1 0\n2\n4\n6 2\n6\ni1 controllable_o\n");
        for negw in [NegWEncoding::Aux, NegWEncoding::Learn] {
            let (w, _) = compute_winning_region(&s, negw, Deadline::none()).unwrap();
            assert!(models_over_state(&s, &w.w).is_empty());
            assert!(!check_realizability(&s, &w));
        }
    }

    #[test]
    fn two_step_escape_is_blocked() {
        // latches a, b with a' = i ∧ ¬o, b' = a, bad = b. A raised a
        // reaches b one step later, and o = 1 keeps a low, so W = ¬a ∧ ¬b.
        let s = spec(
            "aag 5 2 2 1 1\n\
             2\n4\n\
             6 10\n8 6\n\
             8\n\
             10 2 5\n\
             i1 controllable_o\n",
        );
        let (w, _) = compute_winning_region(&s, NegWEncoding::Aux, Deadline::none()).unwrap();
        // state bits: a = bit 0, b = bit 1
        assert_eq!(models_over_state(&s, &w.w), vec![0b00]);
        assert!(check_realizability(&s, &w));
    }
}
