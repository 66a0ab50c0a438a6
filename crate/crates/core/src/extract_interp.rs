//! Output functions as interpolants between "v must be true" and "v must be
//! false", with interpolants computed by SAT-based learning.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::aiger::SafetySpec;
use crate::circuit::resubstitute;
use crate::cnf::{rename_apart, Clause, Cnf, Cube, Var, VarPool};
use crate::extract_qbf::LearnedFunction;
use crate::game::WinningRegion;
use crate::neglearn::{negate, NegWEncoding};
use crate::sat::SatSession;
use crate::{Deadline, Error, Result};

/// What the current output may depend on.
#[derive(Clone, Debug, Default)]
pub struct DepContext {
    /// Shared variables, in the order IntLearn offers them to the core
    /// minimizer: state and inputs, then outputs, then auxiliaries.
    pub d: Vec<Var>,
    /// Edge `a → b`: `f_a` references `b`, directly or through a shared
    /// auxiliary.
    pub dep_graph: BTreeMap<Var, BTreeSet<Var>>,
    /// Auxiliaries of T admitted into `d`.
    pub shared_aux: Vec<Var>,
    /// `v_j ↔ f_j` for the outputs processed so far.
    pub defs: Cnf,
}

impl DepContext {
    /// True if `to` can be reached from `from` along `dep_graph`.
    pub fn reaches(&self, from: Var, to: Var) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if seen.insert(v) {
                if let Some(next) = self.dep_graph.get(&v) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        false
    }

    pub fn is_acyclic(&self) -> bool {
        self.dep_graph
            .iter()
            .all(|(&a, next)| next.iter().all(|&b| !self.reaches(b, a)))
    }
}

/// `(M1, M0)` for output `v`. Everything outside `ctx.d` is renamed apart
/// per copy.
pub fn build_m1_m0(
    spec: &SafetySpec,
    w: &WinningRegion,
    v: Var,
    ctx: &DepContext,
    negw: NegWEncoding,
    pool: &mut VarPool,
) -> Result<(Cnf, Cnf)> {
    let mut stay = spec.trans.clone();
    stay.extend(&w.w_next);
    stay.extend(&ctx.defs);
    let mut leave = spec.trans.clone();
    leave.extend(&w.w);
    leave.extend(&negate(&w.w_next, negw, pool)?);
    leave.extend(&ctx.defs);

    let shared: HashSet<Var> = ctx.d.iter().copied().collect();
    let copy = |base: &Cnf, value: bool, pool: &mut VarPool| {
        let mut f = base.clone();
        f.push(Clause::unit(v.lit(value)));
        let local: Vec<Var> = f.vars().into_iter().filter(|x| !shared.contains(x)).collect();
        rename_apart(&f, &local, pool).0
    };
    let mut m1 = copy(&stay, true, pool);
    m1.extend(&copy(&leave, false, pool));
    let mut m0 = copy(&stay, false, pool);
    m0.extend(&copy(&leave, true, pool));
    Ok((m1, m0))
}

#[derive(Clone, Debug)]
pub struct Interpolant {
    pub f: Cnf,
    pub iterations: usize,
}

/// Computes `f` over `shared` with `a ⇒ f` and `f ∧ b` unsatisfiable.
pub trait Interpolator {
    fn interpolate(&mut self, a: &Cnf, b: &Cnf, shared: &[Var], deadline: Deadline) -> Result<Interpolant>;
}

/// IntLearn: block each model of `M0 ∧ f` by the negation of its minimal
/// core against `M1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LearningInterpolator;

impl Interpolator for LearningInterpolator {
    fn interpolate(&mut self, a: &Cnf, b: &Cnf, shared: &[Var], deadline: Deadline) -> Result<Interpolant> {
        int_learn(a, b, shared, deadline)
    }
}

/// Placeholder for a proof-based interpolating solver; none is bundled.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExternalInterpolator;

impl Interpolator for ExternalInterpolator {
    fn interpolate(&mut self, _: &Cnf, _: &Cnf, _: &[Var], _: Deadline) -> Result<Interpolant> {
        Err(Error::InterpolatorNotConfigured)
    }
}

pub fn int_learn(m1: &Cnf, m0: &Cnf, d: &[Var], deadline: Deadline) -> Result<Interpolant> {
    let mut both = SatSession::from_cnf(m1);
    both.add_cnf(m0);
    if both.solve(&Cube::top()) {
        return Err(Error::StrategyConflict(
            "an output is forced both high and low".into(),
        ));
    }
    let mut s0 = SatSession::from_cnf(m0);
    let mut s1 = SatSession::from_cnf(m1);
    let mut f = Cnf::new();
    let mut iterations = 0;
    while s0.solve(&Cube::top()) {
        deadline.check()?;
        let point = s0.model(d);
        let core = s1.core_min(&point).map_err(|e| match e {
            Error::Contract(_) => Error::StrategyConflict(format!("{point:?} satisfies both M0 and M1")),
            other => other,
        })?;
        let clause = core.negate();
        s0.add_clause(&clause);
        f.push(clause);
        iterations += 1;
    }
    Ok(Interpolant { f, iterations })
}

/// Decides whether an auxiliary of T is a function of a given variable set:
/// T and a renamed copy, with pinnable equalities on state, inputs and
/// outputs and a selectable disequality per auxiliary.
struct UniquenessOracle {
    solver: SatSession,
    pin: HashMap<Var, Var>,
    differ: HashMap<Var, Var>,
}

impl UniquenessOracle {
    fn new(spec: &SafetySpec) -> UniquenessOracle {
        let mut pool = spec.pool.clone();
        let (copy, map) = rename_apart(&spec.trans, &spec.trans.vars(), &mut pool);
        let mut solver = SatSession::from_cnf(&spec.trans);
        solver.add_cnf(&copy);
        let mut pin = HashMap::new();
        for &x in spec.state.iter().chain(&spec.inputs).chain(&spec.outputs) {
            let Some(&c) = map.get(&x) else { continue };
            let g = pool.fresh();
            solver.add_clause(&Clause::new([g.neg(), x.neg(), c.pos()]));
            solver.add_clause(&Clause::new([g.neg(), x.pos(), c.neg()]));
            pin.insert(x, g);
        }
        let mut differ = HashMap::new();
        for &a in &spec.aux {
            let c = map[&a];
            let g = pool.fresh();
            solver.add_clause(&Clause::new([g.neg(), a.pos(), c.pos()]));
            solver.add_clause(&Clause::new([g.neg(), a.neg(), c.neg()]));
            differ.insert(a, g);
        }
        UniquenessOracle { solver, pin, differ }
    }

    fn determined(&mut self, a: Var, by: &[Var]) -> bool {
        let mut assume: Cube = by.iter().filter_map(|x| self.pin.get(x)).map(|g| g.pos()).collect();
        assume.push(self.differ[&a].pos());
        !self.solver.solve(&assume)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SyIntOptions {
    /// Let outputs depend on other outputs whose functions do not need them,
    /// and on auxiliaries of T those determine.
    pub dependency_opt: bool,
    pub negw: NegWEncoding,
    pub deadline: Deadline,
}

/// Everything needed to re-check one output's interpolation afterwards.
#[derive(Clone, Debug)]
pub struct OutputRecord {
    pub output: Var,
    pub d: Vec<Var>,
    pub m1: Cnf,
    pub m0: Cnf,
    pub f: Cnf,
}

#[derive(Clone, Debug)]
pub struct SyIntResult {
    pub functions: Vec<LearnedFunction>,
    pub records: Vec<OutputRecord>,
    pub ctx: DepContext,
}

pub fn sy_int(
    spec: &SafetySpec,
    w: &WinningRegion,
    options: SyIntOptions,
    interp: &mut dyn Interpolator,
) -> Result<SyIntResult> {
    let mut pool = spec.pool.clone();
    let mut ctx = DepContext::default();
    let mut oracle = options.dependency_opt.then(|| UniquenessOracle::new(spec));
    let raw: Vec<Var> = spec.inputs_and_state();
    let outputs: HashSet<Var> = spec.outputs.iter().copied().collect();
    let mut functions = Vec::new();
    let mut records = Vec::new();

    for (k, &v) in spec.outputs.iter().enumerate() {
        options.deadline.check()?;
        let dep_outputs: Vec<Var> = if options.dependency_opt {
            spec.outputs
                .iter()
                .copied()
                .filter(|&o| o != v && !ctx.reaches(o, v))
                .collect()
        } else {
            spec.outputs[k + 1..].to_vec()
        };
        let mut base: Vec<Var> = raw.clone();
        base.extend(&dep_outputs);
        ctx.shared_aux.clear();
        if let Some(oracle) = oracle.as_mut() {
            let allowed: HashSet<Var> = base.iter().copied().collect();
            for &a in &spec.aux {
                if Some(a) == spec.const_var {
                    continue;
                }
                let support = &spec.support[&a];
                if support.iter().all(|s| allowed.contains(s)) && oracle.determined(a, &base) {
                    ctx.shared_aux.push(a);
                }
            }
        }
        ctx.d = base;
        ctx.d.extend(&ctx.shared_aux);

        let (m1, m0) = build_m1_m0(spec, w, v, &ctx, options.negw, &mut pool)?;
        let Interpolant { f, iterations } = interp.interpolate(&m1, &m0, &ctx.d, options.deadline)?;
        log::debug!("sl: {v} learned {} clauses over {} shared", f.len(), ctx.d.len());

        let mut deps = BTreeSet::new();
        for x in f.vars() {
            if outputs.contains(&x) {
                deps.insert(x);
            } else if let Some(support) = spec.support.get(&x) {
                deps.extend(support.iter().copied().filter(|s| outputs.contains(s)));
            }
        }
        ctx.dep_graph.insert(v, deps);
        if !ctx.is_acyclic() {
            return Err(Error::CyclicDependency(v.id()));
        }
        ctx.defs.extend(&resubstitute(v, &f, &mut pool));
        records.push(OutputRecord {
            output: v,
            d: ctx.d.clone(),
            m1,
            m0,
            f: f.clone(),
        });
        functions.push(LearnedFunction {
            output: v,
            f,
            iterations,
        });
    }
    Ok(SyIntResult {
        functions,
        records,
        ctx,
    })
}

/// Drops clauses, then literals, from each function as long as
/// `W ∧ T ∧ ¬W'` stays unsatisfiable under all definitions.
pub fn post_minimize(
    spec: &SafetySpec,
    w: &WinningRegion,
    functions: &[(Var, Cnf)],
    negw: NegWEncoding,
    deadline: Deadline,
) -> Result<Vec<(Var, Cnf)>> {
    let mut pool = spec.pool.clone();
    let mut s = SatSession::from_cnf(&w.w);
    s.add_cnf(&spec.trans);
    s.add_cnf(&negate(&w.w_next, negw, &mut pool)?);

    let guarded = |s: &mut SatSession, v: Var, f: &Cnf, pool: &mut VarPool| -> Var {
        let g = pool.fresh();
        for c in resubstitute(v, f, pool).clauses() {
            let mut c = c.clone();
            c.push(g.neg());
            s.add_clause(&c);
        }
        g
    };
    let mut current: Vec<(Var, Cnf, Var)> = functions
        .iter()
        .map(|(v, f)| (*v, f.clone(), guarded(&mut s, *v, f, &mut pool)))
        .collect();
    // Guards of all current definitions, with the one at `skip` replaced.
    let assumptions = |current: &[(Var, Cnf, Var)], skip: usize, replacement: Var| -> Cube {
        current
            .iter()
            .enumerate()
            .map(|(j, e)| if j == skip { replacement } else { e.2 }.pos())
            .collect()
    };
    if s.solve(&assumptions(&current, usize::MAX, Var::new(1))) {
        return Err(Error::Contract("functions do not keep the play inside W".into()));
    }

    for j in 0..current.len() {
        let v = current[j].0;
        let accept = |s: &mut SatSession, current: &mut Vec<(Var, Cnf, Var)>, cand: Cnf, pool: &mut VarPool| -> Result<bool> {
            deadline.check()?;
            let g = guarded(s, v, &cand, pool);
            if s.solve(&assumptions(current, j, g)) {
                Ok(false)
            } else {
                current[j].1 = cand;
                current[j].2 = g;
                Ok(true)
            }
        };
        let mut c = 0;
        while c < current[j].1.len() {
            let cand: Cnf = current[j]
                .1
                .clauses()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != c)
                .map(|(_, cl)| cl.clone())
                .collect();
            if !accept(&mut s, &mut current, cand, &mut pool)? {
                c += 1;
            }
        }
        for c in 0..current[j].1.len() {
            let mut l = 0;
            while l < current[j].1.clauses()[c].len() {
                let clause = &current[j].1.clauses()[c];
                let shorter = clause.without(clause.lits()[l]);
                let mut cand: Vec<Clause> = current[j].1.clauses().to_vec();
                cand[c] = shorter;
                let f = Cnf::from_clauses(cand);
                // A merge with an equal clause would shift positions; the
                // clause pass already had its chance to remove it.
                if f.len() != current[j].1.len() || !accept(&mut s, &mut current, f, &mut pool)? {
                    l += 1;
                }
            }
        }
    }
    Ok(current.into_iter().map(|(v, f, _)| (v, f)).collect())
}
