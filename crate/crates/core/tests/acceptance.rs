//! One line per acceptance criterion. Runs without the test harness so the
//! lines always show; exits non-zero if any criterion failed.

mod common;

use std::time::{Duration, Instant};

use aigsynth_core::cnf::negate_cnf_with_aux;
use aigsynth_core::game::{compute_winning_region, inductiveness_session, RegionStats};
use aigsynth_core::neglearn::neg_learn;
use aigsynth_core::qbf::{Prefix, QAnswer, QbfSession};
use aigsynth_core::sat::SatSession;
use aigsynth_core::verify::simulate;
use aigsynth_core::{
    bench, synthesize, synthesize_in_region, Aig, Cnf, Cube, Deadline, Error, Method, NegWEncoding, SafetySpec,
    SynthOptions, SynthReport, Var, VarPool, WinningRegion,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use common::{explicit_winning_states, qbf_value, random_cnf, truth_table};

/// Budget for each ql and sln comparison run. A run that exceeds it counts
/// as slower and larger than sl.
const COMPARISON_BUDGET: Duration = Duration::from_secs(20);

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

struct Bench {
    name: String,
    aig: Aig,
    spec: SafetySpec,
    region: WinningRegion,
    stats: RegionStats,
    region_time: Duration,
    /// Published cell count of the interpolation method on the same instance.
    reference_cells: usize,
}

fn suite() -> Vec<Bench> {
    let rows: [(&str, usize, usize); 7] = [
        ("add", 2, 9),
        ("add", 4, 27),
        ("add", 6, 45),
        ("add", 8, 63),
        ("mult", 2, 8),
        ("mult", 4, 95),
        ("mult", 5, 163),
    ];
    rows.iter()
        .map(|&(kind, n, reference_cells)| {
            let aig = if kind == "add" { bench::add(n) } else { bench::mult(n) }.unwrap();
            let spec = SafetySpec::from_aig(aig.clone()).unwrap();
            let start = Instant::now();
            let (region, stats) = compute_winning_region(&spec, NegWEncoding::Aux, Deadline::none()).unwrap();
            Bench {
                name: format!("{kind}{n}"),
                aig,
                spec,
                region,
                stats,
                region_time: start.elapsed(),
                reference_cells,
            }
        })
        .collect()
}

fn options(method: Method, deadline: Deadline) -> SynthOptions {
    SynthOptions {
        method,
        deadline,
        ..SynthOptions::default()
    }
}

/// `None` on timeout.
fn run_in_region(b: &Bench, method: Method, budget: Option<Duration>) -> Option<SynthReport> {
    let deadline = budget.map_or(Deadline::none(), Deadline::after);
    match synthesize_in_region(&b.spec, b.region.clone(), b.stats, &options(method, deadline)) {
        Ok(r) => Some(r),
        Err(Error::Timeout) => None,
        Err(e) => panic!("{} {method}: {e}", b.name),
    }
}

fn end_to_end(suite: &[Bench], family: &str, limit: Duration, name: &'static str) -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for b in suite.iter().filter(|b| b.name.starts_with(family)) {
        let start = Instant::now();
        let r = synthesize(&b.spec, &options(Method::SatLearn, Deadline::none())).unwrap();
        let t = start.elapsed();
        let imp = r.implementation.as_ref().unwrap();
        let verified = r.verdict.as_ref().is_some_and(|v| v.passed());
        let simulated = simulate(imp, 256, 16, 7).unwrap().is_none();
        let size_ok = r.gates <= 10 * b.reference_cells;
        passed &= verified && simulated && t < limit && size_ok;
        detail.push(format!(
            "{}: {:.2}s {} gates (reference {}) verified={verified} sim={simulated}",
            b.name,
            t.as_secs_f64(),
            r.gates,
            b.reference_cells
        ));
    }
    Outcome {
        name,
        passed,
        detail: detail.join("; "),
    }
}

/// Both sides with a SAT solver: `a ⇒ f` and `f ∧ b` unsatisfiable.
fn interpolant_holds(a: &Cnf, f: &Cnf, b: &Cnf) -> bool {
    let top = a.max_var().max(b.max_var()).max(f.max_var());
    let mut pool = VarPool::above(top);
    let mut s = SatSession::from_cnf(a);
    s.add_cnf(&negate_cnf_with_aux(f, &mut pool));
    let forward = !s.solve(&Cube::top());
    let mut s = SatSession::from_cnf(f);
    s.add_cnf(b);
    forward && !s.solve(&Cube::top())
}

fn method_comparisons(suite: &[Bench]) -> Vec<Outcome> {
    let mut sl_time = Duration::ZERO;
    let mut ql_time = Duration::ZERO;
    let mut smaller_or_equal = 0;
    let mut contracts = 0;
    let mut contract_failures = Vec::new();
    let mut rows = Vec::new();
    for b in suite {
        let sl = run_in_region(b, Method::SatLearn, None).unwrap();
        let sln = run_in_region(b, Method::SatLearnNoDeps, Some(COMPARISON_BUDGET));
        let ql = run_in_region(b, Method::QbfLearn, Some(COMPARISON_BUDGET));
        sl_time += sl.timings.extraction;
        ql_time += ql.as_ref().map_or(COMPARISON_BUDGET, |r| r.timings.extraction);
        if sln.as_ref().is_none_or(|r| sl.gates <= r.gates) {
            smaller_or_equal += 1;
        }
        for r in std::iter::once(&sl).chain(sln.as_ref()) {
            for rec in &r.records {
                contracts += 1;
                if !interpolant_holds(&rec.m1, &rec.f, &rec.m0) {
                    contract_failures.push(format!("{} {}", b.name, rec.output));
                }
            }
        }
        let show = |r: &Option<SynthReport>| {
            r.as_ref()
                .map_or("timeout".to_string(), |r| format!("{}g/{:.2}s", r.gates, r.timings.extraction.as_secs_f64()))
        };
        rows.push(format!(
            "{}: sl {}g/{:.2}s sln {} ql {}",
            b.name,
            sl.gates,
            sl.timings.extraction.as_secs_f64(),
            show(&sln),
            show(&ql)
        ));
    }
    println!("  comparison runs (budget {}s): {}", COMPARISON_BUDGET.as_secs(), rows.join("; "));
    let share = smaller_or_equal as f64 / suite.len() as f64;
    vec![
        Outcome {
            name: "sl extraction time <= ql extraction time over the suite",
            passed: sl_time <= ql_time,
            detail: format!("sl {:.2}s, ql >= {:.2}s", sl_time.as_secs_f64(), ql_time.as_secs_f64()),
        },
        Outcome {
            name: "sl gates <= sln gates on at least 70% of instances",
            passed: share >= 0.7,
            detail: format!("{smaller_or_equal}/{} instances", suite.len()),
        },
        Outcome {
            name: "interpolant contract M1 => f, f & M0 unsat for every output",
            passed: contract_failures.is_empty() && contracts > 0,
            detail: format!("{contracts} outputs checked, failures: {contract_failures:?}"),
        },
    ]
}

fn neglearn_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut failures = 0;
    let cases = 200;
    for _ in 0..cases {
        let n = rng.gen_range(1..=12);
        let f = random_cnf(&mut rng, n, 20);
        let g = neg_learn(&f).unwrap();
        let (tf, tg) = (truth_table(&f, n), truth_table(&g, n));
        if tf.iter().zip(&tg).any(|(a, b)| a == b) {
            failures += 1;
        }
    }
    let t = start.elapsed();
    Outcome {
        name: "NegLearn result equals the negation by truth table",
        passed: failures == 0 && t < Duration::from_secs(60),
        detail: format!("{cases} CNFs, {failures} failures, {:.2}s", t.as_secs_f64()),
    }
}

fn qbf_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x9bf);
    let cases = 500;
    let mut disagreements = 0;
    let mut core_checks = 0;
    let mut core_failures = 0;
    for _ in 0..cases {
        let n = rng.gen_range(3..=9u32);
        let mut vars: Vec<Var> = (1..=n).map(Var::new).collect();
        vars.shuffle(&mut rng);
        let a = rng.gen_range(1..n as usize - 1);
        let b = rng.gen_range(a + 1..n as usize);
        let prefix = Prefix {
            outer: vars[..a].to_vec(),
            forall: vars[a..b].to_vec(),
            inner: vars[b..].to_vec(),
        };
        let f = random_cnf(&mut rng, n, 15);
        let (o, u, e) = (&prefix.outer, &prefix.forall, &prefix.inner);
        let mut q = QbfSession::new(prefix.clone(), &f).unwrap();
        let truth = qbf_value(o, u, e, &f, &[]);
        match q.qsat().unwrap() {
            Some(m) => {
                let fixed: Vec<(Var, bool)> = m.lits().iter().map(|l| (l.var(), l.is_positive())).collect();
                if !truth || !qbf_value(o, u, e, &f, &fixed) {
                    disagreements += 1;
                }
            }
            None => disagreements += usize::from(truth),
        }

        // a random full outer assignment; take its core when it is losing
        let start: Cube = o.iter().map(|&v| v.lit(rng.gen())).collect();
        let as_fixed = |c: &Cube| -> Vec<(Var, bool)> { c.lits().iter().map(|l| (l.var(), l.is_positive())).collect() };
        if qbf_value(o, u, e, &f, &as_fixed(&start)) {
            if !matches!(q.qsat_assuming(&start).unwrap(), QAnswer::Sat(_)) {
                disagreements += 1;
            }
            continue;
        }
        core_checks += 1;
        let core = q.qcore(&start).unwrap();
        let minimal = core
            .lits()
            .iter()
            .all(|&l| qbf_value(o, u, e, &f, &as_fixed(&core.without(l))));
        if !core.is_subcube_of(&start) || qbf_value(o, u, e, &f, &as_fixed(&core)) || !minimal {
            core_failures += 1;
        }
    }
    Outcome {
        name: "QBF answers match quantifier-tree enumeration; qcore postconditions hold",
        passed: disagreements == 0 && core_failures == 0,
        detail: format!("{cases} instances, {disagreements} disagreements, {core_checks} cores, {core_failures} bad cores"),
    }
}

fn winning_region_soundness(suite: &[Bench]) -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for b in suite {
        let mut pool = b.spec.pool.clone();
        let mut q = inductiveness_session(&b.spec, &b.region.w, NegWEncoding::Aux, &mut pool).unwrap();
        let inductive = q.qsat().unwrap().is_none();
        let explicit = explicit_winning_states(&b.aig);
        let latches = b.aig.latches.len();
        let matches = (0..1usize << b.spec.state.len()).all(|s| {
            let ours = b.region.w.eval(|v| {
                let k = b.spec.state.iter().position(|&x| x == v).unwrap();
                s >> k & 1 == 1
            });
            let theirs = if s >> latches != 0 {
                false // synthetic error latch raised
            } else {
                explicit[s]
            };
            ours == theirs
        });
        passed &= inductive && matches;
        detail.push(format!(
            "{}: inductive={inductive} explicit-match={matches} ({:.2}s)",
            b.name,
            b.region_time.as_secs_f64()
        ));
    }
    Outcome {
        name: "winning region inductive and equal to the explicit-state fixpoint",
        passed,
        detail: detail.join("; "),
    }
}

fn aiger_round_trip(suite: &[Bench]) -> Outcome {
    let mut checked = 0;
    let mut unstable = Vec::new();
    for b in suite {
        let imp = run_in_region(b, Method::SatLearn, None).unwrap().implementation.unwrap();
        for aig in [&b.aig, &imp] {
            let text = aig.to_ascii();
            let again = Aig::parse(text.as_bytes()).unwrap().to_ascii();
            checked += 1;
            if again != text {
                unstable.push(b.name.clone());
            }
        }
    }
    Outcome {
        name: "AIGER files re-emit byte for byte",
        passed: unstable.is_empty(),
        detail: format!("{checked} files, unstable: {unstable:?}"),
    }
}

fn main() {
    let suite = suite();
    let mut outcomes = vec![
        end_to_end(&suite, "add", Duration::from_secs(60), "add suite: sl verifies in < 60s within 10x reference size"),
        end_to_end(&suite, "mult", Duration::from_secs(120), "mult suite: sl verifies in < 120s"),
    ];
    outcomes.extend(method_comparisons(&suite));
    outcomes.push(neglearn_oracle());
    outcomes.push(qbf_oracle());
    outcomes.push(winning_region_soundness(&suite));
    outcomes.push(aiger_round_trip(&suite));

    for o in &outcomes {
        println!("{} {} ({})", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
