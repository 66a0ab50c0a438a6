//! Brute-force oracles shared by the integration tests. None of them call
//! into the solver stack.

#![allow(dead_code)]

use aigsynth_core::{Aig, Clause, Cnf, Var};
use rand::Rng;

/// Value of `∃ outer∖fixed ∀ forall ∃ inner: f` by enumeration.
pub fn qbf_value(outer: &[Var], forall: &[Var], inner: &[Var], f: &Cnf, fixed: &[(Var, bool)]) -> bool {
    let free: Vec<Var> = outer.iter().copied().filter(|v| !fixed.iter().any(|(x, _)| x == v)).collect();
    let n = outer.iter().chain(forall).chain(inner).map(|v| v.id()).max().unwrap_or(0) as usize;
    let mut val = vec![false; n + 1];
    for &(v, b) in fixed {
        val[v.id() as usize] = b;
    }
    exists(&free, &mut val, &mut |val| {
        forall_all(forall, val, &mut |val| exists(inner, val, &mut |val| f.eval(|v| val[v.id() as usize])))
    })
}

fn exists(vars: &[Var], val: &mut Vec<bool>, body: &mut dyn FnMut(&mut Vec<bool>) -> bool) -> bool {
    quantify(vars, val, body, true)
}

fn forall_all(vars: &[Var], val: &mut Vec<bool>, body: &mut dyn FnMut(&mut Vec<bool>) -> bool) -> bool {
    quantify(vars, val, body, false)
}

fn quantify(vars: &[Var], val: &mut Vec<bool>, body: &mut dyn FnMut(&mut Vec<bool>) -> bool, any: bool) -> bool {
    for m in 0u64..1 << vars.len() {
        for (k, v) in vars.iter().enumerate() {
            val[v.id() as usize] = m >> k & 1 == 1;
        }
        if body(val) == any {
            return any;
        }
    }
    !any
}

/// CNF with `1..=max_clauses` clauses of width 1 to 4 over variables `1..=n`.
pub fn random_cnf(rng: &mut impl Rng, n: u32, max_clauses: usize) -> Cnf {
    let m = rng.gen_range(1..=max_clauses);
    (0..m)
        .map(|_| {
            let w = rng.gen_range(1..=4);
            Clause::new((0..w).map(|_| Var::new(rng.gen_range(1..=n)).lit(rng.gen())))
        })
        .collect()
}

/// Truth table of `f` over variables `1..=n`.
pub fn truth_table(f: &Cnf, n: u32) -> Vec<bool> {
    (0u32..1 << n).map(|m| f.eval(|v| m >> (v.id() - 1) & 1 == 1)).collect()
}

/// Explicit-state safety game on an AIG whose controllable inputs are those
/// named `controllable_*`. Entry `s` (latch `k` = bit `k`) is true iff the
/// controller can keep the bad output low forever from latch state `s`.
///
/// The inner `∃o` is evaluated 64 output assignments at a time.
pub fn explicit_winning_states(aig: &Aig) -> Vec<bool> {
    let ctrl: Vec<usize> = (0..aig.inputs.len()).filter(|&k| aig.is_controllable(k)).collect();
    let env: Vec<usize> = (0..aig.inputs.len()).filter(|&k| !aig.is_controllable(k)).collect();
    let nl = aig.latches.len();
    assert!(nl <= 16 && env.len() <= 20 && ctrl.len() <= 20, "too large to enumerate");
    for g in &aig.ands {
        assert!(g.rhs0 >> 1 < g.lhs >> 1 && g.rhs1 >> 1 < g.lhs >> 1, "gates out of order");
    }

    // lane j of pattern k has bit k of j
    let lane_bits = |k: usize| -> u64 {
        (0..64).filter(|j| j >> k & 1 == 1).fold(0u64, |acc, j| acc | 1 << j)
    };
    let lane_ctrl = ctrl.len().min(6);
    let lanes: usize = 1 << lane_ctrl;
    let lane_mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };

    let mut win = vec![true; 1 << nl];
    let mut val = vec![0u64; aig.max_var as usize + 1];
    let read = |val: &[u64], l: u32| -> u64 {
        let v = val[(l >> 1) as usize];
        if l & 1 == 1 {
            !v
        } else {
            v
        }
    };
    loop {
        let mut next_win = win.clone();
        for s in 0..1usize << nl {
            if !win[s] {
                continue;
            }
            let mut all_inputs_ok = true;
            for i in 0u64..1 << env.len() {
                let mut some_output_ok = false;
                for hi in 0u64..1 << (ctrl.len() - lane_ctrl) {
                    val.iter_mut().for_each(|x| *x = 0);
                    for (k, l) in aig.latches.iter().enumerate() {
                        val[(l.lit >> 1) as usize] = if s >> k & 1 == 1 { u64::MAX } else { 0 };
                    }
                    for (k, &idx) in env.iter().enumerate() {
                        val[(aig.inputs[idx] >> 1) as usize] = if i >> k & 1 == 1 { u64::MAX } else { 0 };
                    }
                    for (k, &idx) in ctrl.iter().enumerate() {
                        let bits = if k < lane_ctrl {
                            lane_bits(k)
                        } else if hi >> (k - lane_ctrl) & 1 == 1 {
                            u64::MAX
                        } else {
                            0
                        };
                        val[(aig.inputs[idx] >> 1) as usize] = bits;
                    }
                    for g in &aig.ands {
                        val[(g.lhs >> 1) as usize] = read(&val, g.rhs0) & read(&val, g.rhs1);
                    }
                    let mut good = !read(&val, aig.outputs[0]) & lane_mask;
                    let nexts: Vec<u64> = aig.latches.iter().map(|l| read(&val, l.next)).collect();
                    for j in 0..lanes {
                        if good >> j & 1 == 0 {
                            continue;
                        }
                        let t = nexts.iter().enumerate().fold(0usize, |acc, (k, b)| acc | ((b >> j & 1) as usize) << k);
                        if !win[t] {
                            good &= !(1 << j);
                        }
                    }
                    if good != 0 {
                        some_output_ok = true;
                        break;
                    }
                }
                if !some_output_ok {
                    all_inputs_ok = false;
                    break;
                }
            }
            next_win[s] = all_inputs_ok;
        }
        if next_win == win {
            return win;
        }
        win = next_win;
    }
}
