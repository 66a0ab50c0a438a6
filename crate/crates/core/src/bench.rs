//! Generated adder and multiplier specifications.
//!
//! Both read two `n`-bit operands from the environment and ask the
//! controller to drive the result bits. A comparator against a reference
//! network sets an absorbing error latch on any mismatch; the bad output is
//! that latch.

use crate::aiger::{Aig, CONTROLLABLE_PREFIX};
use crate::circuit::AigBuilder;
use crate::{Error, Result};

const FALSE: u32 = 0;

fn xor(b: &mut AigBuilder, x: u32, y: u32) -> u32 {
    let l = b.and(x, y ^ 1);
    let r = b.and(x ^ 1, y);
    b.or(l, r)
}

/// `(sum, carry)` of a full adder.
fn full_add(b: &mut AigBuilder, x: u32, y: u32, c: u32) -> (u32, u32) {
    let p = xor(b, x, y);
    let s = xor(b, p, c);
    let g = b.and(x, y);
    let t = b.and(p, c);
    (s, b.or(g, t))
}

/// Ripple-carry sum of two equal-width vectors and a carry-in.
fn ripple(b: &mut AigBuilder, x: &[u32], y: &[u32], mut carry: u32) -> (Vec<u32>, u32) {
    let mut sum = Vec::with_capacity(x.len());
    for (&xi, &yi) in x.iter().zip(y) {
        let (s, c) = full_add(b, xi, yi, carry);
        sum.push(s);
        carry = c;
    }
    (sum, carry)
}

struct Frame {
    b: AigBuilder,
    a: Vec<u32>,
    bb: Vec<u32>,
    outs: Vec<u32>,
}

fn frame(n: usize, outs: usize, latches: usize) -> Result<Frame> {
    if n == 0 {
        return Err(Error::UnsupportedSpec("bit width must be at least 1".into()));
    }
    let mut b = AigBuilder::new();
    let a = (0..n).map(|_| b.input()).collect();
    let bb = (0..n).map(|_| b.input()).collect();
    let outs = (0..outs).map(|_| b.input()).collect();
    for _ in 0..latches {
        b.latch();
    }
    Ok(Frame { b, a, bb, outs })
}

/// Sets the error latch (the last one) on mismatch and names everything.
fn finish(mut f: Frame, reference: &[u32], latch_names: &[&str], name: &str) -> Aig {
    let b = &mut f.b;
    let err = 2 * (f.a.len() + f.bb.len() + f.outs.len() + latch_names.len()) as u32;
    let mismatch: Vec<u32> = f.outs.iter().zip(reference).map(|(&o, &r)| xor(b, o, r)).collect();
    let any = b.or_all(mismatch);
    let next = b.or(err, any);
    b.set_next(latch_names.len() - 1, next);
    let mut aig = f.b.finish(vec![err]);
    let n = f.a.len();
    for k in 0..n {
        aig.symbols.inputs.insert(k, format!("a{k}"));
        aig.symbols.inputs.insert(n + k, format!("b{k}"));
    }
    for k in 0..f.outs.len() {
        aig.symbols.inputs.insert(2 * n + k, format!("{CONTROLLABLE_PREFIX}s{k}"));
    }
    for (k, l) in latch_names.iter().enumerate() {
        aig.symbols.latches.insert(k, l.to_string());
    }
    aig.symbols.outputs.insert(0, "bad".into());
    aig.comments.push(name.into());
    aig
}

/// `n`-bit adder with the carry-in held in a latch fed by the carry-out.
pub fn add(n: usize) -> Result<Aig> {
    let mut f = frame(n, n, 2)?;
    let carry = 2 * (3 * n as u32 + 1);
    let (a, bb) = (f.a.clone(), f.bb.clone());
    let (sum, cout) = ripple(&mut f.b, &a, &bb, carry);
    f.b.set_next(0, cout);
    Ok(finish(f, &sum, &["carry", "err"], &format!("add{n}")))
}

/// `n × n → 2n`-bit shift-add multiplier.
pub fn mult(n: usize) -> Result<Aig> {
    let mut f = frame(n, 2 * n, 1)?;
    let (a, bb) = (f.a.clone(), f.bb.clone());
    let b = &mut f.b;
    let mut acc = vec![FALSE; 2 * n];
    for (j, &bj) in bb.iter().enumerate() {
        let row: Vec<u32> = a.iter().map(|&ak| b.and(ak, bj)).collect();
        let (sum, carry) = ripple(b, &acc[j..j + n], &row, FALSE);
        acc[j..j + n].copy_from_slice(&sum);
        if j + n < 2 * n {
            acc[j + n] = carry;
        }
    }
    Ok(finish(f, &acc, &["err"], &format!("mult{n}")))
}
