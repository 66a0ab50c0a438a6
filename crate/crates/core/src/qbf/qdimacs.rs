use std::collections::HashSet;

use super::Prefix;
use crate::cnf::{Clause, Cnf, Lit, Var};
use crate::{Error, Result};

/// Reads a QDIMACS file whose prefix fits `∃∀∃`. Free variables join the
/// outer block; adjacent blocks with the same quantifier are merged.
pub fn parse_qdimacs(text: &str) -> Result<(Prefix, Cnf)> {
    let mut blocks: Vec<(char, Vec<Var>)> = Vec::new();
    let mut cnf = Cnf::new();
    let mut seen_header = false;
    let mut current: Vec<Lit> = Vec::new();
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[1] != "cnf" {
                return Err(parse_err(line_no, format!("bad problem line {line:?}")));
            }
            seen_header = true;
            continue;
        }
        if !seen_header {
            return Err(parse_err(line_no, "missing problem line".into()));
        }
        let (quant, rest) = match line.as_bytes()[0] {
            b'e' => (Some('e'), &line[1..]),
            b'a' => (Some('a'), &line[1..]),
            _ => (None, line),
        };
        let mut nums = Vec::new();
        for tok in rest.split_whitespace() {
            let n: i32 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad number {tok:?}")))?;
            nums.push(n);
        }
        match quant {
            Some(q) => {
                if nums.last() != Some(&0) {
                    return Err(parse_err(line_no, "quantifier line must end in 0".into()));
                }
                let vars: Vec<Var> = nums[..nums.len() - 1]
                    .iter()
                    .map(|&n| {
                        if n <= 0 {
                            Err(parse_err(line_no, format!("bad variable {n}")))
                        } else {
                            Ok(Var::new(n as u32))
                        }
                    })
                    .collect::<Result<_>>()?;
                match blocks.last_mut() {
                    Some((last, vs)) if *last == q => vs.extend(vars),
                    _ => blocks.push((q, vars)),
                }
            }
            None => {
                for n in nums {
                    if n == 0 {
                        cnf.push(Clause::new(current.drain(..)));
                    } else {
                        current.push(Lit::from_dimacs(n));
                    }
                }
            }
        }
    }
    if !current.is_empty() {
        cnf.push(Clause::new(current));
    }

    let mut prefix = Prefix::default();
    let shape: String = blocks.iter().map(|(q, _)| *q).collect();
    let mut it = blocks.into_iter();
    let take = |it: &mut std::vec::IntoIter<(char, Vec<Var>)>| it.next().map(|(_, v)| v).unwrap_or_default();
    match shape.as_str() {
        "" => {}
        "e" => prefix.outer = take(&mut it),
        "a" => prefix.forall = take(&mut it),
        "ea" => {
            prefix.outer = take(&mut it);
            prefix.forall = take(&mut it);
        }
        "ae" => {
            prefix.forall = take(&mut it);
            prefix.inner = take(&mut it);
        }
        "eae" => {
            prefix.outer = take(&mut it);
            prefix.forall = take(&mut it);
            prefix.inner = take(&mut it);
        }
        other => {
            return Err(Error::UnsupportedSpec(format!(
                "quantifier prefix {other:?} has more than one universal block"
            )))
        }
    }
    let bound: HashSet<Var> = prefix
        .outer
        .iter()
        .chain(&prefix.forall)
        .chain(&prefix.inner)
        .copied()
        .collect();
    let mut free: Vec<Var> = cnf.vars().into_iter().filter(|v| !bound.contains(v)).collect();
    free.sort();
    free.extend(prefix.outer);
    prefix.outer = free;
    Ok((prefix, cnf))
}
