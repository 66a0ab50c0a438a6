//! AIGER and-inverter graphs: ASCII (`aag`) reader and writer, binary (`aig`)
//! reader.

mod spec;

pub use spec::SafetySpec;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Prefix marking an input as controllable (SyntComp naming convention).
pub const CONTROLLABLE_PREFIX: &str = "controllable_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Latch {
    /// Current-state literal (always even).
    pub lit: u32,
    /// Next-state function literal.
    pub next: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AndGate {
    pub lhs: u32,
    pub rhs0: u32,
    pub rhs1: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Symbols {
    pub inputs: BTreeMap<usize, String>,
    pub latches: BTreeMap<usize, String>,
    pub outputs: BTreeMap<usize, String>,
}

/// An and-inverter graph in AIGER numbering: literal `2k` is variable `k`,
/// `2k+1` its negation, `0`/`1` the constants. Latches reset to 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Aig {
    pub max_var: u32,
    pub inputs: Vec<u32>,
    pub latches: Vec<Latch>,
    pub outputs: Vec<u32>,
    pub ands: Vec<AndGate>,
    pub symbols: Symbols,
    pub comments: Vec<String>,
}

/// What defines a variable of an [`Aig`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Constant,
    Input(usize),
    Latch(usize),
    And { rhs0: u32, rhs1: u32 },
    Undefined,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

struct Header {
    max_var: u32,
    inputs: usize,
    latches: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str, magic: &str) -> Result<Header> {
    let mut fields = line.split_ascii_whitespace();
    if fields.next() != Some(magic) {
        return Err(parse_err(1, format!("expected '{magic}' header")));
    }
    let nums: Vec<u64> = fields
        .map(|f| f.parse::<u64>().map_err(|_| parse_err(1, format!("bad header field '{f}'"))))
        .collect::<Result<_>>()?;
    if nums.len() < 5 {
        return Err(parse_err(1, "header needs M I L O A"));
    }
    if nums[5..].iter().any(|&n| n != 0) {
        return Err(Error::UnsupportedSpec(
            "AIGER 1.9 sections (bad, constraints, justice, fairness) are not supported".into(),
        ));
    }
    let header = Header {
        max_var: u32::try_from(nums[0]).map_err(|_| parse_err(1, "M too large"))?,
        inputs: nums[1] as usize,
        latches: nums[2] as usize,
        outputs: nums[3] as usize,
        ands: nums[4] as usize,
    };
    if (header.inputs + header.latches + header.ands) as u64 > nums[0] {
        return Err(parse_err(1, "M is smaller than I + L + A"));
    }
    Ok(header)
}

struct Lines<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Split<'a, char>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.split('\n').enumerate().peekable(),
        }
    }

    /// Next line with its 1-based number.
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.lines.next() {
            Some((i, l)) if !(l.is_empty() && self.lines.peek().is_none()) => {
                Ok((i + 1, l.trim_end_matches('\r')))
            }
            Some((i, _)) => Err(parse_err(i + 1, format!("unexpected end of file, expected {what}"))),
            None => Err(parse_err(0, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn numbers(&mut self, what: &str, min: usize, max: usize) -> Result<(usize, Vec<u32>)> {
        let (n, line) = self.next_line(what)?;
        let nums: Vec<u32> = line
            .split_ascii_whitespace()
            .map(|f| f.parse::<u32>().map_err(|_| parse_err(n, format!("bad {what} '{f}'"))))
            .collect::<Result<_>>()?;
        if nums.len() < min || nums.len() > max {
            return Err(parse_err(n, format!("malformed {what} line")));
        }
        Ok((n, nums))
    }
}

impl Aig {
    /// Parses ASCII or binary AIGER, depending on the magic word.
    pub fn parse(bytes: &[u8]) -> Result<Aig> {
        if bytes.starts_with(b"aig ") {
            Aig::parse_binary(bytes)
        } else {
            Aig::parse_ascii(bytes)
        }
    }

    pub fn parse_ascii(bytes: &[u8]) -> Result<Aig> {
        let text = std::str::from_utf8(bytes).map_err(|_| parse_err(1, "file is not UTF-8"))?;
        let mut lines = Lines::new(text);
        let (_, header_line) = lines.next_line("header")?;
        let h = parse_header(header_line, "aag")?;
        let mut aig = Aig {
            max_var: h.max_var,
            ..Aig::default()
        };
        // (line, literal) of every use, checked once all definitions are known
        let mut uses: Vec<(usize, u32)> = Vec::new();
        let mut defined = vec![false; h.max_var as usize + 1];
        defined[0] = true;
        let mut define = |line: usize, lit: u32, max_var: u32| -> Result<()> {
            if lit & 1 == 1 || lit < 2 {
                return Err(parse_err(line, format!("literal {lit} cannot be defined")));
            }
            let v = (lit >> 1) as usize;
            if v as u32 > max_var {
                return Err(parse_err(line, format!("literal {lit} exceeds M = {max_var}")));
            }
            if std::mem::replace(&mut defined[v], true) {
                return Err(parse_err(line, format!("variable {v} defined twice")));
            }
            Ok(())
        };

        for _ in 0..h.inputs {
            let (n, nums) = lines.numbers("input", 1, 1)?;
            define(n, nums[0], h.max_var)?;
            aig.inputs.push(nums[0]);
        }
        for _ in 0..h.latches {
            let (n, nums) = lines.numbers("latch", 2, 3)?;
            define(n, nums[0], h.max_var)?;
            if nums.len() == 3 && nums[2] != 0 {
                return Err(Error::UnsupportedSpec(format!(
                    "line {n}: only latches with reset value 0 are supported"
                )));
            }
            uses.push((n, nums[1]));
            aig.latches.push(Latch {
                lit: nums[0],
                next: nums[1],
            });
        }
        for _ in 0..h.outputs {
            let (n, nums) = lines.numbers("output", 1, 1)?;
            uses.push((n, nums[0]));
            aig.outputs.push(nums[0]);
        }
        for _ in 0..h.ands {
            let (n, nums) = lines.numbers("and gate", 3, 3)?;
            let (lhs, rhs0, rhs1) = (nums[0], nums[1], nums[2]);
            define(n, lhs, h.max_var)?;
            if rhs0 >= lhs || rhs1 >= lhs {
                return Err(parse_err(
                    n,
                    format!("and gate {lhs} must be greater than its inputs {rhs0} {rhs1}"),
                ));
            }
            uses.push((n, rhs0));
            uses.push((n, rhs1));
            aig.ands.push(AndGate { lhs, rhs0, rhs1 });
        }
        for (n, lit) in uses {
            let v = (lit >> 1) as usize;
            if v > h.max_var as usize || !defined[v] {
                return Err(parse_err(n, format!("dangling literal {lit}")));
            }
        }
        aig.parse_symbols(&mut lines)?;
        Ok(aig)
    }

    fn parse_symbols(&mut self, lines: &mut Lines<'_>) -> Result<()> {
        while let Ok((n, line)) = lines.next_line("symbol") {
            if line == "c" {
                break;
            }
            if line.is_empty() {
                continue;
            }
            let (kind, rest) = line.split_at(1);
            let (idx, name) = rest
                .split_once(' ')
                .ok_or_else(|| parse_err(n, "malformed symbol"))?;
            let idx: usize = idx.parse().map_err(|_| parse_err(n, "malformed symbol index"))?;
            let (table, count) = match kind {
                "i" => (&mut self.symbols.inputs, self.inputs.len()),
                "l" => (&mut self.symbols.latches, self.latches.len()),
                "o" => (&mut self.symbols.outputs, self.outputs.len()),
                "c" => break,
                _ => return Err(parse_err(n, format!("unknown symbol kind '{kind}'"))),
            };
            if idx >= count {
                return Err(parse_err(n, format!("symbol index {idx} out of range")));
            }
            table.insert(idx, name.to_string());
        }
        for line in lines.lines.by_ref() {
            self.comments.push(line.1.trim_end_matches('\r').to_string());
        }
        if self.comments.last().is_some_and(|c| c.is_empty()) {
            self.comments.pop();
        }
        Ok(())
    }

    pub fn parse_binary(bytes: &[u8]) -> Result<Aig> {
        let header_end = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| parse_err(1, "missing header"))?;
        let header_line =
            std::str::from_utf8(&bytes[..header_end]).map_err(|_| parse_err(1, "bad header"))?;
        let h = parse_header(header_line, "aig")?;
        if h.inputs + h.latches + h.ands != h.max_var as usize {
            return Err(parse_err(1, "binary AIGER requires M = I + L + A"));
        }
        let mut aig = Aig {
            max_var: h.max_var,
            inputs: (1..=h.inputs as u32).map(|v| 2 * v).collect(),
            ..Aig::default()
        };
        let mut pos = header_end + 1;
        let mut line = 2;
        let mut read_line = |pos: &mut usize| -> Result<&str> {
            let end = bytes[*pos..]
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| parse_err(line, "unexpected end of file"))?;
            let s = std::str::from_utf8(&bytes[*pos..*pos + end])
                .map_err(|_| parse_err(line, "bad text"))?;
            *pos += end + 1;
            line += 1;
            Ok(s)
        };
        for k in 0..h.latches {
            let s = read_line(&mut pos)?;
            let nums: Vec<u32> = s
                .split_ascii_whitespace()
                .map(|f| f.parse().map_err(|_| parse_err(0, "bad latch")))
                .collect::<Result<_>>()?;
            if nums.is_empty() || nums.len() > 2 {
                return Err(parse_err(0, "malformed latch"));
            }
            if nums.len() == 2 && nums[1] != 0 {
                return Err(Error::UnsupportedSpec(
                    "only latches with reset value 0 are supported".into(),
                ));
            }
            aig.latches.push(Latch {
                lit: 2 * (h.inputs + k + 1) as u32,
                next: nums[0],
            });
        }
        for _ in 0..h.outputs {
            let s = read_line(&mut pos)?;
            let lit = s.trim().parse().map_err(|_| parse_err(0, "bad output"))?;
            aig.outputs.push(lit);
        }
        let read_delta = |pos: &mut usize| -> Result<u32> {
            let mut x: u32 = 0;
            let mut shift = 0;
            loop {
                let b = *bytes
                    .get(*pos)
                    .ok_or_else(|| parse_err(0, "truncated and-gate section"))?;
                *pos += 1;
                x |= ((b & 0x7f) as u32) << shift;
                if b & 0x80 == 0 {
                    return Ok(x);
                }
                shift += 7;
            }
        };
        for k in 0..h.ands {
            let lhs = 2 * (h.inputs + h.latches + k + 1) as u32;
            let d0 = read_delta(&mut pos)?;
            let d1 = read_delta(&mut pos)?;
            let rhs0 = lhs
                .checked_sub(d0)
                .ok_or_else(|| parse_err(0, "bad delta"))?;
            let rhs1 = rhs0
                .checked_sub(d1)
                .ok_or_else(|| parse_err(0, "bad delta"))?;
            aig.ands.push(AndGate { lhs, rhs0, rhs1 });
        }
        for &lit in aig.latches.iter().map(|l| &l.next).chain(&aig.outputs) {
            if lit >> 1 > h.max_var {
                return Err(parse_err(0, format!("dangling literal {lit}")));
            }
        }
        let rest = std::str::from_utf8(&bytes[pos..]).map_err(|_| parse_err(0, "bad symbols"))?;
        let mut lines = Lines::new(rest);
        aig.parse_symbols(&mut lines)?;
        Ok(aig)
    }

    /// Emits ASCII AIGER. Latch reset values are omitted (always 0).
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "aag {} {} {} {} {}",
            self.max_var,
            self.inputs.len(),
            self.latches.len(),
            self.outputs.len(),
            self.ands.len()
        );
        for i in &self.inputs {
            let _ = writeln!(out, "{i}");
        }
        for l in &self.latches {
            let _ = writeln!(out, "{} {}", l.lit, l.next);
        }
        for o in &self.outputs {
            let _ = writeln!(out, "{o}");
        }
        for g in &self.ands {
            let _ = writeln!(out, "{} {} {}", g.lhs, g.rhs0, g.rhs1);
        }
        for (i, name) in &self.symbols.inputs {
            let _ = writeln!(out, "i{i} {name}");
        }
        for (i, name) in &self.symbols.latches {
            let _ = writeln!(out, "l{i} {name}");
        }
        for (i, name) in &self.symbols.outputs {
            let _ = writeln!(out, "o{i} {name}");
        }
        if !self.comments.is_empty() {
            out.push_str("c\n");
            for c in &self.comments {
                let _ = writeln!(out, "{c}");
            }
        }
        out
    }

    pub fn input_name(&self, idx: usize) -> Option<&str> {
        self.symbols.inputs.get(&idx).map(String::as_str)
    }

    pub fn is_controllable(&self, idx: usize) -> bool {
        self.input_name(idx)
            .is_some_and(|n| n.starts_with(CONTROLLABLE_PREFIX))
    }

    /// Definition of every variable `0..=max_var`.
    pub fn node_kinds(&self) -> Result<Vec<NodeKind>> {
        let mut kinds = vec![NodeKind::Undefined; self.max_var as usize + 1];
        kinds[0] = NodeKind::Constant;
        let mut set = |lit: u32, kind: NodeKind| -> Result<()> {
            let v = (lit >> 1) as usize;
            if lit & 1 == 1 || v == 0 || v > self.max_var as usize {
                return Err(Error::MalformedGraph(format!("invalid definition literal {lit}")));
            }
            if kinds[v] != NodeKind::Undefined {
                return Err(Error::MalformedGraph(format!("variable {v} defined twice")));
            }
            kinds[v] = kind;
            Ok(())
        };
        for (i, &lit) in self.inputs.iter().enumerate() {
            set(lit, NodeKind::Input(i))?;
        }
        for (i, l) in self.latches.iter().enumerate() {
            set(l.lit, NodeKind::Latch(i))?;
        }
        for g in &self.ands {
            set(
                g.lhs,
                NodeKind::And {
                    rhs0: g.rhs0,
                    rhs1: g.rhs1,
                },
            )?;
        }
        Ok(kinds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND: &str = "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n";

    #[test]
    fn parses_single_and() {
        let aig = Aig::parse(AND.as_bytes()).unwrap();
        assert_eq!(aig.inputs, vec![2, 4]);
        assert_eq!(aig.outputs, vec![6]);
        assert_eq!(
            aig.ands,
            vec![AndGate {
                lhs: 6,
                rhs0: 2,
                rhs1: 4
            }]
        );
        assert_eq!(aig.to_ascii(), AND);
    }

    #[test]
    fn parses_constant_false_output() {
        let aig = Aig::parse(b"aag 0 0 0 1 0\n0\n").unwrap();
        assert_eq!(aig.outputs, vec![0]);
    }

    #[test]
    fn empty_circuit_round_trips() {
        let aig = Aig::parse(b"aag 0 0 0 0 0\n").unwrap();
        assert_eq!(aig.to_ascii(), "aag 0 0 0 0 0\n");
        assert_eq!(Aig::default().to_ascii(), "aag 0 0 0 0 0\n");
    }

    #[test]
    fn controllable_symbol() {
        let text = "aag 2 2 0 1 0\n2\n4\n4\ni0 req\ni1 controllable_o0\n";
        let aig = Aig::parse(text.as_bytes()).unwrap();
        assert!(!aig.is_controllable(0));
        assert!(aig.is_controllable(1));
        assert_eq!(aig.to_ascii(), text);
    }

    #[test]
    fn comments_are_kept() {
        let text = "aag 1 1 0 1 0\n2\n2\ni0 x\nc\nmade by hand\nsecond line\n";
        let aig = Aig::parse(text.as_bytes()).unwrap();
        assert_eq!(aig.comments, vec!["made by hand", "second line"]);
        assert_eq!(aig.to_ascii(), text);
    }

    #[test]
    fn latch_with_explicit_zero_reset() {
        let aig = Aig::parse(b"aag 1 0 1 1 0\n2 3 0\n2\n").unwrap();
        assert_eq!(aig.latches, vec![Latch { lit: 2, next: 3 }]);
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_header() {
        assert_eq!(line_of(Aig::parse(b"aag 3 2 0\n").unwrap_err()), 1);
        assert_eq!(line_of(Aig::parse(b"xyz 0 0 0 0 0\n").unwrap_err()), 1);
    }

    #[test]
    fn rejects_dangling_literal() {
        let err = Aig::parse(b"aag 3 2 0 1 1\n2\n4\n8\n6 2 4\n").unwrap_err();
        assert_eq!(line_of(err), 4);
    }

    #[test]
    fn rejects_count_mismatch() {
        let err = Aig::parse(b"aag 3 2 0 1 1\n2\n4\n6\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn rejects_unordered_and() {
        let err = Aig::parse(b"aag 3 2 0 1 1\n2\n4\n6\n4 2 6\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn rejects_nonzero_reset() {
        assert!(matches!(
            Aig::parse(b"aag 1 0 1 1 0\n2 3 1\n2\n"),
            Err(Error::UnsupportedSpec(_))
        ));
    }

    #[test]
    fn binary_reader_matches_ascii() {
        // aig 3 2 0 1 1: and 6 = 2 & 4, deltas 2 and 2
        let mut bin = b"aig 3 2 0 1 1\n6\n".to_vec();
        bin.extend_from_slice(&[2, 2]);
        bin.extend_from_slice(b"i0 a\n");
        let aig = Aig::parse(&bin).unwrap();
        assert_eq!(aig.ands[0], AndGate { lhs: 6, rhs0: 4, rhs1: 2 });
        assert_eq!(aig.input_name(0), Some("a"));
    }
}
