//! Text formats: circuits and cost models.
//!
//! ```text
//! # full adder
//! .qubits 4
//! .labels a b c d
//! .const d=0
//! .garbage a
//! .begin
//! v b d
//! cx a b
//! v+ b d
//! t a -b c
//! .end
//! ```
//!
//! Mnemonics: `x t`, `cx c t`, `v c t`, `v+ c t`, `v t`, `v+ t`,
//! `t c1 … ck tgt` (k ≥ 2), `f c1 … ck x y` (k ≥ 1). A `-` before a control
//! label makes it negative (Toffoli and Fredkin only). A line holding only
//! `|` separates levels and is ignored on input.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use thiserror::Error;

use crate::compact::LeveledCircuit;
use crate::ir::{Circuit, Control, Cost, CostModel, Gate, GateKind, Line};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(s: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(b) = start.take() {
                out.push(Tok { text: &s[b..i], col: b + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push(Tok { text: &s[b..], col: b + 1 });
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut n: Option<usize> = None;
    let mut labels: Option<Vec<String>> = None;
    let mut consts: Vec<(String, bool, usize, usize)> = Vec::new();
    let mut garbage: Vec<(String, usize, usize)> = Vec::new();
    let mut in_body = false;
    let mut ended = false;
    let mut body: Vec<(usize, Vec<Tok>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let s = raw.split('#').next().unwrap();
        let toks = tokens(s);
        let Some(first) = toks.first() else { continue };
        let err = |col: usize, msg: String| ParseError { line: ln, col, msg };
        if ended {
            return Err(err(first.col, "content after .end".into()));
        }
        if in_body {
            match first.text {
                ".end" => {
                    in_body = false;
                    ended = true;
                }
                "|" if toks.len() == 1 => {}
                _ => body.push((ln, toks)),
            }
            continue;
        }
        match first.text {
            ".qubits" => {
                let v = toks
                    .get(1)
                    .and_then(|t| t.text.parse::<usize>().ok())
                    .ok_or_else(|| err(first.col, "expected `.qubits N`".into()))?;
                n = Some(v);
            }
            ".labels" => labels = Some(toks[1..].iter().map(|t| t.text.to_string()).collect()),
            ".const" => {
                for t in &toks[1..] {
                    let (l, v) = t
                        .text
                        .split_once('=')
                        .ok_or_else(|| err(t.col, format!("expected label=0|1, got {:?}", t.text)))?;
                    let v = match v {
                        "0" => false,
                        "1" => true,
                        _ => return Err(err(t.col, format!("constant must be 0 or 1, got {v:?}"))),
                    };
                    consts.push((l.to_string(), v, ln, t.col));
                }
            }
            ".garbage" => {
                for t in &toks[1..] {
                    garbage.push((t.text.to_string(), ln, t.col));
                }
            }
            ".begin" => {
                if n.is_none() {
                    return Err(err(first.col, ".begin before .qubits".into()));
                }
                in_body = true;
            }
            other => return Err(err(first.col, format!("unknown directive {other:?}"))),
        }
    }
    if in_body {
        return Err(ParseError {
            line: text.lines().count(),
            col: 1,
            msg: "missing .end".into(),
        });
    }
    let n = n.ok_or(ParseError {
        line: 1,
        col: 1,
        msg: "missing .qubits".into(),
    })?;
    let names: Vec<String> = match labels {
        Some(l) if l.len() != n => {
            return Err(ParseError {
                line: 1,
                col: 1,
                msg: format!(".labels lists {} names for {n} qubits", l.len()),
            })
        }
        Some(l) => l,
        None => (0..n).map(|i| format!("q{i}")).collect(),
    };
    let index: HashMap<&str, Line> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if index.len() != n {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: "duplicate label".into(),
        });
    }
    let custom = names.iter().enumerate().any(|(i, s)| *s != format!("q{i}"));
    let mut c = Circuit::new(n);
    if custom {
        for (i, s) in names.iter().enumerate() {
            c.lines[i].label = Some(s.clone());
        }
    }
    let lookup = |name: &str, line: usize, col: usize| {
        index.get(name).copied().ok_or_else(|| ParseError {
            line,
            col,
            msg: format!("unknown line {name:?}"),
        })
    };
    for (l, v, ln, col) in consts {
        c.lines[lookup(&l, ln, col)?].constant = Some(v);
    }
    for (l, ln, col) in garbage {
        c.lines[lookup(&l, ln, col)?].garbage = true;
    }
    for (ln, toks) in body {
        let g = parse_gate(&toks, ln, &lookup)?;
        c.gates.push(g);
    }
    Ok(c)
}

fn parse_gate(
    toks: &[Tok],
    ln: usize,
    lookup: &dyn Fn(&str, usize, usize) -> Result<Line, ParseError>,
) -> Result<Gate, ParseError> {
    let err = |col: usize, msg: String| ParseError { line: ln, col, msg };
    let mn = &toks[0];
    let mut controls = Vec::new();
    for t in &toks[1..] {
        match t.text.strip_prefix('-') {
            Some(rest) => controls.push((Control::neg(lookup(rest, ln, t.col)?), t.col)),
            None => controls.push((Control::pos(lookup(t.text, ln, t.col)?), t.col)),
        }
    }
    let arity = controls.len();
    let neg_at = |from: usize, to: usize| controls[from..to].iter().find(|(c, _)| c.negative).map(|(_, col)| *col);
    let last_neg = |k: usize| neg_at(arity - k, arity);
    let lines: Vec<Line> = controls.iter().map(|(c, _)| c.line).collect();
    let g = match (mn.text, arity) {
        ("x", 1) => Gate::x(lines[0]),
        ("cx", 2) => Gate::cnot(lines[0], lines[1]),
        ("v", 2) => Gate::v(lines[0], lines[1]),
        ("v+", 2) => Gate::vdag(lines[0], lines[1]),
        ("v", 1) => Gate::v_free(lines[0]),
        ("v+", 1) => Gate::vdag_free(lines[0]),
        ("t", k) if k >= 3 => {
            if let Some(col) = last_neg(1) {
                return Err(err(col, "target cannot be negated".into()));
            }
            Gate::toffoli(controls[..k - 1].iter().map(|(c, _)| *c).collect(), lines[k - 1])
        }
        ("f", k) if k >= 3 => {
            if let Some(col) = last_neg(2) {
                return Err(err(col, "swap targets cannot be negated".into()));
            }
            Gate::fredkin(controls[..k - 2].iter().map(|(c, _)| *c).collect(), lines[k - 2], lines[k - 1])
        }
        ("x" | "cx" | "v" | "v+" | "t" | "f", _) => {
            return Err(err(mn.col, format!("wrong number of operands for {:?}", mn.text)))
        }
        (other, _) => return Err(err(mn.col, format!("unknown mnemonic {other:?}"))),
    };
    if matches!(mn.text, "x" | "cx" | "v" | "v+") {
        if let Some(col) = neg_at(0, arity) {
            return Err(err(col, format!("negative controls are only allowed on t and f, not {:?}", mn.text)));
        }
    }
    let mut seen: Vec<Line> = g.lines().collect();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(err(mn.col, "duplicate line in one gate".into()));
    }
    Ok(g)
}

fn name(c: &Circuit, l: Line) -> String {
    c.label(l)
}

pub fn gate_text(c: &Circuit, g: &Gate) -> String {
    let mut s = g.kind.mnemonic().to_string();
    for ctl in &g.controls {
        s.push(' ');
        if ctl.negative {
            s.push('-');
        }
        s.push_str(&name(c, ctl.line));
    }
    for &t in &g.targets {
        s.push(' ');
        s.push_str(&name(c, t));
    }
    s
}

fn header(c: &Circuit) -> String {
    let mut s = format!(".qubits {}\n", c.line_count);
    if c.lines.iter().any(|a| a.label.is_some()) {
        let names: Vec<String> = (0..c.line_count).map(|l| name(c, l)).collect();
        let _ = writeln!(s, ".labels {}", names.join(" "));
    }
    let consts: Vec<String> = c
        .constant_lines()
        .map(|(l, v)| format!("{}={}", name(c, l), v as u8))
        .collect();
    if !consts.is_empty() {
        let _ = writeln!(s, ".const {}", consts.join(" "));
    }
    let garbage: Vec<String> = (0..c.line_count)
        .filter(|&l| c.lines[l].garbage)
        .map(|l| name(c, l))
        .collect();
    if !garbage.is_empty() {
        let _ = writeln!(s, ".garbage {}", garbage.join(" "));
    }
    s.push_str(".begin\n");
    s
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut s = header(c);
    for g in &c.gates {
        s.push_str(&gate_text(c, g));
        s.push('\n');
    }
    s.push_str(".end\n");
    s
}

/// Circuit text with a `|` line between consecutive levels.
pub fn write_leveled(lc: &LeveledCircuit) -> String {
    let c = &lc.circuit;
    let mut s = header(c);
    for (i, level) in lc.levels().iter().enumerate() {
        if i > 0 {
            s.push_str("|\n");
        }
        for g in level.iter() {
            s.push_str(&gate_text(c, g));
            s.push('\n');
        }
    }
    s.push_str(".end\n");
    s
}

/// Parses `0.5`, `1/2` or `3` as an exact rational.
pub fn parse_weight(s: &str) -> Option<Cost> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?);
        return (b > 0).then(|| Ratio::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let i: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().ok()?;
        let num = i.abs() * den + f;
        return Some(Ratio::new(if neg { -num } else { num }, den));
    }
    s.parse::<i64>().ok().map(Ratio::from_integer)
}

/// `kind weight` per line; kinds are the gate mnemonics. A line `depth`
/// switches reported cost to the level count.
pub fn parse_cost_model(text: &str) -> Result<CostModel, ParseError> {
    let mut m = CostModel::unit();
    for (i, raw) in text.lines().enumerate() {
        let toks = tokens(raw.split('#').next().unwrap());
        let Some(first) = toks.first() else { continue };
        let err = |col: usize, msg: String| ParseError { line: i + 1, col, msg };
        if first.text == "depth" && toks.len() == 1 {
            m.depth_mode = true;
            continue;
        }
        let kind = GateKind::ALL
            .into_iter()
            .find(|k| k.mnemonic() == first.text)
            .ok_or_else(|| err(first.col, format!("unknown gate kind {:?}", first.text)))?;
        let w = toks
            .get(1)
            .ok_or_else(|| err(first.col, "missing weight".into()))?;
        let v = parse_weight(w.text).ok_or_else(|| err(w.col, format!("bad weight {:?}", w.text)))?;
        if v < Cost::from_integer(0) {
            return Err(err(w.col, "weights must be nonnegative".into()));
        }
        m.weights[kind as usize] = v;
    }
    Ok(m)
}
