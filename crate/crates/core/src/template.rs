//! Templates: identity gate sequences over abstract wires, and the rewriting
//! rules derived from them.
//!
//! A template `G_0 … G_{m-1}` (circuit order, `G_0` applied first) realizes
//! the identity, so does every cyclic rotation and the inverse sequence. For
//! a window of `p` consecutive gates the remaining `m - p` gates, inverted and
//! reversed, realize the same unitary as the window.

use std::fmt;

use thiserror::Error;

use crate::ir::{Circuit, Gate, Line};
use crate::oracle::{self, OracleError};

/// Polarity symbol carried by V-kind template gates. Each instantiation maps
/// `V0` to one of V/V† and `V1` to the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VPol {
    V0,
    V1,
}

impl VPol {
    pub fn flip(self) -> VPol {
        match self {
            VPol::V0 => VPol::V1,
            VPol::V1 => VPol::V0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TKind {
    X,
    Cnot,
    V(VPol),
}

/// Template gate. Wires are small indices `w0, w1, …`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TGate {
    pub kind: TKind,
    pub control: Option<u8>,
    pub target: u8,
}

impl TGate {
    pub fn x(t: u8) -> Self {
        TGate {
            kind: TKind::X,
            control: None,
            target: t,
        }
    }

    pub fn cnot(c: u8, t: u8) -> Self {
        TGate {
            kind: TKind::Cnot,
            control: Some(c),
            target: t,
        }
    }

    pub fn v(pol: VPol, c: u8, t: u8) -> Self {
        TGate {
            kind: TKind::V(pol),
            control: Some(c),
            target: t,
        }
    }

    pub fn v_free(pol: VPol, t: u8) -> Self {
        TGate {
            kind: TKind::V(pol),
            control: None,
            target: t,
        }
    }

    pub fn inverse(self) -> TGate {
        match self.kind {
            TKind::V(p) => TGate {
                kind: TKind::V(p.flip()),
                ..self
            },
            _ => self,
        }
    }

    /// Same gate with V0 and V1 exchanged.
    pub fn swap_pol(self) -> TGate {
        self.inverse()
    }

    pub fn relabel(self, f: impl Fn(u8) -> u8) -> TGate {
        TGate {
            kind: self.kind,
            control: self.control.map(&f),
            target: f(self.target),
        }
    }

    fn max_wire(&self) -> u8 {
        self.control.unwrap_or(0).max(self.target)
    }

    /// Concrete gate. `v0_is_v` chooses V0 ↦ V (true) or V0 ↦ V† (false).
    pub fn instantiate(&self, wires: &[Line], v0_is_v: bool) -> Gate {
        let t = wires[self.target as usize];
        let c = self.control.map(|c| wires[c as usize]);
        match (self.kind, c) {
            (TKind::X, _) => Gate::x(t),
            (TKind::Cnot, Some(c)) => Gate::cnot(c, t),
            (TKind::Cnot, None) => unreachable!("CNOT without control"),
            (TKind::V(p), c) => {
                let is_v = (p == VPol::V0) == v0_is_v;
                match (is_v, c) {
                    (true, Some(c)) => Gate::v(c, t),
                    (false, Some(c)) => Gate::vdag(c, t),
                    (true, None) => Gate::v_free(t),
                    (false, None) => Gate::vdag_free(t),
                }
            }
        }
    }
}

impl fmt::Display for TGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.kind {
            TKind::X => "x",
            TKind::Cnot => "c",
            TKind::V(VPol::V0) => "v0",
            TKind::V(VPol::V1) => "v1",
        };
        write!(f, "{m}")?;
        if let Some(c) = self.control {
            write!(f, " w{c}")?;
        }
        write!(f, " w{}", self.target)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("template {name}: {msg}")]
    Invalid { name: String, msg: String },
    #[error("wire map is not injective")]
    NonInjective,
    #[error("wire map has {got} lines, template needs {need}")]
    WireCount { got: usize, need: usize },
    #[error("rule window out of range: j={j}, p={p}, m={m}")]
    Range { j: usize, p: usize, m: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Template {
    pub name: String,
    pub wires: usize,
    pub gates: Vec<TGate>,
}

impl Template {
    pub fn new(name: impl Into<String>, wires: usize, gates: Vec<TGate>) -> Self {
        Template {
            name: name.into(),
            wires,
            gates,
        }
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Cyclic left rotation by `r`.
    pub fn rotate(&self, r: usize) -> Template {
        let m = self.size();
        assert!(r < m.max(1), "rotation {r} out of range for size {m}");
        let mut gates = self.gates.clone();
        gates.rotate_left(r);
        Template {
            name: self.name.clone(),
            wires: self.wires,
            gates,
        }
    }

    /// Reversed sequence of inverted gates.
    pub fn inverse(&self) -> Template {
        Template {
            name: self.name.clone(),
            wires: self.wires,
            gates: self.gates.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    pub fn has_v(&self) -> bool {
        self.gates.iter().any(|g| matches!(g.kind, TKind::V(_)))
    }

    pub fn instantiate(&self, wires: &[Line], v0_is_v: bool) -> Result<Vec<Gate>, TemplateError> {
        if wires.len() != self.wires {
            return Err(TemplateError::WireCount {
                got: wires.len(),
                need: self.wires,
            });
        }
        let mut seen = wires.to_vec();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(TemplateError::NonInjective);
        }
        Ok(self.gates.iter().map(|g| g.instantiate(wires, v0_is_v)).collect())
    }

    /// Body on lines `0..k` with V0 ↦ V.
    pub fn body(&self) -> Circuit {
        let wires: Vec<Line> = (0..self.wires).collect();
        Circuit::from_gates(self.wires, self.instantiate(&wires, true).unwrap())
    }

    /// Structural checks plus the exact identity test for both V assignments.
    /// Identity is invariant under rotation and wire relabeling, so checking
    /// the body on `k` lines covers every instantiation.
    pub fn check_identity(&self) -> Result<(), TemplateError> {
        let bad = |msg: &str| TemplateError::Invalid {
            name: self.name.clone(),
            msg: msg.to_string(),
        };
        if self.gates.is_empty() {
            return Err(bad("empty template"));
        }
        if self.wires == 0 || self.wires > oracle::DENSE_LINE_CAP {
            return Err(bad("wire count out of range"));
        }
        for g in &self.gates {
            if g.max_wire() as usize >= self.wires {
                return Err(bad("gate uses an undeclared wire"));
            }
            if g.control == Some(g.target) {
                return Err(bad("control and target coincide"));
            }
            if g.kind == TKind::Cnot && g.control.is_none() {
                return Err(bad("CNOT without control"));
            }
            if g.kind == TKind::X && g.control.is_some() {
                return Err(bad("controlled X; write it as c"));
            }
        }
        let wires: Vec<Line> = (0..self.wires).collect();
        for v0_is_v in [true, false] {
            let c = Circuit::from_gates(self.wires, self.instantiate(&wires, v0_is_v)?);
            if !oracle::is_identity(&c)? {
                return Err(bad("gate sequence is not the identity"));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("template {} wires={}\n", self.name, self.wires);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.gates.iter().map(|g| g.to_string()).collect();
        write!(f, "{}: {}", self.name, body.join(" | "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// `lhs` and `rhs` realize the same unitary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewritingRule {
    pub lhs: Vec<TGate>,
    pub rhs: Vec<TGate>,
    pub template: String,
    pub direction: Direction,
    pub j: usize,
    pub p: usize,
}

impl RewritingRule {
    pub fn instantiate(&self, wires: &[Line], v0_is_v: bool) -> (Vec<Gate>, Vec<Gate>) {
        let f = |gs: &[TGate]| gs.iter().map(|g| g.instantiate(wires, v0_is_v)).collect();
        (f(&self.lhs), f(&self.rhs))
    }
}

/// Forward: `lhs = G_j … G_{j+p-1}`, `rhs = G⁻¹_{j-1} G⁻¹_{j-2} … G⁻¹_{j+p}`.
/// Backward: `lhs = G⁻¹_j G⁻¹_{j-1} … G⁻¹_{j-p+1}`, `rhs = G_{j+1} … G_{j+m-p}`.
/// Indices are taken mod `m`.
pub fn derive_rule(t: &Template, p: usize, j: usize, dir: Direction) -> Result<RewritingRule, TemplateError> {
    let m = t.size();
    if m == 0 || j >= m || p == 0 || p > m {
        return Err(TemplateError::Range { j, p, m });
    }
    let g = |i: isize| t.gates[i.rem_euclid(m as isize) as usize];
    let (j_, p_, m_) = (j as isize, p as isize, m as isize);
    let (lhs, rhs) = match dir {
        Direction::Forward => (
            (0..p_).map(|i| g(j_ + i)).collect(),
            (0..m_ - p_).map(|i| g(j_ - 1 - i).inverse()).collect(),
        ),
        Direction::Backward => (
            (0..p_).map(|i| g(j_ - i).inverse()).collect(),
            (0..m_ - p_).map(|i| g(j_ + 1 + i)).collect(),
        ),
    };
    Ok(RewritingRule {
        lhs,
        rhs,
        template: t.name.clone(),
        direction: dir,
        j,
        p,
    })
}

/// Templates sorted by size, then name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn new(mut templates: Vec<Template>) -> Self {
        templates.sort_by(|a, b| (a.size(), &a.name).cmp(&(b.size(), &b.name)));
        TemplateSet { templates }
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.name == name)
    }

    /// Templates of even size only (used by level compaction).
    pub fn even(&self) -> TemplateSet {
        TemplateSet {
            templates: self.templates.iter().filter(|t| t.size() % 2 == 0).cloned().collect(),
        }
    }

    /// Templates strictly smaller than `m` gates.
    pub fn smaller_than(&self, m: usize) -> TemplateSet {
        TemplateSet {
            templates: self.templates.iter().filter(|t| t.size() < m).cloned().collect(),
        }
    }

    /// Union; on a name clash the template from `self` wins.
    pub fn union(&self, other: &TemplateSet) -> TemplateSet {
        let mut v = self.templates.clone();
        for t in &other.templates {
            if self.get(&t.name).is_none() {
                v.push(t.clone());
            }
        }
        TemplateSet::new(v)
    }

    pub fn max_wires(&self) -> usize {
        self.templates.iter().map(|t| t.wires).max().unwrap_or(0)
    }

    /// Identity check for each template, then irreducibility: no rotation of
    /// a template body is shortened by the strictly smaller templates.
    pub fn validate(&self) -> Result<(), TemplateError> {
        let mut names: Vec<&str> = self.templates.iter().map(|t| t.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(TemplateError::Invalid {
                name: w[0].to_string(),
                msg: "duplicate template name".into(),
            });
        }
        for t in &self.templates {
            t.check_identity()?;
        }
        for t in &self.templates {
            let smaller = self.smaller_than(t.size());
            if let Some(r) = reducible_rotation(t, &smaller) {
                return Err(TemplateError::Invalid {
                    name: t.name.clone(),
                    msg: format!("reducible by smaller templates (rotation {r})"),
                });
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.templates
            .iter()
            .map(Template::to_text)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// First rotation of `t` (either V assignment) that `reduce_cost` shortens
/// with the templates in `by`.
pub fn reducible_rotation(t: &Template, by: &TemplateSet) -> Option<usize> {
    use crate::ir::CostModel;
    use crate::optimizer::reduce_cost;
    if by.is_empty() {
        return None;
    }
    let wires: Vec<Line> = (0..t.wires).collect();
    let assignments: &[bool] = if t.has_v() { &[true, false] } else { &[true] };
    for r in 0..t.size() {
        let rot = t.rotate(r);
        for &v0 in assignments {
            let c = Circuit::from_gates(t.wires, rot.instantiate(&wires, v0).unwrap());
            let out = reduce_cost(&c, by, &CostModel::unit()).expect("template bodies are NCV");
            if out.circuit.len() < t.size() {
                return Some(r);
            }
        }
    }
    None
}

/// The five hand-specified families.
///
/// `inv_*` are gate-inverse pairs, `vvc` is V·V·CNOT, `xc` expresses a
/// negative-control CNOT through NOT conjugation, `ccc` is the CNOT
/// instance of the self-inverse controlled-U class.
pub fn builtin_set() -> TemplateSet {
    use VPol::*;
    let set = TemplateSet::new(vec![
        Template::new("inv_x", 1, vec![TGate::x(0), TGate::x(0)]),
        Template::new("inv_cnot", 2, vec![TGate::cnot(0, 1), TGate::cnot(0, 1)]),
        Template::new("inv_v", 2, vec![TGate::v(V0, 0, 1), TGate::v(V1, 0, 1)]),
        Template::new("inv_v_free", 1, vec![TGate::v_free(V0, 0), TGate::v_free(V1, 0)]),
        Template::new(
            "vvc",
            2,
            vec![TGate::v(V0, 0, 1), TGate::v(V0, 0, 1), TGate::cnot(0, 1)],
        ),
        Template::new(
            "xc",
            2,
            vec![
                TGate::x(0),
                TGate::cnot(0, 1),
                TGate::x(0),
                TGate::cnot(0, 1),
                TGate::x(1),
            ],
        ),
        Template::new(
            "ccc",
            3,
            vec![
                TGate::cnot(1, 2),
                TGate::cnot(0, 1),
                TGate::cnot(1, 2),
                TGate::cnot(0, 1),
                TGate::cnot(0, 2),
            ],
        ),
    ]);
    set.validate().unwrap_or_else(|e| panic!("builtin template set is invalid: {e}"));
    set
}

const DEFAULT_TEMPLATES: &str = include_str!("../data/templates.txt");

/// Builtin set plus the discovered templates shipped in `data/templates.txt`.
pub fn default_set() -> TemplateSet {
    let discovered = parse_templates(DEFAULT_TEMPLATES).expect("shipped template file parses");
    builtin_set().union(&TemplateSet::new(discovered))
}

fn parse_wire(tok: &str, line: usize) -> Result<u8, TemplateError> {
    tok.strip_prefix('w')
        .and_then(|s| s.parse::<u8>().ok())
        .ok_or_else(|| TemplateError::Parse {
            line,
            msg: format!("expected wire like w0, got {tok:?}"),
        })
}

/// Parses without validating.
pub fn parse_templates(text: &str) -> Result<Vec<Template>, TemplateError> {
    let mut out = Vec::new();
    let mut cur: Option<Template> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap().trim();
        let err = |msg: String| TemplateError::Parse { line, msg };
        if s.is_empty() {
            // a blank line terminates a template; comment-only lines do not
            if raw.trim().is_empty() {
                if let Some(t) = cur.take() {
                    out.push(t);
                }
            }
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks[0] == "template" {
            if let Some(t) = cur.take() {
                out.push(t);
            }
            if toks.len() != 3 {
                return Err(err("expected `template <name> wires=<k>`".into()));
            }
            let k = toks[2]
                .strip_prefix("wires=")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| err(format!("bad wire count {:?}", toks[2])))?;
            cur = Some(Template::new(toks[1], k, vec![]));
            continue;
        }
        let t = cur
            .as_mut()
            .ok_or_else(|| err("gate outside a template block".into()))?;
        let g = match (toks[0], toks.len()) {
            ("x", 2) => TGate::x(parse_wire(toks[1], line)?),
            ("c", 3) => TGate::cnot(parse_wire(toks[1], line)?, parse_wire(toks[2], line)?),
            ("v0", 3) => TGate::v(VPol::V0, parse_wire(toks[1], line)?, parse_wire(toks[2], line)?),
            ("v1", 3) => TGate::v(VPol::V1, parse_wire(toks[1], line)?, parse_wire(toks[2], line)?),
            ("v0", 2) => TGate::v_free(VPol::V0, parse_wire(toks[1], line)?),
            ("v1", 2) => TGate::v_free(VPol::V1, parse_wire(toks[1], line)?),
            _ => return Err(err(format!("unknown gate {s:?}"))),
        };
        t.gates.push(g);
    }
    if let Some(t) = cur.take() {
        out.push(t);
    }
    Ok(out)
}

/// Parses and validates a template file.
pub fn load_templates(text: &str) -> Result<TemplateSet, TemplateError> {
    let set = TemplateSet::new(parse_templates(text)?);
    set.validate()?;
    Ok(set)
}

pub fn save_templates(set: &TemplateSet) -> String {
    set.to_text()
}
