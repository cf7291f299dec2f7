//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over `line_count` lines. The
//! gate at index 0 is applied first (leftmost in a circuit diagram). Gates
//! are NOT, CNOT, controlled-V, controlled-V†, multi-control Toffoli and
//! Fredkin; only the first four are accepted by the NCV-level passes.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

/// Index of a circuit line (qubit), 0-based.
pub type Line = usize;

/// Exact gate cost.
pub type Cost = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IrError {
    #[error("gate {gate}: {reason}")]
    InvalidGate { gate: String, reason: &'static str },
    #[error("gate {gate} references line {line} but the circuit has {line_count} lines")]
    LineOutOfRange {
        gate: String,
        line: Line,
        line_count: usize,
    },
    #[error("circuit widths differ ({0} vs {1})")]
    WidthMismatch(usize, usize),
    #[error("non-NCV gate {0} (lower Toffoli/Fredkin gates first)")]
    NotNcv(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    Cnot,
    V,
    Vdag,
    Toffoli,
    Fredkin,
}

impl GateKind {
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Cnot => "cx",
            GateKind::V => "v",
            GateKind::Vdag => "v+",
            GateKind::Toffoli => "t",
            GateKind::Fredkin => "f",
        }
    }

    pub const ALL: [GateKind; 6] = [
        GateKind::X,
        GateKind::Cnot,
        GateKind::V,
        GateKind::Vdag,
        GateKind::Toffoli,
        GateKind::Fredkin,
    ];
}

/// A control literal: the gate fires when the line holds 1 (positive) or 0
/// (negative).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Control {
    pub line: Line,
    pub negative: bool,
}

impl Control {
    pub fn pos(line: Line) -> Self {
        Control {
            line,
            negative: false,
        }
    }

    pub fn neg(line: Line) -> Self {
        Control {
            line,
            negative: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<Control>,
    pub targets: Vec<Line>,
}

impl Gate {
    pub fn x(target: Line) -> Self {
        Gate {
            kind: GateKind::X,
            controls: vec![],
            targets: vec![target],
        }
    }

    pub fn cnot(control: Line, target: Line) -> Self {
        Gate {
            kind: GateKind::Cnot,
            controls: vec![Control::pos(control)],
            targets: vec![target],
        }
    }

    pub fn v(control: Line, target: Line) -> Self {
        Gate {
            kind: GateKind::V,
            controls: vec![Control::pos(control)],
            targets: vec![target],
        }
    }

    pub fn vdag(control: Line, target: Line) -> Self {
        Gate {
            kind: GateKind::Vdag,
            controls: vec![Control::pos(control)],
            targets: vec![target],
        }
    }

    /// Uncontrolled V.
    pub fn v_free(target: Line) -> Self {
        Gate {
            kind: GateKind::V,
            controls: vec![],
            targets: vec![target],
        }
    }

    /// Uncontrolled V†.
    pub fn vdag_free(target: Line) -> Self {
        Gate {
            kind: GateKind::Vdag,
            controls: vec![],
            targets: vec![target],
        }
    }

    pub fn toffoli(controls: Vec<Control>, target: Line) -> Self {
        Gate {
            kind: GateKind::Toffoli,
            controls,
            targets: vec![target],
        }
    }

    /// Positive two-control Toffoli.
    pub fn toffoli2(a: Line, b: Line, target: Line) -> Self {
        Gate::toffoli(vec![Control::pos(a), Control::pos(b)], target)
    }

    pub fn fredkin(controls: Vec<Control>, x: Line, y: Line) -> Self {
        Gate {
            kind: GateKind::Fredkin,
            controls,
            targets: vec![x, y],
        }
    }

    pub fn target(&self) -> Line {
        self.targets[0]
    }

    pub fn control_lines(&self) -> impl Iterator<Item = Line> + '_ {
        self.controls.iter().map(|c| c.line)
    }

    /// Every line the gate touches, controls first.
    pub fn lines(&self) -> impl Iterator<Item = Line> + '_ {
        self.control_lines().chain(self.targets.iter().copied())
    }

    pub fn max_line(&self) -> Line {
        self.lines().max().unwrap_or(0)
    }

    /// True for the gates the template passes work on: NOT, CNOT and
    /// (possibly uncontrolled) V/V†, all with positive controls.
    pub fn is_ncv(&self) -> bool {
        match self.kind {
            GateKind::X | GateKind::Cnot | GateKind::V | GateKind::Vdag => {
                self.controls.iter().all(|c| !c.negative)
            }
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<(), IrError> {
        let bad = |reason| IrError::InvalidGate {
            gate: self.to_string(),
            reason,
        };
        let expected_targets = if self.kind == GateKind::Fredkin { 2 } else { 1 };
        if self.targets.len() != expected_targets {
            return Err(bad("wrong number of targets"));
        }
        match self.kind {
            GateKind::X if !self.controls.is_empty() => return Err(bad("NOT takes no controls")),
            GateKind::Cnot if self.controls.len() != 1 || self.controls[0].negative => {
                return Err(bad("CNOT takes exactly one positive control"))
            }
            GateKind::V | GateKind::Vdag if self.controls.len() > 1 => {
                return Err(bad("V/V+ take at most one control"))
            }
            GateKind::V | GateKind::Vdag if self.controls.iter().any(|c| c.negative) => {
                return Err(bad("V/V+ controls must be positive"))
            }
            GateKind::Toffoli if self.controls.len() < 2 => {
                return Err(bad("Toffoli needs at least two controls"))
            }
            GateKind::Fredkin if self.controls.is_empty() => {
                return Err(bad("Fredkin needs at least one control"))
            }
            _ => {}
        }
        let mut seen: Vec<Line> = self.lines().collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("controls and targets must be distinct lines"));
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        let kind = match self.kind {
            GateKind::V => GateKind::Vdag,
            GateKind::Vdag => GateKind::V,
            k => k,
        };
        Gate {
            kind,
            controls: self.controls.clone(),
            targets: self.targets.clone(),
        }
    }

    /// Same gate with every line index passed through `f`.
    pub fn relabel(&self, f: impl Fn(Line) -> Line) -> Gate {
        Gate {
            kind: self.kind,
            controls: self
                .controls
                .iter()
                .map(|c| Control {
                    line: f(c.line),
                    negative: c.negative,
                })
                .collect(),
            targets: self.targets.iter().map(|&t| f(t)).collect(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.mnemonic())?;
        for c in &self.controls {
            write!(f, " {}q{}", if c.negative { "-" } else { "" }, c.line)?;
        }
        for t in &self.targets {
            write!(f, " q{t}")?;
        }
        Ok(())
    }
}

/// Moving rule: two gates commute when no target of either is a control of
/// the other. Control polarity is ignored. A Fredkin swap only commutes with
/// gates that leave both of its targets alone (or with an identical gate).
pub fn gates_commute(a: &Gate, b: &Gate) -> bool {
    if a.kind == GateKind::Fredkin || b.kind == GateKind::Fredkin {
        if a == b {
            return true;
        }
        let clear = |f: &Gate, o: &Gate| {
            f.kind != GateKind::Fredkin || f.targets.iter().all(|t| o.lines().all(|l| l != *t))
        };
        return clear(a, b) && clear(b, a) && targets_clear_of_controls(a, b);
    }
    targets_clear_of_controls(a, b)
}

fn targets_clear_of_controls(a: &Gate, b: &Gate) -> bool {
    a.targets.iter().all(|t| b.control_lines().all(|c| c != *t))
        && b.targets.iter().all(|t| a.control_lines().all(|c| c != *t))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LineAttr {
    pub label: Option<String>,
    /// Constant input value, if the line is an ancilla prepared in a known state.
    pub constant: Option<bool>,
    /// The output on this line is not needed.
    pub garbage: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub line_count: usize,
    pub gates: Vec<Gate>,
    pub lines: Vec<LineAttr>,
}

impl Circuit {
    pub fn new(line_count: usize) -> Self {
        Circuit {
            line_count,
            gates: Vec::new(),
            lines: vec![LineAttr::default(); line_count],
        }
    }

    pub fn from_gates(line_count: usize, gates: Vec<Gate>) -> Self {
        Circuit {
            line_count,
            gates,
            lines: vec![LineAttr::default(); line_count],
        }
    }

    /// A circuit with the same line attributes and different gates.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Self {
        Circuit {
            line_count: self.line_count,
            gates,
            lines: self.lines.clone(),
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn label(&self, line: Line) -> String {
        self.lines
            .get(line)
            .and_then(|a| a.label.clone())
            .unwrap_or_else(|| format!("q{line}"))
    }

    pub fn validate(&self) -> Result<(), IrError> {
        for g in &self.gates {
            g.validate()?;
            if let Some(line) = g.lines().find(|&l| l >= self.line_count) {
                return Err(IrError::LineOutOfRange {
                    gate: g.to_string(),
                    line,
                    line_count: self.line_count,
                });
            }
        }
        Ok(())
    }

    pub fn is_ncv(&self) -> bool {
        self.gates.iter().all(Gate::is_ncv)
    }

    pub fn require_ncv(&self) -> Result<(), IrError> {
        match self.gates.iter().find(|g| !g.is_ncv()) {
            Some(g) => Err(IrError::NotNcv(g.to_string())),
            None => Ok(()),
        }
    }

    /// Gates reversed and individually inverted.
    pub fn inverse(&self) -> Circuit {
        self.with_gates(self.gates.iter().rev().map(Gate::inverse).collect())
    }

    pub fn concat(&self, other: &Circuit) -> Result<Circuit, IrError> {
        if self.line_count != other.line_count {
            return Err(IrError::WidthMismatch(self.line_count, other.line_count));
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(self.with_gates(gates))
    }

    /// Lines carrying a constant input.
    pub fn constant_lines(&self) -> impl Iterator<Item = (Line, bool)> + '_ {
        self.lines
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.constant.map(|v| (i, v)))
    }

    pub fn has_boundary_attrs(&self) -> bool {
        self.lines.iter().any(|a| a.constant.is_some() || a.garbage)
    }

    /// Number of gates per kind, in [`GateKind::ALL`] order.
    pub fn histogram(&self) -> [usize; 6] {
        let mut h = [0; 6];
        for g in &self.gates {
            h[g.kind as usize] += 1;
        }
        h
    }
}

/// Weights per gate kind. The default charges 1 per gate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostModel {
    pub weights: [Cost; 6],
    /// Report circuit cost as the number of levels instead of a weighted sum.
    pub depth_mode: bool,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            weights: [Cost::from_integer(1); 6],
            depth_mode: false,
        }
    }
}

impl CostModel {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn with_weight(mut self, kind: GateKind, w: Cost) -> Self {
        assert!(w >= Cost::zero(), "gate weights must be nonnegative");
        self.weights[kind as usize] = w;
        self
    }

    pub fn gate_cost(&self, g: &Gate) -> Cost {
        self.weights[g.kind as usize]
    }

    pub fn gates_cost<'a>(&self, gates: impl IntoIterator<Item = &'a Gate>) -> Cost {
        gates
            .into_iter()
            .fold(Cost::zero(), |acc, g| acc + self.gate_cost(g))
    }

    /// True when every gate costs exactly one, so cost is the gate count.
    pub fn is_unit(&self) -> bool {
        self.weights.iter().all(|w| *w == Cost::from_integer(1))
    }
}

pub fn circuit_cost(c: &Circuit, m: &CostModel) -> Cost {
    if m.depth_mode {
        Cost::from_integer(naive_depth(c) as i64)
    } else {
        m.gates_cost(&c.gates)
    }
}

/// Depth when gates are packed in the given order: each gate lands one level
/// after the latest level holding a gate it overlaps.
pub fn naive_depth(c: &Circuit) -> usize {
    let width = c.gates.iter().map(|g| g.max_line() + 1).fold(c.line_count, usize::max);
    let mut line_level = vec![0usize; width];
    let mut depth = 0;
    for g in &c.gates {
        let level = g.lines().map(|l| line_level[l]).max().unwrap_or(0) + 1;
        for l in g.lines() {
            line_level[l] = level;
        }
        depth = depth.max(level);
    }
    depth
}

/// Largest number of gates touching a single line; no leveling can beat it.
pub fn line_load_bound(c: &Circuit) -> usize {
    let mut load = vec![0usize; c.line_count];
    for g in &c.gates {
        for l in g.lines() {
            load[l] += 1;
        }
    }
    load.into_iter().max().unwrap_or(0)
}
