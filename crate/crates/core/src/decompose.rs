//! Lowering of Toffoli, multi-control Toffoli and Fredkin gates to NCV.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ir::{circuit_cost, Circuit, Control, CostModel, Gate, GateKind, IrError, Line};
use crate::optimizer::{reduce_cost, OptError};
use crate::oracle::{self, OracleError};
use crate::template::TemplateSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("gate {gate} needs {need} spare lines as ancillas, only {have} available")]
    InsufficientAncillas { gate: String, need: usize, have: usize },
    #[error("circuit does not map basis states to basis states")]
    NotClassical,
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Which of the two 5-gate Toffoli circuits to emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    A,
    AInverse,
}

impl Orientation {
    fn flip(self) -> Self {
        match self {
            Orientation::A => Orientation::AInverse,
            Orientation::AInverse => Orientation::A,
        }
    }
}

/// Positive-control Toffoli `(a, b; c)`.
///
/// `A` is `V(b,c) CNOT(a,b) V†(b,c) CNOT(a,b) V(a,c)`: the target sees
/// `V^(b - (a⊕b) + a) = V^(2ab)`.
pub fn toffoli_to_ncv(a: Line, b: Line, c: Line, o: Orientation) -> Vec<Gate> {
    let fwd = vec![
        Gate::v(b, c),
        Gate::cnot(a, b),
        Gate::vdag(b, c),
        Gate::cnot(a, b),
        Gate::v(a, c),
    ];
    orient(fwd, o)
}

/// Toffoli with positive control `p` and negative control `q`.
///
/// `V(p,t) CNOT(q,p) V(p,t) CNOT(q,p) V†(q,t)`: exponent
/// `p + (p⊕q) - q = 2p(1-q)`.
pub fn neg_toffoli_to_ncv(p: Line, q: Line, t: Line, o: Orientation) -> Vec<Gate> {
    let fwd = vec![
        Gate::v(p, t),
        Gate::cnot(q, p),
        Gate::v(p, t),
        Gate::cnot(q, p),
        Gate::vdag(q, t),
    ];
    orient(fwd, o)
}

fn orient(fwd: Vec<Gate>, o: Orientation) -> Vec<Gate> {
    match o {
        Orientation::A => fwd,
        Orientation::AInverse => fwd.iter().rev().map(Gate::inverse).collect(),
    }
}

/// Any two-control Toffoli, by control polarity. Two negative controls are
/// handled by conjugating the first control with NOT gates.
pub fn toffoli2_to_ncv(g: &Gate, o: Orientation) -> Vec<Gate> {
    debug_assert!(g.kind == GateKind::Toffoli && g.controls.len() == 2);
    let (c0, c1, t) = (g.controls[0], g.controls[1], g.target());
    match (c0.negative, c1.negative) {
        (false, false) => toffoli_to_ncv(c0.line, c1.line, t, o),
        (false, true) => neg_toffoli_to_ncv(c0.line, c1.line, t, o),
        (true, false) => neg_toffoli_to_ncv(c1.line, c0.line, t, o),
        (true, true) => {
            let mut v = vec![Gate::x(c0.line)];
            v.extend(neg_toffoli_to_ncv(c0.line, c1.line, t, o));
            v.push(Gate::x(c0.line));
            v
        }
    }
}

fn tof(a: Control, b: Control, t: Line) -> Gate {
    Gate::toffoli(vec![a, b], t)
}

/// Ladder of `4(m-2)` two-control Toffolis for an `m`-control Toffoli with
/// `m-2` dirty ancillas, which are restored.
///
/// Emits `F·D·F·D` with `F = T(c_m, a_{m-2}; t)`,
/// `D = U_{m-3} … U_1 · W · U_1 … U_{m-3}`, `W = T(c_1, c_2; a_1)`,
/// `U_i = T(c_{i+2}, a_i; a_{i+1})`. A negative control stays negative in
/// the one ladder gate it feeds; if every control is negative, `c_1` is
/// wrapped in a NOT pair instead.
pub fn mct_barenco(controls: &[Control], t: Line, ancillas: &[Line]) -> Result<Vec<Gate>, DecomposeError> {
    let m = controls.len();
    assert!(m >= 3, "ladder needs at least three controls");
    if ancillas.len() < m - 2 {
        return Err(DecomposeError::InsufficientAncillas {
            gate: Gate::toffoli(controls.to_vec(), t).to_string(),
            need: m - 2,
            have: ancillas.len(),
        });
    }
    let mut cs = controls.to_vec();
    let mut wrap = None;
    if let Some(i) = cs.iter().position(|c| !c.negative) {
        if cs[0].negative {
            cs.swap(0, i);
        }
    } else {
        wrap = Some(cs[0].line);
        cs[0].negative = false;
    }
    let a = |i: usize| Control::pos(ancillas[i - 1]);
    let c = |i: usize| cs[i - 1];
    let f = tof(c(m), a(m - 2), t);
    let w = tof(c(1), c(2), ancillas[0]);
    let u = |i: usize| tof(c(i + 2), a(i), ancillas[i]);
    let mut d: Vec<Gate> = (1..=m - 3).rev().map(u).collect();
    d.push(w);
    d.extend((1..=m - 3).map(u));
    let mut out = Vec::with_capacity(4 * (m - 2) + 2);
    out.extend(wrap.map(Gate::x));
    for _ in 0..2 {
        out.push(f.clone());
        out.extend(d.iter().cloned());
    }
    out.extend(wrap.map(Gate::x));
    Ok(out)
}

/// Multi-control Toffoli with one dirty ancilla `a`: the controls split into
/// `h1` (the first `split` of them) and `h2`, and the circuit is
/// `G1·G2·G1·G2` with `G1 = MCT(h1 → a)`, `G2 = MCT(h2 ∪ {a} → t)`. Inner
/// gates with three or more controls borrow idle lines among `lines`.
pub fn mct_single_ancilla(
    controls: &[Control],
    t: Line,
    a: Line,
    split: usize,
    line_count: usize,
) -> Result<Vec<Gate>, DecomposeError> {
    let m = controls.len();
    assert!(m >= 3 && split >= 1 && split < m);
    let h1 = controls[..split].to_vec();
    let mut h2 = controls[split..].to_vec();
    h2.push(Control::pos(a));
    let g1 = mct_lower_ladder(&h1, a, line_count)?;
    let g2 = mct_lower_ladder(&h2, t, line_count)?;
    let mut out = Vec::new();
    for _ in 0..2 {
        out.extend(g1.iter().cloned());
        out.extend(g2.iter().cloned());
    }
    Ok(out)
}

/// Toffoli-level realization of one MCT using idle lines as dirty ancillas.
fn mct_lower_ladder(controls: &[Control], t: Line, line_count: usize) -> Result<Vec<Gate>, DecomposeError> {
    match controls.len() {
        0 => Ok(vec![Gate::x(t)]),
        1 if !controls[0].negative => Ok(vec![Gate::cnot(controls[0].line, t)]),
        1 => Ok(vec![Gate::x(controls[0].line), Gate::cnot(controls[0].line, t), Gate::x(controls[0].line)]),
        2 => Ok(vec![Gate::toffoli(controls.to_vec(), t)]),
        _ => {
            let g = Gate::toffoli(controls.to_vec(), t);
            let idle = idle_lines(&g, line_count);
            mct_barenco(controls, t, &idle)
        }
    }
}

fn idle_lines(g: &Gate, line_count: usize) -> Vec<Line> {
    (0..line_count).filter(|l| g.lines().all(|x| x != *l)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AncillaMode {
    /// Ladder with `m - 2` borrowed lines.
    #[default]
    DirtyMany,
    /// One borrowed line, split construction.
    Single,
}

impl FromStr for AncillaMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dirty-many" => Ok(AncillaMode::DirtyMany),
            "single" => Ok(AncillaMode::Single),
            _ => Err(format!("unknown ancilla mode {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OrientationPolicy {
    Uniform,
    /// Repeated occurrences of the same Toffoli alternate A, A⁻¹, A, ….
    #[default]
    Alternate,
    /// Each Toffoli in turn takes whichever orientation optimizes the prefix
    /// to the lower cost.
    Greedy,
    /// Every strategy above; the cheapest optimized result wins.
    Best,
}

impl OrientationPolicy {
    pub const CONCRETE: [OrientationPolicy; 3] = [
        OrientationPolicy::Uniform,
        OrientationPolicy::Alternate,
        OrientationPolicy::Greedy,
    ];
}

impl fmt::Display for OrientationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrientationPolicy::Uniform => "uniform",
            OrientationPolicy::Alternate => "alternate",
            OrientationPolicy::Greedy => "greedy",
            OrientationPolicy::Best => "best",
        })
    }
}

impl FromStr for OrientationPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(OrientationPolicy::Uniform),
            "alternate" => Ok(OrientationPolicy::Alternate),
            "greedy" => Ok(OrientationPolicy::Greedy),
            "best" => Ok(OrientationPolicy::Best),
            _ => Err(format!("unknown orientation policy {s:?}")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExpandOptions {
    pub ancilla: AncillaMode,
    /// Size of the first control half in single-ancilla mode; `⌈m/2⌉` if unset.
    pub split: Option<usize>,
}

/// Lowers Fredkin gates and Toffolis with three or more controls, leaving
/// NCV gates and two-control Toffolis.
pub fn lower_wide(c: &Circuit, opts: &ExpandOptions) -> Result<Circuit, DecomposeError> {
    c.validate()?;
    let mut out = Vec::with_capacity(c.len());
    for g in &c.gates {
        match g.kind {
            GateKind::Fredkin => {
                let (x, y) = (g.targets[0], g.targets[1]);
                let mut ctl = g.controls.clone();
                ctl.push(Control::pos(x));
                out.push(Gate::cnot(y, x));
                lower_mct(&Gate::toffoli(ctl, y), c.line_count, opts, &mut out)?;
                out.push(Gate::cnot(y, x));
            }
            GateKind::Toffoli => lower_mct(g, c.line_count, opts, &mut out)?,
            _ => out.push(g.clone()),
        }
    }
    Ok(c.with_gates(out))
}

fn lower_mct(g: &Gate, line_count: usize, opts: &ExpandOptions, out: &mut Vec<Gate>) -> Result<(), DecomposeError> {
    let m = g.controls.len();
    if m <= 2 {
        out.extend(mct_lower_ladder(&g.controls, g.target(), line_count)?);
        return Ok(());
    }
    let idle = idle_lines(g, line_count);
    match opts.ancilla {
        AncillaMode::DirtyMany => out.extend(mct_barenco(&g.controls, g.target(), &idle)?),
        AncillaMode::Single => {
            let Some(&a) = idle.first() else {
                return Err(DecomposeError::InsufficientAncillas {
                    gate: g.to_string(),
                    need: 1,
                    have: 0,
                });
            };
            let split = opts.split.unwrap_or(m.div_ceil(2)).clamp(1, m - 1);
            out.extend(mct_single_ancilla(&g.controls, g.target(), a, split, line_count)?);
        }
    }
    Ok(())
}

fn is_toffoli2(g: &Gate) -> bool {
    g.kind == GateKind::Toffoli && g.controls.len() == 2
}

/// Replaces each two-control Toffoli by its 5-gate NCV circuit, using
/// `orientations` in order of occurrence.
pub fn lower_toffolis(c: &Circuit, orientations: &[Orientation]) -> Circuit {
    let mut it = orientations.iter().copied();
    let mut out = Vec::with_capacity(c.len() * 5);
    for g in &c.gates {
        if is_toffoli2(g) {
            let o = it.next().unwrap_or(Orientation::A);
            out.extend(toffoli2_to_ncv(g, o));
        } else {
            out.push(g.clone());
        }
    }
    c.with_gates(out)
}

/// Orientation of every two-control Toffoli under a concrete policy.
pub fn choose_orientations(
    c: &Circuit,
    policy: OrientationPolicy,
    ts: &TemplateSet,
    model: &CostModel,
) -> Result<Vec<Orientation>, DecomposeError> {
    let tofs: Vec<&Gate> = c.gates.iter().filter(|g| is_toffoli2(g)).collect();
    Ok(match policy {
        OrientationPolicy::Uniform => vec![Orientation::A; tofs.len()],
        OrientationPolicy::Alternate | OrientationPolicy::Best => {
            let mut last: HashMap<&Gate, Orientation> = HashMap::new();
            tofs.iter()
                .map(|g| {
                    let o = last.get(g).map_or(Orientation::A, |o| o.flip());
                    last.insert(g, o);
                    o
                })
                .collect()
        }
        OrientationPolicy::Greedy => {
            let mut prefix = c.with_gates(vec![]);
            let mut picks = Vec::new();
            for g in &c.gates {
                if is_toffoli2(g) {
                    let mut best: Option<(Orientation, Circuit)> = None;
                    for o in [Orientation::A, Orientation::AInverse] {
                        let mut trial = prefix.clone();
                        trial.gates.extend(toffoli2_to_ncv(g, o));
                        let r = reduce_cost(&trial, ts, model)?.circuit;
                        if best
                            .as_ref()
                            .is_none_or(|(_, b)| circuit_cost(&r, model) < circuit_cost(b, model))
                        {
                            best = Some((o, r));
                        }
                    }
                    let (o, r) = best.unwrap();
                    picks.push(o);
                    prefix = r;
                } else {
                    prefix.gates.push(g.clone());
                }
            }
            picks
        }
    })
}

/// Full lowering to NCV. `Best` is resolved by the optimize pipeline; here it
/// behaves like `Alternate`.
pub fn expand_all(
    c: &Circuit,
    opts: &ExpandOptions,
    policy: OrientationPolicy,
    ts: &TemplateSet,
    model: &CostModel,
) -> Result<Circuit, DecomposeError> {
    let wide = lower_wide(c, opts)?;
    let os = choose_orientations(&wide, policy, ts, model)?;
    Ok(lower_toffolis(&wide, &os))
}

/// Exchanges V and V† throughout. Only valid for circuits computing a
/// classical reversible function.
pub fn v_polarity_swap(c: &Circuit) -> Result<Circuit, DecomposeError> {
    if !oracle::is_classical(c)? {
        return Err(DecomposeError::NotClassical);
    }
    Ok(c.with_gates(
        c.gates
            .iter()
            .map(|g| match g.kind {
                GateKind::V | GateKind::Vdag => g.inverse(),
                _ => g.clone(),
            })
            .collect(),
    ))
}
