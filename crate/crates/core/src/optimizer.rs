//! Template matching and the cost-reduction driver.
//!
//! A match anchors one template gate at the start gate `C_k` and extends the
//! window leftward. Earlier gates join the window when they fit the template
//! pattern and commute with every unselected gate between them and `C_k`
//! (the moving rule); the selected gates are then transported rightward to
//! sit next to `C_k` and replaced by the rest of the template, inverted.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::ir::{gates_commute, Circuit, Control, Cost, CostModel, Gate, GateKind, IrError, Line};
use crate::template::{Direction, TGate, TKind, Template, TemplateSet, VPol};

/// Line limit for the NCV passes (blocker sets are 128-bit masks).
pub const MAX_LINES: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptError {
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error("{0} lines exceeds the optimizer limit of {MAX_LINES}")]
    TooWide(usize),
    #[error("stale match: the circuit no longer has the matched gates")]
    StaleMatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub template: String,
    pub template_size: usize,
    pub direction: Direction,
    pub j: usize,
    pub p: usize,
    /// Indices of the matched gates, ascending; the last one is the start gate.
    pub positions: Vec<usize>,
    /// The matched gates in circuit order, used to detect stale matches.
    pub matched: Vec<Gate>,
    /// Template wire `w_i` ↦ line `wires[i]`.
    pub wires: Vec<Line>,
    pub v0_is_v: bool,
    pub replacement: Vec<Gate>,
    pub benefit: Cost,
}

impl Match {
    pub fn start(&self) -> usize {
        *self.positions.last().unwrap()
    }

    /// Equal-length substitution with zero benefit.
    pub fn is_retaining(&self) -> bool {
        self.benefit.is_zero() && 2 * self.p == self.template_size
    }

    /// Ordering used to pick the best match: benefit, then larger p, then
    /// smaller j, then forward.
    fn rank_cmp(&self, o: &Match) -> Ordering {
        self.benefit
            .cmp(&o.benefit)
            .then(self.p.cmp(&o.p))
            .then(o.j.cmp(&self.j))
            .then((o.direction as u8).cmp(&(self.direction as u8)))
    }
}

fn mask(l: Line) -> u128 {
    1u128 << l
}

fn control_mask(g: &Gate) -> u128 {
    g.control_lines().fold(0, |a, l| a | mask(l))
}

fn target_mask(g: &Gate) -> u128 {
    g.targets.iter().fold(0, |a, &l| a | mask(l))
}

/// True iff the gate at `from` commutes with every gate strictly between
/// `from` and `to`.
pub fn movable_to(c: &Circuit, from: usize, to: usize) -> bool {
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    let g = &c.gates[from];
    c.gates[lo + 1..hi].iter().all(|h| gates_commute(g, h))
}

/// Partial binding built while extending a match.
#[derive(Clone)]
struct Binding {
    wires: Vec<Option<Line>>,
    v0_is_v: Option<bool>,
}

impl Binding {
    fn new(k: usize) -> Self {
        Binding {
            wires: vec![None; k],
            v0_is_v: None,
        }
    }

    fn bind_wire(&mut self, w: u8, l: Line) -> bool {
        match self.wires[w as usize] {
            Some(x) => x == l,
            None => {
                if self.wires.contains(&Some(l)) {
                    return false;
                }
                self.wires[w as usize] = Some(l);
                true
            }
        }
    }

    /// Extends the binding so that `tg` instantiates to `g`; leaves `self`
    /// untouched on failure.
    fn try_bind(&mut self, tg: &TGate, g: &Gate) -> bool {
        let shape_ok = match (tg.kind, g.kind) {
            (TKind::X, GateKind::X) => true,
            (TKind::Cnot, GateKind::Cnot) => true,
            (TKind::V(_), GateKind::V | GateKind::Vdag) => {
                tg.control.is_some() == !g.controls.is_empty()
            }
            _ => false,
        };
        if !shape_ok {
            return false;
        }
        let mut next = self.clone();
        if let TKind::V(pol) = tg.kind {
            let want = (pol == VPol::V0) == (g.kind == GateKind::V);
            match next.v0_is_v {
                Some(v) if v != want => return false,
                _ => next.v0_is_v = Some(want),
            }
        }
        if let Some(cw) = tg.control {
            if !next.bind_wire(cw, g.controls[0].line) {
                return false;
            }
        }
        if !next.bind_wire(tg.target, g.target()) {
            return false;
        }
        *self = next;
        true
    }

    /// Fills unbound wires with the lowest unused lines.
    fn complete(&self, line_count: usize) -> Option<Vec<Line>> {
        let mut free = (0..line_count).filter(|l| !self.wires.contains(&Some(*l)));
        self.wires
            .iter()
            .map(|w| w.or_else(|| free.next()))
            .collect()
    }
}

/// Best match of `t` with `C_k` as start gate (`k` is a 0-based index).
pub fn match_at(c: &Circuit, k: usize, t: &Template, m: &CostModel) -> Option<Match> {
    if k >= c.len() || t.wires > c.line_count || c.line_count > MAX_LINES {
        return None;
    }
    let mut best: Option<Match> = None;
    let inv = t.inverse();
    for (dir, seq) in [(Direction::Forward, &t.gates), (Direction::Backward, &inv.gates)] {
        for e in 0..seq.len() {
            match_anchor(c, k, t, seq, e, dir, m, &mut best);
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn match_anchor(
    c: &Circuit,
    k: usize,
    t: &Template,
    seq: &[TGate],
    e: usize,
    dir: Direction,
    m: &CostModel,
    best: &mut Option<Match>,
) {
    let size = seq.len();
    let mut bind = Binding::new(t.wires);
    if !bind.try_bind(&seq[e], &c.gates[k]) {
        return;
    }
    let mut positions = vec![k];
    let (mut cb, mut tb) = (0u128, 0u128);
    let mut pos = k;
    for q in 1..=size {
        // candidate with p = q gates
        consider(c, t, seq, e, q, dir, &bind, &positions, m, best);
        if q == size {
            break;
        }
        let tg = seq[(e + size - q) % size];
        let bound_t = bind.wires[tg.target as usize];
        let bound_c = tg.control.and_then(|w| bind.wires[w as usize]);
        let mut found = None;
        let mut i = pos;
        while i > 0 {
            i -= 1;
            let g = &c.gates[i];
            let (gc, gt) = (control_mask(g), target_mask(g));
            if gt & cb == 0 && gc & tb == 0 && g.is_ncv() {
                let mut trial = bind.clone();
                if trial.try_bind(&tg, g) {
                    bind = trial;
                    found = Some(i);
                    break;
                }
            }
            cb |= gc;
            tb |= gt;
            if bound_t.is_some_and(|l| cb & mask(l) != 0) || bound_c.is_some_and(|l| tb & mask(l) != 0) {
                break;
            }
        }
        match found {
            Some(i) => {
                positions.push(i);
                pos = i;
            }
            None => break,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn consider(
    c: &Circuit,
    t: &Template,
    seq: &[TGate],
    e: usize,
    p: usize,
    dir: Direction,
    bind: &Binding,
    positions_desc: &[usize],
    m: &CostModel,
    best: &mut Option<Match>,
) {
    let size = seq.len();
    let Some(wires) = bind.complete(c.line_count) else {
        return;
    };
    let v0_is_v = bind.v0_is_v.unwrap_or(true);
    let replacement: Vec<Gate> = (0..size - p)
        .map(|i| seq[(e + size - p - i) % size].inverse().instantiate(&wires, v0_is_v))
        .collect();
    let mut positions: Vec<usize> = positions_desc.to_vec();
    positions.reverse();
    let matched: Vec<Gate> = positions.iter().map(|&i| c.gates[i].clone()).collect();
    if matched == replacement {
        return;
    }
    let benefit = m.gates_cost(&matched) - m.gates_cost(&replacement);
    let j = match dir {
        Direction::Forward => (e + size + 1 - p) % size,
        Direction::Backward => (2 * size + p - 2 - e) % size,
    };
    let cand = Match {
        template: t.name.clone(),
        template_size: size,
        direction: dir,
        j,
        p,
        positions,
        matched,
        wires,
        v0_is_v,
        replacement,
        benefit,
    };
    if best.as_ref().is_none_or(|b| cand.rank_cmp(b) == Ordering::Greater) {
        *best = Some(cand);
    }
}

/// Moves the matched gates next to the start gate and substitutes them.
pub fn apply_match(c: &Circuit, mt: &Match) -> Result<Circuit, OptError> {
    if mt.positions.iter().any(|&i| i >= c.len())
        || mt.positions.iter().zip(&mt.matched).any(|(&i, g)| c.gates[i] != *g)
    {
        return Err(OptError::StaleMatch);
    }
    Ok(c.with_gates(splice(&c.gates, &mt.positions, &mt.replacement)))
}

fn splice(gates: &[Gate], positions: &[usize], replacement: &[Gate]) -> Vec<Gate> {
    let k = *positions.last().unwrap();
    let mut out = Vec::with_capacity(gates.len() + replacement.len());
    let mut sel = positions.iter().peekable();
    for (i, g) in gates[..k].iter().enumerate() {
        if sel.peek() == Some(&&i) {
            sel.next();
        } else {
            out.push(g.clone());
        }
    }
    out.extend(replacement.iter().cloned());
    out.extend(gates[k + 1..].iter().cloned());
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OptStats {
    /// Start-gate positions examined.
    pub iterations: usize,
    pub beneficial: usize,
    pub retaining: usize,
    /// Substitutions per template name.
    pub per_template: BTreeMap<String, usize>,
}

impl OptStats {
    pub fn substitutions(&self) -> usize {
        self.beneficial + self.retaining
    }
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub circuit: Circuit,
    pub stats: OptStats,
}

pub(crate) fn check_ncv(c: &Circuit) -> Result<(), OptError> {
    if c.line_count > MAX_LINES {
        return Err(OptError::TooWide(c.line_count));
    }
    c.validate()?;
    c.require_ncv()?;
    Ok(())
}

/// The cost-reduction driver.
///
/// The start gate index `k` runs left to right from the second gate. At each
/// `k` the templates are tried in size order: the first beneficial best match
/// is applied; failing that, the first equal-length zero-benefit match is
/// applied provided `k` lies strictly right of the flag position, and the
/// flag moves to `k`. A beneficial substitution clears the flag. After any
/// substitution `k` returns to the leftmost matched gate.
pub fn reduce_cost(c: &Circuit, ts: &TemplateSet, m: &CostModel) -> Result<OptResult, OptError> {
    check_ncv(c)?;
    let mut cur = c.clone();
    let mut stats = OptStats::default();
    // 1-based position of the last cost-retaining substitution, 0 = none
    let mut flag = 0usize;
    let mut k = 1usize;
    while k < cur.len() {
        stats.iterations += 1;
        let mut retaining: Option<Match> = None;
        let mut chosen: Option<Match> = None;
        for t in ts.templates() {
            let Some(mt) = match_at(&cur, k, t, m) else {
                continue;
            };
            if mt.benefit > Cost::zero() {
                chosen = Some(mt);
                break;
            }
            if retaining.is_none() && mt.is_retaining() && k + 1 > flag && unlocks(&cur, &mt, ts, m) {
                retaining = Some(mt);
            }
        }
        let mt = match chosen {
            Some(mt) => {
                flag = 0;
                stats.beneficial += 1;
                mt
            }
            None => match retaining {
                Some(mt) => {
                    flag = k + 1;
                    stats.retaining += 1;
                    mt
                }
                None => {
                    k += 1;
                    continue;
                }
            },
        };
        *stats.per_template.entry(mt.template.clone()).or_default() += 1;
        cur.gates = splice(&cur.gates, &mt.positions, &mt.replacement);
        k = mt.positions[0].max(1);
    }
    Ok(OptResult { circuit: cur, stats })
}

/// True when substituting `mt` creates a beneficial match that uses one of
/// the replacement gates.
fn unlocks(c: &Circuit, mt: &Match, ts: &TemplateSet, m: &CostModel) -> bool {
    let gates = splice(&c.gates, &mt.positions, &mt.replacement);
    let ins = mt.start() + 1 - mt.p;
    let new = ins..ins + mt.replacement.len();
    let next = c.with_gates(gates);
    (ins..next.len()).any(|q| {
        ts.templates().iter().any(|t| {
            match_at(&next, q, t, m).is_some_and(|b| {
                b.benefit > Cost::zero() && b.positions.iter().any(|i| new.contains(i))
            })
        })
    })
}

/// Removes work made redundant by constant inputs and garbage outputs.
///
/// Forward, classical values of constant lines are tracked through the
/// circuit: a gate whose known control cannot fire is deleted, a known
/// control that always fires is stripped (CNOT becomes NOT, controlled V
/// becomes V). NOT gates on known lines stay and flip the tracked value.
/// Backward, a gate acting only on garbage outputs that commutes with
/// everything after it is deleted. Both passes repeat to a fixpoint.
pub fn boundary_simplify(c: &Circuit) -> Circuit {
    let mut cur = c.clone();
    loop {
        let before = cur.gates.len();
        let fwd = propagate_constants(&cur);
        let changed_fwd = fwd != cur.gates;
        cur.gates = fwd;
        cur.gates = drop_garbage_tail(&cur);
        if !changed_fwd && cur.gates.len() == before {
            return cur;
        }
    }
}

fn strip_controls(g: &Gate, controls: Vec<Control>) -> Option<Gate> {
    let kind = match (g.kind, controls.len()) {
        (GateKind::Cnot, 0) => GateKind::X,
        (GateKind::Toffoli, 0) => GateKind::X,
        (GateKind::Toffoli, 1) if !controls[0].negative => GateKind::Cnot,
        (GateKind::Toffoli, 1) => return None,
        (GateKind::Fredkin, 0) => return None,
        (k, _) => k,
    };
    Some(Gate {
        kind,
        controls,
        targets: g.targets.clone(),
    })
}

fn propagate_constants(c: &Circuit) -> Vec<Gate> {
    let mut known: Vec<Option<bool>> = c.lines.iter().map(|a| a.constant).collect();
    known.resize(c.line_count, None);
    let mut out = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        let mut dead = false;
        let mut keep = Vec::new();
        for ctl in &g.controls {
            match known[ctl.line] {
                Some(v) if v == ctl.negative => dead = true,
                Some(_) => {}
                None => keep.push(*ctl),
            }
        }
        if dead {
            continue;
        }
        let g2 = if keep.len() == g.controls.len() {
            g.clone()
        } else {
            strip_controls(g, keep).unwrap_or_else(|| g.clone())
        };
        match g2.kind {
            GateKind::X => {
                let t = g2.target();
                known[t] = known[t].map(|v| !v);
            }
            _ => {
                for &t in &g2.targets {
                    known[t] = None;
                }
            }
        }
        out.push(g2);
    }
    out
}

fn drop_garbage_tail(c: &Circuit) -> Vec<Gate> {
    let garbage = |l: Line| c.lines.get(l).is_some_and(|a| a.garbage);
    let mut kept_rev: Vec<Gate> = Vec::with_capacity(c.gates.len());
    for g in c.gates.iter().rev() {
        let removable = g.targets.iter().all(|&t| garbage(t)) && kept_rev.iter().all(|h| gates_commute(g, h));
        if !removable {
            kept_rev.push(g.clone());
        }
    }
    kept_rev.reverse();
    kept_rev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{equivalent, equivalent_on_outputs, EquivMode};
    use crate::template::builtin_set;

    fn unit() -> CostModel {
        CostModel::unit()
    }

    #[test]
    fn movable_examples() {
        let c = Circuit::from_gates(4, vec![Gate::cnot(0, 1), Gate::cnot(0, 2)]);
        assert!(movable_to(&c, 0, 1));
        let c = Circuit::from_gates(
            4,
            vec![
                Gate::vdag(1, 3),
                Gate::v(0, 3),
                Gate::v(2, 3),
                Gate::cnot(1, 2),
                Gate::x(0),
            ],
        );
        assert!(movable_to(&c, 0, 4));
        let c = Circuit::from_gates(4, vec![Gate::cnot(1, 2), Gate::v(2, 3), Gate::x(0)]);
        assert!(!movable_to(&c, 0, 2));
    }

    #[test]
    fn match_examples() {
        let b = builtin_set();
        let c = Circuit::from_gates(1, vec![Gate::x(0), Gate::x(0)]);
        let mt = match_at(&c, 1, b.get("inv_x").unwrap(), &unit()).unwrap();
        assert_eq!((mt.p, mt.benefit), (2, Cost::from_integer(2)));

        let c = Circuit::from_gates(3, vec![Gate::v(0, 1), Gate::cnot(2, 0)]);
        assert!(match_at(&c, 1, b.get("vvc").unwrap(), &unit()).is_none_or(|m| m.benefit <= Cost::zero()));

        let c = Circuit::from_gates(
            3,
            vec![Gate::v(0, 1), Gate::x(2), Gate::v(0, 1), Gate::cnot(0, 1)],
        );
        let mt = match_at(&c, 3, b.get("vvc").unwrap(), &unit()).unwrap();
        assert_eq!((mt.p, mt.benefit), (3, Cost::from_integer(3)));
        let out = apply_match(&c, &mt).unwrap();
        assert_eq!(out.gates, vec![Gate::x(2)]);
        assert!(equivalent(&c, &out, EquivMode::Dense).unwrap());
    }

    #[test]
    fn ccc_three_for_two() {
        let b = builtin_set();
        let c = Circuit::from_gates(3, vec![Gate::cnot(1, 2), Gate::cnot(0, 1), Gate::cnot(1, 2)]);
        let mt = match_at(&c, 2, b.get("ccc").unwrap(), &unit()).unwrap();
        assert_eq!(mt.p, 3);
        assert_eq!(mt.replacement.len(), 2);
        let out = apply_match(&c, &mt).unwrap();
        assert_eq!(out.len(), 2);
        assert!(equivalent(&c, &out, EquivMode::Dense).unwrap());
    }

    #[test]
    fn stale_match_rejected() {
        let b = builtin_set();
        let c = Circuit::from_gates(1, vec![Gate::x(0), Gate::x(0)]);
        let mt = match_at(&c, 1, b.get("inv_x").unwrap(), &unit()).unwrap();
        let other = Circuit::from_gates(1, vec![Gate::x(0)]);
        assert_eq!(apply_match(&other, &mt), Err(OptError::StaleMatch));
    }

    fn peres_pair() -> Circuit {
        // lines a=0 b=1 c=2 d=3
        Circuit::from_gates(
            4,
            vec![
                Gate::v(1, 3),
                Gate::cnot(0, 1),
                Gate::vdag(1, 3),
                Gate::v(0, 3),
                Gate::v(2, 3),
                Gate::cnot(1, 2),
                Gate::vdag(2, 3),
                Gate::v(1, 3),
            ],
        )
    }

    #[test]
    fn full_adder_reduces_to_six() {
        let c = peres_pair();
        let out = reduce_cost(&c, &builtin_set(), &unit()).unwrap();
        assert_eq!(out.circuit.len(), 6);
        assert!(equivalent(&c, &out.circuit, EquivMode::Dense).unwrap());
        let again = reduce_cost(&out.circuit, &builtin_set(), &unit()).unwrap();
        assert_eq!(again.circuit, out.circuit);
    }

    #[test]
    fn rejects_toffoli() {
        let c = Circuit::from_gates(3, vec![Gate::toffoli2(0, 1, 2)]);
        assert!(matches!(reduce_cost(&c, &builtin_set(), &unit()), Err(OptError::Ir(IrError::NotNcv(_)))));
    }

    #[test]
    fn boundary_examples() {
        let mut c = Circuit::from_gates(2, vec![Gate::cnot(0, 1)]);
        c.lines[0].constant = Some(true);
        let s = boundary_simplify(&c);
        assert_eq!(s.gates, vec![Gate::x(1)]);
        assert!(equivalent_on_outputs(&c, &s).unwrap().0);

        c.lines[0].constant = Some(false);
        assert!(boundary_simplify(&c).gates.is_empty());

        let mut c = Circuit::from_gates(2, vec![Gate::v(0, 1)]);
        c.lines[1].garbage = true;
        let s = boundary_simplify(&c);
        assert!(s.gates.is_empty());
        assert!(equivalent_on_outputs(&c, &s).unwrap().0);
    }

    #[test]
    fn boundary_tracks_not() {
        let mut c = Circuit::from_gates(3, vec![Gate::x(0), Gate::cnot(0, 1), Gate::v(0, 2)]);
        c.lines[0].constant = Some(false);
        let s = boundary_simplify(&c);
        assert_eq!(s.gates, vec![Gate::x(0), Gate::x(1), Gate::v_free(2)]);
        assert!(equivalent_on_outputs(&c, &s).unwrap().0);
    }

    #[test]
    fn boundary_keeps_needed_garbage_gate() {
        // the garbage line controls a later gate, so its V must stay
        let mut c = Circuit::from_gates(3, vec![Gate::v(0, 1), Gate::cnot(1, 2)]);
        c.lines[1].garbage = true;
        assert_eq!(boundary_simplify(&c).len(), 2);
    }
}
