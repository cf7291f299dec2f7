//! Exhaustive identity search.
//!
//! For each size `m` all identity sequences over the NCV alphabet on `k`
//! wires are found by meet-in-the-middle: products of every left half `P`
//! (length ⌈m/2⌉) are looked up in an index of right-half products, keyed by
//! the exact matrix; `Q` completes `P` to the identity iff `U(Q) = U(P)†`.
//! Identities are grouped by a canonical form and each class that the
//! current template set cannot shorten becomes a new template.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::ir::{Circuit, CostModel, Line};
use crate::optimizer::reduce_cost;
use crate::oracle::DyadicGaussian;
use crate::template::{reducible_rotation, TGate, TKind, Template, TemplateSet, VPol};

#[derive(Clone, Debug)]
pub struct SearchSpec {
    pub max_size: usize,
    pub wires: usize,
    pub existing: TemplateSet,
    /// Smallest size to search; sizes run from here to `max_size`.
    pub min_size: usize,
    /// Cap on enumerated half sequences plus joined identities.
    pub node_budget: Option<usize>,
    pub time_budget: Option<Duration>,
    /// Skip sequences containing an adjacent (cyclically) gate-inverse pair
    /// when the existing set already removes such pairs.
    pub prune_inverse_pairs: bool,
}

impl SearchSpec {
    pub fn new(max_size: usize, wires: usize, existing: TemplateSet) -> Self {
        SearchSpec {
            max_size,
            wires,
            existing,
            min_size: 2,
            node_budget: None,
            time_budget: None,
            prune_inverse_pairs: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SizeCounts {
    pub size: usize,
    /// Identity sequences found (after pruning).
    pub identities: usize,
    /// Distinct canonical classes among them.
    pub classes: usize,
    /// Classes kept as new templates.
    pub templates: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub max_size: usize,
    pub wires: usize,
    pub node_budget: Option<usize>,
    pub exhaustive: bool,
    pub nodes: usize,
    pub counts: Vec<SizeCounts>,
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# discover size<={} wires<={} budget={} exhaustive={} nodes={}",
            self.max_size,
            self.wires,
            self.node_budget.map_or("none".to_string(), |b| b.to_string()),
            if self.exhaustive { "yes" } else { "no" },
            self.nodes
        )?;
        for c in &self.counts {
            writeln!(
                f,
                "# size={} identities={} classes={} templates={}",
                c.size, c.identities, c.classes, c.templates
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Discovery {
    pub templates: Vec<Template>,
    pub manifest: Manifest,
}

impl Discovery {
    /// Template file text with the manifest as a comment header.
    pub fn to_text(&self) -> String {
        let mut s = self.manifest.to_string();
        s.push('\n');
        s.push_str(&TemplateSet::new(self.templates.clone()).to_text());
        s
    }
}

/// X on each wire, then CNOT, V, V† on each ordered pair.
pub fn alphabet(k: usize) -> Vec<TGate> {
    let mut v: Vec<TGate> = (0..k as u8).map(TGate::x).collect();
    for c in 0..k as u8 {
        for t in 0..k as u8 {
            if c != t {
                v.push(TGate::cnot(c, t));
                v.push(TGate::v(VPol::V0, c, t));
                v.push(TGate::v(VPol::V1, c, t));
            }
        }
    }
    v
}

type Matrix = Vec<DyadicGaussian>;

/// Left-multiplies the column-major `dim × dim` matrix by gate `g`
/// (V0 ↦ V).
fn apply_dense(m: &mut Matrix, dim: usize, g: &TGate) {
    let t = 1usize << g.target;
    let fires = |r: usize| g.control.is_none_or(|c| r >> c & 1 == 1);
    for col in m.chunks_mut(dim) {
        for r in 0..dim {
            if r & t != 0 || !fires(r) {
                continue;
            }
            let (a, b) = (col[r], col[r | t]);
            match g.kind {
                TKind::X | TKind::Cnot => {
                    col[r] = b;
                    col[r | t] = a;
                }
                TKind::V(p) => {
                    let (d, o) = if p == VPol::V0 {
                        (DyadicGaussian::half_one_plus_i(), DyadicGaussian::half_one_minus_i())
                    } else {
                        (DyadicGaussian::half_one_minus_i(), DyadicGaussian::half_one_plus_i())
                    };
                    col[r] = d * a + o * b;
                    col[r | t] = o * a + d * b;
                }
            }
        }
    }
}

fn identity(dim: usize) -> Matrix {
    let mut m = vec![DyadicGaussian::ZERO; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = DyadicGaussian::ONE;
    }
    m
}

fn adjoint(m: &Matrix, dim: usize) -> Matrix {
    let mut out = vec![DyadicGaussian::ZERO; dim * dim];
    for c in 0..dim {
        for r in 0..dim {
            out[r * dim + c] = m[c * dim + r].conj();
        }
    }
    out
}

fn is_inverse_pair(a: &TGate, b: &TGate) -> bool {
    a.inverse() == *b
}

struct Budget {
    nodes: AtomicUsize,
    limit: Option<usize>,
    deadline: Option<Instant>,
    blown: AtomicBool,
}

impl Budget {
    fn tick(&self, n: usize) -> bool {
        let used = self.nodes.fetch_add(n, Ordering::Relaxed) + n;
        if self.limit.is_some_and(|l| used > l) || self.deadline.is_some_and(|d| Instant::now() > d) {
            self.blown.store(true, Ordering::Relaxed);
        }
        !self.blown.load(Ordering::Relaxed)
    }
}

/// All sequences of length `len` (with products), skipping adjacent inverse
/// pairs when `prune` is set. Partitioned on the first gate.
fn half_sequences(
    alpha: &[TGate],
    len: usize,
    dim: usize,
    prune: bool,
    budget: &Budget,
) -> Vec<(Vec<TGate>, Matrix)> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        alpha: &[TGate],
        len: usize,
        dim: usize,
        prune: bool,
        seq: &mut Vec<TGate>,
        mat: &Matrix,
        out: &mut Vec<(Vec<TGate>, Matrix)>,
        budget: &Budget,
    ) {
        if seq.len() == len {
            out.push((seq.clone(), mat.clone()));
            return;
        }
        if !budget.tick(1) {
            return;
        }
        for g in alpha {
            if prune && seq.last().is_some_and(|l| is_inverse_pair(l, g)) {
                continue;
            }
            let mut m = mat.clone();
            apply_dense(&mut m, dim, g);
            seq.push(*g);
            rec(alpha, len, dim, prune, seq, &m, out, budget);
            seq.pop();
        }
    }
    if len == 0 {
        return vec![(vec![], identity(dim))];
    }
    let parts: Vec<Vec<(Vec<TGate>, Matrix)>> = alpha
        .par_iter()
        .map(|g| {
            let mut m = identity(dim);
            apply_dense(&mut m, dim, g);
            let mut out = Vec::new();
            let mut seq = vec![*g];
            rec(alpha, len, dim, prune, &mut seq, &m, &mut out, budget);
            out
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Every identity sequence of exactly `m` gates on `k` wires.
fn identities_of_size(m: usize, k: usize, prune: bool, budget: &Budget) -> Vec<Vec<TGate>> {
    let alpha = alphabet(k);
    let dim = 1usize << k;
    let l = m.div_ceil(2);
    let r = m - l;
    let rights = half_sequences(&alpha, r, dim, prune, budget);
    let mut index: HashMap<Matrix, Vec<usize>> = HashMap::new();
    for (i, (_, mat)) in rights.iter().enumerate() {
        index.entry(mat.clone()).or_default().push(i);
    }
    let lefts = half_sequences(&alpha, l, dim, prune, budget);
    let rights = &rights;
    let mut found: Vec<Vec<TGate>> = lefts
        .par_iter()
        .flat_map_iter(|(p, up)| {
            let want = adjoint(up, dim);
            let hits = index.get(&want).cloned().unwrap_or_default();
            budget.tick(hits.len());
            hits.into_iter().filter_map(move |qi| {
                let q = &rights[qi].0;
                if prune {
                    if let (Some(a), Some(b)) = (p.last(), q.first()) {
                        if is_inverse_pair(a, b) {
                            return None;
                        }
                    }
                    let last = q.last().or(p.last()).unwrap();
                    if is_inverse_pair(last, &p[0]) {
                        return None;
                    }
                }
                let mut s = p.clone();
                s.extend_from_slice(q);
                Some(s)
            })
        })
        .collect();
    found.sort_unstable();
    found
}

/// Relabels wires in order of first use (control before target).
fn relabel_first_use(seq: &[TGate]) -> (Vec<TGate>, usize) {
    let mut map: [Option<u8>; 256] = [None; 256];
    let mut next = 0u8;
    let mut touch = |w: u8, map: &mut [Option<u8>; 256]| {
        if map[w as usize].is_none() {
            map[w as usize] = Some(next);
            next += 1;
        }
    };
    for g in seq {
        if let Some(c) = g.control {
            touch(c, &mut map);
        }
        touch(g.target, &mut map);
    }
    let out = seq.iter().map(|g| g.relabel(|w| map[w as usize].unwrap())).collect();
    (out, next as usize)
}

/// Least serialization over rotations, inversion, global V↔V† exchange and
/// wire relabeling. Returns the canonical sequence and its wire count.
pub fn canonicalize(seq: &[TGate]) -> (Vec<TGate>, usize) {
    let inv: Vec<TGate> = seq.iter().rev().map(|g| g.inverse()).collect();
    let mut best: Option<(Vec<TGate>, usize)> = None;
    for base in [seq.to_vec(), inv] {
        for swap in [false, true] {
            let b: Vec<TGate> = if swap {
                base.iter().map(|g| g.swap_pol()).collect()
            } else {
                base.clone()
            };
            for r in 0..b.len().max(1) {
                let mut rot = b.clone();
                if !rot.is_empty() {
                    rot.rotate_left(r);
                }
                let cand = relabel_first_use(&rot);
                if best.as_ref().is_none_or(|x| cand.0 < x.0) {
                    best = Some(cand);
                }
            }
        }
    }
    best.unwrap_or_default()
}

/// True when `ts` removes every adjacent pair `g·g⁻¹` of the alphabet.
fn removes_inverse_pairs(ts: &TemplateSet, k: usize) -> bool {
    let wires: Vec<Line> = (0..k).collect();
    alphabet(k).iter().all(|g| {
        let gs = vec![g.instantiate(&wires, true), g.inverse().instantiate(&wires, true)];
        reduce_cost(&Circuit::from_gates(k, gs), ts, &CostModel::unit())
            .map(|r| r.circuit.is_empty())
            .unwrap_or(false)
    })
}

/// Runs the search for sizes `min_size..=max_size`. Templates found at one
/// size join the reducing set for the next.
pub fn enumerate_identities(spec: &SearchSpec) -> Discovery {
    assert!(spec.wires >= 1 && spec.wires <= 4, "wire count must be 1..=4");
    let budget = Budget {
        nodes: AtomicUsize::new(0),
        limit: spec.node_budget,
        deadline: spec.time_budget.map(|d| Instant::now() + d),
        blown: AtomicBool::new(false),
    };
    let mut known = spec.existing.clone();
    let mut found: Vec<Template> = Vec::new();
    let mut counts = Vec::new();
    for m in spec.min_size.max(1)..=spec.max_size {
        let prune = spec.prune_inverse_pairs && removes_inverse_pairs(&known, spec.wires);
        let ids = identities_of_size(m, spec.wires, prune, &budget);
        if budget.blown.load(Ordering::Relaxed) {
            counts.push(SizeCounts {
                size: m,
                identities: ids.len(),
                ..Default::default()
            });
            break;
        }
        let classes: BTreeMap<Vec<TGate>, usize> = ids.par_iter().map(|s| canonicalize(s)).collect::<Vec<_>>().into_iter().collect();
        let keep: Vec<(Vec<TGate>, usize)> = classes
            .par_iter()
            .filter(|(seq, k)| {
                let t = Template::new("probe", **k, (*seq).clone());
                reducible_rotation(&t, &known).is_none()
            })
            .map(|(s, k)| (s.clone(), *k))
            .collect();
        let new: Vec<Template> = keep
            .iter()
            .enumerate()
            .map(|(i, (s, k))| Template::new(format!("d{m}_w{k}_{i}"), *k, s.clone()))
            .collect();
        counts.push(SizeCounts {
            size: m,
            identities: ids.len(),
            classes: classes.len(),
            templates: new.len(),
        });
        known = known.union(&TemplateSet::new(new.clone()));
        found.extend(new);
    }
    let exhaustive = !budget.blown.load(Ordering::Relaxed);
    Discovery {
        templates: found,
        manifest: Manifest {
            max_size: spec.max_size,
            wires: spec.wires,
            node_budget: spec.node_budget,
            exhaustive,
            nodes: budget.nodes.load(Ordering::Relaxed),
            counts,
        },
    }
}

/// Canonical keys of a template set, for comparing discovery runs.
pub fn canonical_keys(ts: &TemplateSet) -> BTreeSet<Vec<TGate>> {
    ts.templates().iter().map(|t| canonicalize(&t.gates).0).collect()
}
