//! Floating-point state-vector reference, kept separate from the exact
//! simulator so tests cross-check two implementations.
#![allow(dead_code)]

use std::collections::HashMap;

use ncvopt::ir::{Circuit, Control, Gate, GateKind, Line};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type C = (f64, f64);

const EPS: f64 = 1e-9;

fn mul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn add(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}

fn fires(g: &Gate, x: usize) -> bool {
    g.controls.iter().all(|c| ((x >> c.line) & 1 == 1) != c.negative)
}

/// Applies one gate to a dense state over `2^n` amplitudes.
pub fn apply(g: &Gate, s: &mut [C]) {
    let t = g.targets[0];
    match g.kind {
        GateKind::Fredkin => {
            let u = g.targets[1];
            for x in 0..s.len() {
                let (bt, bu) = ((x >> t) & 1, (x >> u) & 1);
                if fires(g, x) && bt == 1 && bu == 0 {
                    let y = x ^ (1 << t) ^ (1 << u);
                    s.swap(x, y);
                }
            }
        }
        _ => {
            let (d, o): (C, C) = match g.kind {
                GateKind::V => ((0.5, 0.5), (0.5, -0.5)),
                GateKind::Vdag => ((0.5, -0.5), (0.5, 0.5)),
                _ => ((0.0, 0.0), (1.0, 0.0)),
            };
            for x in 0..s.len() {
                if x >> t & 1 == 0 && fires(g, x) {
                    let y = x | 1 << t;
                    let (a0, a1) = (s[x], s[y]);
                    s[x] = add(mul(d, a0), mul(o, a1));
                    s[y] = add(mul(o, a0), mul(d, a1));
                }
            }
        }
    }
}

pub fn run(c: &Circuit, x: usize) -> Vec<C> {
    let mut s = vec![(0.0, 0.0); 1 << c.line_count];
    s[x] = (1.0, 0.0);
    for g in &c.gates {
        apply(g, &mut s);
    }
    s
}

fn close(a: &[C], b: &[C]) -> bool {
    a.iter().zip(b).all(|(p, q)| (p.0 - q.0).abs() < EPS && (p.1 - q.1).abs() < EPS)
}

/// Column-by-column unitary comparison.
pub fn same_unitary(a: &Circuit, b: &Circuit) -> bool {
    assert_eq!(a.line_count, b.line_count);
    (0..1usize << a.line_count).all(|x| close(&run(a, x), &run(b, x)))
}

pub fn is_identity(c: &Circuit) -> bool {
    same_unitary(c, &Circuit::new(c.line_count))
}

/// Output basis state of `c` on input `x`, if the result is classical.
pub fn classical_out(c: &Circuit, x: usize) -> Option<usize> {
    let s = run(c, x);
    let hits: Vec<usize> = (0..s.len())
        .filter(|&y| s[y].0.abs() > EPS || s[y].1.abs() > EPS)
        .collect();
    match hits[..] {
        [y] if (s[y].0 - 1.0).abs() < EPS && s[y].1.abs() < EPS => Some(y),
        _ => None,
    }
}

/// Truth value of a multi-control Toffoli on basis input `x`.
pub fn mct_out(controls: &[Control], t: Line, x: usize) -> usize {
    if controls.iter().all(|c| ((x >> c.line) & 1 == 1) != c.negative) {
        x ^ 1 << t
    } else {
        x
    }
}

/// Random NCV circuit over at most `max_lines` lines and `max_gates` gates.
pub fn random_ncv(rng: &mut ChaCha8Rng, max_lines: usize, max_gates: usize) -> Circuit {
    let n = rng.gen_range(1..=max_lines);
    let len = rng.gen_range(0..=max_gates);
    let mut c = Circuit::new(n);
    for _ in 0..len {
        let t = rng.gen_range(0..n) as Line;
        let kind = if n == 1 { 0 } else { rng.gen_range(0..4) };
        let ctl = loop {
            let x = rng.gen_range(0..n) as Line;
            if x != t || n == 1 {
                break x;
            }
        };
        c.push(match kind {
            0 => Gate::x(t),
            1 => Gate::cnot(ctl, t),
            2 => Gate::v(ctl, t),
            _ => Gate::vdag(ctl, t),
        });
    }
    c
}

/// Sparse variant of `run` for wide circuits; zero amplitudes are dropped.
pub fn run_sparse(c: &Circuit, x: usize) -> HashMap<usize, C> {
    let mut s = HashMap::from([(x, (1.0, 0.0))]);
    for g in &c.gates {
        let mut next: HashMap<usize, C> = HashMap::new();
        for (&y, &a) in &s {
            if !fires(g, y) {
                let e = next.entry(y).or_default();
                *e = add(*e, a);
                continue;
            }
            let t = g.targets[0];
            let out: Vec<(usize, C)> = match g.kind {
                GateKind::Fredkin => {
                    let u = g.targets[1];
                    let z = if (y >> t & 1) != (y >> u & 1) { y ^ (1 << t) ^ (1 << u) } else { y };
                    vec![(z, a)]
                }
                GateKind::V | GateKind::Vdag => {
                    let (d, o) = if g.kind == GateKind::V {
                        ((0.5, 0.5), (0.5, -0.5))
                    } else {
                        ((0.5, -0.5), (0.5, 0.5))
                    };
                    vec![(y, mul(d, a)), (y ^ 1 << t, mul(o, a))]
                }
                _ => vec![(y ^ 1 << t, a)],
            };
            for (z, b) in out {
                let e = next.entry(z).or_default();
                *e = add(*e, b);
            }
        }
        next.retain(|_, a| a.0.abs() > EPS || a.1.abs() > EPS);
        s = next;
    }
    s
}
