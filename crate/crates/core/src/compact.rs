//! Greedy level compaction.
//!
//! Levels are filled left to right. A pending gate joins the open level when
//! it is line-disjoint from the level and commutes with every pending gate
//! before it. When only the commutation test fails, an equal-length
//! substitution from an even template may reshape the pending gates; it is
//! kept only if it lets some gate into the level.

use crate::ir::{Circuit, Gate, Line};
use crate::optimizer::{apply_match, check_ncv, match_at, OptError};
use crate::oracle::{equivalent, EquivMode, DEFAULT_SAMPLES};
use crate::template::TemplateSet;
use crate::ir::CostModel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeveledCircuit {
    /// Input of the compaction pass.
    pub original: Circuit,
    /// Gates in level order.
    pub circuit: Circuit,
    /// Level (1-based) of each gate of `circuit`.
    pub level_of: Vec<usize>,
}

impl LeveledCircuit {
    pub fn depth(&self) -> usize {
        self.level_of.last().copied().unwrap_or(0)
    }

    pub fn levels(&self) -> Vec<&[Gate]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.level_of.len() {
            if i == self.level_of.len() || self.level_of[i] != self.level_of[start] {
                out.push(&self.circuit.gates[start..i]);
                start = i;
            }
        }
        out
    }

    /// Builds a leveling from explicit level lists (test fixtures, parsed files).
    pub fn from_levels(original: Circuit, levels: Vec<Vec<Gate>>) -> Self {
        let mut gates = Vec::new();
        let mut level_of = Vec::new();
        for (i, l) in levels.into_iter().enumerate() {
            level_of.extend(std::iter::repeat_n(i + 1, l.len()));
            gates.extend(l);
        }
        LeveledCircuit {
            circuit: original.with_gates(gates),
            original,
            level_of,
        }
    }
}

fn line_mask(g: &Gate) -> u128 {
    g.lines().fold(0, |a, l: Line| a | (1u128 << l))
}

fn cmask(g: &Gate) -> u128 {
    g.control_lines().fold(0, |a, l| a | (1u128 << l))
}

fn tmask(g: &Gate) -> u128 {
    g.targets.iter().fold(0, |a, &l| a | (1u128 << l))
}

pub fn assign_levels(c: &Circuit, ts: &TemplateSet) -> Result<LeveledCircuit, OptError> {
    check_ncv(c)?;
    let even = ts.even();
    let model = CostModel::unit();
    let mut rest = c.with_gates(c.gates.clone());
    let mut levels: Vec<Vec<Gate>> = Vec::new();
    while !rest.gates.is_empty() {
        let first = rest.gates.remove(0);
        let mut used = line_mask(&first);
        let mut cur = vec![first];
        let (mut cb, mut tb) = (0u128, 0u128);
        let mut idx = 0;
        while idx < rest.gates.len() {
            let g = &rest.gates[idx];
            let disjoint = line_mask(g) & used == 0;
            let commutes = tmask(g) & cb == 0 && cmask(g) & tb == 0;
            if disjoint && commutes {
                used |= line_mask(g);
                cur.push(rest.gates.remove(idx));
                continue;
            }
            if disjoint {
                if let Some(ins) = reshape(&mut rest, idx, used, &even, &model) {
                    // restart just before the replacement gates
                    idx = ins;
                    (cb, tb) = rest.gates[..idx]
                        .iter()
                        .fold((0, 0), |(a, b), h| (a | cmask(h), b | tmask(h)));
                    continue;
                }
            }
            let g = &rest.gates[idx];
            cb |= cmask(g);
            tb |= tmask(g);
            idx += 1;
        }
        levels.push(cur);
    }
    Ok(LeveledCircuit::from_levels(c.clone(), levels))
}

/// Tries one equal-length substitution with `rest[idx]` as start gate.
/// Returns the insertion point of the replacement when it was kept.
fn reshape(
    rest: &mut Circuit,
    idx: usize,
    used: u128,
    even: &TemplateSet,
    model: &CostModel,
) -> Option<usize> {
    for t in even.templates() {
        let Some(mt) = match_at(rest, idx, t, model) else {
            continue;
        };
        if !mt.is_retaining() {
            continue;
        }
        let next = apply_match(rest, &mt).ok()?;
        let ins = idx + 1 - mt.p;
        let admits = (ins..ins + mt.replacement.len()).any(|i| {
            let g = &next.gates[i];
            let (cb, tb) = next.gates[..i]
                .iter()
                .fold((0u128, 0u128), |(a, b), h| (a | cmask(h), b | tmask(h)));
            line_mask(g) & used == 0 && tmask(g) & cb == 0 && cmask(g) & tb == 0
        });
        if admits {
            *rest = next;
            return Some(ins);
        }
    }
    None
}

/// Checks that gates within a level are line-disjoint, levels are numbered
/// 1, 2, … without gaps, and the leveled order realizes the original
/// unitary (dense up to 10 lines, sampled above).
pub fn validate_levels(lc: &LeveledCircuit) -> bool {
    if lc.level_of.len() != lc.circuit.gates.len() {
        return false;
    }
    let mut expect = 1;
    for (i, &l) in lc.level_of.iter().enumerate() {
        if i == 0 {
            if l != 1 {
                return false;
            }
        } else if l == expect + 1 {
            expect = l;
        } else if l != expect {
            return false;
        }
    }
    for level in lc.levels() {
        let mut used: Vec<Line> = level.iter().flat_map(|g| g.lines()).collect();
        used.sort_unstable();
        if used.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    let mode = if lc.circuit.line_count <= 10 {
        EquivMode::Dense
    } else {
        EquivMode::Sampled(DEFAULT_SAMPLES)
    };
    equivalent(&lc.original, &lc.circuit, mode).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::naive_depth;
    use crate::template::builtin_set;

    #[test]
    fn parallel_nots() {
        let c = Circuit::from_gates(3, vec![Gate::x(0), Gate::x(1), Gate::x(2)]);
        let lc = assign_levels(&c, &builtin_set()).unwrap();
        assert_eq!(lc.depth(), 1);
        assert!(validate_levels(&lc));
    }

    #[test]
    fn serial_chain() {
        let c = Circuit::from_gates(
            4,
            vec![Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::cnot(2, 3), Gate::cnot(3, 0)],
        );
        let lc = assign_levels(&c, &builtin_set()).unwrap();
        assert_eq!(lc.depth(), 4);
        assert!(validate_levels(&lc));
    }

    #[test]
    fn full_adder_four_levels() {
        // a=0 b=1 c=2 d=3
        let c = Circuit::from_gates(
            4,
            vec![
                Gate::v(1, 3),
                Gate::cnot(0, 1),
                Gate::v(0, 3),
                Gate::v(2, 3),
                Gate::cnot(1, 2),
                Gate::vdag(2, 3),
            ],
        );
        let lc = assign_levels(&c, &builtin_set()).unwrap();
        assert_eq!(lc.depth(), 4);
        assert!(validate_levels(&lc));
        assert!(lc.depth() <= naive_depth(&c));
    }

    #[test]
    fn rejects_overlap_and_bad_order() {
        let orig = Circuit::from_gates(3, vec![Gate::cnot(0, 1), Gate::cnot(1, 2)]);
        let overlap = LeveledCircuit::from_levels(orig.clone(), vec![orig.gates.clone()]);
        assert!(!validate_levels(&overlap));
        let swapped = LeveledCircuit::from_levels(
            orig.clone(),
            vec![vec![Gate::cnot(1, 2)], vec![Gate::cnot(0, 1)]],
        );
        assert!(!validate_levels(&swapped));
        let ok = LeveledCircuit::from_levels(
            orig.clone(),
            vec![vec![Gate::cnot(0, 1)], vec![Gate::cnot(1, 2)]],
        );
        assert!(validate_levels(&ok));
    }

    #[test]
    fn empty_circuit() {
        let lc = assign_levels(&Circuit::new(2), &builtin_set()).unwrap();
        assert_eq!(lc.depth(), 0);
        assert!(validate_levels(&lc));
    }
}
