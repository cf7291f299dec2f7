//! End-to-end passes with verification, shared by the CLI and tests.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::compact::{assign_levels, LeveledCircuit};
use crate::decompose::{expand_all, DecomposeError, ExpandOptions, OrientationPolicy};
use crate::ir::{circuit_cost, naive_depth, Circuit, Cost, CostModel, GateKind};
use crate::optimizer::{boundary_simplify, reduce_cost, OptError, OptStats};
use crate::oracle::{equivalent_on_outputs, verify_auto, OracleError, Verification, SAMPLE_SEED};
use crate::template::TemplateSet;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("verification failed ({0}): output differs from input")]
    Verification(Verification),
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub expand: ExpandOptions,
    pub orientation: OrientationPolicy,
    pub boundary: bool,
    pub compact: bool,
    pub model: CostModel,
    pub templates: TemplateSet,
}

impl PipelineOptions {
    pub fn new(templates: TemplateSet) -> Self {
        PipelineOptions {
            expand: ExpandOptions::default(),
            orientation: OrientationPolicy::Best,
            boundary: true,
            compact: false,
            model: CostModel::unit(),
            templates,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub circuit: Circuit,
    pub leveled: Option<LeveledCircuit>,
    pub strategy: Option<OrientationPolicy>,
    pub expanded_gates: usize,
    pub stats: OptStats,
    pub verification: Verification,
}

impl Outcome {
    pub fn depth(&self) -> usize {
        match &self.leveled {
            Some(lc) => lc.depth(),
            None => naive_depth(&self.circuit),
        }
    }
}

/// Checks `out` against `input`, honouring constant inputs and garbage
/// outputs when the input declares any.
pub fn verify(input: &Circuit, out: &Circuit) -> Result<Verification, PipelineError> {
    let (ok, how) = if input.has_boundary_attrs() {
        equivalent_on_outputs(input, out)?
    } else {
        verify_auto(input, out)?
    };
    if ok {
        Ok(how)
    } else {
        Err(PipelineError::Verification(how))
    }
}

fn has_toffoli(c: &Circuit) -> bool {
    c.gates
        .iter()
        .any(|g| matches!(g.kind, GateKind::Toffoli | GateKind::Fredkin))
}

fn optimize_with(
    c: &Circuit,
    policy: OrientationPolicy,
    opts: &PipelineOptions,
) -> Result<(Circuit, usize, OptStats), PipelineError> {
    let expanded = expand_all(c, &opts.expand, policy, &opts.templates, &opts.model)?;
    let n = expanded.len();
    let simplified = if opts.boundary {
        boundary_simplify(&expanded)
    } else {
        expanded
    };
    let r = reduce_cost(&simplified, &opts.templates, &opts.model)?;
    Ok((r.circuit, n, r.stats))
}

struct Candidate {
    /// Cost, then compacted depth when compacting.
    rank: (Cost, usize),
    policy: OrientationPolicy,
    circuit: Circuit,
    leveled: Option<LeveledCircuit>,
    expanded_gates: usize,
    stats: OptStats,
}

/// Lowering, boundary simplification, cost reduction, optional compaction,
/// then verification against the input.
pub fn optimize(c: &Circuit, opts: &PipelineOptions) -> Result<Outcome, PipelineError> {
    let policies: Vec<OrientationPolicy> = match opts.orientation {
        OrientationPolicy::Best if has_toffoli(c) => OrientationPolicy::CONCRETE.to_vec(),
        OrientationPolicy::Best => vec![OrientationPolicy::Alternate],
        p => vec![p],
    };
    let mut best: Option<Candidate> = None;
    for p in policies {
        let (circuit, expanded_gates, stats) = optimize_with(c, p, opts)?;
        let cost = circuit_cost(&circuit, &opts.model);
        let leveled = if opts.compact {
            Some(assign_levels(&circuit, &opts.templates)?)
        } else {
            None
        };
        let cand = Candidate {
            rank: (cost, leveled.as_ref().map_or(0, |l| l.depth())),
            policy: p,
            circuit,
            leveled,
            expanded_gates,
            stats,
        };
        if best.as_ref().is_none_or(|b| cand.rank < b.rank) {
            best = Some(cand);
        }
    }
    let Candidate {
        policy: strategy,
        circuit,
        leveled,
        expanded_gates,
        stats,
        ..
    } = best.unwrap();
    let final_circuit = leveled.as_ref().map_or(&circuit, |l| &l.circuit);
    let verification = verify(c, final_circuit)?;
    Ok(Outcome {
        circuit,
        leveled,
        strategy: has_toffoli(c).then_some(strategy),
        expanded_gates,
        stats,
        verification,
    })
}

/// Lowering only, verified.
pub fn decompose(c: &Circuit, opts: &PipelineOptions) -> Result<(Circuit, Verification), PipelineError> {
    let policy = match opts.orientation {
        OrientationPolicy::Best => OrientationPolicy::Alternate,
        p => p,
    };
    let out = expand_all(c, &opts.expand, policy, &opts.templates, &opts.model)?;
    let v = verify(c, &out)?;
    Ok((out, v))
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub input_gates: usize,
    pub output_gates: usize,
    pub input_cost: String,
    pub output_cost: String,
    pub input_depth: usize,
    pub output_depth: usize,
    pub histogram: BTreeMap<String, usize>,
    pub templates_applied: BTreeMap<String, usize>,
    pub strategy: Option<String>,
    pub runtime_ms: u64,
    pub verification: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_gates: Option<usize>,
    pub flags: BTreeMap<String, String>,
    pub seed: u64,
}

pub fn histogram(c: &Circuit) -> BTreeMap<String, usize> {
    let h = c.histogram();
    GateKind::ALL
        .iter()
        .zip(h)
        .filter(|(_, n)| *n > 0)
        .map(|(k, n)| (k.mnemonic().to_string(), n))
        .collect()
}

pub struct ReportBuilder {
    started: Instant,
    command: String,
    flags: BTreeMap<String, String>,
}

impl ReportBuilder {
    pub fn start(command: &str) -> Self {
        ReportBuilder {
            started: Instant::now(),
            command: command.to_string(),
            flags: BTreeMap::new(),
        }
    }

    pub fn flag(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.flags.insert(k.to_string(), v.to_string());
        self
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        &self,
        input: &Circuit,
        output: &Circuit,
        output_depth: usize,
        model: &CostModel,
        stats: Option<&OptStats>,
        strategy: Option<OrientationPolicy>,
        verification: Verification,
    ) -> Report {
        let cost = |c: &Circuit, depth: usize| {
            if model.depth_mode {
                depth.to_string()
            } else {
                circuit_cost(c, model).to_string()
            }
        };
        let in_depth = naive_depth(input);
        Report {
            command: self.command.clone(),
            input_gates: input.len(),
            output_gates: output.len(),
            input_cost: cost(input, in_depth),
            output_cost: cost(output, output_depth),
            input_depth: in_depth,
            output_depth,
            histogram: histogram(output),
            templates_applied: stats.map(|s| s.per_template.clone()).unwrap_or_default(),
            strategy: strategy.map(|s| s.to_string()),
            runtime_ms: self.started.elapsed().as_millis() as u64,
            verification: verification.to_string(),
            expected_gates: None,
            flags: self.flags.clone(),
            seed: SAMPLE_SEED,
        }
    }
}
