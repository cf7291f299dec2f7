use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ncvopt::decompose::{AncillaMode, OrientationPolicy};
use ncvopt::discover::{enumerate_identities, SearchSpec};
use ncvopt::format::{parse_circuit, parse_cost_model, write_circuit, write_leveled};
use ncvopt::ir::{circuit_cost, naive_depth, Circuit, Control, CostModel, Gate, GateKind, Line};
use ncvopt::oracle::verify_auto;
use ncvopt::pipeline::{self, histogram, PipelineError, PipelineOptions, ReportBuilder};
use ncvopt::template::{builtin_set, default_set, load_templates, TemplateSet};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "ncvopt", version, about = "Template-based NCV circuit optimizer")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lower, simplify and reduce a circuit; optionally compact into levels.
    Optimize {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        lower: Lowering,
        /// Assign parallel levels and write `|` separators.
        #[arg(long)]
        compact: bool,
        /// Skip constant-input / garbage-output simplification.
        #[arg(long)]
        no_boundary: bool,
    },
    /// Lower Toffoli and Fredkin gates to NCV without optimizing.
    Decompose {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        lower: Lowering,
    },
    /// Search for new templates.
    Discover {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        wires: usize,
        #[arg(long)]
        out: PathBuf,
        /// Templates assumed known before the search.
        #[arg(long, value_enum, default_value_t = Existing::Builtin)]
        existing: Existing,
        /// Template file to use with `--existing file`.
        #[arg(long)]
        existing_file: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        min_size: usize,
        /// Node budget (half sequences plus joined identities).
        #[arg(long)]
        budget: Option<usize>,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<u64>,
    },
    /// Check two circuits for equivalence; exit 0 iff equal.
    Verify { a: PathBuf, b: PathBuf },
    /// Print gate count, depth, cost and histogram.
    Stats {
        input: PathBuf,
        #[arg(long)]
        cost_model: Option<PathBuf>,
    },
    /// Write a benchmark circuit.
    Gen {
        #[command(subcommand)]
        what: GenKind,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// n-qubit multi-control Toffoli (n-1 controls) plus spare lines.
    Mct {
        #[arg(long)]
        n: usize,
        /// Spare lines after the target (default n-3).
        #[arg(long)]
        spare: Option<usize>,
        /// Comma-separated indices of negative controls (0-based), or `all`.
        #[arg(long)]
        neg: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Existing {
    Builtin,
    Default,
    Inverse,
    None,
    File,
}

#[derive(Args)]
struct Common {
    /// Output circuit file.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// JSON report file (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Template file replacing the shipped default set.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    cost_model: Option<PathBuf>,
}

#[derive(Args)]
struct Lowering {
    #[arg(long, default_value = "dirty-many", value_parser = parse_ancilla)]
    ancilla: AncillaMode,
    #[arg(long, default_value = "best", value_parser = parse_orientation)]
    orientation: OrientationPolicy,
    /// First-half size for single-ancilla splits.
    #[arg(long)]
    split: Option<usize>,
}

fn parse_ancilla(s: &str) -> Result<AncillaMode, String> {
    s.parse()
}

fn parse_orientation(s: &str) -> Result<OrientationPolicy, String> {
    s.parse()
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl ToString) -> Self {
        Failure {
            code: EXIT_INPUT,
            msg: msg.to_string(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match e {
            PipelineError::Verification(_) => EXIT_VERIFY,
            _ => EXIT_RESOURCE,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn read(p: &Path) -> Result<String, Failure> {
    fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
}

fn write(p: &Path, s: &str) -> Result<(), Failure> {
    fs::write(p, s).map_err(|e| Failure {
        code: EXIT_RESOURCE,
        msg: format!("{}: {e}", p.display()),
    })
}

fn load_circuit(p: &Path) -> Result<Circuit, Failure> {
    let c = parse_circuit(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
    c.validate().map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
    Ok(c)
}

fn load_model(p: Option<&Path>) -> Result<CostModel, Failure> {
    match p {
        Some(p) => parse_cost_model(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => Ok(CostModel::unit()),
    }
}

fn load_set(p: Option<&Path>) -> Result<TemplateSet, Failure> {
    match p {
        Some(p) => load_templates(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => Ok(default_set()),
    }
}

fn options(common: &Common, lower: &Lowering) -> Result<PipelineOptions, Failure> {
    let mut o = PipelineOptions::new(load_set(common.templates.as_deref())?);
    o.model = load_model(common.cost_model.as_deref())?;
    o.orientation = lower.orientation;
    o.expand.ancilla = lower.ancilla;
    o.expand.split = lower.split;
    Ok(o)
}

fn emit_report<T: serde::Serialize>(r: &T, path: Option<&Path>) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(r).expect("report serializes");
    match path {
        Some(p) => write(p, &(json + "\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn flag_lowering(rb: &mut ReportBuilder, lower: &Lowering) {
    rb.flag(
        "ancilla",
        match lower.ancilla {
            AncillaMode::DirtyMany => "dirty-many",
            AncillaMode::Single => "single",
        },
    )
        .flag("orientation", lower.orientation)
        .flag("split", lower.split.map_or("auto".into(), |s| s.to_string()));
}

/// Expected NCV count for a circuit holding one multi-control Toffoli
/// lowered with the dirty-ancilla ladder.
fn ladder_formula(c: &Circuit, mode: AncillaMode) -> Option<usize> {
    if mode != AncillaMode::DirtyMany || c.len() != 1 {
        return None;
    }
    let g = &c.gates[0];
    let m = g.controls.len();
    if g.kind != GateKind::Toffoli || m < 3 {
        return None;
    }
    let n = m + 1;
    let wrap = if g.controls.iter().all(|c| c.negative) { 2 } else { 0 };
    Some(20 * n - 60 + wrap)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Optimize {
            input,
            common,
            lower,
            compact,
            no_boundary,
        } => {
            let mut rb = ReportBuilder::start("optimize");
            flag_lowering(&mut rb, &lower);
            rb.flag("compact", compact).flag("boundary", !no_boundary);
            let c = load_circuit(&input)?;
            let mut o = options(&common, &lower)?;
            o.compact = compact;
            o.boundary = !no_boundary;
            let out = pipeline::optimize(&c, &o)?;
            let text = match &out.leveled {
                Some(lc) => write_leveled(lc),
                None => write_circuit(&out.circuit),
            };
            if let Some(p) = &common.out {
                write(p, &text)?;
            }
            let emitted = out.leveled.as_ref().map_or(&out.circuit, |l| &l.circuit);
            let r = rb.finish(
                &c,
                emitted,
                out.depth(),
                &o.model,
                Some(&out.stats),
                out.strategy,
                out.verification,
            );
            emit_report(&r, common.report.as_deref())
        }
        Cmd::Decompose { input, common, lower } => {
            let mut rb = ReportBuilder::start("decompose");
            flag_lowering(&mut rb, &lower);
            let c = load_circuit(&input)?;
            let o = options(&common, &lower)?;
            let (out, v) = pipeline::decompose(&c, &o)?;
            if let Some(p) = &common.out {
                write(p, &write_circuit(&out))?;
            }
            let strategy = match lower.orientation {
                OrientationPolicy::Best => OrientationPolicy::Alternate,
                p => p,
            };
            let mut r = rb.finish(&c, &out, naive_depth(&out), &o.model, None, Some(strategy), v);
            r.expected_gates = ladder_formula(&c, lower.ancilla);
            emit_report(&r, common.report.as_deref())?;
            match r.expected_gates {
                Some(e) if e != out.len() => Err(Failure {
                    code: EXIT_VERIFY,
                    msg: format!("expected {e} gates, emitted {}", out.len()),
                }),
                _ => Ok(()),
            }
        }
        Cmd::Discover {
            size,
            wires,
            out,
            existing,
            existing_file,
            min_size,
            budget,
            time_limit,
        } => {
            if !(1..=4).contains(&wires) || size > 7 {
                return Err(Failure::input("discovery supports wires 1..=4 and size <= 7"));
            }
            let base = match existing {
                Existing::Builtin => builtin_set(),
                Existing::Default => default_set(),
                Existing::None => TemplateSet::default(),
                Existing::Inverse => TemplateSet::new(
                    builtin_set()
                        .templates()
                        .iter()
                        .filter(|t| t.name.starts_with("inv_"))
                        .cloned()
                        .collect(),
                ),
                Existing::File => load_set(Some(
                    existing_file
                        .as_deref()
                        .ok_or_else(|| Failure::input("--existing file needs --existing-file"))?,
                ))?,
            };
            let mut spec = SearchSpec::new(size, wires, base);
            spec.min_size = min_size;
            spec.node_budget = budget;
            spec.time_budget = time_limit.map(Duration::from_secs);
            let d = enumerate_identities(&spec);
            write(&out, &d.to_text())?;
            eprint!("{}", d.manifest);
            eprintln!("{} new templates written to {}", d.templates.len(), out.display());
            if d.manifest.exhaustive {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_RESOURCE,
                    msg: "budget exhausted; partial results written".into(),
                })
            }
        }
        Cmd::Verify { a, b } => {
            let (ca, cb) = (load_circuit(&a)?, load_circuit(&b)?);
            let (ok, how) = if ca.has_boundary_attrs() {
                ncvopt::oracle::equivalent_on_outputs(&ca, &cb)
            } else {
                verify_auto(&ca, &cb)
            }
            .map_err(|e| Failure {
                code: EXIT_RESOURCE,
                msg: e.to_string(),
            })?;
            println!("{} ({how})", if ok { "equivalent" } else { "different" });
            if ok {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_VERIFY,
                    msg: "circuits differ".into(),
                })
            }
        }
        Cmd::Stats { input, cost_model } => {
            let c = load_circuit(&input)?;
            let m = load_model(cost_model.as_deref())?;
            let stats = serde_json::json!({
                "lines": c.line_count,
                "gates": c.len(),
                "depth": naive_depth(&c),
                "cost": circuit_cost(&c, &m).to_string(),
                "histogram": histogram(&c),
            });
            println!("{}", serde_json::to_string_pretty(&stats).unwrap());
            Ok(())
        }
        Cmd::Gen {
            what: GenKind::Mct { n, spare, neg, out },
        } => {
            if n < 3 {
                return Err(Failure::input("n must be at least 3"));
            }
            let m = n - 1;
            let spare = spare.unwrap_or(n.saturating_sub(3));
            let negs: Vec<usize> = match neg.as_deref() {
                None => vec![],
                Some("all") => (0..m).collect(),
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|e| Failure::input(format!("--neg: {e}"))))
                    .collect::<Result<_, _>>()?,
            };
            let controls = (0..m as Line)
                .map(|i| Control {
                    line: i,
                    negative: negs.contains(&i),
                })
                .collect();
            let c = Circuit::from_gates(n + spare, vec![Gate::toffoli(controls, m)]);
            let text = write_circuit(&c);
            match out {
                Some(p) => write(&p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ncvopt: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
