//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ncvopt::compact::{assign_levels, validate_levels};
use ncvopt::decompose::{neg_toffoli_to_ncv, toffoli_to_ncv, AncillaMode, Orientation};
use ncvopt::discover::{canonical_keys, enumerate_identities, SearchSpec};
use ncvopt::ir::{circuit_cost, line_load_bound, Circuit, Control, CostModel, Gate, Line};
use ncvopt::optimizer::reduce_cost;
use ncvopt::oracle::{circuit_unitary, equivalent, gate_unitary, is_identity, EquivMode, Verification};
use ncvopt::pipeline::{decompose, optimize, PipelineOptions};
use ncvopt::template::{builtin_set, default_set, derive_rule, parse_templates, Direction, TemplateSet};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `n`-qubit MCT (n-1 controls on lines 0..n-1, target n-1) with `n-3`
/// spare lines for the ladder.
fn mct(n: usize, negative: &[usize]) -> Circuit {
    let m = n - 1;
    let controls = (0..m)
        .map(|i| Control {
            line: i as Line,
            negative: negative.contains(&i),
        })
        .collect();
    Circuit::from_gates(2 * n - 3, vec![Gate::toffoli(controls, m as Line)])
}

fn compacting() -> PipelineOptions {
    let mut o = PipelineOptions::new(default_set());
    o.compact = true;
    o
}

/// Barenco block, n = 4..12. Returns (n, emitted, optimized) rows for the
/// ratio criterion.
fn barenco(rows: &mut Vec<(usize, usize, usize)>) -> Outcome {
    let opts = compacting();
    let mut worst = Duration::ZERO;
    for n in 4..=12 {
        let c = mct(n, &[]);
        let t0 = Instant::now();
        let (d, _) = decompose(&c, &opts).map_err(|e| format!("n={n}: decompose: {e}"))?;
        let r = optimize(&c, &opts).map_err(|e| format!("n={n}: optimize: {e}"))?;
        let dt = t0.elapsed();
        worst = worst.max(dt);
        rows.push((n, d.len(), r.circuit.len()));
        check(d.len() == 20 * n - 60, || {
            format!("n={n}: decompose emitted {} gates, want {}", d.len(), 20 * n - 60)
        })?;
        check(r.circuit.len() == 12 * n - 34, || {
            format!(
                "n={n}: optimized to {} gates, want {} (residual {})",
                r.circuit.len(),
                12 * n - 34,
                r.circuit.len() as isize - (12 * n - 34) as isize
            )
        })?;
        check(r.depth() == r.circuit.len(), || {
            format!("n={n}: depth {} != gate count {}", r.depth(), r.circuit.len())
        })?;
        check(dt < Duration::from_secs(10), || format!("n={n}: took {dt:?}"))?;
    }
    Ok(format!("n=4..12 exact 20n-60 -> 12n-34, slowest {worst:.2?}"))
}

fn peres_pair() -> Circuit {
    // a=0 b=1 c=2 d=3
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

fn full_adder() -> Outcome {
    let c = peres_pair();
    let t0 = Instant::now();
    let r = optimize(&c, &compacting()).map_err(|e| e.to_string())?;
    let dt = t0.elapsed();
    let lc = r.leveled.as_ref().unwrap();
    check(r.circuit.len() == 6, || format!("{} gates, want 6", r.circuit.len()))?;
    check(lc.depth() == 4, || format!("{} levels, want 4", lc.depth()))?;
    check(lc.depth() == line_load_bound(&lc.circuit), || "depth above line-load bound".into())?;
    check(r.verification == Verification::Exact, || format!("verification {}", r.verification))?;
    check(common::same_unitary(&c, &lc.circuit), || "reference simulator disagrees".into())?;
    check(dt < Duration::from_millis(100), || format!("took {dt:?}"))?;
    Ok(format!("8 -> 6 gates, 4 levels, exact, {dt:.2?}"))
}

fn toffoli_circuits() -> Outcome {
    let (a, b, c) = (0, 1, 2);
    for o in [Orientation::A, Orientation::AInverse] {
        let got = Circuit::from_gates(3, toffoli_to_ncv(a, b, c, o));
        let want = gate_unitary(&Gate::toffoli2(a, b, c), 3).unwrap();
        check(circuit_unitary(&got).unwrap() == want, || format!("{o:?} differs from Toffoli"))?;
        check(
            common::same_unitary(&got, &Circuit::from_gates(3, vec![Gate::toffoli2(a, b, c)])),
            || format!("{o:?}: reference simulator disagrees"),
        )?;
        // ¬b: b is the negative control q, a the positive control p
        let got = Circuit::from_gates(3, neg_toffoli_to_ncv(a, b, c, o));
        let g = Gate::toffoli(vec![Control::pos(a), Control::neg(b)], c);
        check(got.len() == 5, || format!("negative form has {} gates", got.len()))?;
        check(circuit_unitary(&got).unwrap() == gate_unitary(&g, 3).unwrap(), || {
            format!("{o:?}: negative-control circuit differs")
        })?;
        check(common::same_unitary(&got, &Circuit::from_gates(3, vec![g])), || {
            "negative form: reference simulator disagrees".into()
        })?;
    }
    Ok("both orientations, positive and negative control, exact".into())
}

/// All injective maps of `k` wires into `lines` lines.
fn wire_maps(k: usize, lines: usize) -> Vec<Vec<Line>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|m: Vec<Line>| {
                (0..lines as Line)
                    .filter(|l| !m.contains(l))
                    .map(|l| {
                        let mut m = m.clone();
                        m.push(l);
                        m
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

fn template_soundness() -> Outcome {
    let ts = default_set();
    let (mut instances, mut rules) = (0, 0);
    for t in ts.templates() {
        let m = t.size();
        for r in 0..m {
            let rot = t.rotate(r);
            for lines in t.wires..=4 {
                for wires in wire_maps(t.wires, lines) {
                    for v in [true, false] {
                        let c = Circuit::from_gates(lines, rot.instantiate(&wires, v).map_err(|e| e.to_string())?);
                        check(is_identity(&c).unwrap(), || {
                            format!("{} rotation {r} on {wires:?} (v0=V: {v}) is not the identity", t.name)
                        })?;
                        instances += 1;
                    }
                }
            }
            // the reference simulator on the identity embedding
            let c = Circuit::from_gates(t.wires, rot.instantiate(&(0..t.wires as Line).collect::<Vec<_>>(), true).unwrap());
            check(common::is_identity(&c), || format!("{} rotation {r}: reference disagrees", t.name))?;
        }
        let wires: Vec<Line> = (0..t.wires as Line).collect();
        for p in 1..=m {
            for j in 0..m {
                for dir in [Direction::Forward, Direction::Backward] {
                    let rule = derive_rule(t, p, j, dir).map_err(|e| e.to_string())?;
                    for v in [true, false] {
                        let (l, r) = rule.instantiate(&wires, v);
                        let (l, r) = (Circuit::from_gates(t.wires, l), Circuit::from_gates(t.wires, r));
                        check(equivalent(&l, &r, EquivMode::Dense).unwrap(), || {
                            format!("{} rule {dir} j={j} p={p} has unequal sides", t.name)
                        })?;
                        rules += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{} templates, {instances} instances, {rules} rules", ts.len()))
}

fn preservation() -> Outcome {
    let ts = default_set();
    let model = CostModel::unit();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut reduced = 0;
    for i in 0..1000 {
        let c = common::random_ncv(&mut rng, 4, 30);
        let cost0 = circuit_cost(&c, &model);
        let r = reduce_cost(&c, &ts, &model).map_err(|e| format!("#{i}: {e}"))?;
        let lc = assign_levels(&r.circuit, &ts).map_err(|e| format!("#{i}: {e}"))?;
        check(circuit_cost(&r.circuit, &model) <= cost0, || format!("#{i}: cost increased"))?;
        let g = c.len() as i64;
        let bound = (cost0 + 1) * Ratio::from_integer((g + 1) * (g + 1));
        check(Ratio::from_integer(r.stats.iterations as i64) <= bound, || {
            format!("#{i}: {} iterations exceed bound {bound}", r.stats.iterations)
        })?;
        check(lc.depth() <= lc.circuit.len(), || format!("#{i}: more levels than gates"))?;
        check(validate_levels(&lc), || format!("#{i}: invalid leveling"))?;
        check(equivalent(&c, &r.circuit, EquivMode::Dense).unwrap(), || format!("#{i}: reduce_cost changed the unitary"))?;
        check(equivalent(&c, &lc.circuit, EquivMode::Dense).unwrap(), || format!("#{i}: assign_levels changed the unitary"))?;
        check(common::same_unitary(&c, &lc.circuit), || format!("#{i}: reference simulator disagrees"))?;
        reduced += usize::from(r.circuit.len() < c.len());
    }
    Ok(format!("1000 circuits preserved, {reduced} shortened"))
}

fn single_ancilla() -> Outcome {
    let mut o = compacting();
    o.expand.ancilla = AncillaMode::Single;
    let mut rows = Vec::new();
    for n in 6..=10 {
        let m = n - 1;
        let c = Circuit::from_gates(n + 1, vec![Gate::toffoli((0..m as Line).map(Control::pos).collect(), m as Line)]);
        let r = optimize(&c, &o).map_err(|e| format!("n={n}: {e}"))?;
        let bound = 24 * n - 88;
        check(r.circuit.len() <= bound && r.depth() <= bound, || {
            format!("n={n}: {} gates, depth {}, bound {bound}", r.circuit.len(), r.depth())
        })?;
        rows.push(format!("{}/{}", r.circuit.len(), r.depth()));
    }
    Ok(format!("n=6..10 gates/depth {} within 24n-88", rows.join(" ")))
}

/// Truth-table check: every input for small circuits, 64 seeded inputs above.
fn mct_truth(input: &Circuit, out: &Circuit) -> bool {
    let g = &input.gates[0];
    let lines = input.line_count;
    let xs: Vec<usize> = if lines <= 9 {
        (0..1 << lines).collect()
    } else {
        ncvopt::oracle::sample_basis_states(lines, 64).into_iter().map(|x| x as usize).collect()
    };
    xs.into_iter().all(|x| {
        let s = common::run_sparse(out, x);
        let y = common::mct_out(&g.controls, g.targets[0], x);
        s.len() == 1 && s.get(&y).is_some_and(|a| (a.0 - 1.0).abs() < 1e-9 && a.1.abs() < 1e-9)
    })
}

fn negative_controls() -> Outcome {
    let opts = compacting();
    let mut cases = 0;
    for n in 4..=12 {
        let m = n - 1;
        let all: Vec<usize> = (0..m).collect();
        let some: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![m - 1], (0..m - 1).collect(), (1..m).collect()];
        for neg in some.iter().chain(std::iter::once(&all)) {
            let c = mct(n, neg);
            let r = optimize(&c, &opts).map_err(|e| format!("n={n} neg={neg:?}: {e}"))?;
            let extra = if neg.len() == m { 2 } else { 0 };
            let want = 12 * n - 34;
            check(r.circuit.len() == want + extra, || {
                format!("n={n} neg={neg:?}: {} gates, want {}", r.circuit.len(), want + extra)
            })?;
            check(r.depth() == want, || format!("n={n} neg={neg:?}: depth {}, want {want}", r.depth()))?;
            let out = &r.leveled.as_ref().unwrap().circuit;
            check(mct_truth(&c, out), || format!("n={n} neg={neg:?}: truth table mismatch"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases: mixed 12n-34, all-negative +2 gates at depth 12n-34"))
}

fn inverse_only() -> TemplateSet {
    TemplateSet::new(
        builtin_set()
            .templates()
            .iter()
            .filter(|t| t.name.starts_with("inv_"))
            .cloned()
            .collect(),
    )
}

fn discovery() -> Outcome {
    let b = builtin_set();
    let key = |name: &str| canonical_keys(&TemplateSet::new(vec![b.get(name).unwrap().clone()])).into_iter().next().unwrap();

    let d = enumerate_identities(&SearchSpec::new(3, 2, inverse_only()));
    let found = canonical_keys(&TemplateSet::new(d.templates.clone()));
    check(found.contains(&key("vvc")), || "vvc not found at m=3, k=2".into())?;

    let d = enumerate_identities(&SearchSpec::new(5, 3, inverse_only()));
    let found = canonical_keys(&TemplateSet::new(d.templates.clone()));
    for name in ["vvc", "xc", "ccc"] {
        check(found.contains(&key(name)), || format!("{name} not found at m<=5, k<=3"))?;
    }
    let again = enumerate_identities(&SearchSpec::new(5, 3, inverse_only().union(&TemplateSet::new(d.templates.clone()))));
    check(again.templates.is_empty(), || format!("second run found {} more", again.templates.len()))?;

    let t0 = Instant::now();
    let full = enumerate_identities(&SearchSpec::new(6, 3, builtin_set()));
    let dt = t0.elapsed();
    check(full.manifest.exhaustive, || "m<=6 search not exhaustive".into())?;
    check(dt < Duration::from_secs(300), || format!("m<=6 search took {dt:?}"))?;
    let shipped = parse_templates(include_str!("../data/templates.txt")).unwrap();
    check(
        canonical_keys(&TemplateSet::new(full.templates.clone())) == canonical_keys(&TemplateSet::new(shipped)),
        || "m<=6 result differs from the shipped template file".into(),
    )?;
    Ok(format!(
        "vvc at m=3; vvc, xc, ccc at m<=5 ({} total), rerun empty; m<=6 k<=3 in {dt:.2?}",
        d.templates.len()
    ))
}

fn ratio(rows: &[(usize, usize, usize)]) -> Outcome {
    check(rows.len() == 9, || "criterion 1 rows missing".into())?;
    let rs: Vec<Ratio<i64>> = rows
        .iter()
        .map(|&(_, e, o)| Ratio::new(e as i64 - o as i64, e as i64))
        .collect();
    let limit = Ratio::new(2, 5);
    for w in rs.windows(2) {
        check(w[0] < w[1], || "ratio not increasing".into())?;
    }
    check(rs.iter().all(|r| *r < limit), || "ratio exceeds 0.40".into())?;
    let last = *rs.last().unwrap();
    check(last == Ratio::new(70, 180), || format!("n=12 ratio {last}, want 70/180"))?;
    // closed form (8n-26)/(20n-60) tends to 2/5
    let gap = |n: i64| limit - Ratio::new(8 * n - 26, 20 * n - 60);
    check(gap(1000) < gap(12) && gap(1000) < Ratio::new(1, 1000), || "closed form does not approach 0.40".into())?;
    Ok(format!("n=12 gives {last} = {:.3}, increasing toward 0.40", *last.numer() as f64 / *last.denom() as f64))
}

fn main() -> ExitCode {
    let mut rows = Vec::new();
    let mut failed = 0;
    let mut report = |id: usize, name: &str, r: Outcome, dt: Duration| {
        match &r {
            Ok(msg) => println!("criterion {id} PASS {name}: {msg} [{dt:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id} FAIL {name}: {msg} [{dt:.2?}]");
            }
        }
    };
    macro_rules! run {
        ($id:expr, $name:expr, $e:expr) => {{
            let t0 = Instant::now();
            let r = $e;
            report($id, $name, r, t0.elapsed());
        }};
    }
    run!(1, "barenco block", barenco(&mut rows));
    run!(2, "full adder", full_adder());
    run!(3, "toffoli decompositions", toffoli_circuits());
    run!(4, "template soundness", template_soundness());
    run!(5, "preservation", preservation());
    run!(6, "single ancilla", single_ancilla());
    run!(7, "negative controls", negative_controls());
    run!(8, "discovery", discovery());
    run!(9, "asymptotic ratio", ratio(&rows));
    if failed == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
