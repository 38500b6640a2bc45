//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Exits zero unless `DRMOO_ACCEPTANCE_STRICT=1`, in which case any FAIL
//! makes the process exit with status 1.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use drmoo_cli::config::{parse_config, SolverSpec};
use drmoo_cli::data::{toy_frontiers, ToyOptions};
use drmoo_cli::presets::preset;
use drmoo_cli::run::{build_problem, lipschitz_for, run_experiment, solve, RunSummary, WINDOW, WINE_PATH_ENV};
use drmoo_core::check::{self, CheckResult};
use drmoo_core::solvers::RunSettings;
use drmoo_core::DualContext;

struct Line {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn from_check(id: u32, name: &'static str, r: Result<CheckResult, drmoo_core::Error>, secs: f64, limit: Option<f64>) -> Line {
    match r {
        Ok(c) => {
            let in_time = limit.is_none_or(|l| secs < l);
            let budget = limit.map_or(String::new(), |l| format!(" (limit {l} s)"));
            Line {
                id,
                name,
                passed: c.passed && in_time,
                detail: format!("observed={:.3e} tol={:.1e} {}; {:.3} s{budget}", c.observed, c.tolerance, c.detail, secs),
            }
        }
        Err(e) => Line {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn by_solver(runs: &[RunSummary]) -> BTreeMap<&'static str, &RunSummary> {
    runs.iter().map(|r| (r.solver, r)).collect()
}

fn linear_e1(dir: &Path) -> Result<Vec<RunSummary>, String> {
    let mut cfg = parse_config(preset("linear_e1").unwrap()).map_err(|e| e.to_string())?;
    for run in &mut cfg.runs {
        run.output_dir = dir.to_path_buf();
        run.plot = false;
    }
    run_experiment(&cfg).map(|r| r.runs).map_err(|e| e.to_string())
}

fn criterion7(runs: &[RunSummary], secs: f64) -> Line {
    let s = by_solver(runs);
    let mgda = s["mgda"].final_mean;
    let mut passed = runs.iter().all(|r| r.ok() == 5);
    let mut parts = Vec::new();
    for name in ["double_loop", "double_clip"] {
        let r = s[name];
        let ratio = r.final_mean / r.initial_mean;
        passed &= ratio <= 0.10 && r.final_mean <= mgda;
        parts.push(format!(
            "{name}: initial{WINDOW}={:.3} final{WINDOW}={:.3} ratio={:.3} (need <= 0.10)",
            r.initial_mean, r.final_mean, ratio
        ));
    }
    parts.push(format!("mgda final{WINDOW}={mgda:.3}"));
    Line {
        id: 7,
        name: "linear preset reproduction",
        passed,
        detail: format!("{}; 5 seeds, {secs:.1} s", parts.join("; ")),
    }
}

fn criterion8() -> Line {
    let Some(path) = std::env::var_os(WINE_PATH_ENV) else {
        return Line {
            id: 8,
            name: "wine preset reproduction",
            passed: false,
            detail: format!("wine CSV not available; set {WINE_PATH_ENV} to winequality-white.csv"),
        };
    };
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(preset("wine_e2").unwrap()).unwrap();
    cfg.runs.retain(|r| matches!(r.solver, SolverSpec::DoubleLoop(_) | SolverSpec::DoubleClip(_)));
    for run in &mut cfg.runs {
        run.output_dir = dir.path().to_path_buf();
        run.plot = false;
    }
    let (res, secs) = timed(|| run_experiment(&cfg));
    match res {
        Ok(report) => {
            let mut passed = secs < 60.0;
            let mut parts = Vec::new();
            for r in &report.runs {
                let finite = r
                    .outcomes
                    .iter()
                    .all(|o| o.trace.as_ref().is_some_and(|t| t.balanced_grads().iter().all(|g| g.is_finite())));
                let trending = r.outcomes.iter().all(|o| {
                    o.trace.as_ref().is_some_and(|t| t.final_mean(WINDOW) < t.initial_mean(WINDOW))
                });
                passed &= r.ok() == 3 && finite && trending;
                parts.push(format!(
                    "{}: finite={finite} trending={trending} initial{WINDOW}={:.4} final{WINDOW}={:.4}",
                    r.solver, r.initial_mean, r.final_mean
                ));
            }
            Line {
                id: 8,
                name: "wine preset reproduction",
                passed,
                detail: format!("{} ({}); 3 seeds, {secs:.1} s", parts.join("; "), Path::new(&path).display()),
            }
        }
        Err(e) => Line {
            id: 8,
            name: "wine preset reproduction",
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Every double-clip step on the linear preset and on the toy problem.
fn criterion9() -> Line {
    let mut worst_theta = f64::NEG_INFINITY;
    let mut worst_eta = f64::NEG_INFINITY;
    let mut worst_simplex: f64 = 0.0;
    let mut steps = 0usize;
    let text = "[run.linear]\nproblem = linear\nsolver = double_clip\nseeds = 0..5\n\
                [run.toy]\nproblem = toy\nsolver = double_clip\nseeds = 0..3\nT = 300\n";
    let cfg = parse_config(text).unwrap();
    for run in &cfg.runs {
        let SolverSpec::DoubleClip(c) = &run.solver else { unreachable!() };
        let problem = build_problem(run).unwrap();
        let ctx = DualContext::new(run.lambda, lipschitz_for(run, &problem), problem.num_objectives()).unwrap();
        for &seed in &run.seeds {
            let trace = match solve(&problem, &ctx, &run.solver.with_seed(seed), &RunSettings::default()) {
                Ok(t) => t,
                Err(e) => {
                    return Line {
                        id: 9,
                        name: "clipping invariants",
                        passed: false,
                        detail: format!("{} seed {seed}: {e}", run.name),
                    }
                }
            };
            for r in &trace.records {
                steps += 1;
                worst_theta = worst_theta.max(r.theta_step - c.gamma * c.c2);
                worst_eta = worst_eta.max(r.eta_step - c.gamma * c.f2);
                let sum: f64 = r.w.iter().sum();
                let neg = r.w.iter().fold(0.0f64, |a, &v| a.max(-v));
                worst_simplex = worst_simplex.max((sum - 1.0).abs()).max(neg);
            }
        }
    }
    Line {
        id: 9,
        name: "clipping invariants",
        passed: worst_theta <= 1e-12 && worst_eta <= 1e-12 && worst_simplex <= 1e-12,
        detail: format!(
            "{steps} steps; max(|dtheta| - gamma c2)={worst_theta:.3e} max(|deta| - gamma f2)={worst_eta:.3e} simplex err={worst_simplex:.1e}"
        ),
    }
}

fn criterion10(seed: u64) -> Line {
    let pareto = check::pareto_oracle(seed, 1000);
    let flat = toy_frontiers(&ToyOptions {
        std: 0.0,
        ..ToyOptions::default()
    });
    let noisy = toy_frontiers(&ToyOptions::default());
    match (pareto, flat, noisy) {
        (Ok(p), Ok(flat), Ok(noisy)) => {
            let same = flat.nominal.len() == flat.robust.len()
                && flat.nominal.iter().zip(&flat.robust).all(|(a, b)| {
                    a.theta == b.theta && a.values.iter().zip(&b.values).all(|(x, y)| (x - y).abs() <= 1e-9)
                });
            let differ = noisy.nominal != noisy.robust;
            Line {
                id: 10,
                name: "toy frontier",
                passed: p.passed && same && differ,
                detail: format!(
                    "pareto mismatches={} over 1000 sets; std=0 coincide={same}; std=0.5 differ={differ} (nominal {} pts, robust {} pts)",
                    p.observed,
                    noisy.nominal.len(),
                    noisy.robust.len()
                ),
            }
        }
        (p, f, n) => Line {
            id: 10,
            name: "toy frontier",
            passed: false,
            detail: format!(
                "error: {:?} {:?} {:?}",
                p.err().map(|e| e.to_string()),
                f.err().map(|e| e.to_string()),
                n.err().map(|e| e.to_string())
            ),
        },
    }
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (k, v) in files(&path) {
                out.insert(format!("{}/{k}", path.file_name().unwrap().to_string_lossy()), v);
            }
        } else {
            out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap());
        }
    }
    out
}

fn criterion11(a: &Path, b: &Path) -> Line {
    let (fa, fb) = (files(a), files(b));
    let traces = fa.keys().filter(|k| k.ends_with(".csv")).count();
    let differing: Vec<&String> = fa.iter().filter(|(k, v)| fb.get(*k) != Some(v)).map(|(k, _)| k).collect();
    Line {
        id: 11,
        name: "determinism",
        passed: !fa.is_empty() && fa.len() == fb.len() && differing.is_empty(),
        detail: format!(
            "{traces} CSV files compared byte for byte across two runs of linear_e1 (4 solvers x 5 seeds); {} differ",
            differing.len()
        ),
    }
}

fn main() {
    let seed = 0;
    let mut lines = Vec::new();

    let (r, s) = timed(|| check::simplex_oracle(seed, 1000));
    lines.push(from_check(1, "simplex oracle", r, s, Some(1.0)));
    let (r, s) = timed(|| check::dual_min_oracle(seed, 200));
    lines.push(from_check(2, "dual minimizer oracle", r, s, Some(1.0)));

    let (fd, s) = timed(|| check::fd_checks(seed, 100, false));
    lines.push(match fd {
        Ok(v) => {
            let passed = v.iter().all(|c| c.passed) && s < 5.0;
            let detail = v
                .iter()
                .map(|c| format!("{}={:.2e}", c.name, c.observed))
                .collect::<Vec<_>>()
                .join(" ");
            Line {
                id: 3,
                name: "gradient fidelity",
                passed,
                detail: format!("{detail} tol=1e-5, linear and logistic; {s:.3} s (limit 5 s)"),
            }
        }
        Err(e) => Line {
            id: 3,
            name: "gradient fidelity",
            passed: false,
            detail: format!("error: {e}"),
        },
    });

    let (r, s) = timed(|| check::semi_smoothness(seed, 500));
    lines.push(from_check(4, "semi-smoothness", r, s, Some(5.0)));
    let (r, s) = timed(|| check::stationarity_chain(seed, 500));
    lines.push(from_check(5, "stationarity chain", r, s, Some(5.0)));
    let (r, s) = timed(|| check::gradient_coupling(seed, 500));
    lines.push(from_check(6, "gradient coupling", r, s, None));

    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let (e1, secs) = timed(|| linear_e1(first.path()));
    match &e1 {
        Ok(runs) => lines.push(criterion7(runs, secs)),
        Err(e) => lines.push(Line {
            id: 7,
            name: "linear preset reproduction",
            passed: false,
            detail: format!("error: {e}"),
        }),
    }
    lines.push(criterion8());
    lines.push(criterion9());
    lines.push(criterion10(seed));
    let rerun = linear_e1(second.path());
    lines.push(match (&e1, rerun) {
        (Ok(_), Ok(_)) => criterion11(first.path(), second.path()),
        (_, r) => Line {
            id: 11,
            name: "determinism",
            passed: false,
            detail: format!("run failed: {:?}", r.err()),
        },
    });

    let mut failed = 0;
    for l in &lines {
        if !l.passed {
            failed += 1;
        }
        println!("{} {:>2} {:<26} {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 && std::env::var("DRMOO_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
