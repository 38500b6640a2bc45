//! Run dispatch: one job per (run block, seed), traces and a summary on disk.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use drmoo_core::problems::{self, LinearSpec, ToySpec, WineThresholds};
use drmoo_core::solvers::{self, RunSettings, RunTrace};
use drmoo_core::{DualContext, MultiTaskProblem};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, LipschitzSetting, ProblemKind, RunConfig, SolverSpec};
use crate::error::{Error, Result};
use crate::plot::{self, Series};
use crate::trace::{fmt_real, write_trace};

/// Environment variable that overrides every run's `wine_path`.
pub const WINE_PATH_ENV: &str = "DRMOO_WINE_PATH";

/// Window length of the initial and final balanced-gradient means.
pub const WINDOW: usize = 20;

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub trace_path: PathBuf,
    /// `None` on success, otherwise the solver error.
    pub failure: Option<String>,
    pub trace: Option<RunTrace>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run: String,
    pub problem: &'static str,
    pub solver: &'static str,
    pub lipschitz_g: f64,
    pub outcomes: Vec<SeedOutcome>,
    /// Seed means over successful runs.
    pub initial_mean: f64,
    pub final_mean: f64,
    pub final_std: f64,
    pub total_samples: u64,
}

impl RunSummary {
    pub fn ok(&self) -> usize {
        self.outcomes.iter().filter(|o| o.failure.is_none()).count()
    }

    pub fn status(&self) -> String {
        let failures: Vec<String> = self
            .outcomes
            .iter()
            .filter_map(|o| o.failure.as_ref().map(|f| format!("seed {}: {f}", o.seed)))
            .collect();
        if failures.is_empty() {
            "ok".to_string()
        } else {
            failures.join("; ")
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunSummary>,
    pub summary_paths: Vec<PathBuf>,
}

/// Builds the run's problem. `DRMOO_WINE_PATH` wins over `wine_path`.
pub fn build_problem(run: &RunConfig) -> Result<MultiTaskProblem> {
    match run.problem {
        ProblemKind::Linear => Ok(problems::gen_linear(&LinearSpec::standard(run.data_seed))?.problem),
        ProblemKind::Toy => {
            let spec = ToySpec::nominal(run.toy_std, vec![0.0])?;
            Ok(problems::gen_toy_problem(&spec, run.toy_draws, run.data_seed)?)
        }
        ProblemKind::Wine => {
            let path = std::env::var_os(WINE_PATH_ENV)
                .map(PathBuf::from)
                .or_else(|| run.wine_path.clone())
                .ok_or_else(|| {
                    Error::Config(crate::config::ConfigError {
                        line: 0,
                        message: format!("run {:?} needs wine_path or {WINE_PATH_ENV}", run.name),
                    })
                })?;
            if let Err(e) = fs::metadata(&path) {
                return Err(Error::io(path, e));
            }
            problems::load_wine_tasks(&path, WineThresholds::default()).map_err(|e| match e {
                drmoo_core::Error::Io(source) => Error::io(path, source),
                other => other.into(),
            })
        }
    }
}

pub fn lipschitz_for(run: &RunConfig, problem: &MultiTaskProblem) -> f64 {
    match run.lipschitz {
        LipschitzSetting::Fixed(g) => g,
        LipschitzSetting::Auto => problem.estimate_lipschitz(&vec![0.0; problem.dim()]),
    }
}

/// Runs one solver on one seed.
pub fn solve(
    problem: &MultiTaskProblem,
    ctx: &DualContext,
    solver: &SolverSpec,
    settings: &RunSettings,
) -> drmoo_core::Result<RunTrace> {
    match solver {
        SolverSpec::DoubleLoop(c) => solvers::run_double_loop(problem, ctx, c, settings),
        SolverSpec::DoubleClip(c) => solvers::run_double_clip(problem, ctx, c, settings),
        SolverSpec::Mgda(c) => solvers::run_stochastic_mgda(problem, ctx, c, settings),
        SolverSpec::Modo(c) => solvers::run_modo(problem, ctx, c, settings),
    }
}

pub fn trace_path(run: &RunConfig, seed: u64) -> PathBuf {
    run.output_dir.join(&run.name).join(format!("seed_{seed}.csv"))
}

fn write_trace_file(path: &Path, trace: &RunTrace) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(BufWriter::new(file), trace).map_err(|e| Error::io(path, e))
}

struct Prepared<'a> {
    run: &'a RunConfig,
    problem: MultiTaskProblem,
    ctx: DualContext,
}

/// Executes every (run, seed) pair in parallel, then writes
/// `summary.csv` into each output directory and the optional plots.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let prepared = cfg
        .runs
        .iter()
        .map(|run| {
            let problem = build_problem(run)?;
            let g = lipschitz_for(run, &problem);
            let ctx = DualContext::new(run.lambda, g, problem.num_objectives())?;
            fs::create_dir_all(run.output_dir.join(&run.name)).map_err(|e| Error::io(&run.output_dir, e))?;
            Ok(Prepared { run, problem, ctx })
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, u64)> = prepared
        .iter()
        .enumerate()
        .flat_map(|(k, p)| p.run.seeds.iter().map(move |&s| (k, s)))
        .collect();

    let outcomes = jobs
        .par_iter()
        .map(|&(k, seed)| {
            let p = &prepared[k];
            let settings = RunSettings {
                surrogate_every: p.run.surrogate_every,
                wall_clock: p.run.record_wall_clock,
                init: None,
            };
            let path = trace_path(p.run, seed);
            let (trace, failure) = match solve(&p.problem, &p.ctx, &p.run.solver.with_seed(seed), &settings) {
                Ok(t) => (Some(t), None),
                // Divergence carries the partial trace, which is still written.
                Err(e) => {
                    let partial = match &e {
                        drmoo_core::Error::Divergence { trace, .. } => Some((**trace).clone()),
                        _ => None,
                    };
                    (partial, Some(e.to_string()))
                }
            };
            if let Some(t) = &trace {
                write_trace_file(&path, t)?;
            }
            Ok((k, SeedOutcome { seed, trace_path: path, failure, trace }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_run: Vec<Vec<SeedOutcome>> = vec![Vec::new(); prepared.len()];
    for (k, o) in outcomes {
        per_run[k].push(o);
    }
    let runs: Vec<RunSummary> = prepared
        .iter()
        .zip(per_run)
        .map(|(p, outcomes)| summarize(p.run, p.ctx.lipschitz_g, outcomes))
        .collect();

    let mut by_dir: BTreeMap<&Path, Vec<usize>> = BTreeMap::new();
    for (k, run) in cfg.runs.iter().enumerate() {
        by_dir.entry(run.output_dir.as_path()).or_default().push(k);
    }
    let mut summary_paths = Vec::new();
    for (dir, idx) in &by_dir {
        let path = dir.join("summary.csv");
        write_summary(&path, idx.iter().map(|&k| &runs[k]))?;
        summary_paths.push(path);
    }

    for (run, summary) in cfg.runs.iter().zip(&runs) {
        if run.plot {
            plot_run(run, summary)?;
        }
    }
    for (dir, idx) in &by_dir {
        if idx.len() > 1 && idx.iter().any(|&k| cfg.runs[k].plot) {
            plot_overview(dir, idx.iter().map(|&k| &runs[k]))?;
        }
    }

    Ok(ExperimentReport { runs, summary_paths })
}

fn summarize(run: &RunConfig, lipschitz_g: f64, outcomes: Vec<SeedOutcome>) -> RunSummary {
    let good: Vec<&RunTrace> = outcomes
        .iter()
        .filter(|o| o.failure.is_none())
        .filter_map(|o| o.trace.as_ref())
        .collect();
    let initial: Vec<f64> = good.iter().map(|t| t.initial_mean(WINDOW)).collect();
    let finals: Vec<f64> = good.iter().map(|t| t.final_mean(WINDOW)).collect();
    let (final_mean, final_std) = mean_std(&finals);
    RunSummary {
        run: run.name.clone(),
        problem: run.problem.name(),
        solver: run.solver.name(),
        lipschitz_g,
        initial_mean: mean_std(&initial).0,
        final_mean,
        final_std,
        total_samples: good.first().map_or(0, |t| t.total_samples()),
        outcomes,
    }
}

/// Mean and sample standard deviation; the deviation of one value is zero.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "run",
    "problem",
    "solver",
    "seeds",
    "ok",
    "status",
    "G",
    "initial20_mean",
    "final20_mean",
    "final20_std",
    "total_samples",
];

fn write_summary<'a>(path: &Path, runs: impl Iterator<Item = &'a RunSummary>) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in runs {
        let seeds: Vec<String> = r.outcomes.iter().map(|o| o.seed.to_string()).collect();
        w.write_record([
            r.run.clone(),
            r.problem.to_string(),
            r.solver.to_string(),
            seeds.join(" "),
            r.ok().to_string(),
            r.status(),
            fmt_real(r.lipschitz_g),
            fmt_real(r.initial_mean),
            fmt_real(r.final_mean),
            fmt_real(r.final_std),
            r.total_samples.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn plot_run(run: &RunConfig, summary: &RunSummary) -> Result<()> {
    let series: Vec<Series> = summary
        .outcomes
        .iter()
        .filter_map(|o| {
            o.trace.as_ref().map(|t| Series {
                label: format!("seed {}", o.seed),
                points: t.records.iter().map(|r| (r.iter as f64, r.balanced_grad)).collect(),
            })
        })
        .collect();
    let out = run.output_dir.join(&run.name).join("balanced_grad.svg");
    write_plot(&out, &series)
}

/// Seed-averaged balanced gradient of each run on one set of axes.
fn plot_overview<'a>(dir: &Path, runs: impl Iterator<Item = &'a RunSummary>) -> Result<()> {
    let series: Vec<Series> = runs
        .filter_map(|r| {
            let traces: Vec<&RunTrace> = r
                .outcomes
                .iter()
                .filter(|o| o.failure.is_none())
                .filter_map(|o| o.trace.as_ref())
                .collect();
            let len = traces.iter().map(|t| t.records.len()).min()?;
            let points = (0..len)
                .map(|i| {
                    let mean = traces.iter().map(|t| t.records[i].balanced_grad).sum::<f64>() / traces.len() as f64;
                    (i as f64, mean)
                })
                .collect();
            Some(Series {
                label: r.run.clone(),
                points,
            })
        })
        .collect();
    write_plot(&dir.join("balanced_grad.svg"), &series)
}

fn write_plot(out: &Path, series: &[Series]) -> Result<()> {
    match plot::render_line_plot(series, "iteration", "balanced_grad") {
        Ok(svg) => fs::write(out, svg).map_err(|e| Error::io(out, e)),
        // Nothing drawable (every seed failed immediately): no plot.
        Err(Error::Plot(_)) => Ok(()),
        Err(e) => Err(e),
    }
}
