//! Python bindings: `import drmoo`.

use std::path::PathBuf;

use drmoo_cli::config::{parse_config, SolverSpec};
use drmoo_cli::data::{toy_frontiers, ToyOptions};
use drmoo_cli::presets;
use drmoo_cli::run::{self as runner, RunSummary};
use drmoo_cli::trace::write_trace;
use drmoo_core::check::{run_checks, CheckOptions};
use drmoo_core::metrics::{self, FrontierPoint};
use drmoo_core::problems::{self, LinearSpec, ToySpec, WineThresholds};
use drmoo_core::solvers::{RunSettings, RunTrace};
use drmoo_core::{dro, simplex};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(drmoo, DrmooError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    DrmooError::new_err(e.to_string())
}

/// `lambda`, `G` and the objective count of the chi-square dual.
#[pyclass(frozen, name = "DualContext")]
struct PyDualContext(drmoo_core::DualContext);

#[pymethods]
impl PyDualContext {
    #[new]
    #[pyo3(signature = (lam, lipschitz_g=1.0, num_objectives=1))]
    fn new(lam: f64, lipschitz_g: f64, num_objectives: usize) -> PyResult<Self> {
        drmoo_core::DualContext::new(lam, lipschitz_g, num_objectives).map(Self).map_err(err)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn lipschitz_g(&self) -> f64 {
        self.0.lipschitz_g
    }

    #[getter]
    fn num_objectives(&self) -> usize {
        self.0.num_objectives
    }

    fn rescale(&self) -> f64 {
        self.0.rescale()
    }

    fn dual_value(&self, losses: Vec<f64>, eta: f64) -> PyResult<f64> {
        dro::dual_value(&self.0, &losses, eta).map_err(err)
    }

    fn grad_eta(&self, losses: Vec<f64>, eta: f64) -> PyResult<f64> {
        dro::grad_eta(&self.0, &losses, eta).map_err(err)
    }

    fn exact_dual_min(&self, losses: Vec<f64>) -> PyResult<f64> {
        dro::exact_dual_min(&self.0, &losses).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "DualContext(lam={}, lipschitz_g={}, num_objectives={})",
            self.0.lambda, self.0.lipschitz_g, self.0.num_objectives
        )
    }
}

type PhiTuple = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// A multi-task dataset with per-sample losses.
#[pyclass(frozen, name = "Problem")]
struct PyProblem {
    inner: drmoo_core::MultiTaskProblem,
    /// Solver defaults follow the wine presets when true.
    wine: bool,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    #[pyo3(signature = (seed=0))]
    fn linear(seed: u64) -> PyResult<Self> {
        let inst = problems::gen_linear(&LinearSpec::standard(seed)).map_err(err)?;
        Ok(Self {
            inner: inst.problem,
            wine: false,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed=0, samples=6000))]
    fn logistic(seed: u64, samples: usize) -> PyResult<Self> {
        let spec = LinearSpec {
            samples,
            ..LinearSpec::standard(seed)
        };
        Ok(Self {
            inner: problems::gen_logistic(&spec).map_err(err)?,
            wine: true,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (std=0.5, draws=200, seed=0))]
    fn toy(std: f64, draws: usize, seed: u64) -> PyResult<Self> {
        let spec = ToySpec::nominal(std, vec![0.0]).map_err(err)?;
        Ok(Self {
            inner: problems::gen_toy_problem(&spec, draws, seed).map_err(err)?,
            wine: false,
        })
    }

    #[staticmethod]
    fn wine(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: problems::load_wine_tasks(&path, WineThresholds::default()).map_err(err)?,
            wine: true,
        })
    }

    #[getter]
    fn num_objectives(&self) -> usize {
        self.inner.num_objectives()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn dataset_size(&self, task: usize) -> PyResult<usize> {
        if task >= self.inner.num_objectives() {
            return Err(err(format!("task {task} out of range")));
        }
        Ok(self.inner.dataset_size(task))
    }

    /// Largest per-sample gradient norm at `theta` (zeros by default).
    #[pyo3(signature = (theta=None))]
    fn estimate_lipschitz(&self, theta: Option<Vec<f64>>) -> PyResult<f64> {
        let theta = self.theta_or_zeros(theta)?;
        Ok(self.inner.estimate_lipschitz(&theta))
    }

    /// Exact robust values, optimal duals and gradients at `theta`.
    fn phi(&self, ctx: &PyDualContext, theta: Vec<f64>) -> PyResult<PhiTuple> {
        let theta = self.theta_or_zeros(Some(theta))?;
        let eval = dro::phi_oracle(&ctx.0, &self.inner.full_batches(&theta)).map_err(err)?;
        Ok((eval.values, eval.etas, eval.jacobian))
    }
}

impl PyProblem {
    fn theta_or_zeros(&self, theta: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
        let theta = theta.unwrap_or_else(|| vec![0.0; self.inner.dim()]);
        if theta.len() != self.inner.dim() {
            return Err(err(format!("theta has length {}, expected {}", theta.len(), self.inner.dim())));
        }
        Ok(theta)
    }
}

/// Per-iteration record of one solver run.
#[pyclass(frozen, name = "Trace")]
struct PyTrace(RunTrace);

#[pymethods]
impl PyTrace {
    #[getter]
    fn solver(&self) -> &str {
        &self.0.solver
    }

    #[getter]
    fn balanced_grad(&self) -> Vec<f64> {
        self.0.balanced_grads()
    }

    #[getter]
    fn losses(&self) -> Vec<Vec<f64>> {
        self.0.records.iter().map(|r| r.losses.clone()).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<Vec<f64>> {
        self.0.records.iter().map(|r| r.w.clone()).collect()
    }

    #[getter]
    fn samples(&self) -> Vec<u64> {
        self.0.records.iter().map(|r| r.samples).collect()
    }

    #[getter]
    fn final_theta(&self) -> Vec<f64> {
        self.0.final_theta.clone()
    }

    #[getter]
    fn final_eta(&self) -> Vec<f64> {
        self.0.final_eta.clone()
    }

    #[getter]
    fn final_w(&self) -> Vec<f64> {
        self.0.final_w.clone()
    }

    #[pyo3(signature = (k=20))]
    fn initial_mean(&self, k: usize) -> f64 {
        self.0.initial_mean(k)
    }

    #[pyo3(signature = (k=20))]
    fn final_mean(&self, k: usize) -> f64 {
        self.0.final_mean(k)
    }

    /// The trace in the same CSV layout as `drmoo run`.
    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_trace(&mut buf, &self.0).map_err(err)?;
        String::from_utf8(buf).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.records.len()
    }
}

/// Hyperparameters use the config-file keys (`T`, `D`, `B`, `alpha`, ...).
/// `G=None` takes the empirical bound at `theta = 0`.
#[pyfunction]
#[pyo3(signature = (problem, solver, lam=0.8, lipschitz_g=None, seed=0, **hyper))]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    solver: &str,
    lam: f64,
    lipschitz_g: Option<f64>,
    seed: u64,
    hyper: Option<&Bound<'_, PyDict>>,
) -> PyResult<PyTrace> {
    let mut text = format!(
        "problem = {}\nsolver = {solver}\n",
        if problem.wine { "wine" } else { "linear" }
    );
    if let Some(kw) = hyper {
        for (k, v) in kw.iter() {
            text.push_str(&format!("{} = {}\n", k.str()?, v.str()?));
        }
    }
    let cfg = parse_config(&text).map_err(|e| err(e.message))?;
    let spec: SolverSpec = cfg.runs[0].solver.with_seed(seed);
    let g = match lipschitz_g {
        Some(g) => g,
        None => problem.inner.estimate_lipschitz(&vec![0.0; problem.inner.dim()]),
    };
    let ctx = drmoo_core::DualContext::new(lam, g, problem.inner.num_objectives()).map_err(err)?;
    let out = py.detach(|| runner::solve(&problem.inner, &ctx, &spec, &RunSettings::default()));
    out.map(PyTrace).map_err(err)
}

fn summary_dict<'py>(py: Python<'py>, r: &RunSummary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("run", &r.run)?;
    d.set_item("problem", r.problem)?;
    d.set_item("solver", r.solver)?;
    d.set_item("seeds", r.outcomes.iter().map(|o| o.seed).collect::<Vec<_>>())?;
    d.set_item("ok", r.ok())?;
    d.set_item("status", r.status())?;
    d.set_item("G", r.lipschitz_g)?;
    d.set_item("initial20_mean", r.initial_mean)?;
    d.set_item("final20_mean", r.final_mean)?;
    d.set_item("final20_std", r.final_std)?;
    d.set_item("total_samples", r.total_samples)?;
    Ok(d)
}

/// Runs a config text (or preset name) and returns one dict per run block.
#[pyfunction]
#[pyo3(signature = (config, output_dir=None))]
fn run_config<'py>(py: Python<'py>, config: &str, output_dir: Option<PathBuf>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let text = presets::preset(config).unwrap_or(config);
    let mut cfg = parse_config(text).map_err(err)?;
    if let Some(dir) = output_dir {
        for run in &mut cfg.runs {
            run.output_dir = dir.clone();
        }
    }
    let report = py.detach(|| runner::run_experiment(&cfg)).map_err(err)?;
    report.runs.iter().map(|r| summary_dict(py, r)).collect()
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    presets::names().collect()
}

#[pyfunction]
fn project_simplex(v: Vec<f64>) -> PyResult<Vec<f64>> {
    simplex::project_simplex(&v).map(|w| w.into_vec()).map_err(err)
}

/// Indices of the non-dominated rows, in input order.
#[pyfunction]
fn pareto_filter(points: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    let pts: Vec<FrontierPoint> = points
        .into_iter()
        .enumerate()
        .map(|(k, v)| FrontierPoint::new(vec![k as f64], v))
        .collect();
    let front = metrics::pareto_filter(&pts).map_err(err)?;
    Ok(front.iter().map(|p| p.theta[0] as usize).collect())
}

type Frontier = Vec<(f64, f64, f64)>;

/// `(nominal, robust)` frontiers of the toy problem as `(theta, f1, f2)`.
#[pyfunction]
#[pyo3(signature = (std=0.5, draws=200, grid=401, lam=1.0, seed=0))]
fn robust_frontier(std: f64, draws: usize, grid: usize, lam: f64, seed: u64) -> PyResult<(Frontier, Frontier)> {
    let f = toy_frontiers(&ToyOptions {
        std,
        draws,
        grid,
        lambda: lam,
        seed,
        ..ToyOptions::default()
    })
    .map_err(err)?;
    let flat = |pts: &[FrontierPoint]| pts.iter().map(|p| (p.theta[0], p.values[0], p.values[1])).collect();
    Ok((flat(&f.nominal), flat(&f.robust)))
}

/// The invariant suite as `(name, passed, observed, tolerance, detail)`.
#[pyfunction]
#[pyo3(signature = (self_test=false, seed=0))]
fn check(py: Python<'_>, self_test: bool, seed: u64) -> Vec<(String, bool, f64, f64, String)> {
    let opts = CheckOptions {
        inject_grad_eta_sign_bug: self_test,
        seed,
    };
    py.detach(|| run_checks(&opts))
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.observed, c.tolerance, c.detail))
        .collect()
}

#[pymodule]
fn drmoo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DrmooError", m.py().get_type::<DrmooError>())?;
    m.add_class::<PyDualContext>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_filter, m)?)?;
    m.add_function(wrap_pyfunction!(robust_frontier, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
