//! Solvers for the dual DR-MOO problem.
//!
//! Every solver is a deterministic recurrence given its seed: all sampling
//! goes through [`crate::rng`] streams keyed by role and objective. Each run
//! returns a [`RunTrace`] with one [`TraceRecord`] per iteration.
//!
//! Defaults: `theta_0 = 0`, `eta_0 = 0`, `w_0` uniform.

mod baseline;
mod double_clip;
mod double_loop;

use std::time::Instant;

pub use baseline::{run_modo, run_stochastic_mgda, BaselineConfig};
pub use double_clip::{run_double_clip, DoubleClipConfig};
pub use double_loop::{run_double_loop, DoubleLoopConfig};

use crate::dro::{self, DualContext};
use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics;
use crate::problems::MultiTaskProblem;
use crate::simplex::{uniform_preference, PreferenceVector};

/// Starting point of a run. Duals are in the unscaled `eta` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
    pub w: PreferenceVector,
}

impl InitialState {
    pub fn zeros(problem: &MultiTaskProblem) -> Self {
        let m = problem.num_objectives();
        Self {
            theta: vec![0.0; problem.dim()],
            eta: vec![0.0; m],
            w: uniform_preference(m).expect("problem has at least one objective"),
        }
    }
}

/// Logging and initialization options shared by all solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Full-batch surrogate stationarity is logged when `iter % surrogate_every == 0`;
    /// zero disables it.
    pub surrogate_every: usize,
    /// Record elapsed milliseconds; when off the column is zero so traces
    /// stay reproducible byte for byte.
    pub wall_clock: bool,
    pub init: Option<InitialState>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            surrogate_every: 10,
            wall_clock: false,
            init: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Cumulative samples consumed through this iteration.
    pub samples: u64,
    pub wall_ms: f64,
    /// Stochastic dual loss per objective on this iteration's parameter batch.
    pub losses: Vec<f64>,
    /// Norm of the stochastic theta-gradient combination `||Y_t w_t||`.
    pub balanced_grad: f64,
    /// Full-batch `G sum_i w_i |d_eta L_i| + ||sum_i w_i d_theta L_i||`, when logged.
    pub surrogate_stat: Option<f64>,
    /// Preference vector used by this iteration's step.
    pub w: Vec<f64>,
    /// Dual state after the step, in unscaled coordinates.
    pub eta: Vec<f64>,
    /// `||theta_{t+1} - theta_t||`.
    pub theta_step: f64,
    /// Norm of the dual step in the solver's own coordinates.
    pub eta_step: f64,
    /// Clipping multipliers `(alpha_t, mu_t)` of the double-clip solver.
    pub clip: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub solver: String,
    pub num_objectives: usize,
    pub records: Vec<TraceRecord>,
    pub final_theta: Vec<f64>,
    pub final_eta: Vec<f64>,
    pub final_w: Vec<f64>,
}

impl RunTrace {
    fn new(solver: &str, m: usize) -> Self {
        Self {
            solver: solver.to_string(),
            num_objectives: m,
            records: Vec::new(),
            final_theta: Vec::new(),
            final_eta: Vec::new(),
            final_w: Vec::new(),
        }
    }

    pub fn balanced_grads(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.balanced_grad).collect()
    }

    /// Mean balanced gradient over the first `k` iterations.
    pub fn initial_mean(&self, k: usize) -> f64 {
        window_mean(self.records.iter().take(k).map(|r| r.balanced_grad))
    }

    /// Mean balanced gradient over the last `k` iterations.
    pub fn final_mean(&self, k: usize) -> f64 {
        let skip = self.records.len().saturating_sub(k);
        window_mean(self.records.iter().skip(skip).map(|r| r.balanced_grad))
    }

    pub fn total_samples(&self) -> u64 {
        self.records.last().map_or(0, |r| r.samples)
    }
}

fn window_mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// State and bookkeeping common to every solver loop.
struct Recorder {
    trace: RunTrace,
    samples: u64,
    start: Instant,
    settings: RunSettings,
}

impl Recorder {
    fn new(solver: &str, m: usize, settings: &RunSettings) -> Self {
        Self {
            trace: RunTrace::new(solver, m),
            samples: 0,
            start: Instant::now(),
            settings: settings.clone(),
        }
    }

    fn wants_surrogate(&self, t: usize) -> bool {
        self.settings.surrogate_every > 0 && t.is_multiple_of(self.settings.surrogate_every)
    }

    fn elapsed_ms(&self) -> f64 {
        if self.settings.wall_clock {
            self.start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    }

    fn push(&mut self, mut rec: TraceRecord) {
        rec.samples = self.samples;
        rec.wall_ms = self.elapsed_ms();
        self.trace.records.push(rec);
    }

    fn diverged(self, iteration: usize) -> Error {
        Error::Divergence {
            iteration,
            trace: Box::new(self.trace),
        }
    }

    fn finish(mut self, theta: Vec<f64>, eta: Vec<f64>, w: Vec<f64>) -> RunTrace {
        self.trace.final_theta = theta;
        self.trace.final_eta = eta;
        self.trace.final_w = w;
        self.trace
    }
}

fn initial_state(problem: &MultiTaskProblem, settings: &RunSettings) -> Result<InitialState> {
    let init = settings.init.clone().unwrap_or_else(|| InitialState::zeros(problem));
    if init.theta.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            actual: init.theta.len(),
        });
    }
    let m = problem.num_objectives();
    if init.eta.len() != m || init.w.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: init.eta.len().min(init.w.len()),
        });
    }
    Ok(init)
}

fn check_context(problem: &MultiTaskProblem, ctx: &DualContext) -> Result<()> {
    if ctx.num_objectives != problem.num_objectives() {
        return Err(Error::DimensionMismatch {
            expected: problem.num_objectives(),
            actual: ctx.num_objectives,
        });
    }
    Ok(())
}

/// Full-batch surrogate stationarity at `(theta, eta)` with unscaled duals.
fn full_surrogate(problem: &MultiTaskProblem, ctx: &DualContext, theta: &[f64], eta: &[f64], w: &[f64]) -> Result<f64> {
    let jac = dro::dual_grads(ctx, &problem.full_batches(theta), eta)?;
    metrics::surrogate_stationarity(&jac, w, ctx.lipschitz_g)
}

fn state_finite(theta: &[f64], eta: &[f64], w: &[f64]) -> bool {
    linalg::all_finite(theta) && linalg::all_finite(eta) && linalg::all_finite(w)
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be nonnegative, got {v}")))
    }
}

fn require_count(name: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be at least 1")))
    }
}
