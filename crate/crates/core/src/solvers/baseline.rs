use super::{
    check_context, full_surrogate, initial_state, require_count, require_nonnegative, require_positive, state_finite,
    Recorder, RunSettings, RunTrace, TraceRecord,
};
use crate::dro::{self, DualContext, ObjectiveJacobian};
use crate::error::Result;
use crate::linalg;
use crate::problems::{MultiTaskProblem, Sampling};
use crate::rng::{self, Role};
use crate::simplex::project_simplex;

/// Hyperparameters of the joint-variable baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    /// Step for the joint variable `(theta, eta)`.
    pub alpha: f64,
    /// Preference step.
    pub beta: f64,
    pub rho: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl BaselineConfig {
    /// Stochastic MGDA on the linear problem: both steps `1e-5`, `rho = 0`.
    pub fn linear_mgda(seed: u64) -> Self {
        Self {
            alpha: 1e-5,
            beta: 1e-5,
            rho: 0.0,
            iterations: 600,
            batch_size: 256,
            seed,
        }
    }

    /// Double-sampling baseline on the linear problem: as MGDA with `rho = 1e-5`.
    pub fn linear_modo(seed: u64) -> Self {
        Self {
            rho: 1e-5,
            ..Self::linear_mgda(seed)
        }
    }

    pub fn wine_mgda(seed: u64) -> Self {
        Self {
            alpha: 1e-3,
            beta: 6e-4,
            rho: 0.0,
            iterations: 1000,
            batch_size: 256,
            seed,
        }
    }

    pub fn wine_modo(seed: u64) -> Self {
        Self {
            rho: 1e-6,
            ..Self::wine_mgda(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("alpha", self.alpha)?;
        require_positive("beta", self.beta)?;
        require_nonnegative("rho", self.rho)?;
        require_count("T", self.iterations)?;
        require_count("B", self.batch_size)
    }
}

/// Stochastic MGDA treating `(theta, eta)` as one variable.
///
/// A single batch per objective feeds both the joint gradient step and the
/// preference update `w <- P(w - beta (J^T J w + rho w))`, so the preference
/// direction is a biased estimate.
pub fn run_stochastic_mgda(
    problem: &MultiTaskProblem,
    ctx: &DualContext,
    cfg: &BaselineConfig,
    settings: &RunSettings,
) -> Result<RunTrace> {
    run_joint(problem, ctx, cfg, settings, false)
}

/// As [`run_stochastic_mgda`] but the preference product uses two
/// independent batches, `J_bar^T J_tilde w`. The joint step uses `J_bar`.
pub fn run_modo(
    problem: &MultiTaskProblem,
    ctx: &DualContext,
    cfg: &BaselineConfig,
    settings: &RunSettings,
) -> Result<RunTrace> {
    run_joint(problem, ctx, cfg, settings, true)
}

fn run_joint(
    problem: &MultiTaskProblem,
    ctx: &DualContext,
    cfg: &BaselineConfig,
    settings: &RunSettings,
    double_sampling: bool,
) -> Result<RunTrace> {
    cfg.validate()?;
    check_context(problem, ctx)?;
    let m = problem.num_objectives();
    let init = initial_state(problem, settings)?;
    let mut theta = init.theta;
    let mut eta = init.eta;
    let mut w = init.w.into_vec();

    let mut step_rng = rng::streams(cfg.seed, Role::OuterStep, m);
    let mut second_rng = rng::streams(cfg.seed, Role::OuterPrefB, m);
    let sampling = Sampling::WithReplacement(cfg.batch_size);

    let name = if double_sampling { "modo" } else { "mgda" };
    let mut rec = Recorder::new(name, m, settings);

    for t in 0..cfg.iterations {
        let mut batches = Vec::with_capacity(m);
        for (i, r) in step_rng.iter_mut().enumerate() {
            batches.push(problem.sample_batch(i, &theta, sampling, r)?);
        }
        let losses = batches
            .iter()
            .zip(&eta)
            .map(|(b, &e)| dro::dual_value(ctx, b.losses(), e))
            .collect::<Result<Vec<_>>>()?;
        let jac = dro::dual_grads(ctx, &batches, &eta)?;
        let second: Option<ObjectiveJacobian> = if double_sampling {
            let mut b2 = Vec::with_capacity(m);
            for (i, r) in second_rng.iter_mut().enumerate() {
                b2.push(problem.sample_batch(i, &theta, sampling, r)?);
            }
            Some(dro::dual_grads(ctx, &b2, &eta)?)
        } else {
            None
        };
        rec.samples += (cfg.batch_size * m * if double_sampling { 2 } else { 1 }) as u64;

        let surrogate = if rec.wants_surrogate(t) {
            Some(full_surrogate(problem, ctx, &theta, &eta, &w)?)
        } else {
            None
        };

        let tilde = second.as_ref().unwrap_or(&jac);
        let tilde_w = tilde.combine_theta(&w);
        let shifted: Vec<f64> = (0..m)
            .map(|i| {
                let q = linalg::dot(&jac.theta_grads[i], &tilde_w) + jac.eta_grads[i] * tilde.eta_grads[i] * w[i];
                w[i] - cfg.beta * (q + cfg.rho * w[i])
            })
            .collect();

        let gw = jac.combine_theta(&w);
        let balanced = linalg::norm(&gw);
        linalg::axpy(-cfg.alpha, &gw, &mut theta);
        let eta_delta: Vec<f64> = (0..m).map(|i| cfg.alpha * w[i] * jac.eta_grads[i]).collect();
        for (e, d) in eta.iter_mut().zip(&eta_delta) {
            *e -= d;
        }

        let record = TraceRecord {
            iter: t,
            samples: 0,
            wall_ms: 0.0,
            losses,
            balanced_grad: balanced,
            surrogate_stat: surrogate,
            w: w.clone(),
            eta: eta.clone(),
            theta_step: cfg.alpha * balanced,
            eta_step: linalg::norm(&eta_delta),
            clip: None,
        };
        if !(state_finite(&theta, &eta, &shifted) && balanced.is_finite()) {
            rec.push(record);
            return Err(rec.diverged(t));
        }
        w = project_simplex(&shifted)?.into_vec();
        rec.push(record);
    }

    Ok(rec.finish(theta, eta, w))
}
