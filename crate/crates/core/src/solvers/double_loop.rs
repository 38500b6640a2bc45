use rand::Rng;

use super::{
    check_context, full_surrogate, initial_state, require_count, require_nonnegative, require_positive, state_finite,
    Recorder, RunSettings, RunTrace, TraceRecord,
};
use crate::dro::{self, DualContext};
use crate::error::Result;
use crate::linalg;
use crate::problems::{MultiTaskProblem, Sampling};
use crate::rng::{self, Role};
use crate::simplex::project_simplex;

/// Hyperparameters of the double-loop solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleLoopConfig {
    /// Parameter step.
    pub alpha: f64,
    /// Preference step.
    pub beta: f64,
    /// Inner dual step.
    pub gamma: f64,
    /// Preference regularizer.
    pub rho: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl DoubleLoopConfig {
    /// Synthetic linear-regression settings: `D = 20`, `gamma = 5e-3`,
    /// `alpha = beta = 5e-5`, `rho = 1e-5`, `B = 256`, `T = 600`.
    pub fn linear_defaults(seed: u64) -> Self {
        Self {
            alpha: 5e-5,
            beta: 5e-5,
            gamma: 5e-3,
            rho: 1e-5,
            iterations: 600,
            inner_iterations: 20,
            batch_size: 256,
            seed,
        }
    }

    /// Wine logistic-regression settings: `D = 15`, `gamma = 5e-3`,
    /// `alpha = 1e-3`, `beta = 6e-4`, `rho = 1e-6`, `B = 256`, `T = 1000`.
    pub fn wine_defaults(seed: u64) -> Self {
        Self {
            alpha: 1e-3,
            beta: 6e-4,
            gamma: 5e-3,
            rho: 1e-6,
            iterations: 1000,
            inner_iterations: 15,
            batch_size: 256,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("alpha", self.alpha)?;
        require_positive("beta", self.beta)?;
        require_positive("gamma", self.gamma)?;
        require_nonnegative("rho", self.rho)?;
        require_count("T", self.iterations)?;
        require_count("D", self.inner_iterations)?;
        require_count("B", self.batch_size)
    }

    /// Samples drawn per outer iteration: `m D` inner draws plus three
    /// outer batches of `B` per objective.
    pub fn samples_per_iteration(&self, m: usize) -> u64 {
        (m * self.inner_iterations + 3 * self.batch_size * m) as u64
    }
}

/// Double-loop MGDA.
///
/// Per outer iteration `t`:
/// 1. For each objective, `D` single-sample SGD steps on the dual,
///    `eta_{t,d+1} = eta_{t,d} - gamma V_d`, keeping the trajectory
///    `eta_{t,0..D-1}`. The next outer iteration starts from `eta_{t,D}`.
/// 2. Indices `d, d_bar, d_tilde` are drawn uniformly from `0..D`.
/// 3. Three independent batches give `Y` at `eta_{t,d}`, `Y_bar` at
///    `eta_{t,d_bar}` and `Y_tilde` at `eta_{t,d_tilde}`.
/// 4. `theta_{t+1} = theta_t - alpha Y w_t`.
/// 5. `w_{t+1} = P(w_t - beta (Y_bar^T Y_tilde w_t + rho w_t))`.
pub fn run_double_loop(
    problem: &MultiTaskProblem,
    ctx: &DualContext,
    cfg: &DoubleLoopConfig,
    settings: &RunSettings,
) -> Result<RunTrace> {
    cfg.validate()?;
    check_context(problem, ctx)?;
    let m = problem.num_objectives();
    let n = problem.dim();
    let init = initial_state(problem, settings)?;
    let mut theta = init.theta;
    let mut eta = init.eta;
    let mut w = init.w.into_vec();

    let mut inner_rng = rng::streams(cfg.seed, Role::Inner, m);
    let mut step_rng = rng::streams(cfg.seed, Role::OuterStep, m);
    let mut pref_a_rng = rng::streams(cfg.seed, Role::OuterPrefA, m);
    let mut pref_b_rng = rng::streams(cfg.seed, Role::OuterPrefB, m);
    let mut index_rng = rng::stream(cfg.seed, Role::InnerIndex, 0);
    let batch = Sampling::WithReplacement(cfg.batch_size);

    let mut rec = Recorder::new("double_loop", m, settings);
    let mut trajectory = vec![vec![0.0; m]; cfg.inner_iterations];

    for t in 0..cfg.iterations {
        for slot in trajectory.iter_mut() {
            slot.copy_from_slice(&eta);
            for i in 0..m {
                let sample = problem.sample_batch(i, &theta, Sampling::WithReplacement(1), &mut inner_rng[i])?;
                let v = dro::grad_eta(ctx, sample.losses(), eta[i])?;
                eta[i] -= cfg.gamma * v;
            }
        }

        let d = index_rng.random_range(0..cfg.inner_iterations);
        let d_bar = index_rng.random_range(0..cfg.inner_iterations);
        let d_tilde = index_rng.random_range(0..cfg.inner_iterations);

        let mut y = Vec::with_capacity(m);
        let mut y_bar = Vec::with_capacity(m);
        let mut y_tilde = Vec::with_capacity(m);
        let mut losses = Vec::with_capacity(m);
        for i in 0..m {
            let b = problem.sample_batch(i, &theta, batch, &mut step_rng[i])?;
            losses.push(dro::dual_value(ctx, b.losses(), trajectory[d][i])?);
            y.push(dro::grad_theta(ctx, &b, trajectory[d][i])?);
            let b = problem.sample_batch(i, &theta, batch, &mut pref_a_rng[i])?;
            y_bar.push(dro::grad_theta(ctx, &b, trajectory[d_bar][i])?);
            let b = problem.sample_batch(i, &theta, batch, &mut pref_b_rng[i])?;
            y_tilde.push(dro::grad_theta(ctx, &b, trajectory[d_tilde][i])?);
        }
        rec.samples += cfg.samples_per_iteration(m);

        let surrogate = if rec.wants_surrogate(t) {
            Some(full_surrogate(problem, ctx, &theta, &eta, &w)?)
        } else {
            None
        };

        let mut yw = vec![0.0; n];
        for (col, wi) in y.iter().zip(&w) {
            linalg::axpy(*wi, col, &mut yw);
        }
        let balanced = linalg::norm(&yw);
        linalg::axpy(-cfg.alpha, &yw, &mut theta);

        let mut tilde_w = vec![0.0; n];
        for (col, wi) in y_tilde.iter().zip(&w) {
            linalg::axpy(*wi, col, &mut tilde_w);
        }
        let w_used = w.clone();
        let shifted: Vec<f64> = (0..m)
            .map(|i| w[i] - cfg.beta * (linalg::dot(&y_bar[i], &tilde_w) + cfg.rho * w[i]))
            .collect();

        let eta_step = linalg::norm(&trajectory[0].iter().zip(&eta).map(|(a, b)| b - a).collect::<Vec<_>>());
        let record = TraceRecord {
            iter: t,
            samples: 0,
            wall_ms: 0.0,
            losses,
            balanced_grad: balanced,
            surrogate_stat: surrogate,
            w: w_used,
            eta: eta.clone(),
            theta_step: cfg.alpha * balanced,
            eta_step,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_linear, LinearSpec};

    fn small_problem() -> MultiTaskProblem {
        gen_linear(&LinearSpec {
            samples: 300,
            ..LinearSpec::standard(2)
        })
        .unwrap()
        .problem
    }

    #[test]
    fn invalid_config_rejected() {
        let p = small_problem();
        let ctx = DualContext::new(1.0, 10.0, 3).unwrap();
        let mut cfg = DoubleLoopConfig::linear_defaults(0);
        cfg.inner_iterations = 0;
        assert!(run_double_loop(&p, &ctx, &cfg, &RunSettings::default()).is_err());
        let cfg = DoubleLoopConfig {
            rho: -1.0,
            ..DoubleLoopConfig::linear_defaults(0)
        };
        assert!(run_double_loop(&p, &ctx, &cfg, &RunSettings::default()).is_err());
    }

    #[test]
    fn sample_accounting() {
        let p = small_problem();
        let ctx = DualContext::new(1.0, 10.0, 3).unwrap();
        let cfg = DoubleLoopConfig {
            iterations: 7,
            inner_iterations: 4,
            batch_size: 5,
            ..DoubleLoopConfig::linear_defaults(1)
        };
        let trace = run_double_loop(&p, &ctx, &cfg, &RunSettings::default()).unwrap();
        assert_eq!(trace.records.len(), 7);
        assert_eq!(trace.total_samples(), 7 * (3 * 4 + 3 * 5 * 3));
        assert!(trace.records.windows(2).all(|r| r[0].samples < r[1].samples));
    }

    #[test]
    fn divergence_is_reported_with_partial_trace() {
        let p = small_problem();
        let ctx = DualContext::new(0.05, 10.0, 3).unwrap();
        let cfg = DoubleLoopConfig {
            alpha: 10.0,
            iterations: 200,
            inner_iterations: 2,
            batch_size: 8,
            ..DoubleLoopConfig::linear_defaults(0)
        };
        match run_double_loop(&p, &ctx, &cfg, &RunSettings::default()) {
            Err(crate::Error::Divergence { iteration, trace }) => {
                assert_eq!(trace.records.len(), iteration + 1);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
