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

/// Hyperparameters of the single-loop double-clip solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleClipConfig {
    /// Joint step for `theta` and the rescaled dual.
    pub gamma: f64,
    /// Preference step.
    pub beta: f64,
    pub rho: f64,
    pub c1: f64,
    pub c2: f64,
    pub f1: f64,
    pub f2: f64,
    /// Batch size of the parameter gradient `X`.
    pub n1: usize,
    /// Batch size of the dual gradient `Z`.
    pub n2: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl DoubleClipConfig {
    /// Synthetic linear-regression settings: `gamma = 1e-2`, `c1 = f1 = 0.5`,
    /// `c2 = f2 = 0.1`, `rho = 1e-5`, batches of 256, `T = 600`.
    /// `beta` is not pinned by the experiment and defaults to `gamma`.
    pub fn linear_defaults(seed: u64) -> Self {
        Self {
            gamma: 1e-2,
            beta: 1e-2,
            rho: 1e-5,
            c1: 0.5,
            c2: 0.1,
            f1: 0.5,
            f2: 0.1,
            n1: 256,
            n2: 256,
            iterations: 600,
            seed,
        }
    }

    /// Wine settings: as [`Self::linear_defaults`] with `T = 1000`.
    pub fn wine_defaults(seed: u64) -> Self {
        Self {
            iterations: 1000,
            ..Self::linear_defaults(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("gamma", self.gamma)?;
        require_positive("beta", self.beta)?;
        require_nonnegative("rho", self.rho)?;
        require_positive("c1", self.c1)?;
        require_positive("c2", self.c2)?;
        require_positive("f1", self.f1)?;
        require_positive("f2", self.f2)?;
        require_count("N1", self.n1)?;
        require_count("N2", self.n2)?;
        require_count("T", self.iterations)
    }

    pub fn samples_per_iteration(&self, m: usize) -> u64 {
        (m * (self.n1 + self.n2)) as u64
    }
}

/// `min(cap, threshold / norm)` with `threshold / 0 = +inf`.
pub fn clip_multiplier(cap: f64, threshold: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        cap.min(threshold / norm)
    } else {
        cap
    }
}

/// Double-clip MGDA on the rescaled objective `L_hat(theta, eta) = L(theta, G sqrt(m) eta)`.
///
/// Per iteration, with `o` the elementwise product (the dual Jacobian is
/// diagonal so `Z` is an `m`-vector):
///
/// ```text
/// Z       = d_eta L_hat(theta_t, eta_t)            on N2 samples
/// mu_t    = min(f1, f2 / ||Z o w_t||)
/// eta_t+1 = eta_t - gamma mu_t (Z o w_t)
/// X       = d_theta L_hat(theta_t, eta_t+1)        on N1 fresh samples
/// alpha_t = min(c1, c2 / ||X w_t||)
/// theta_t+1 = theta_t - gamma alpha_t X w_t
/// w_t+1   = P(w_t - beta (alpha_t X^T X w_t + mu_t Z o Z o w_t + rho w_t))
/// ```
pub fn run_double_clip(
    problem: &MultiTaskProblem,
    ctx: &DualContext,
    cfg: &DoubleClipConfig,
    settings: &RunSettings,
) -> Result<RunTrace> {
    cfg.validate()?;
    check_context(problem, ctx)?;
    let m = problem.num_objectives();
    let n = problem.dim();
    let scale = ctx.rescale();
    let init = initial_state(problem, settings)?;
    let mut theta = init.theta;
    let mut eta_hat: Vec<f64> = init.eta.iter().map(|e| e / scale).collect();
    let mut w = init.w.into_vec();

    let mut z_rng = rng::streams(cfg.seed, Role::DualBatch, m);
    let mut x_rng = rng::streams(cfg.seed, Role::ParamBatch, m);

    let mut rec = Recorder::new("double_clip", m, settings);

    for t in 0..cfg.iterations {
        let mut z = Vec::with_capacity(m);
        for i in 0..m {
            let b = problem.sample_batch(i, &theta, Sampling::WithReplacement(cfg.n2), &mut z_rng[i])?;
            z.push(dro::rescaled_grad_eta(ctx, b.losses(), eta_hat[i])?);
        }
        let zw: Vec<f64> = z.iter().zip(&w).map(|(zi, wi)| zi * wi).collect();
        let mu = clip_multiplier(cfg.f1, cfg.f2, linalg::norm(&zw));
        let eta_next: Vec<f64> = eta_hat.iter().zip(&zw).map(|(e, g)| e - cfg.gamma * mu * g).collect();

        let mut x = Vec::with_capacity(m);
        let mut losses = Vec::with_capacity(m);
        for i in 0..m {
            let b = problem.sample_batch(i, &theta, Sampling::WithReplacement(cfg.n1), &mut x_rng[i])?;
            losses.push(dro::dual_value(ctx, b.losses(), scale * eta_next[i])?);
            x.push(dro::rescaled_grad_theta(ctx, &b, eta_next[i])?);
        }
        rec.samples += cfg.samples_per_iteration(m);

        let eta_unscaled: Vec<f64> = eta_next.iter().map(|e| scale * e).collect();
        let surrogate = if rec.wants_surrogate(t) {
            Some(full_surrogate(problem, ctx, &theta, &eta_unscaled, &w)?)
        } else {
            None
        };

        let mut xw = vec![0.0; n];
        for (col, wi) in x.iter().zip(&w) {
            linalg::axpy(*wi, col, &mut xw);
        }
        let balanced = linalg::norm(&xw);
        let alpha = clip_multiplier(cfg.c1, cfg.c2, balanced);
        linalg::axpy(-cfg.gamma * alpha, &xw, &mut theta);

        let shifted: Vec<f64> = (0..m)
            .map(|i| {
                let q = alpha * linalg::dot(&x[i], &xw) + mu * z[i] * z[i] * w[i] + cfg.rho * w[i];
                w[i] - cfg.beta * q
            })
            .collect();

        let eta_step = cfg.gamma * mu * linalg::norm(&zw);
        let record = TraceRecord {
            iter: t,
            samples: 0,
            wall_ms: 0.0,
            losses,
            balanced_grad: balanced,
            surrogate_stat: surrogate,
            w: w.clone(),
            eta: eta_unscaled,
            theta_step: cfg.gamma * alpha * balanced,
            eta_step,
            clip: Some((alpha, mu)),
        };
        eta_hat = eta_next;

        if !(state_finite(&theta, &eta_hat, &shifted) && balanced.is_finite()) {
            rec.push(record);
            return Err(rec.diverged(t));
        }
        w = project_simplex(&shifted)?.into_vec();
        rec.push(record);
    }

    let eta: Vec<f64> = eta_hat.iter().map(|e| scale * e).collect();
    Ok(rec.finish(theta, eta, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_examples() {
        assert_eq!(clip_multiplier(0.5, 0.1, 0.0), 0.5);
        assert_eq!(clip_multiplier(0.5, 0.1, 1.0), 0.1);
        assert_eq!(clip_multiplier(0.5, 0.1, 0.1), 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(DoubleClipConfig::linear_defaults(0).validate().is_ok());
        let bad = DoubleClipConfig {
            c2: 0.0,
            ..DoubleClipConfig::linear_defaults(0)
        };
        assert!(bad.validate().is_err());
        let bad = DoubleClipConfig {
            n1: 0,
            ..DoubleClipConfig::linear_defaults(0)
        };
        assert!(bad.validate().is_err());
    }
}
