//! The f-divergence dual of a regularized worst-case risk.
//!
//! For one objective with per-sample losses `l_j` the dual objective is
//!
//! ```text
//! L(theta, eta) = lambda * mean_j f*((l_j - eta) / lambda) + eta
//! ```
//!
//! and the robust value is `phi(theta) = min_eta L(theta, eta)`. All
//! expectations are plug-in means over whatever batch is supplied, so the same
//! routines serve stochastic minibatches and full-dataset oracles.
//!
//! The rescaled objective used by the single-loop solver is
//! `L_hat(theta, eta) = L(theta, G * sqrt(m) * eta)`.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::linalg;

/// The divergence family whose convex conjugate enters the dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConjugateKind {
    /// `f*(t) = 0.25 * (t + 2)_+^2 - 1`.
    #[default]
    ChiSquare,
}

/// Convex conjugate `f*` of a divergence generator.
///
/// `f*` is nondecreasing and its derivative is Lipschitz with constant
/// [`Conjugate::smoothness`] (`M`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conjugate {
    pub kind: ConjugateKind,
}

impl Conjugate {
    pub const CHI_SQUARE: Conjugate = Conjugate {
        kind: ConjugateKind::ChiSquare,
    };

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            ConjugateKind::ChiSquare => {
                let s = (t + 2.0).max(0.0);
                0.25 * s * s - 1.0
            }
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self.kind {
            ConjugateKind::ChiSquare => 0.5 * (t + 2.0).max(0.0),
        }
    }

    /// Lipschitz constant `M` of the derivative.
    pub fn smoothness(&self) -> f64 {
        match self.kind {
            ConjugateKind::ChiSquare => 0.5,
        }
    }
}

/// Problem-wide constants of the dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualContext {
    pub lambda: f64,
    /// Lipschitz bound `G` of the per-sample losses.
    pub lipschitz_g: f64,
    pub num_objectives: usize,
    pub conjugate: Conjugate,
}

impl DualContext {
    pub fn new(lambda: f64, lipschitz_g: f64, num_objectives: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        if !(lipschitz_g > 0.0 && lipschitz_g.is_finite()) {
            return Err(Error::invalid(format!(
                "lipschitz bound G must be positive, got {lipschitz_g}"
            )));
        }
        if num_objectives == 0 {
            return Err(Error::invalid("number of objectives must be at least 1"));
        }
        Ok(Self {
            lambda,
            lipschitz_g,
            num_objectives,
            conjugate: Conjugate::CHI_SQUARE,
        })
    }

    /// `G * sqrt(m)`, the dual rescaling factor of `L_hat`.
    pub fn rescale(&self) -> f64 {
        self.lipschitz_g * (self.num_objectives as f64).sqrt()
    }

    /// Smoothness of `eta -> L(theta, eta)`: `M / lambda`.
    pub fn dual_smoothness(&self) -> f64 {
        self.conjugate.smoothness() / self.lambda
    }

    #[inline]
    fn weight(&self, loss: f64, eta: f64) -> f64 {
        self.conjugate.deriv((loss - eta) / self.lambda)
    }
}

macro_rules! finite_vector {
    ($(#[$doc:meta])* $name:ident, $what:literal) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if !linalg::all_finite(&values) {
                    return Err(Error::NonFinite($what));
                }
                Ok(Self(values))
            }

            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }
    };
}

finite_vector!(
    /// Model parameters shared by all objectives.
    ParamVector,
    "parameter vector"
);
finite_vector!(
    /// One dual scalar per objective.
    DualVector,
    "dual vector"
);

/// Per-sample losses and loss gradients of one objective at one `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    losses: Vec<f64>,
    /// Row-major, `losses.len() x dim`.
    grads: Vec<f64>,
    dim: usize,
}

impl SampleBatch {
    pub fn new(losses: Vec<f64>, grads: Vec<Vec<f64>>) -> Result<Self> {
        if losses.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if grads.len() != losses.len() {
            return Err(Error::DimensionMismatch {
                expected: losses.len(),
                actual: grads.len(),
            });
        }
        let dim = grads[0].len();
        let mut flat = Vec::with_capacity(dim * grads.len());
        for g in &grads {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: g.len(),
                });
            }
            flat.extend_from_slice(g);
        }
        Ok(Self {
            losses,
            grads: flat,
            dim,
        })
    }

    pub(crate) fn from_flat(losses: Vec<f64>, grads: Vec<f64>, dim: usize) -> Self {
        debug_assert_eq!(losses.len() * dim, grads.len());
        Self { losses, grads, dim }
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn grad(&self, j: usize) -> &[f64] {
        &self.grads[j * self.dim..(j + 1) * self.dim]
    }

    pub fn grads(&self) -> impl Iterator<Item = &[f64]> {
        self.grads.chunks_exact(self.dim.max(1))
    }

    /// Largest per-sample gradient norm, the empirical Lipschitz bound.
    pub fn max_grad_norm(&self) -> f64 {
        self.grads().map(linalg::norm).fold(0.0, f64::max)
    }
}

/// Column-per-objective gradients of the dual objectives.
///
/// `theta_grads[i]` is the gradient of objective `i` with respect to `theta`;
/// `eta_grads[i]` its derivative with respect to its own dual scalar (the
/// dual Jacobian is diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveJacobian {
    pub theta_grads: Vec<Vec<f64>>,
    pub eta_grads: Vec<f64>,
}

impl ObjectiveJacobian {
    pub fn new(theta_grads: Vec<Vec<f64>>, eta_grads: Vec<f64>) -> Result<Self> {
        if theta_grads.len() != eta_grads.len() {
            return Err(Error::DimensionMismatch {
                expected: theta_grads.len(),
                actual: eta_grads.len(),
            });
        }
        if let Some(first) = theta_grads.first() {
            let n = first.len();
            if let Some(bad) = theta_grads.iter().find(|c| c.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: bad.len(),
                });
            }
        }
        let finite = theta_grads.iter().all(|c| linalg::all_finite(c)) && linalg::all_finite(&eta_grads);
        if !finite {
            return Err(Error::NonFinite("objective jacobian"));
        }
        Ok(Self {
            theta_grads,
            eta_grads,
        })
    }

    pub fn num_objectives(&self) -> usize {
        self.eta_grads.len()
    }

    pub fn dim(&self) -> usize {
        self.theta_grads.first().map_or(0, Vec::len)
    }

    /// `sum_i w_i * theta_grads[i]`.
    pub fn combine_theta(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (col, wi) in self.theta_grads.iter().zip(w) {
            linalg::axpy(*wi, col, &mut out);
        }
        out
    }

    /// Gram matrix of the theta columns, `G[i][j] = <g_i, g_j>`.
    pub fn theta_gram(&self) -> Vec<Vec<f64>> {
        let m = self.num_objectives();
        let mut gram = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let v = linalg::dot(&self.theta_grads[i], &self.theta_grads[j]);
                gram[i][j] = v;
                gram[j][i] = v;
            }
        }
        gram
    }
}

fn check_nonempty(losses: &[f64]) -> Result<()> {
    if losses.is_empty() {
        Err(Error::EmptyBatch)
    } else {
        Ok(())
    }
}

pub fn conjugate_value(c: Conjugate, t: f64) -> f64 {
    c.value(t)
}

pub fn conjugate_deriv(c: Conjugate, t: f64) -> f64 {
    c.deriv(t)
}

/// `lambda * mean_j f*((l_j - eta) / lambda) + eta`.
pub fn dual_value(ctx: &DualContext, losses: &[f64], eta: f64) -> Result<f64> {
    check_nonempty(losses)?;
    let lambda = ctx.lambda;
    let mean = losses
        .iter()
        .map(|&l| ctx.conjugate.value((l - eta) / lambda))
        .sum::<f64>()
        / losses.len() as f64;
    Ok(lambda * mean + eta)
}

/// `1 - mean_j f*'((l_j - eta) / lambda)`.
pub fn grad_eta(ctx: &DualContext, losses: &[f64], eta: f64) -> Result<f64> {
    check_nonempty(losses)?;
    let mean = losses.iter().map(|&l| ctx.weight(l, eta)).sum::<f64>() / losses.len() as f64;
    Ok(1.0 - mean)
}

/// `mean_j f*'((l_j - eta) / lambda) * grad l_j`.
pub fn grad_theta(ctx: &DualContext, batch: &SampleBatch, eta: f64) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut out = vec![0.0; batch.dim()];
    for (l, g) in batch.losses().iter().zip(batch.grads()) {
        let w = ctx.weight(*l, eta);
        if w != 0.0 {
            linalg::axpy(w, g, &mut out);
        }
    }
    let inv = 1.0 / batch.len() as f64;
    out.iter_mut().for_each(|v| *v *= inv);
    Ok(out)
}

/// Both partial derivatives of one objective, sharing the weight pass.
pub fn grad_pair(ctx: &DualContext, batch: &SampleBatch, eta: f64) -> Result<(Vec<f64>, f64)> {
    let theta = grad_theta(ctx, batch, eta)?;
    let eta_grad = grad_eta(ctx, batch.losses(), eta)?;
    Ok((theta, eta_grad))
}

/// Theta-gradient of `L_hat^i` at rescaled dual `eta_hat`.
pub fn rescaled_grad_theta(ctx: &DualContext, batch: &SampleBatch, eta_hat: f64) -> Result<Vec<f64>> {
    grad_theta(ctx, batch, ctx.rescale() * eta_hat)
}

/// Eta-derivative of `L_hat^i` at rescaled dual `eta_hat` (chain rule factor `G sqrt(m)`).
pub fn rescaled_grad_eta(ctx: &DualContext, losses: &[f64], eta_hat: f64) -> Result<f64> {
    let s = ctx.rescale();
    Ok(s * grad_eta(ctx, losses, s * eta_hat)?)
}

/// Gradients of the rescaled objective `L_hat` for all objectives, one batch each.
pub fn rescaled_grads(ctx: &DualContext, batches: &[SampleBatch], eta_hat: &DualVector) -> Result<ObjectiveJacobian> {
    if batches.len() != eta_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: batches.len(),
            actual: eta_hat.len(),
        });
    }
    let mut theta_grads = Vec::with_capacity(batches.len());
    let mut eta_grads = Vec::with_capacity(batches.len());
    for (batch, &e) in batches.iter().zip(eta_hat.iter()) {
        theta_grads.push(rescaled_grad_theta(ctx, batch, e)?);
        eta_grads.push(rescaled_grad_eta(ctx, batch.losses(), e)?);
    }
    ObjectiveJacobian::new(theta_grads, eta_grads)
}

/// Unrescaled gradients of all objectives at dual `eta`, one batch each.
pub fn dual_grads(ctx: &DualContext, batches: &[SampleBatch], eta: &[f64]) -> Result<ObjectiveJacobian> {
    if batches.len() != eta.len() {
        return Err(Error::DimensionMismatch {
            expected: batches.len(),
            actual: eta.len(),
        });
    }
    let mut theta_grads = Vec::with_capacity(batches.len());
    let mut eta_grads = Vec::with_capacity(batches.len());
    for (batch, &e) in batches.iter().zip(eta) {
        let (t, g) = grad_pair(ctx, batch, e)?;
        theta_grads.push(t);
        eta_grads.push(g);
    }
    ObjectiveJacobian::new(theta_grads, eta_grads)
}

const DUAL_MIN_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 60;

/// Minimizer of `eta -> L(theta, eta)` over the given losses.
///
/// `grad_eta` is nondecreasing in `eta`, so the root is bracketed and
/// bisected. The bracket starts at `[min l - 2 lambda, max l + 2 lambda]`
/// and is doubled outward until the gradient changes sign. A final Newton
/// step on the active set (where the gradient is affine) polishes the root.
pub fn exact_dual_min(ctx: &DualContext, losses: &[f64]) -> Result<f64> {
    check_nonempty(losses)?;
    let g = |eta: f64| grad_eta(ctx, losses, eta).unwrap_or(f64::NAN);

    let (mut lo_l, mut hi_l) = losses
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
    if !(lo_l.is_finite() && hi_l.is_finite()) {
        return Err(Error::BracketFailed);
    }
    if lo_l == hi_l {
        // A point mass: f*'(0) = 1 zeroes the gradient at the common value.
        if g(lo_l).abs() <= DUAL_MIN_TOL {
            return Ok(lo_l);
        }
    }

    let mut width = 2.0 * ctx.lambda;
    let mut lo = lo_l - width;
    let mut hi = hi_l + width;
    let mut doublings = 0;
    while !(g(lo) <= 0.0 && g(hi) >= 0.0) {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BracketFailed);
        }
        width *= 2.0;
        lo_l -= width;
        hi_l += width;
        lo = lo_l;
        hi = hi_l;
        doublings += 1;
    }

    let mut best = (lo, g(lo).abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm.abs() < best.1 {
            best = (mid, gm.abs());
        }
        if gm.abs() <= 1e-14 {
            break;
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gh = g(hi).abs();
    if gh < best.1 {
        best = (hi, gh);
    }

    // Newton polish: on the active set the gradient is affine in eta.
    let eta = best.0;
    let slope = losses
        .iter()
        .filter(|&&l| (l - eta) / ctx.lambda > -2.0)
        .count() as f64
        * ctx.dual_smoothness()
        / losses.len() as f64;
    if slope > 0.0 {
        let cand = eta - g(eta) / slope;
        let gc = g(cand).abs();
        if gc < best.1 {
            best = (cand, gc);
        }
    }

    if best.1 <= DUAL_MIN_TOL {
        Ok(best.0)
    } else {
        Err(Error::BracketFailed)
    }
}

/// Full-batch robust values and gradients of every objective.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiEval {
    pub values: Vec<f64>,
    /// Optimal dual per objective.
    pub etas: Vec<f64>,
    /// Column `i` is `grad phi_i(theta)`.
    pub jacobian: Vec<Vec<f64>>,
}

impl PhiEval {
    /// `sum_i w_i grad phi_i`.
    pub fn combine(&self, w: &[f64]) -> Vec<f64> {
        let n = self.jacobian.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (col, wi) in self.jacobian.iter().zip(w) {
            linalg::axpy(*wi, col, &mut out);
        }
        out
    }
}

/// Exact `phi_i(theta)` and `grad phi_i(theta)` from full-dataset batches.
///
/// Intended for tests and metrics: the cost is linear in the dataset size.
pub fn phi_oracle(ctx: &DualContext, full_batches: &[SampleBatch]) -> Result<PhiEval> {
    let mut values = Vec::with_capacity(full_batches.len());
    let mut etas = Vec::with_capacity(full_batches.len());
    let mut jacobian = Vec::with_capacity(full_batches.len());
    for batch in full_batches {
        let eta = exact_dual_min(ctx, batch.losses())?;
        values.push(dual_value(ctx, batch.losses(), eta)?);
        jacobian.push(grad_theta(ctx, batch, eta)?);
        etas.push(eta);
    }
    Ok(PhiEval {
        values,
        etas,
        jacobian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(lambda: f64) -> DualContext {
        DualContext::new(lambda, 1.0, 1).unwrap()
    }

    #[test]
    fn conjugate_values() {
        let c = Conjugate::CHI_SQUARE;
        assert_eq!(c.value(0.0), 0.0);
        assert_eq!(c.value(-2.0), -1.0);
        assert_eq!(c.value(2.0), 3.0);
        assert_eq!(c.value(-10.0), -1.0);
        assert_eq!(c.deriv(0.0), 1.0);
        assert_eq!(c.deriv(-3.0), 0.0);
        assert_eq!(c.deriv(2.0), 2.0);
        assert_eq!(c.smoothness(), 0.5);
    }

    #[test]
    fn dual_value_examples() {
        let c = ctx(1.0);
        assert_eq!(dual_value(&c, &[1.0], 1.0).unwrap(), 1.0);
        assert_eq!(dual_value(&c, &[1.0], 0.0).unwrap(), 1.25);
        // f*(-1) = -0.75, f*(1) = 1.25, mean 0.25, plus eta = 1.
        assert_eq!(dual_value(&c, &[0.0, 2.0], 1.0).unwrap(), 1.25);
        assert!(matches!(dual_value(&c, &[], 0.0), Err(Error::EmptyBatch)));
    }

    #[test]
    fn grad_eta_examples() {
        let c = ctx(1.0);
        assert_eq!(grad_eta(&c, &[1.0], 1.0).unwrap(), 0.0);
        assert_eq!(grad_eta(&c, &[1.0], 0.0).unwrap(), -0.5);
        assert_eq!(grad_eta(&c, &[-5.0], 0.0).unwrap(), 1.0);
        assert!(grad_eta(&c, &[], 0.0).is_err());
    }

    #[test]
    fn grad_theta_examples() {
        let c = ctx(1.0);
        let b = SampleBatch::new(vec![3.0], vec![vec![1.5, -2.0]]).unwrap();
        assert_eq!(grad_theta(&c, &b, 3.0).unwrap(), vec![1.5, -2.0]);
        let b = SampleBatch::new(vec![1.0], vec![vec![1.5, -2.0]]).unwrap();
        assert_eq!(grad_theta(&c, &b, 3.0).unwrap(), vec![0.0, 0.0]);
        let b = SampleBatch::new(vec![0.0, 2.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(grad_theta(&c, &b, 0.0).unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn batch_shape_errors() {
        assert!(matches!(SampleBatch::new(vec![], vec![]), Err(Error::EmptyBatch)));
        assert!(matches!(
            SampleBatch::new(vec![1.0, 2.0], vec![vec![0.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SampleBatch::new(vec![1.0, 2.0], vec![vec![0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn exact_dual_min_examples() {
        let c = ctx(1.0);
        assert_eq!(exact_dual_min(&c, &[3.7]).unwrap(), 3.7);
        assert_eq!(exact_dual_min(&c, &[-1.2, -1.2, -1.2]).unwrap(), -1.2);
        let eta = exact_dual_min(&c, &[0.0, 2.0]).unwrap();
        assert!((eta - 1.0).abs() < 1e-12, "{eta}");
        assert!(exact_dual_min(&c, &[]).is_err());
        assert!(matches!(
            exact_dual_min(&c, &[f64::NAN]),
            Err(Error::BracketFailed)
        ));
    }

    #[test]
    fn phi_oracle_examples() {
        let c = ctx(1.0);
        let b = SampleBatch::new(vec![2.5], vec![vec![1.0, 2.0]]).unwrap();
        let phi = phi_oracle(&c, &[b]).unwrap();
        assert_eq!(phi.values, vec![2.5]);
        assert_eq!(phi.jacobian[0], vec![1.0, 2.0]);

        let b = SampleBatch::new(vec![0.0, 2.0], vec![vec![1.0], vec![1.0]]).unwrap();
        let phi = phi_oracle(&c, &[b]).unwrap();
        // At eta* = 1 the value is 1.25 (see dual_value_examples).
        assert!((phi.values[0] - 1.25).abs() < 1e-12);
        assert!((phi.etas[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rescaled_examples() {
        // G = 1, m = 1: no rescaling.
        let c = ctx(0.7);
        let b = SampleBatch::new(vec![0.3, 1.1], vec![vec![1.0, 0.0], vec![0.5, 2.0]]).unwrap();
        let eta = 0.4;
        let jac = rescaled_grads(&c, std::slice::from_ref(&b), &DualVector::new(vec![eta]).unwrap()).unwrap();
        assert_eq!(jac.theta_grads[0], grad_theta(&c, &b, eta).unwrap());
        assert_eq!(jac.eta_grads[0], grad_eta(&c, b.losses(), eta).unwrap());

        // G = 2, m = 4, loss equal to the shifted dual: eta gradient vanishes.
        let c = DualContext::new(1.0, 2.0, 4).unwrap();
        let eta_hat = 0.25;
        let b = SampleBatch::new(vec![c.rescale() * eta_hat], vec![vec![1.0]]).unwrap();
        assert_eq!(rescaled_grad_eta(&c, b.losses(), eta_hat).unwrap(), 0.0);

        // eta = 0: theta columns equal the unscaled gradient at zero.
        let b2 = SampleBatch::new(vec![0.9], vec![vec![-1.0]]).unwrap();
        let jac = rescaled_grads(&c, &[b.clone(), b2.clone(), b.clone(), b2.clone()], &DualVector::zeros(4)).unwrap();
        assert_eq!(jac.theta_grads[1], grad_theta(&c, &b2, 0.0).unwrap());
    }

    #[test]
    fn context_validation() {
        assert!(DualContext::new(0.0, 1.0, 1).is_err());
        assert!(DualContext::new(1.0, -1.0, 1).is_err());
        assert!(DualContext::new(1.0, 1.0, 0).is_err());
        assert!(ParamVector::new(vec![f64::NAN]).is_err());
    }
}
