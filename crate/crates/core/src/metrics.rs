//! Stationarity measures and Pareto filtering.

use crate::dro::{self, DualContext, ObjectiveJacobian};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::{perturb_toy, toy_objectives, ToySpec};

fn check_weights(jac: &ObjectiveJacobian, w: &[f64]) -> Result<()> {
    if jac.num_objectives() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: jac.num_objectives(),
            actual: w.len(),
        });
    }
    Ok(())
}

/// `||sum_i w_i theta_grads_i||`.
pub fn balanced_grad_norm(jac: &ObjectiveJacobian, w: &[f64]) -> Result<f64> {
    check_weights(jac, w)?;
    Ok(linalg::norm(&jac.combine_theta(w)))
}

/// `G sum_i w_i |eta_grads_i| + ||sum_i w_i theta_grads_i||`.
///
/// Upper-bounds `||grad Phi(theta) w||` at any dual point.
pub fn surrogate_stationarity(jac: &ObjectiveJacobian, w: &[f64], lipschitz_g: f64) -> Result<f64> {
    check_weights(jac, w)?;
    if lipschitz_g.is_nan() || lipschitz_g <= 0.0 {
        return Err(Error::invalid("G must be positive"));
    }
    let dual: f64 = w.iter().zip(&jac.eta_grads).map(|(wi, g)| wi * g.abs()).sum();
    Ok(lipschitz_g * dual + linalg::norm(&jac.combine_theta(w)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
}

impl FrontierPoint {
    pub fn new(theta: Vec<f64>, values: Vec<f64>) -> Self {
        Self { theta, values }
    }
}

/// `a` dominates `b`: no worse anywhere, strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Non-dominated points in input order, one representative per duplicate
/// value vector (the first occurrence).
pub fn pareto_filter(points: &[FrontierPoint]) -> Result<Vec<FrontierPoint>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let m = first.values.len();
    if let Some(bad) = points.iter().find(|p| p.values.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: bad.values.len(),
        });
    }

    // Sweep in lexicographic order: a point can only be dominated by one
    // that precedes it, so compare against the running front.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .values
            .iter()
            .zip(&points[b].values)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(a.cmp(&b))
    });
    let mut front: Vec<usize> = Vec::new();
    for idx in order {
        let v = &points[idx].values;
        let beaten = front
            .iter()
            .any(|&f| dominates(&points[f].values, v) || points[f].values == *v);
        if !beaten {
            front.push(idx);
        }
    }
    front.sort_unstable();
    Ok(front.into_iter().map(|i| points[i].clone()).collect())
}

/// Nominal and robust Pareto frontiers of the toy problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyFrontiers {
    pub nominal: Vec<FrontierPoint>,
    pub robust: Vec<FrontierPoint>,
}

/// Frontiers of the toy problem over `spec.grid`.
///
/// Nominal values come from [`toy_objectives`]. Robust values treat the
/// objective under `draws` perturbed specs as a loss sample and take the
/// regularized dual at its exact minimizer.
pub fn robust_frontier(spec: &ToySpec, draws: usize, lambda: f64, seed: u64) -> Result<ToyFrontiers> {
    if spec.grid.is_empty() {
        return Err(Error::invalid("toy grid must be nonempty"));
    }
    if draws == 0 {
        return Err(Error::invalid("at least one perturbation draw is required"));
    }
    let ctx = DualContext::new(lambda, 1.0, 2)?;
    let perturbed: Vec<ToySpec> = (0..draws as u64)
        .map(|k| perturb_toy(spec, seed.wrapping_add(k)))
        .collect();

    let mut nominal = Vec::with_capacity(spec.grid.len());
    let mut robust = Vec::with_capacity(spec.grid.len());
    let mut f1 = vec![0.0; draws];
    let mut f2 = vec![0.0; draws];
    for &theta in &spec.grid {
        let (a, b) = toy_objectives(spec, theta);
        nominal.push(FrontierPoint::new(vec![theta], vec![a, b]));
        for (k, p) in perturbed.iter().enumerate() {
            (f1[k], f2[k]) = toy_objectives(p, theta);
        }
        let r1 = dro::dual_value(&ctx, &f1, dro::exact_dual_min(&ctx, &f1)?)?;
        let r2 = dro::dual_value(&ctx, &f2, dro::exact_dual_min(&ctx, &f2)?)?;
        robust.push(FrontierPoint::new(vec![theta], vec![r1, r2]));
    }
    Ok(ToyFrontiers {
        nominal: pareto_filter(&nominal)?,
        robust: pareto_filter(&robust)?,
    })
}
