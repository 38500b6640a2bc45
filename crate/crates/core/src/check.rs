//! Runtime invariant suite.
//!
//! Every check draws its probes from a dedicated [`Role::Probe`] stream so
//! the suite is deterministic. A check reports the worst value it observed
//! next to the tolerance it was held to.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dro::{self, DualContext, DualVector, SampleBatch};
use crate::error::Result;
use crate::linalg;
use crate::metrics::{self, FrontierPoint};
use crate::oracle;
use crate::problems::{gen_linear, gen_logistic, linspace, LinearSpec, MultiTaskProblem, ToySpec};
use crate::rng::{self, Role, Stream};
use crate::simplex::project_simplex;

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Flip the sign of the dual gradient under test. The finite-difference
    /// check must catch it.
    pub inject_grad_eta_sign_bug: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst error (or most negative slack) seen.
    pub observed: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} observed={:.3e} tol={:.1e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.tolerance,
            self.detail
        )
    }
}

/// Largest error must stay at or below `tol`.
fn error_result(name: &'static str, worst: f64, tol: f64, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        observed: worst,
        tolerance: tol,
        detail,
    }
}

/// Smallest slack must stay at or above `-tol`.
fn slack_result(name: &'static str, worst: f64, tol: f64, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed: worst >= -tol,
        observed: worst,
        tolerance: tol,
        detail,
    }
}

fn probe(seed: u64, id: usize) -> Stream {
    rng::stream(seed, Role::Probe, id)
}

fn normal(r: &mut Stream) -> f64 {
    r.sample::<f64, _>(StandardNormal)
}

fn random_weights(r: &mut Stream, m: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| -r.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn small_linear(seed: u64) -> Result<MultiTaskProblem> {
    Ok(gen_linear(&LinearSpec {
        samples: 200,
        ..LinearSpec::standard(seed)
    })?
    .problem)
}

fn small_logistic(seed: u64) -> Result<MultiTaskProblem> {
    gen_logistic(&LinearSpec {
        samples: 200,
        ..LinearSpec::standard(seed)
    })
}

/// Projection vs exhaustive support enumeration on `count` vectors, `m <= 5`.
pub fn simplex_oracle(seed: u64, count: usize) -> Result<CheckResult> {
    let mut r = probe(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let m = r.random_range(1..=5);
        let v: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let fast = project_simplex(&v)?;
        let slow = oracle::simplex_projection_exhaustive(&v)?;
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(error_result("simplex_oracle", worst, 1e-8, format!("{count} vectors")))
}

/// `exact_dual_min` zeroes the dual gradient, beats random probes and
/// agrees with the sort-based closed form.
pub fn dual_min_oracle(seed: u64, count: usize) -> Result<CheckResult> {
    let mut r = probe(seed, 2);
    let mut worst_grad: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    for _ in 0..count {
        let lambda = [0.5, 1.0, 2.0][r.random_range(0..3)];
        let ctx = DualContext::new(lambda, 1.0, 1)?;
        let n = r.random_range(1..=50);
        let scale = r.random_range(0.1..20.0);
        let losses: Vec<f64> = (0..n).map(|_| scale * r.random::<f64>()).collect();
        let eta = dro::exact_dual_min(&ctx, &losses)?;
        worst_grad = worst_grad.max(dro::grad_eta(&ctx, &losses, eta)?.abs());
        let best = dro::dual_value(&ctx, &losses, eta)?;
        let (lo, hi) = (-5.0 * lambda, scale + 5.0 * lambda);
        for _ in 0..100 {
            let p = r.random_range(lo..hi);
            let v = dro::dual_value(&ctx, &losses, p)?;
            worst_gap = worst_gap.max(best - v);
        }
        let closed = oracle::chi_square_dual_min(&ctx, &losses)?;
        worst_closed = worst_closed.max((closed - eta).abs() / (1.0 + eta.abs()));
        let direct = oracle::chi_square_dual_value(lambda, &losses, eta);
        worst_closed = worst_closed.max((direct - best).abs() / (1.0 + best.abs()));
    }
    let worst = worst_grad.max(worst_gap.max(0.0) * 1e-2).max(worst_closed * 1e-2);
    Ok(CheckResult {
        name: "dual_min_oracle",
        passed: worst_grad <= 1e-10 && worst_gap <= 1e-12 && worst_closed <= 1e-8,
        observed: worst,
        tolerance: 1e-10,
        detail: format!(
            "{count} vectors; max|grad|={worst_grad:.2e} probe gap={worst_gap:.2e} closed-form={worst_closed:.2e}"
        ),
    })
}

/// A random point for gradient checks: batch, dual value and temperature,
/// with every sample at least 0.1 away from the conjugate kink.
struct FdPoint {
    ctx: DualContext,
    objective: usize,
    indices: Vec<usize>,
    theta: Vec<f64>,
    eta: f64,
}

fn fd_point(problem: &MultiTaskProblem, r: &mut Stream) -> Result<FdPoint> {
    let m = problem.num_objectives();
    loop {
        let lambda = [0.5, 1.0, 2.0][r.random_range(0..3)];
        let theta: Vec<f64> = (0..problem.dim()).map(|_| 0.5 * normal(r)).collect();
        let objective = r.random_range(0..m);
        let indices: Vec<usize> = (0..8).map(|_| r.random_range(0..problem.dataset_size(objective))).collect();
        let losses: Vec<f64> = indices.iter().map(|&j| problem.sample_loss(objective, j, &theta)).collect();
        let pivot = losses[r.random_range(0..losses.len())];
        let eta = pivot + r.random_range(-2.0 * lambda..2.0 * lambda);
        if losses.iter().all(|l| ((l - eta) / lambda + 2.0).abs() > 0.1) {
            let g = problem.estimate_lipschitz(&theta).max(1e-3);
            return Ok(FdPoint {
                ctx: DualContext::new(lambda, g, m)?,
                objective,
                indices,
                theta,
                eta,
            });
        }
    }
}

fn point_losses(problem: &MultiTaskProblem, p: &FdPoint, theta: &[f64]) -> Vec<f64> {
    p.indices.iter().map(|&j| problem.sample_loss(p.objective, j, theta)).collect()
}

fn point_batch(problem: &MultiTaskProblem, p: &FdPoint) -> Result<SampleBatch> {
    let mut grads = Vec::with_capacity(p.indices.len());
    let mut losses = Vec::with_capacity(p.indices.len());
    for &j in &p.indices {
        let mut g = vec![0.0; problem.dim()];
        losses.push(problem.sample_loss_grad(p.objective, j, &p.theta, &mut g));
        grads.push(g);
    }
    SampleBatch::new(losses, grads)
}

fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, b)| a - b).collect();
    let scale = linalg::norm(analytic).max(linalg::norm(numeric)).max(1e-6);
    linalg::norm(&diff) / scale
}

const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;

/// Finite-difference agreement of the dual gradients on one problem.
///
/// Returns the worst relative errors of `(grad_eta, grad_theta, rescaled)`.
pub fn fd_errors(problem: &MultiTaskProblem, seed: u64, count: usize, flip_grad_eta: bool) -> Result<[f64; 3]> {
    let mut r = probe(seed, 3);
    let mut worst = [0.0f64; 3];
    let sign = if flip_grad_eta { -1.0 } else { 1.0 };
    for _ in 0..count {
        let p = fd_point(problem, &mut r)?;
        let ctx = &p.ctx;
        let losses = point_losses(problem, &p, &p.theta);
        let batch = point_batch(problem, &p)?;

        let an = sign * dro::grad_eta(ctx, &losses, p.eta)?;
        let fd = oracle::central_difference(|e| dro::dual_value(ctx, &losses, e).unwrap(), p.eta, FD_STEP);
        worst[0] = worst[0].max(rel_err(&[an], &[fd]));

        let an = dro::grad_theta(ctx, &batch, p.eta)?;
        let value_at = |t: &[f64]| dro::dual_value(ctx, &point_losses(problem, &p, t), p.eta).unwrap();
        let fd = oracle::fd_gradient(value_at, &p.theta, FD_STEP);
        worst[1] = worst[1].max(rel_err(&an, &fd));

        let s = ctx.rescale();
        let eta_hat = p.eta / s;
        let mut an = dro::rescaled_grad_theta(ctx, &batch, eta_hat)?;
        an.push(dro::rescaled_grad_eta(ctx, &losses, eta_hat)?);
        let hat_at = |t: &[f64], e: f64| dro::dual_value(ctx, &point_losses(problem, &p, t), s * e).unwrap();
        let mut fd = oracle::fd_gradient(|t| hat_at(t, eta_hat), &p.theta, FD_STEP);
        // The eta coordinate is scaled by s, so shrink the step to match.
        fd.push(oracle::central_difference(|e| hat_at(&p.theta, e), eta_hat, FD_STEP / s));
        worst[2] = worst[2].max(rel_err(&an, &fd));
    }
    Ok(worst)
}

/// Gradient checks on the synthetic linear and logistic problems.
pub fn fd_checks(seed: u64, count: usize, flip_grad_eta: bool) -> Result<Vec<CheckResult>> {
    let lin = fd_errors(&small_linear(seed)?, seed, count, flip_grad_eta)?;
    let log = fd_errors(&small_logistic(seed)?, seed ^ 1, count, flip_grad_eta)?;
    let names = ["fd_grad_eta", "fd_grad_theta", "fd_rescaled"];
    Ok((0..3)
        .map(|k| {
            error_result(
                names[k],
                lin[k].max(log[k]),
                FD_TOL,
                format!("{count} points per problem; linear={:.2e} logistic={:.2e}", lin[k], log[k]),
            )
        })
        .collect())
}

/// Anchors for a quadratic instance with samples uniform in `[-1, 1]^n`.
fn box_anchors(r: &mut Stream, count: usize, n: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|_| r.random_range(-1.0..=1.0)).collect()).collect()
}

fn box_point(r: &mut Stream, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..=1.0)).collect()
}

/// Semi-smoothness on `0.5 ||theta - a||^2` tasks over `[-1, 1]^3`, where
/// `G = 2 sqrt(3)` and `L = 1`:
/// `||grad phi(theta) - grad_theta(theta', eta*_theta)|| <= L0 ||theta - theta'||`.
pub fn semi_smoothness(seed: u64, count: usize) -> Result<CheckResult> {
    let mut r = probe(seed, 4);
    let n = 3;
    let g = 2.0 * (n as f64).sqrt();
    let tasks = [box_anchors(&mut r, 40, n), box_anchors(&mut r, 25, n)];
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let lambda = [0.5, 1.0, 2.0][r.random_range(0..3)];
        let ctx = DualContext::new(lambda, g, 2)?;
        let l0 = g * g * ctx.conjugate.smoothness() / lambda + 1.0;
        let theta = box_point(&mut r, n);
        let theta2 = box_point(&mut r, n);
        let dist = linalg::norm(&theta.iter().zip(&theta2).map(|(a, b)| a - b).collect::<Vec<_>>());
        for anchors in &tasks {
            let here = oracle::quadratic_batch(anchors, &theta)?;
            let phi = dro::phi_oracle(&ctx, std::slice::from_ref(&here))?;
            let there = oracle::quadratic_batch(anchors, &theta2)?;
            let moved = dro::grad_theta(&ctx, &there, phi.etas[0])?;
            let gap: Vec<f64> = phi.jacobian[0].iter().zip(&moved).map(|(a, b)| a - b).collect();
            worst = worst.min(l0 * dist - linalg::norm(&gap));
        }
    }
    Ok(slack_result("semi_smoothness", worst, 1e-8, format!("{count} pairs, 2 tasks")))
}

fn phi_1d(ctx: &DualContext, anchors: &[Vec<f64>], t: f64) -> Result<(f64, f64)> {
    let b = oracle::quadratic_batch(anchors, &[t])?;
    let e = dro::phi_oracle(ctx, std::slice::from_ref(&b))?;
    Ok((e.values[0], e.jacobian[0][0]))
}

/// Gradient-domination inequality on a one-dimensional quadratic instance:
/// `|phi'|^2 <= 2 L0 (phi - phi*) (|phi'| + 1)`, with `phi*` from a grid
/// search refined by golden section.
pub fn descent_inequality(seed: u64, count: usize) -> Result<CheckResult> {
    let mut r = probe(seed, 5);
    let anchors = box_anchors(&mut r, 30, 1);
    let g = 2.0;
    let mut worst = f64::INFINITY;
    for lambda in [0.5, 1.0, 2.0] {
        let ctx = DualContext::new(lambda, g, 1)?;
        let l0 = g * g * ctx.conjugate.smoothness() / lambda + 1.0;
        let grid = linspace(-1.0, 1.0, 401);
        let mut best = (f64::INFINITY, 0.0);
        for &t in &grid {
            let v = phi_1d(&ctx, &anchors, t)?.0;
            if v < best.0 {
                best = (v, t);
            }
        }
        let (mut a, mut b) = ((best.1 - 0.005f64).max(-1.0), (best.1 + 0.005f64).min(1.0));
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - golden * (b - a);
            let d = a + golden * (b - a);
            if phi_1d(&ctx, &anchors, c)?.0 < phi_1d(&ctx, &anchors, d)?.0 {
                b = d;
            } else {
                a = c;
            }
        }
        let phi_star = best.0.min(phi_1d(&ctx, &anchors, 0.5 * (a + b))?.0);
        for _ in 0..count / 3 {
            let t = r.random_range(-1.0..=1.0);
            let (v, d) = phi_1d(&ctx, &anchors, t)?;
            let rhs = 2.0 * l0 * (v - phi_star) * (d.abs() + 1.0);
            worst = worst.min(rhs - d * d);
        }
    }
    Ok(slack_result("descent_inequality", worst, 1e-6, format!("{} points, 1-d instance", count / 3 * 3)))
}

/// A random probe on the linear task: `theta`, per-objective duals near the
/// loss range, simplex weights and the empirical Lipschitz bound.
struct LinearProbe {
    eta: Vec<f64>,
    w: Vec<f64>,
    ctx: DualContext,
    batches: Vec<SampleBatch>,
}

fn linear_probe(problem: &MultiTaskProblem, r: &mut Stream) -> Result<LinearProbe> {
    let m = problem.num_objectives();
    let lambda = [0.5, 1.0, 2.0][r.random_range(0..3)];
    let theta: Vec<f64> = (0..problem.dim()).map(|_| normal(r)).collect();
    let batches = problem.full_batches(&theta);
    let eta = batches
        .iter()
        .map(|b| {
            let mean = b.losses().iter().sum::<f64>() / b.len() as f64;
            mean * r.random_range(0.0..2.0) + r.random_range(-2.0..2.0)
        })
        .collect();
    let w = random_weights(r, m);
    let g = problem.estimate_lipschitz(&theta);
    Ok(LinearProbe {
        eta,
        w,
        ctx: DualContext::new(lambda, g, m)?,
        batches,
    })
}

/// Both inequalities linking the robust balanced gradient, the surrogate
/// and the rescaled joint gradient.
pub fn stationarity_chain(seed: u64, count: usize) -> Result<CheckResult> {
    let problem = small_linear(seed)?;
    let mut r = probe(seed, 6);
    let mut worst_upper = f64::INFINITY;
    let mut worst_rescaled = f64::INFINITY;
    for _ in 0..count {
        let p = linear_probe(&problem, &mut r)?;
        let g = p.ctx.lipschitz_g;
        let phi = dro::phi_oracle(&p.ctx, &p.batches)?;
        let jac = dro::dual_grads(&p.ctx, &p.batches, &p.eta)?;
        let sur = metrics::surrogate_stationarity(&jac, &p.w, g)?;
        worst_upper = worst_upper.min(sur - linalg::norm(&phi.combine(&p.w)));

        let s = p.ctx.rescale();
        let eta_hat = DualVector::new(p.eta.iter().map(|e| e / s).collect())?;
        let hat = dro::rescaled_grads(&p.ctx, &p.batches, &eta_hat)?;
        let mut stacked = hat.combine_theta(&p.w);
        stacked.extend(hat.eta_grads.iter().zip(&p.w).map(|(e, w)| e * w));
        let lhs = 2f64.sqrt() * linalg::norm(&stacked);
        let dual: f64 = jac.eta_grads.iter().zip(&p.w).map(|(e, w)| (e * w).abs()).sum();
        let rhs = linalg::norm(&jac.combine_theta(&p.w)) + g * dual;
        worst_rescaled = worst_rescaled.min(lhs - rhs);
    }
    Ok(slack_result(
        "stationarity_chain",
        worst_upper.min(worst_rescaled),
        1e-8,
        format!("{count} probes; surrogate slack={worst_upper:.2e} rescaled slack={worst_rescaled:.2e}"),
    ))
}

/// `||d_theta L_hat_i|| <= G + |d_eta L_hat_i|` with `G` the empirical bound.
pub fn gradient_coupling(seed: u64, count: usize) -> Result<CheckResult> {
    let problem = small_linear(seed)?;
    let mut r = probe(seed, 7);
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let p = linear_probe(&problem, &mut r)?;
        let s = p.ctx.rescale();
        for (b, e) in p.batches.iter().zip(&p.eta) {
            let gt = dro::rescaled_grad_theta(&p.ctx, b, e / s)?;
            let ge = dro::rescaled_grad_eta(&p.ctx, b.losses(), e / s)?;
            worst = worst.min(p.ctx.lipschitz_g + ge.abs() - linalg::norm(&gt));
        }
    }
    Ok(slack_result("gradient_coupling", worst, 1e-8, format!("{count} probes")))
}

/// `||grad_theta(theta, eta) - grad phi(theta)|| <= G |grad_eta(theta, eta)|`.
pub fn bias_bound(seed: u64, count: usize) -> Result<CheckResult> {
    let problem = small_linear(seed)?;
    let mut r = probe(seed, 8);
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let p = linear_probe(&problem, &mut r)?;
        let phi = dro::phi_oracle(&p.ctx, &p.batches)?;
        let jac = dro::dual_grads(&p.ctx, &p.batches, &p.eta)?;
        for i in 0..jac.num_objectives() {
            let gap: Vec<f64> = jac.theta_grads[i].iter().zip(&phi.jacobian[i]).map(|(a, b)| a - b).collect();
            worst = worst.min(p.ctx.lipschitz_g * jac.eta_grads[i].abs() - linalg::norm(&gap));
        }
    }
    Ok(slack_result("bias_bound", worst, 1e-8, format!("{count} probes")))
}

/// `pareto_filter` equals the pairwise filter on random point sets.
pub fn pareto_oracle(seed: u64, count: usize) -> Result<CheckResult> {
    let mut r = probe(seed, 9);
    let mut mismatches = 0usize;
    for _ in 0..count {
        let k = r.random_range(1..=200);
        let m = r.random_range(1..=4);
        // Coarse values in half the sets force ties and duplicates.
        let coarse = r.random::<bool>();
        let pts: Vec<FrontierPoint> = (0..k)
            .map(|j| {
                let values = (0..m)
                    .map(|_| {
                        if coarse {
                            r.random_range(0..6) as f64
                        } else {
                            r.random::<f64>()
                        }
                    })
                    .collect();
                FrontierPoint::new(vec![j as f64], values)
            })
            .collect();
        if metrics::pareto_filter(&pts)? != oracle::pareto_brute_force(&pts) {
            mismatches += 1;
        }
    }
    Ok(error_result("pareto_oracle", mismatches as f64, 0.0, format!("{count} sets")))
}

/// Full-batch dual descent at `gamma = lambda / M` from `eta = 0`: the
/// gradient magnitude never grows and falls below `1e-3` within 500 steps.
pub fn inner_loop_progress(seed: u64, count: usize) -> Result<CheckResult> {
    let problem = small_linear(seed)?;
    let mut r = probe(seed, 10);
    let mut worst_growth: f64 = 0.0;
    let mut worst_final: f64 = 0.0;
    for _ in 0..count {
        let p = linear_probe(&problem, &mut r)?;
        let gamma = 1.0 / p.ctx.dual_smoothness();
        for b in &p.batches {
            let mut eta = 0.0;
            let mut prev = f64::INFINITY;
            let mut last = 0.0;
            for _ in 0..500 {
                let g = dro::grad_eta(&p.ctx, b.losses(), eta)?;
                worst_growth = worst_growth.max(g.abs() - prev);
                prev = g.abs();
                last = g.abs();
                eta -= gamma * g;
            }
            worst_final = worst_final.max(last);
        }
    }
    Ok(CheckResult {
        name: "inner_loop_progress",
        passed: worst_growth <= 1e-12 && worst_final <= 1e-3,
        observed: worst_final,
        tolerance: 1e-3,
        detail: format!("{count} frozen points; max growth={worst_growth:.2e}"),
    })
}

/// Per-sample variance of the rescaled theta-gradient against
/// `K0 + K1 |d_eta L_hat|^2` with `K0 = 8 G^2 + 10 G^2 M^2 kappa^2 / lambda^2`
/// and `K1 = 8 / m`.
pub fn affine_variance(seed: u64, count: usize) -> Result<CheckResult> {
    let problem = small_linear(seed)?;
    let mut r = probe(seed, 11);
    let mut worst = f64::INFINITY;
    let draws = 1000;
    for _ in 0..count {
        let p = linear_probe(&problem, &mut r)?;
        let ctx = &p.ctx;
        let s = ctx.rescale();
        let m = ctx.num_objectives as f64;
        let big_m = ctx.conjugate.smoothness();
        let g = ctx.lipschitz_g;
        for (i, b) in p.batches.iter().enumerate() {
            let eta_hat = p.eta[i] / s;
            let n = b.len() as f64;
            let mean = b.losses().iter().sum::<f64>() / n;
            let kappa2 = b.losses().iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
            let k0 = 8.0 * g * g + 10.0 * g * g * big_m * big_m * kappa2 / (ctx.lambda * ctx.lambda);
            let ge = dro::rescaled_grad_eta(ctx, b.losses(), eta_hat)?;
            let bound = k0 + 8.0 / m * ge * ge;

            let mut samples = Vec::with_capacity(draws);
            for _ in 0..draws {
                let j = r.random_range(0..b.len());
                let one = SampleBatch::new(vec![b.losses()[j]], vec![b.grad(j).to_vec()])?;
                samples.push(dro::rescaled_grad_theta(ctx, &one, eta_hat)?);
            }
            let mut centre = vec![0.0; problem.dim()];
            for v in &samples {
                linalg::axpy(1.0 / draws as f64, v, &mut centre);
            }
            let var = samples
                .iter()
                .map(|v| v.iter().zip(&centre).map(|(a, c)| (a - c) * (a - c)).sum::<f64>())
                .sum::<f64>()
                / (draws - 1) as f64;
            worst = worst.min((bound - var) / bound);
        }
    }
    Ok(slack_result("affine_variance", worst, 0.0, format!("{count} points, {draws} resamples each")))
}

/// Robust and nominal toy frontiers coincide without noise and differ with it.
pub fn toy_frontier(seed: u64) -> Result<CheckResult> {
    let grid = linspace(-1.0, 3.0, 81);
    let flat = metrics::robust_frontier(&ToySpec::nominal(0.0, grid.clone())?, 50, 1.0, seed)?;
    let same = flat.nominal.len() == flat.robust.len()
        && flat.nominal.iter().zip(&flat.robust).all(|(a, b)| {
            a.theta == b.theta && a.values.iter().zip(&b.values).all(|(x, y)| (x - y).abs() <= 1e-9)
        });
    let noisy = metrics::robust_frontier(&ToySpec::nominal(0.5, grid)?, 50, 1.0, seed)?;
    let differ = noisy.nominal != noisy.robust;
    Ok(CheckResult {
        name: "toy_frontier",
        passed: same && differ,
        observed: if same && differ { 0.0 } else { 1.0 },
        tolerance: 0.0,
        detail: format!("std=0 coincide: {same}; std=0.5 differ: {differ}"),
    })
}

/// Runs every check. Errors inside a check count as failures.
pub fn run_checks(opts: &CheckOptions) -> Vec<CheckResult> {
    let s = opts.seed;
    let mut out = Vec::new();
    let mut push = |name: &'static str, r: Result<CheckResult>| {
        out.push(r.unwrap_or_else(|e| CheckResult {
            name,
            passed: false,
            observed: f64::NAN,
            tolerance: 0.0,
            detail: format!("error: {e}"),
        }))
    };
    push("simplex_oracle", simplex_oracle(s, 1000));
    push("dual_min_oracle", dual_min_oracle(s, 200));
    match fd_checks(s, 100, opts.inject_grad_eta_sign_bug) {
        Ok(v) => v.into_iter().for_each(|c| push(c.name, Ok(c))),
        Err(e) => push("fd_gradients", Err(e)),
    }
    push("semi_smoothness", semi_smoothness(s, 500));
    push("descent_inequality", descent_inequality(s, 300));
    push("stationarity_chain", stationarity_chain(s, 200));
    push("gradient_coupling", gradient_coupling(s, 200));
    push("bias_bound", bias_bound(s, 200));
    push("pareto_oracle", pareto_oracle(s, 1000));
    push("inner_loop_progress", inner_loop_progress(s, 20));
    push("affine_variance", affine_variance(s, 10));
    push("toy_frontier", toy_frontier(s));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_suite_passes() {
        let results = run_checks(&CheckOptions::default());
        assert!(results.len() >= 10);
        for r in &results {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn injected_sign_bug_is_caught() {
        let results = fd_checks(0, 20, true).unwrap();
        let eta = results.iter().find(|r| r.name == "fd_grad_eta").unwrap();
        assert!(!eta.passed);
        assert!(results.iter().filter(|r| r.name != "fd_grad_eta").all(|r| r.passed));
    }
}
