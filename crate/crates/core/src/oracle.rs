//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here is on a solver's hot path. Each routine solves its problem
//! by a method that shares no code with the production version.

use crate::dro::{DualContext, SampleBatch};
use crate::error::{Error, Result};
use crate::metrics::FrontierPoint;

/// Central difference `(f(x + h) - f(x - h)) / 2h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central-difference gradient of `f` at `x`, one coordinate at a time.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Euclidean projection onto the simplex by enumerating every support set.
///
/// For a support `S` the KKT system gives `w_S = v_S - tau` with
/// `tau = (sum v_S - 1) / |S|`. A support is feasible when `w_S > 0` and
/// `v_j <= tau` off the support; among feasible supports the closest point
/// to `v` wins. Exponential in `m`, so keep `m` small.
pub fn simplex_projection_exhaustive(v: &[f64]) -> Result<Vec<f64>> {
    let m = v.len();
    if m == 0 {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    if m > 20 {
        return Err(Error::invalid("exhaustive projection is limited to 20 coordinates"));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << m) {
        let size = mask.count_ones() as f64;
        let sum: f64 = (0..m).filter(|&j| mask >> j & 1 == 1).map(|j| v[j]).sum();
        let tau = (sum - 1.0) / size;
        let w: Vec<f64> = (0..m)
            .map(|j| if mask >> j & 1 == 1 { v[j] - tau } else { 0.0 })
            .collect();
        let feasible = (0..m).all(|j| {
            if mask >> j & 1 == 1 {
                w[j] >= -1e-12
            } else {
                v[j] <= tau + 1e-12
            }
        });
        if !feasible {
            continue;
        }
        let dist: f64 = w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, w));
        }
    }
    best.map(|(_, w)| w).ok_or_else(|| Error::invalid("no feasible support"))
}

/// Minimizer of the chi-square dual in closed form.
///
/// With the `k` largest losses active, stationarity reads
/// `sum_{top k} ((l_j - eta) / lambda + 2) = 2 N`, so
/// `eta = (S_k + 2 lambda (k - N)) / k`. The right `k` is the one whose
/// root keeps exactly the top `k` losses above `eta - 2 lambda`.
pub fn chi_square_dual_min(ctx: &DualContext, losses: &[f64]) -> Result<f64> {
    if losses.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut sorted = losses.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len() as f64;
    let lam = ctx.lambda;
    let mut prefix = 0.0;
    for (k0, &l) in sorted.iter().enumerate() {
        prefix += l;
        let k = (k0 + 1) as f64;
        let eta = (prefix + 2.0 * lam * (k - n)) / k;
        let cut = eta - 2.0 * lam;
        let top_active = l > cut || (l - cut).abs() <= 1e-12 * (1.0 + l.abs());
        let rest_inactive = sorted.get(k0 + 1).is_none_or(|&next| next <= cut + 1e-12 * (1.0 + next.abs()));
        if top_active && rest_inactive {
            return Ok(eta);
        }
    }
    Err(Error::BracketFailed)
}

/// Dual value by direct summation, independent of [`crate::dro::dual_value`].
pub fn chi_square_dual_value(lambda: f64, losses: &[f64], eta: f64) -> f64 {
    let mean = losses
        .iter()
        .map(|l| {
            let t = ((l - eta) / lambda + 2.0).max(0.0);
            0.25 * t * t - 1.0
        })
        .sum::<f64>()
        / losses.len() as f64;
    lambda * mean + eta
}

/// Pairwise O(k^2) non-dominated filter; keeps the first of equal points.
pub fn pareto_brute_force(points: &[FrontierPoint]) -> Vec<FrontierPoint> {
    let dominated = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y) && a != b;
    points
        .iter()
        .enumerate()
        .filter(|(k, p)| {
            let beaten = points.iter().any(|q| dominated(&q.values, &p.values));
            let repeat = points[..*k].iter().any(|q| q.values == p.values);
            !beaten && !repeat
        })
        .map(|(_, p)| p.clone())
        .collect()
}

/// Per-sample losses `0.5 ||theta - a_j||^2` and gradients `theta - a_j`.
pub fn quadratic_batch(anchors: &[Vec<f64>], theta: &[f64]) -> Result<SampleBatch> {
    let losses = anchors
        .iter()
        .map(|a| 0.5 * a.iter().zip(theta).map(|(x, t)| (t - x) * (t - x)).sum::<f64>())
        .collect();
    let grads = anchors
        .iter()
        .map(|a| theta.iter().zip(a).map(|(t, x)| t - x).collect())
        .collect();
    SampleBatch::new(losses, grads)
}
