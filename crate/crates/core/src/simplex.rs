//! Preference vectors on the probability simplex.

use std::ops::Deref;

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceVector(Vec<f64>);

impl PreferenceVector {
    /// Validates an existing weight vector without projecting it.
    pub fn try_new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("preference vector must be nonempty"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("preference weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("preference weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        uniform_preference(m)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PreferenceVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn uniform_preference(m: usize) -> Result<PreferenceVector> {
    if m == 0 {
        return Err(Error::invalid("number of objectives must be at least 1"));
    }
    Ok(PreferenceVector(vec![1.0 / m as f64; m]))
}

/// Euclidean projection onto `{w : w >= 0, sum w = 1}`.
///
/// Sort descending, find the largest `rho` with
/// `u_rho - (sum_{j<=rho} u_j - 1) / rho > 0`, shift by that threshold and
/// clamp at zero.
pub fn project_simplex(v: &[f64]) -> Result<PreferenceVector> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("simplex projection input"));
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }

    let mut w: Vec<f64> = v.iter().map(|x| (x - tau).max(0.0)).collect();
    // The threshold is exact in real arithmetic; absorb rounding on the support.
    let sum: f64 = w.iter().sum();
    if sum > 0.0 && sum != 1.0 {
        w.iter_mut().for_each(|x| *x /= sum);
    }
    Ok(PreferenceVector(w))
}
