//! Conditional expectation of a function of an X-factor given the latest
//! value of its information process.

use crate::error::{invalid, Error, Result};
use crate::infoflow::XFactor;

/// Posterior weights over the factor's support given `xi_ij`, evaluated in
/// log space with max subtraction.
pub fn posterior_weights(factor: &XFactor, xi: f64, sigma: f64, t_i: f64, t_j: f64) -> Result<Vec<f64>> {
    if !(t_i >= 0.0 && t_i < t_j) {
        return Err(invalid("infoflow", "t_i", format!("need 0 <= t_i < t_j, got t_i = {t_i}, t_j = {t_j}")));
    }
    let scale = t_j / (t_j - t_i);
    let s = &factor.support;
    let logs: Vec<f64> = s
        .points
        .iter()
        .zip(&s.log_weights)
        .map(|(&x, &lw)| lw + scale * (sigma * x * xi - 0.5 * sigma * sigma * x * x * t_i))
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonIntegrable(format!("log-weight maximum {max} at xi = {xi}")));
    }
    let mut w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NonIntegrable(format!("normaliser {total} at xi = {xi}")));
    }
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// `E[f(X_j) | xi_ij]`. The result is a convex combination of `f` over the
/// support and is clamped to `[min f, max f]` against rounding.
pub fn filter_expect<F: Fn(f64) -> f64>(f: F, factor: &XFactor, xi: f64, sigma: f64, t_i: f64, t_j: f64) -> Result<f64> {
    let w = posterior_weights(factor, xi, sigma, t_i, t_j)?;
    let values: Vec<f64> = factor.support.points.iter().map(|&x| f(x)).collect();
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let e: f64 = w.iter().zip(&values).map(|(w, v)| w * v).sum();
    Ok(e.clamp(lo, hi))
}
