use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::infoflow::quadrature::GaussLegendre;

const MODULE: &str = "XFactor";
const NORMALIZATION_TOL: f64 = 1e-10;
const CDF_CELLS: usize = 4096;

/// User-supplied density on a bounded interval.
#[derive(Clone)]
pub struct DensityFn(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DensityFn(..)")
    }
}

/// Prior distribution of an X-factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    Discrete { atoms: Vec<f64>, weights: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    /// Exponential with the given rate, truncated to `[lo, hi]`.
    Exponential { rate: f64, lo: f64, hi: f64 },
    #[serde(skip)]
    Density { density: DensityFn, lo: f64, hi: f64 },
}

/// Support points with log-weights: exact atoms for discrete priors,
/// quadrature nodes times density for continuous ones.
#[derive(Debug, Clone)]
pub(crate) struct Support {
    pub points: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl Prior {
    fn density_at(&self, x: f64) -> f64 {
        match self {
            Prior::Discrete { .. } => unreachable!("discrete prior has no density"),
            Prior::Uniform { lo, hi } => 1.0 / (hi - lo),
            Prior::Exponential { rate, lo, hi } => {
                let z = (-rate * lo).exp() - (-rate * hi).exp();
                rate * (-rate * x).exp() / z
            }
            Prior::Density { density, .. } => (density.0)(x),
        }
    }

    fn interval(&self) -> Option<(f64, f64)> {
        match *self {
            Prior::Discrete { .. } => None,
            Prior::Uniform { lo, hi } | Prior::Exponential { lo, hi, .. } | Prior::Density { lo, hi, .. } => Some((lo, hi)),
        }
    }

    pub(crate) fn support(&self) -> Result<Support> {
        match self {
            Prior::Discrete { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return Err(invalid(MODULE, "prior", "atoms and weights must be non-empty and equally long"));
                }
                if atoms.iter().any(|a| !a.is_finite()) || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(invalid(MODULE, "prior", "atoms must be finite and weights non-negative"));
                }
                let mut sorted = atoms.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(invalid(MODULE, "prior", "atoms must be distinct"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(invalid(MODULE, "prior", format!("weights sum to {total}")));
                }
                let (points, log_weights) = atoms
                    .iter()
                    .zip(weights)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(&a, &w)| (a, w.ln()))
                    .unzip();
                Ok(Support { points, log_weights })
            }
            _ => {
                let (lo, hi) = self.interval().unwrap();
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return Err(invalid(MODULE, "prior", "density domain must be a bounded interval"));
                }
                if let Prior::Exponential { rate, .. } = self {
                    if !(rate.is_finite() && *rate != 0.0) {
                        return Err(invalid(MODULE, "prior", "exponential rate must be finite and non-zero"));
                    }
                }
                let mut points = Vec::new();
                let mut log_weights = Vec::new();
                let mut total = 0.0;
                for (x, w) in GaussLegendre::default_rule().on_interval(lo, hi) {
                    let p = self.density_at(x);
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(invalid(MODULE, "prior", format!("density invalid at {x}")));
                    }
                    total += w * p;
                    if p > 0.0 {
                        points.push(x);
                        log_weights.push((w * p).ln());
                    }
                }
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(invalid(MODULE, "prior", format!("density integrates to {total}")));
                }
                Ok(Support { points, log_weights })
            }
        }
    }

    /// Draws one value from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, table: Option<&[f64]>) -> f64 {
        let u: f64 = rng.random();
        match self {
            Prior::Discrete { atoms, weights } => {
                let mut acc = 0.0;
                for (a, w) in atoms.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *a;
                    }
                }
                *atoms.last().unwrap()
            }
            Prior::Uniform { lo, hi } => lo + u * (hi - lo),
            Prior::Exponential { rate, lo, hi } => {
                let a = (-rate * lo).exp();
                let b = (-rate * hi).exp();
                -(a - u * (a - b)).ln() / rate
            }
            Prior::Density { lo, hi, .. } => {
                let cdf = table.expect("density prior needs a CDF table");
                let k = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[k - 1], cdf[k]);
                let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                let h = (hi - lo) / (cdf.len() - 1) as f64;
                lo + h * ((k - 1) as f64 + frac)
            }
        }
    }

    /// Tabulated CDF for inverse-transform sampling of custom densities.
    pub(crate) fn cdf_table(&self) -> Option<Vec<f64>> {
        let Prior::Density { lo, hi, .. } = self else { return None };
        let h = (hi - lo) / CDF_CELLS as f64;
        let mut cdf = vec![0.0; CDF_CELLS + 1];
        let mut prev = self.density_at(*lo);
        for k in 1..=CDF_CELLS {
            let cur = self.density_at(lo + h * k as f64);
            cdf[k] = cdf[k - 1] + 0.5 * h * (prev + cur);
            prev = cur;
        }
        let total = cdf[CDF_CELLS];
        cdf.iter_mut().for_each(|c| *c /= total);
        Some(cdf)
    }
}

/// A market factor revealed at grid index `reveal_index`.
#[derive(Debug, Clone)]
pub struct XFactor {
    pub label: String,
    pub reveal_index: usize,
    pub prior: Prior,
    pub(crate) support: Support,
    cdf: Option<Vec<f64>>,
}

impl XFactor {
    pub fn new(label: impl Into<String>, reveal_index: usize, prior: Prior) -> Result<Self> {
        if reveal_index == 0 {
            return Err(invalid(MODULE, "reveal_index", "factor must be revealed at an index >= 1"));
        }
        let support = prior.support()?;
        let cdf = prior.cdf_table();
        Ok(Self { label: label.into(), reveal_index, prior, support, cdf })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.prior.sample(rng, self.cdf.as_deref())
    }

    /// Prior expectation of `f`.
    pub fn prior_expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let s = &self.support;
        s.points.iter().zip(&s.log_weights).map(|(x, lw)| lw.exp() * f(*x)).sum()
    }

    /// `(min f, max f)` over the prior support.
    pub fn range_of<F: Fn(f64) -> f64>(&self, f: F) -> (f64, f64) {
        self.support
            .points
            .iter()
            .map(|&x| f(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn discrete_validation() {
        assert!(XFactor::new("x", 1, Prior::Discrete { atoms: vec![0.0, 0.0], weights: vec![0.5, 0.5] }).is_err());
        assert!(XFactor::new("x", 1, Prior::Discrete { atoms: vec![0.0, 1.0], weights: vec![0.5, 0.4] }).is_err());
        assert!(XFactor::new("x", 0, Prior::Discrete { atoms: vec![1.0], weights: vec![1.0] }).is_err());
    }

    #[test]
    fn continuous_priors_are_normalised() {
        let u = XFactor::new("u", 2, Prior::Uniform { lo: 0.0, hi: 2.0 }).unwrap();
        assert!((u.prior_expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((u.prior_expect(|x| x) - 1.0).abs() < 1e-13);
        let e = XFactor::new("e", 2, Prior::Exponential { rate: 1.0, lo: 0.0, hi: 30.0 }).unwrap();
        assert!((e.prior_expect(|x| x) - 1.0).abs() < 1e-10);
        let bad = Prior::Density { density: DensityFn(Arc::new(|_| 2.0)), lo: 0.0, hi: 1.0 };
        assert!(XFactor::new("b", 1, bad).is_err());
    }

    #[test]
    fn custom_density_sampling_matches_mean() {
        let tri = Prior::Density { density: DensityFn(Arc::new(|x| 2.0 * x)), lo: 0.0, hi: 1.0 };
        let f = XFactor::new("t", 1, tri).unwrap();
        assert!((f.prior_expect(|x| x) - 2.0 / 3.0).abs() < 1e-12);
        let mut rng = stream_rng(3, 0, 0);
        let n = 50_000;
        let m: f64 = (0..n).map(|_| f.sample(&mut rng)).sum::<f64>() / n as f64;
        // sd of the triangle is sqrt(1/18); 5 SE band
        assert!((m - 2.0 / 3.0).abs() < 5.0 * (1.0f64 / 18.0).sqrt() / (n as f64).sqrt());
    }
}
