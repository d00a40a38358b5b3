use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::{map_indexed, Exec};
use crate::infoflow::{filter_expect, sample_information, XFactor};
use crate::inflation::UtilitySpec;
use crate::probspace::TimeGrid;
use crate::rng::stream_rng;
use crate::stats::Estimate;

const MODULE: &str = "economy_from_information";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapForm {
    /// `base e^{growth t} (1 + sum loading_a X_a)`.
    #[default]
    Linear,
    /// `base e^{growth t + sum loading_a X_a}`.
    Exponential,
}

/// Map from current factor estimates to an economic quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorMap {
    pub base: f64,
    #[serde(default)]
    pub growth: f64,
    #[serde(default)]
    pub loadings: Vec<f64>,
    #[serde(default)]
    pub form: MapForm,
}

impl FactorMap {
    pub fn constant(base: f64) -> Self {
        Self { base, growth: 0.0, loadings: Vec::new(), form: MapForm::Linear }
    }

    /// Unused trailing loadings count as zero.
    pub fn eval(&self, t: f64, estimates: &[f64]) -> f64 {
        let s: f64 = self.loadings.iter().zip(estimates).map(|(l, x)| l * x).sum();
        match self.form {
            MapForm::Linear => self.base * (self.growth * t).exp() * (1.0 + s),
            MapForm::Exponential => self.base * (self.growth * t + s).exp(),
        }
    }
}

/// Factors with their signal strengths and the maps producing consumption,
/// money supply and liquidity benefit from the filtered factor values.
#[derive(Debug, Clone)]
pub struct InformationEconomy {
    pub factors: Vec<XFactor>,
    pub sigmas: Vec<f64>,
    pub k: FactorMap,
    pub m: FactorMap,
    pub lambda: FactorMap,
}

impl InformationEconomy {
    pub fn new(factors: Vec<XFactor>, sigmas: Vec<f64>, k: FactorMap, m: FactorMap, lambda: FactorMap) -> Result<Self> {
        if factors.len() != sigmas.len() {
            return Err(invalid(MODULE, "sigmas", "one signal strength per factor"));
        }
        if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(invalid(MODULE, "sigmas", "signal strengths must be finite and non-negative"));
        }
        for (name, map) in [("k", &k), ("M", &m), ("lambda", &lambda)] {
            if map.loadings.len() > factors.len() {
                return Err(invalid(MODULE, name, "more loadings than factors"));
            }
            if !(map.base.is_finite() && map.base > 0.0) {
                return Err(invalid(MODULE, name, "base must be positive"));
            }
        }
        Ok(Self { factors, sigmas, k, m, lambda })
    }
}

/// One simulated path of the economy on indices `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    /// Factor draws.
    pub x: Vec<f64>,
    /// Information process of each factor on `0..=j_a`.
    pub xi: Vec<Vec<f64>>,
    /// `E_i[X_a]` for each factor and index; equal to `X_a` once revealed.
    pub estimates: Vec<Vec<f64>>,
    pub k: Vec<f64>,
    pub m: Vec<f64>,
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulatedEconomy {
    pub times: Vec<f64>,
    pub paths: Vec<SimulatedPath>,
}

fn simulate_path(spec: &InformationEconomy, u: &UtilitySpec, grid: &TimeGrid, seed: u64, p: usize) -> Result<SimulatedPath> {
    let n = grid.horizon();
    let mut x = Vec::with_capacity(spec.factors.len());
    let mut xi = Vec::with_capacity(spec.factors.len());
    let mut estimates = Vec::with_capacity(spec.factors.len());
    for (a, (f, &sigma)) in spec.factors.iter().zip(&spec.sigmas).enumerate() {
        let path = sample_information(f, sigma, grid, &mut stream_rng(seed, a as u64, p as u64))?;
        let j = f.reveal_index;
        let est = (0..=n)
            .map(|i| if i >= j { Ok(path.x) } else { filter_expect(|v| v, f, path.xi[i], sigma, grid.time(i), grid.time(j)) })
            .collect::<Result<Vec<_>>>()?;
        x.push(path.x);
        xi.push(path.xi);
        estimates.push(est);
    }
    let mut out = SimulatedPath { x, xi, estimates, k: vec![], m: vec![], lambda: vec![], c: vec![] };
    for i in 0..=n {
        let e: Vec<f64> = out.estimates.iter().map(|row| row[i]).collect();
        let t = grid.time(i);
        let (k, m, l) = (spec.k.eval(t, &e), spec.m.eval(t, &e), spec.lambda.eval(t, &e));
        for (name, v) in [("k", k), ("M", m), ("lambda", l)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(MODULE, name, format!("map output {v} is not positive on path {p} at index {i}")));
            }
        }
        out.c.push(u.solve_price_level(k, l * m)?);
        out.k.push(k);
        out.m.push(m);
        out.lambda.push(l);
    }
    Ok(out)
}

/// Simulates `paths` economies driven by the information processes of the
/// factors. Factor `a` on path `p` uses the random stream `(seed, a, p)`.
pub fn economy_from_information(
    spec: &InformationEconomy,
    u: &UtilitySpec,
    grid: &TimeGrid,
    paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<SimulatedEconomy> {
    if let Some(f) = spec.factors.iter().find(|f| f.reveal_index > grid.horizon()) {
        return Err(invalid(MODULE, "reveal_index", format!("factor {} is revealed after the horizon", f.label)));
    }
    let sims = map_indexed(paths, exec, |p| simulate_path(spec, u, grid, seed, p));
    Ok(SimulatedEconomy { times: grid.times().to_vec(), paths: sims.into_iter().collect::<Result<Vec<_>>>()? })
}

/// Monte Carlo value of a claim by the closed form (log and power utility)
/// and by the kernel.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimEstimate {
    pub closed_form: Option<Estimate>,
    pub kernel: Estimate,
}

impl SimulatedEconomy {
    pub fn horizon(&self) -> usize {
        self.times.len() - 1
    }

    /// Nominal kernel on one path.
    pub fn kernel(&self, u: &UtilitySpec, gamma: f64, mu: f64, p: usize, i: usize) -> f64 {
        let s = &self.paths[p];
        let l = s.lambda[i] * s.m[i] / s.c[i];
        u.ux(s.k[i], l) / (mu * (gamma * self.times[i]).exp() * s.c[i])
    }

    /// Real kernel `pi C` on one path.
    pub fn real_kernel(&self, u: &UtilitySpec, gamma: f64, mu: f64, p: usize, i: usize) -> f64 {
        self.kernel(u, gamma, mu, p, i) * self.paths[p].c[i]
    }

    /// Values at index 0 of the nominal payoff `h(path)` paid at index `j`.
    pub fn price_claim<H>(&self, u: &UtilitySpec, gamma: f64, j: usize, h: H) -> Result<ClaimEstimate>
    where
        H: Fn(&SimulatedPath) -> f64,
    {
        if j > self.horizon() {
            return Err(crate::error::Error::IndexOutOfRange { index: j, lo: 0, hi: self.horizon() });
        }
        let disc = (-gamma * (self.times[j] - self.times[0])).exp();
        let kernel: Vec<f64> = (0..self.paths.len())
            .map(|p| self.kernel(u, gamma, 1.0, p, j) * h(&self.paths[p]) / self.kernel(u, gamma, 1.0, p, 0))
            .collect();
        let closed_form = u.consumption_exponent().map(|ex| {
            let samples: Vec<f64> = self
                .paths
                .iter()
                .map(|s| s.lambda[0] * s.m[0] / s.k[0].powf(ex) * disc * h(s) * s.k[j].powf(ex) / (s.lambda[j] * s.m[j]))
                .collect();
            Estimate::from_samples(&samples)
        });
        Ok(ClaimEstimate { closed_form, kernel: Estimate::from_samples(&kernel) })
    }
}
