//! Monte Carlo diagnostics for bridges, information paths and the filter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::infoflow::{sample_bridge, Ensemble};
use crate::probspace::TimeGrid;
use crate::rng::stream_rng;
use crate::stats::Estimate;

/// Sample covariance of two bridge values against the exact covariance.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceCheck {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub estimate: Estimate,
    pub target: f64,
    pub z: f64,
}

/// `Cov[beta_ik, beta_jk]` for `i <= j <= k` over `paths` bridges pinned at
/// `t_k`. The bridge has mean zero, so the estimator is the mean product.
pub fn bridge_covariance_check(grid: &TimeGrid, i: usize, j: usize, k: usize, paths: usize, seed: u64, exec: Exec) -> Result<CovarianceCheck> {
    if !(i <= j && j <= k) {
        return Err(crate::error::invalid("infoflow", "indices", format!("need i <= j <= k, got ({i}, {j}, {k})")));
    }
    let products = map_indexed(paths, exec, |p| {
        sample_bridge(grid, k, &mut stream_rng(seed, u64::MAX, p as u64)).map(|b| b.values[i] * b.values[j])
    });
    let products = products.into_iter().collect::<Result<Vec<_>>>()?;
    let estimate = Estimate::from_samples(&products);
    let (ti, tj, tk) = (grid.time(i), grid.time(j), grid.time(k));
    let target = ti * (tk - tj) / tk;
    Ok(CovarianceCheck { i, j, k, estimate, target, z: estimate.z_score(target) })
}

/// Sample mean against a known target.
#[derive(Debug, Clone, Serialize)]
pub struct MeanCheck {
    pub estimate: Estimate,
    pub target: f64,
    pub z: f64,
}

/// Tower property: the mean of the filtered value at index `i` equals the
/// prior expectation of `f`.
pub fn filter_tower_check<F>(ens: &Ensemble, f: F, i: usize, exec: Exec) -> Result<MeanCheck>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let target = ens.factor.prior_expect(&f);
    let vals = ens.filtered_at(f, i, exec)?;
    let estimate = Estimate::from_samples(&vals);
    Ok(MeanCheck { estimate, target, z: estimate.z_score(target) })
}

/// Mean one-step change of the filtered value from `i` to `i + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct StepDrift {
    pub i: usize,
    pub estimate: Estimate,
    pub z: f64,
}

/// Per-step drift of the filter along the ensemble. The last step ends at
/// the revealed value `f(X)`.
pub fn filter_martingale_check<F>(ens: &Ensemble, f: F, exec: Exec) -> Result<Vec<StepDrift>>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let rows = ens.filtered(f, exec)?;
    let j = ens.reveal_index();
    Ok((0..j)
        .map(|i| {
            let d: Vec<f64> = rows.iter().map(|r| r[i + 1] - r[i]).collect();
            let estimate = Estimate::from_samples(&d);
            StepDrift { i, estimate, z: estimate.z_score(0.0) }
        })
        .collect())
}

/// Distance between the filter at the penultimate index and `f(X)`.
#[derive(Debug, Clone, Serialize)]
pub struct TerminalGap {
    pub sigma: f64,
    pub index: usize,
    pub mean_abs: f64,
    pub max_abs: f64,
}

pub fn terminal_gap<F>(ens: &Ensemble, f: F, exec: Exec) -> Result<TerminalGap>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let j = ens.reveal_index();
    let index = j - 1;
    let vals = ens.filtered_at(&f, index, exec)?;
    let gaps: Vec<f64> = vals.iter().zip(&ens.paths).map(|(v, p)| (v - f(p.x)).abs()).collect();
    let mean_abs = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    let max_abs = gaps.iter().copied().fold(0.0, f64::max);
    Ok(TerminalGap { sigma: ens.sigma, index, mean_abs, max_abs })
}

/// One cell of the joint `(xi_{i-1,j}, xi_ij)` binning.
#[derive(Debug, Clone, Serialize)]
pub struct MarkovBin {
    pub outer: usize,
    pub inner: usize,
    pub count: usize,
    /// Mean of `f(X) - filter(xi_ij)` in the cell.
    pub residual: Estimate,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovReport {
    pub index: usize,
    pub sigma: f64,
    pub bins: Vec<MarkovBin>,
    pub max_z: f64,
    pub max_abs_deviation: f64,
    pub min_count: usize,
}

/// Rank-based equal-count bins; ties are broken by position so the split is
/// deterministic.
fn quantile_bins(values: &[f64], members: &[usize], nbins: usize) -> Vec<Vec<usize>> {
    let mut order = members.to_vec();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let n = order.len();
    (0..nbins).map(|b| order[b * n / nbins..(b + 1) * n / nbins].to_vec()).collect()
}

/// Checks that the pair `(xi_{i-1,j}, xi_ij)` carries no more information
/// about `f(X)` than `xi_ij` alone. Paths are split into `outer` quantile
/// bins of `xi_ij`, each split into `inner` quantile bins of `xi_{i-1,j}`;
/// in every cell the residual `f(X) - filter(xi_ij)` must have mean zero.
pub fn markov_reduction_check<F>(ens: &Ensemble, f: F, i: usize, outer: usize, inner: usize, min_count: usize, exec: Exec) -> Result<MarkovReport>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let j = ens.reveal_index();
    if i < 1 || i >= j {
        return Err(Error::IndexOutOfRange { index: i, lo: 1, hi: j.saturating_sub(1) });
    }
    if outer == 0 || inner == 0 {
        return Err(crate::error::invalid("infoflow", "bins", "bin counts must be positive"));
    }
    let filt = ens.filtered_at(&f, i, exec)?;
    let resid: Vec<f64> = filt.iter().zip(&ens.paths).map(|(v, p)| f(p.x) - v).collect();
    let cur: Vec<f64> = ens.paths.iter().map(|p| p.xi[i]).collect();
    let prev: Vec<f64> = ens.paths.iter().map(|p| p.xi[i - 1]).collect();
    let all: Vec<usize> = (0..ens.len()).collect();
    let mut bins = Vec::with_capacity(outer * inner);
    for (o, members) in quantile_bins(&cur, &all, outer).into_iter().enumerate() {
        for (n, cell) in quantile_bins(&prev, &members, inner).into_iter().enumerate() {
            if cell.len() < min_count {
                return Err(Error::InsufficientSamples { bin: format!("({o}, {n})"), count: cell.len(), min: min_count });
            }
            let r: Vec<f64> = cell.iter().map(|&p| resid[p]).collect();
            let residual = Estimate::from_samples(&r);
            bins.push(MarkovBin { outer: o, inner: n, count: cell.len(), residual, z: residual.z_score(0.0) });
        }
    }
    let max_z = bins.iter().map(|b| b.z).fold(0.0, f64::max);
    let max_abs_deviation = bins.iter().map(|b| b.residual.mean.abs()).fold(0.0, f64::max);
    let min_count = bins.iter().map(|b| b.count).min().unwrap_or(0);
    Ok(MarkovReport { index: i, sigma: ens.sigma, bins, max_z, max_abs_deviation, min_count })
}
