use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::infoflow::XFactor;
use crate::probspace::TimeGrid;

/// Brownian bridge from `0` at time zero to `0` at `t_j`, sampled at
/// `t_0..=t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    pub values: Vec<f64>,
}

fn check_grid(grid: &TimeGrid, j: usize) -> Result<()> {
    if j == 0 || j > grid.horizon() {
        return Err(Error::IndexOutOfRange { index: j, lo: 1, hi: grid.horizon() });
    }
    if grid.time(0) != 0.0 {
        return Err(invalid("infoflow", "grid", "information processes need t_0 = 0"));
    }
    Ok(())
}

/// Exact sampling: Brownian motion `W` at the grid times, then
/// `beta_ij = W_{t_i} - (t_i / t_j) W_{t_j}`.
pub fn sample_bridge<R: Rng + ?Sized>(grid: &TimeGrid, j: usize, rng: &mut R) -> Result<BridgePath> {
    check_grid(grid, j)?;
    let mut w = vec![0.0; j + 1];
    for i in 1..=j {
        let dt = grid.time(i) - grid.time(i - 1);
        let z: f64 = rng.sample(StandardNormal);
        w[i] = w[i - 1] + dt.sqrt() * z;
    }
    let tj = grid.time(j);
    let mut values: Vec<f64> = (0..=j).map(|i| w[i] - grid.time(i) / tj * w[j]).collect();
    values[0] = 0.0;
    values[j] = 0.0;
    Ok(BridgePath { values })
}

/// `xi_ij = sigma t_i X + beta_ij` for `i = 0..=j`, with the drawn `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationPath {
    pub x: f64,
    pub sigma: f64,
    pub xi: Vec<f64>,
}

pub fn sample_information<R: Rng + ?Sized>(factor: &XFactor, sigma: f64, grid: &TimeGrid, rng: &mut R) -> Result<InformationPath> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid("infoflow", "sigma", "signal strength must be finite and non-negative"));
    }
    let j = factor.reveal_index;
    check_grid(grid, j)?;
    let x = factor.sample(rng);
    let bridge = sample_bridge(grid, j, rng)?;
    let xi = bridge.values.iter().enumerate().map(|(i, b)| sigma * grid.time(i) * x + b).collect();
    Ok(InformationPath { x, sigma, xi })
}
