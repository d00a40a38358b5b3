use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Strictly increasing time points `t_0 < t_1 < ... < t_N`, in years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(invalid("probspace", "times", "need at least two time points (N >= 1)"));
        }
        if !(times[0].is_finite() && times[0] >= 0.0) {
            return Err(invalid("probspace", "times", "t_0 must be finite and >= 0"));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(invalid(
                    "probspace",
                    "times",
                    format!("not strictly increasing at index {}", i + 1),
                ));
            }
        }
        Ok(Self { times })
    }

    /// `t_i = i * dt` for `i = 0..=periods`.
    pub fn uniform(periods: usize, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("probspace", "dt", "must be positive"));
        }
        Self::new((0..=periods).map(|i| i as f64 * dt).collect())
    }

    /// Horizon index `N`.
    pub fn horizon(&self) -> usize {
        self.times.len() - 1
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Grid truncated to `t_0..=t_n`.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n > self.horizon() {
            return Err(crate::Error::IndexOutOfRange { index: n, lo: 1, hi: self.horizon() });
        }
        Self::new(self.times[..=n].to_vec())
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.times
    }
}
