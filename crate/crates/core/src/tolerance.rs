use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Numerical tolerances used by constructions and certification checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Martingale test on constructed processes.
    pub martingale: f64,
    /// Margin for "strictly positive / strictly increasing".
    pub strictness: f64,
    /// Axiom A certification of assets.
    pub axiom_a: f64,
    /// Tail and bond-reconstruction identities.
    pub reconstruction: f64,
    /// One-period bond/rate identity.
    pub one_period: f64,
    /// First-order-condition residuals.
    pub foc: f64,
    /// Monte Carlo checks, in standard errors.
    pub mc_se: f64,
    /// Binned Markov check, in standard errors.
    pub markov_se: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            martingale: 1e-12,
            strictness: 1e-12,
            axiom_a: 1e-10,
            reconstruction: 1e-11,
            one_period: 1e-13,
            foc: 1e-10,
            mc_se: 3.0,
            markov_se: 4.0,
        }
    }
}

impl Tolerances {
    /// Applies a `name=value` override.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid("tolerance", name, "must be finite and non-negative"));
        }
        let slot = match name {
            "martingale" => &mut self.martingale,
            "strictness" => &mut self.strictness,
            "axiom_a" => &mut self.axiom_a,
            "reconstruction" => &mut self.reconstruction,
            "one_period" => &mut self.one_period,
            "foc" => &mut self.foc,
            "mc_se" => &mut self.mc_se,
            "markov_se" => &mut self.markov_se,
            _ => return Err(invalid("tolerance", name, "unknown tolerance name")),
        };
        *slot = value;
        Ok(())
    }
}
