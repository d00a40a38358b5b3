use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const MODULE: &str = "UtilitySpec";

/// Bivariate function of consumption `x` and real liquidity benefit `y`.
pub type Bivariate = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Utility given as callables `U`, `U_x`, `U_y`.
#[derive(Clone)]
pub struct GenericUtility {
    pub u: Bivariate,
    pub ux: Bivariate,
    pub uy: Bivariate,
}

impl fmt::Debug for GenericUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GenericUtility(..)")
    }
}

/// Closed-form utility families as they appear in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityConfig {
    /// `A ln x + B ln y`.
    Log { a: f64, b: f64 },
    /// `(A/p) x^p + (B/q) y^q`.
    Power { a: f64, b: f64, p: f64, q: f64 },
    /// `-A e^{-x} - B e^{-y}`.
    Exponential { a: f64, b: f64 },
}

#[derive(Debug, Clone)]
pub enum UtilitySpec {
    LogSeparable { a: f64, b: f64 },
    Power { a: f64, b: f64, p: f64, q: f64 },
    Exponential { a: f64, b: f64 },
    Generic(GenericUtility),
}

/// Points at which generic utilities are probed for monotonicity and
/// concavity.
const PROBE: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(MODULE, name, format!("must be finite and positive, got {v}")))
    }
}

impl UtilitySpec {
    pub fn log(a: f64, b: f64) -> Result<Self> {
        positive("A", a)?;
        positive("B", b)?;
        Ok(Self::LogSeparable { a, b })
    }

    pub fn power(a: f64, b: f64, p: f64, q: f64) -> Result<Self> {
        positive("A", a)?;
        positive("B", b)?;
        for (name, e) in [("p", p), ("q", q)] {
            if e == 0.0 {
                return Err(invalid(MODULE, name, "zero exponent is the log kind"));
            }
            if !(e.is_finite() && e < 1.0) {
                return Err(invalid(MODULE, name, format!("exponent must lie in (-inf, 1), got {e}")));
            }
        }
        Ok(Self::Power { a, b, p, q })
    }

    pub fn exponential(a: f64, b: f64) -> Result<Self> {
        positive("A", a)?;
        positive("B", b)?;
        Ok(Self::Exponential { a, b })
    }

    /// Wraps callables after probing `U_x, U_y > 0`, `U_xx, U_yy < 0` and
    /// `U_xx U_yy > U_xy^2` by central differences on a grid of points.
    pub fn generic(g: GenericUtility) -> Result<Self> {
        for &x in &PROBE {
            for &y in &PROBE {
                let (ux, uy) = ((g.ux)(x, y), (g.uy)(x, y));
                if !(ux > 0.0 && uy > 0.0) {
                    return Err(invalid(MODULE, "generic", format!("marginal utilities not positive at ({x}, {y})")));
                }
                let (hx, hy) = (1e-4 * x, 1e-4 * y);
                let uxx = ((g.ux)(x + hx, y) - (g.ux)(x - hx, y)) / (2.0 * hx);
                let uyy = ((g.uy)(x, y + hy) - (g.uy)(x, y - hy)) / (2.0 * hy);
                let uxy = ((g.ux)(x, y + hy) - (g.ux)(x, y - hy)) / (2.0 * hy);
                if !(uxx < 0.0 && uyy < 0.0 && uxx * uyy > uxy * uxy) {
                    return Err(invalid(MODULE, "generic", format!("utility not strictly concave at ({x}, {y})")));
                }
            }
        }
        Ok(Self::Generic(g))
    }

    pub fn from_config(c: &UtilityConfig) -> Result<Self> {
        match *c {
            UtilityConfig::Log { a, b } => Self::log(a, b),
            UtilityConfig::Power { a, b, p, q } => Self::power(a, b, p, q),
            UtilityConfig::Exponential { a, b } => Self::exponential(a, b),
        }
    }

    /// The same utility as callables, so that it is handled by the numeric
    /// root finder rather than a closed form.
    pub fn as_generic(&self) -> Result<Self> {
        if let Self::Generic(_) = self {
            return Ok(self.clone());
        }
        let (s1, s2, s3) = (self.clone(), self.clone(), self.clone());
        Self::generic(GenericUtility {
            u: Arc::new(move |x, y| s1.u(x, y)),
            ux: Arc::new(move |x, y| s2.ux(x, y)),
            uy: Arc::new(move |x, y| s3.uy(x, y)),
        })
    }

    pub fn u(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::LogSeparable { a, b } => a * x.ln() + b * y.ln(),
            Self::Power { a, b, p, q } => a / p * x.powf(*p) + b / q * y.powf(*q),
            Self::Exponential { a, b } => -a * (-x).exp() - b * (-y).exp(),
            Self::Generic(g) => (g.u)(x, y),
        }
    }

    pub fn ux(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::LogSeparable { a, .. } => a / x,
            Self::Power { a, p, .. } => a * x.powf(p - 1.0),
            Self::Exponential { a, .. } => a * (-x).exp(),
            Self::Generic(g) => (g.ux)(x, y),
        }
    }

    pub fn uy(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::LogSeparable { b, .. } => b / y,
            Self::Power { b, q, .. } => b * y.powf(q - 1.0),
            Self::Exponential { b, .. } => b * (-y).exp(),
            Self::Generic(g) => (g.uy)(x, y),
        }
    }

    /// Price level `C` solving `U_x(k, lM/C) = U_y(k, lM/C)` at one node,
    /// where `nominal_liquidity = lambda M`.
    pub fn solve_price_level(&self, k: f64, nominal_liquidity: f64) -> Result<f64> {
        let lm = nominal_liquidity;
        let c = match *self {
            Self::LogSeparable { a, b } => a / b * lm / k,
            Self::Power { a, b, p, q } => (a / b).powf(1.0 / (1.0 - q)) * lm / k.powf((1.0 - p) / (1.0 - q)),
            Self::Exponential { a, b } => {
                let l = k + (b / a).ln();
                if l <= 0.0 {
                    return Err(invalid(MODULE, "exponential", format!("no positive liquidity benefit solves the relation at k = {k}")));
                }
                lm / l
            }
            Self::Generic(ref g) => return solve_log_price(g, k, lm),
        };
        Ok(c)
    }

    /// Exponent `q(1-p)/(1-q)` carried by consumption in power-utility
    /// prices; zero for log utility.
    pub fn consumption_exponent(&self) -> Option<f64> {
        match *self {
            Self::LogSeparable { .. } => Some(0.0),
            Self::Power { p, q, .. } => Some(q * (1.0 - p) / (1.0 - q)),
            _ => None,
        }
    }
}

pub(crate) const LOG_PRICE_BRACKET: (f64, f64) = (-30.0, 30.0);
const LOG_PRICE_TOL: f64 = 1e-12;

/// Bracketed root of `U_x - U_y` in `s = ln C`, alternating regula falsi and
/// bisection so the bracket at least halves every two steps.
fn solve_log_price(g: &GenericUtility, k: f64, lm: f64) -> Result<f64> {
    let h = |s: f64| {
        let y = lm * (-s).exp();
        (g.ux)(k, y) - (g.uy)(k, y)
    };
    let (mut lo, mut hi) = LOG_PRICE_BRACKET;
    let (mut f_lo, mut f_hi) = (h(lo), h(hi));
    if f_lo == 0.0 {
        return Ok(lo.exp());
    }
    if f_hi == 0.0 {
        return Ok(hi.exp());
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket { what: "log price level", lo, hi, f_lo, f_hi });
    }
    let mut step = 0usize;
    while hi - lo > LOG_PRICE_TOL {
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        let s = if step.is_multiple_of(2) && secant > lo && secant < hi { secant } else { 0.5 * (lo + hi) };
        step += 1;
        let f = h(s);
        if f == 0.0 {
            return Ok(s.exp());
        }
        if f.signum() == f_lo.signum() {
            lo = s;
            f_lo = f;
        } else {
            hi = s;
            f_hi = f;
        }
        if step > 400 {
            break;
        }
    }
    let s = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    Ok(s.exp())
}
