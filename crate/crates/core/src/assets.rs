//! Dividend-paying assets priced against a kernel: deflated gains,
//! the fundamental pricing equation, the growth/income split, transversality
//! and the constant-value asset.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernel::tail_sum;
use crate::probspace::{martingale_defect, AdaptedProcess, Deviation};

const MODULE: &str = "assets";

/// Ex-dividend value `S` and dividends `D`, both defined from index 0.
#[derive(Debug, Clone)]
pub struct Asset {
    pub s: AdaptedProcess,
    pub d: AdaptedProcess,
    pub limited_liability: bool,
}

impl Asset {
    pub fn new(s: AdaptedProcess, d: AdaptedProcess, limited_liability: bool) -> Result<Self> {
        s.ensure_same_space(&d)?;
        if s.start() != 0 || d.start() != 0 || s.end() != d.end() {
            return Err(invalid(MODULE, "asset", "value and dividend processes must share the range 0..=N"));
        }
        if limited_liability && (s.min() < 0.0 || d.min() < 0.0) {
            return Err(invalid(MODULE, "asset", "limited-liability asset has a negative value or dividend"));
        }
        Ok(Self { s, d, limited_liability })
    }

    pub fn horizon(&self) -> usize {
        self.s.end()
    }
}

/// Deflated gains `M_i = pi_i S_i + sum_{n<=i} pi_n D_n`.
#[derive(Debug, Clone)]
pub struct GainsProcess {
    pub m: AdaptedProcess,
}

pub fn gains_process(a: &Asset, pi: &AdaptedProcess) -> Result<GainsProcess> {
    a.s.ensure_same_space(pi)?;
    if pi.start() != 0 || pi.end() < a.horizon() {
        return Err(invalid(MODULE, "pi", "kernel must cover the asset's horizon"));
    }
    let space = pi.space().clone();
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(a.horizon() + 1);
    let mut flows: Vec<f64> = vec![pi.value(0, 0) * a.d.value(0, 0)];
    for i in 0..=a.horizon() {
        if i > 0 {
            let p = pi.at(i)?;
            let d = a.d.at(i)?;
            flows = (0..space.num_nodes(i))
                .map(|n| flows[space.parent(i, n).unwrap()] + p[n] * d[n])
                .collect();
        }
        let p = pi.at(i)?;
        levels.push(a.s.at(i)?.iter().zip(p).zip(&flows).map(|((s, p), f)| p * s + f).collect());
    }
    Ok(GainsProcess { m: AdaptedProcess::new(space, 0, levels)? })
}

/// Worst martingale violation of the deflated gains process.
pub fn axiom_a_defect(a: &Asset, pi: &AdaptedProcess) -> Result<Deviation> {
    Ok(martingale_defect(&gains_process(a, pi)?.m))
}

/// `S_i = E_i[sum_{n=i+1..N} pi_n D_n + pi_N S_N] / pi_i` where `S_N` is the
/// declared post-horizon value (zero when `terminal` is `None`).
pub fn price_income_asset(d: &AdaptedProcess, pi: &AdaptedProcess, terminal: Option<&[f64]>) -> Result<AdaptedProcess> {
    d.ensure_same_space(pi)?;
    let n = d.end().min(pi.end());
    if d.start() > 1 || pi.start() != 0 {
        return Err(invalid(MODULE, "dividends", "dividends must be defined from index 1"));
    }
    if d.min() < 0.0 {
        return Err(invalid(MODULE, "dividends", "income asset dividends must be non-negative"));
    }
    let space = pi.space();
    let pi_n = pi.at(n)?;
    let tail: Vec<f64> = match terminal {
        Some(t) if t.len() == pi_n.len() => t.iter().zip(pi_n).map(|(s, p)| s * p).collect(),
        Some(_) => return Err(invalid(MODULE, "terminal", "one value per horizon node required")),
        None => vec![0.0; space.num_nodes(n)],
    };
    let flows = AdaptedProcess::from_fn(space.clone(), 1, n, |i, node| pi.value(i, node) * d.value(i, node))?;
    let deflated = tail_sum(&flows, n, &tail)?;
    deflated.zip_with(pi, |v, p| v / p)
}

/// Growth part `m` (a non-negative martingale) and the income value
/// `S - m / pi`.
#[derive(Debug, Clone)]
pub struct GrowthIncome {
    pub m: AdaptedProcess,
    pub income_value: AdaptedProcess,
}

/// Splits a limited-liability asset into its retained-value martingale
/// `m_i = E_i[pi_N S_N]` and its pure-income part.
pub fn growth_income_split(a: &Asset, pi: &AdaptedProcess, axiom_a_tol: f64) -> Result<GrowthIncome> {
    if !a.limited_liability {
        return Err(invalid(MODULE, "asset", "growth/income split requires limited liability"));
    }
    let dev = axiom_a_defect(a, pi)?;
    if dev.max > axiom_a_tol {
        return Err(Error::PropertyViolated { what: "Axiom A", index: dev.index, node: dev.node, deviation: dev.max });
    }
    let n = a.horizon();
    let space = pi.space().clone();
    let terminal: Vec<f64> = a.s.at(n)?.iter().zip(pi.at(n)?).map(|(s, p)| s * p).collect();
    let levels = (0..=n).map(|i| space.cond_expect(&terminal, n, i)).collect::<Result<Vec<_>>>()?;
    let m = AdaptedProcess::new(space, 0, levels)?;
    let ratio = m.zip_with(pi, |m, p| m / p)?;
    let income_value = a.s.zip_with(&ratio, |s, r| s - r)?;
    Ok(GrowthIncome { m, income_value })
}

/// Finite-horizon transversality defect `E[pi_N S_N]`.
pub fn transversality_defect(a: &Asset, pi: &AdaptedProcess) -> Result<f64> {
    let n = a.horizon();
    let v: Vec<f64> = a.s.at(n)?.iter().zip(pi.at(n)?).map(|(s, p)| s * p).collect();
    pi.space().expectation(&v, n)
}

/// Asset with `S = 1` paying `D_i = (Bbar_i - Bbar_{i-1}) / Bbar_{i-1}`.
pub fn constant_value_asset(bbar: &AdaptedProcess, strictness: f64) -> Result<Asset> {
    if bbar.start() != 0 {
        return Err(invalid(MODULE, "bbar", "positive-return asset must start at index 0"));
    }
    let space = bbar.space().clone();
    let n = bbar.end();
    let mut d_levels = vec![vec![0.0]];
    for i in 1..=n {
        let mut lvl = Vec::with_capacity(space.num_nodes(i));
        for node in 0..space.num_nodes(i) {
            let prev = bbar.value(i - 1, space.parent(i, node).unwrap());
            let cur = bbar.value(i, node);
            if !(prev > 0.0 && cur - prev > strictness) {
                return Err(Error::PropertyViolated {
                    what: "strictly increasing positive-return asset",
                    index: i,
                    node,
                    deviation: cur - prev,
                });
            }
            lvl.push((cur - prev) / prev);
        }
        d_levels.push(lvl);
    }
    let d = AdaptedProcess::new(space.clone(), 0, d_levels)?;
    let s = AdaptedProcess::constant(space, 0, n, 1.0)?;
    Asset::new(s, d, true)
}

/// One-period binomial positive-return asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositiveReturnQuote {
    /// Risk-neutral up probability.
    pub p_star: f64,
    /// Up-state value of the positive-return asset.
    pub u_bar: f64,
}

/// Given a risky asset `(S0 -> U | Dn)`, a deterministic account
/// `B0 -> B1`, and the positive-return asset's initial value `sbar0` and
/// down value `dbar`, returns the risk-neutral probability and the up value
/// that make the new asset correctly priced.
#[allow(clippy::too_many_arguments)]
pub fn binomial_positive_return(s0: f64, u: f64, dn: f64, b0: f64, b1: f64, sbar0: f64, dbar: f64) -> Result<PositiveReturnQuote> {
    if !(b0 > 0.0 && b1 > b0) {
        return Err(invalid(MODULE, "B1", "money-market account must grow (B1 > B0 > 0)"));
    }
    let growth = b1 / b0;
    let forward = s0 * growth;
    if !(u > forward && forward > dn) {
        return Err(invalid(MODULE, "U/D", "arbitrage bound U > S0*B1/B0 > D violated"));
    }
    let p_star = (forward - dn) / (u - dn);
    if !(sbar0 > 0.0) {
        return Err(invalid(MODULE, "Sbar0", "initial value must be positive"));
    }
    let upper = (growth - p_star) / (1.0 - p_star);
    let ratio = dbar / sbar0;
    if !(ratio > 1.0 && ratio < upper) {
        return Err(invalid(
            MODULE,
            "Dbar",
            format!("positive-return window violated: need 1 < Dbar/Sbar0 = {ratio} < {upper}"),
        ));
    }
    let u_bar = (sbar0 * growth - (1.0 - p_star) * dbar) / p_star;
    Ok(PositiveReturnQuote { p_star, u_bar })
}

/// Pure-income price as a ratio of dividend value to money-market dividend
/// value, `E_i[sum pi_n D_n] / E_i[sum pi_n r_n]` over `n = i+1..N`.
///
/// The denominator's post-horizon mass is `pi_N` (the money market's exact
/// tail). The numerator uses the declared terminal value, as in
/// [`price_income_asset`].
pub fn symmetric_income_price(
    d: &AdaptedProcess,
    pi: &AdaptedProcess,
    r: &AdaptedProcess,
    terminal: Option<&[f64]>,
) -> Result<AdaptedProcess> {
    d.ensure_same_space(pi)?;
    r.ensure_same_space(pi)?;
    let n = pi.end().min(d.end()).min(r.end());
    let space = pi.space().clone();
    let pi_n = pi.at(n)?;
    let num_tail: Vec<f64> = match terminal {
        Some(t) if t.len() == pi_n.len() => t.iter().zip(pi_n).map(|(s, p)| s * p).collect(),
        Some(_) => return Err(invalid(MODULE, "terminal", "one value per horizon node required")),
        None => vec![0.0; pi_n.len()],
    };
    let num_flows = AdaptedProcess::from_fn(space.clone(), 1, n, |i, k| pi.value(i, k) * d.value(i, k))?;
    let den_flows = AdaptedProcess::from_fn(space.clone(), 1, n, |i, k| pi.value(i, k) * r.value(i, k))?;
    let num = tail_sum(&num_flows, n, &num_tail)?;
    let den = tail_sum(&den_flows, n, pi_n)?;
    for i in 0..=n {
        if let Some(node) = den.at(i)?.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::PropertyViolated { what: "positive rate denominator", index: i, node, deviation: den.value(i, node) });
        }
    }
    num.zip_with(&den, |a, b| a / b)
}
