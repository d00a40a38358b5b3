use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::inflation::UtilitySpec;
use crate::probspace::{AdaptedProcess, Deviation};

const MODULE: &str = "inflation";

/// Consumption `k`, money supply `M`, liquidity benefit `lambda` and the
/// price level `C` on one lattice, all on levels `0..=N`.
#[derive(Debug, Clone)]
pub struct EconomyPath {
    pub k: AdaptedProcess,
    pub m: AdaptedProcess,
    pub lambda: AdaptedProcess,
    pub c: AdaptedProcess,
}

fn check_inputs(named: &[(&str, &AdaptedProcess)]) -> Result<()> {
    let first = named[0].1;
    for (name, p) in named {
        p.ensure_same_space(first)?;
        if p.start() != 0 || p.end() != first.end() {
            return Err(invalid(MODULE, *name, format!("must cover levels 0..={}", first.end())));
        }
        if p.min() <= 0.0 {
            return Err(invalid(MODULE, *name, "must be strictly positive"));
        }
    }
    Ok(())
}

/// Node-wise price level from the fundamental relation
/// `U_x(k, lambda M / C) = U_y(k, lambda M / C)`.
pub fn fundamental_relation_solve(u: &UtilitySpec, k: &AdaptedProcess, m: &AdaptedProcess, lambda: &AdaptedProcess) -> Result<AdaptedProcess> {
    check_inputs(&[("k", k), ("M", m), ("lambda", lambda)])?;
    let levels = (0..=k.end())
        .map(|i| {
            let (kk, mm, ll) = (k.at(i)?, m.at(i)?, lambda.at(i)?);
            (0..kk.len()).map(|n| u.solve_price_level(kk[n], ll[n] * mm[n])).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    AdaptedProcess::new(k.space().clone(), 0, levels)
}

impl EconomyPath {
    /// Solves the price level and assembles the economy.
    pub fn solve(u: &UtilitySpec, k: AdaptedProcess, m: AdaptedProcess, lambda: AdaptedProcess) -> Result<Self> {
        let c = fundamental_relation_solve(u, &k, &m, &lambda)?;
        Ok(Self { k, m, lambda, c })
    }

    /// Economy with a price level supplied directly (for instance a
    /// perturbed one).
    pub fn with_price_level(k: AdaptedProcess, m: AdaptedProcess, lambda: AdaptedProcess, c: AdaptedProcess) -> Result<Self> {
        check_inputs(&[("k", &k), ("M", &m), ("lambda", &lambda), ("C", &c)])?;
        Ok(Self { k, m, lambda, c })
    }

    pub fn horizon(&self) -> usize {
        self.k.end()
    }

    /// Nominal liquidity `lambda M`.
    pub fn nominal_liquidity(&self) -> Result<AdaptedProcess> {
        self.lambda.zip_with(&self.m, |l, m| l * m)
    }

    /// Real liquidity benefit `l = lambda M / C`.
    pub fn real_liquidity(&self) -> Result<AdaptedProcess> {
        self.nominal_liquidity()?.zip_with(&self.c, |lm, c| lm / c)
    }

    fn time(&self, i: usize) -> f64 {
        self.k.space().grid().time(i)
    }
}

/// `pi_n = U_x(k_n, l_n) / (mu e^{gamma t_n} C_n)`. Fails when `C` does not
/// satisfy the fundamental relation to `rel_tol` relative.
pub fn nominal_kernel(u: &UtilitySpec, e: &EconomyPath, gamma: f64, mu: f64, rel_tol: f64) -> Result<AdaptedProcess> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(invalid(MODULE, "mu", format!("must be positive, got {mu}")));
    }
    let l = e.real_liquidity()?;
    let mut worst = Deviation::none();
    let levels = (0..=e.horizon())
        .map(|i| {
            let (k, c, l) = (e.k.at(i)?, e.c.at(i)?, l.at(i)?);
            let disc = (gamma * e.time(i)).exp();
            Ok((0..k.len())
                .map(|n| {
                    let (ux, uy) = (u.ux(k[n], l[n]), u.uy(k[n], l[n]));
                    worst.update((ux - uy).abs() / ux.abs().max(uy.abs()), i, n);
                    ux / (mu * disc * c[n])
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    if worst.max > rel_tol {
        return Err(Error::PropertyViolated { what: "fundamental relation", index: worst.index, node: worst.node, deviation: worst.max });
    }
    AdaptedProcess::new(e.k.space().clone(), 0, levels)
}

/// Real kernel `pi C`.
pub fn real_kernel(pi: &AdaptedProcess, c: &AdaptedProcess) -> Result<AdaptedProcess> {
    pi.zip_with(c, |p, c| p * c)
}

/// Velocity of money `k C / M`.
pub fn velocity(e: &EconomyPath) -> Result<AdaptedProcess> {
    e.k.zip_with(&e.c, |k, c| k * c)?.zip_with(&e.m, |kc, m| kc / m)
}

/// Largest residuals of the two first-order conditions
/// `U_x = mu e^{gamma t} pi C` and `U_y = mu e^{gamma t} pi C`.
#[derive(Debug, Clone, Serialize)]
pub struct FocReport {
    pub consumption: Deviation,
    pub liquidity: Deviation,
}

impl FocReport {
    pub fn max(&self) -> f64 {
        self.consumption.max.max(self.liquidity.max)
    }
}

pub fn foc_residuals(u: &UtilitySpec, e: &EconomyPath, gamma: f64, mu: f64, pi: &AdaptedProcess) -> Result<FocReport> {
    pi.ensure_same_space(&e.k)?;
    let l = e.real_liquidity()?;
    let (mut cons, mut liq) = (Deviation::none(), Deviation::none());
    for i in 0..=e.horizon() {
        let (k, c, l, p) = (e.k.at(i)?, e.c.at(i)?, l.at(i)?, pi.at(i)?);
        let disc = (gamma * e.time(i)).exp();
        for n in 0..k.len() {
            let rhs = mu * disc * p[n] * c[n];
            cons.update((u.ux(k[n], l[n]) - rhs).abs(), i, n);
            liq.update((u.uy(k[n], l[n]) - rhs).abs(), i, n);
        }
    }
    Ok(FocReport { consumption: cons, liquidity: liq })
}

/// Representative agent with discount rate `gamma` and nominal wealth `W`.
#[derive(Debug, Clone)]
pub struct AgentProblem {
    pub utility: UtilitySpec,
    pub gamma: f64,
    pub wealth: f64,
}

impl AgentProblem {
    pub fn new(utility: UtilitySpec, gamma: f64, wealth: f64) -> Result<Self> {
        if !(wealth.is_finite() && wealth > 0.0) {
            return Err(invalid(MODULE, "W", format!("wealth must be positive, got {wealth}")));
        }
        if !gamma.is_finite() {
            return Err(invalid(MODULE, "gamma", "must be finite"));
        }
        Ok(Self { utility, gamma, wealth })
    }
}

/// Multiplier fixing the budget `W = E[sum pi_n (C_n k_n + lambda_n M_n)]`.
/// The kernel scales as `1/mu`, so
/// `mu = E[sum e^{-gamma t_n} (U_x / C_n)(C_n k_n + lambda_n M_n)] / W`.
pub fn solve_mu(problem: &AgentProblem, e: &EconomyPath) -> Result<f64> {
    let pi_unit = nominal_kernel(&problem.utility, e, problem.gamma, 1.0, f64::INFINITY)?;
    Ok(budget_value(e, &pi_unit)? / problem.wealth)
}

/// `E[sum pi_n (C_n k_n + lambda_n M_n)]`.
pub fn budget_value(e: &EconomyPath, pi: &AdaptedProcess) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..=e.horizon() {
        let (k, c, m, l, p) = (e.k.at(i)?, e.c.at(i)?, e.m.at(i)?, e.lambda.at(i)?, pi.at(i)?);
        let spend: Vec<f64> = (0..k.len()).map(|n| p[n] * (c[n] * k[n] + l[n] * m[n])).collect();
        total += e.k.space().expectation(&spend, i)?;
    }
    Ok(total)
}

/// `|W - E[sum pi_n (C_n k_n + lambda_n M_n)]| / W` at the given `mu`.
pub fn budget_residual(problem: &AgentProblem, e: &EconomyPath, mu: f64) -> Result<f64> {
    let pi = nominal_kernel(&problem.utility, e, problem.gamma, mu, f64::INFINITY)?;
    Ok((problem.wealth - budget_value(e, &pi)?).abs() / problem.wealth)
}
