use crate::error::{invalid, Result};
use crate::inflation::{nominal_kernel, EconomyPath, UtilitySpec};
use crate::probspace::AdaptedProcess;

/// Value at index 0 of the nominal payoff `h` received at index `j`, from
/// the closed form
/// `H_0 = (lambda_0 M_0 / k_0^e) e^{-gamma (t_j - t_0)} E[H_j k_j^e / (lambda_j M_j)]`
/// with `e = q(1-p)/(1-q)` for power utility and `e = 0` for log utility.
pub fn price_claim(u: &UtilitySpec, e: &EconomyPath, gamma: f64, h: &AdaptedProcess, j: usize) -> Result<f64> {
    let ex = u
        .consumption_exponent()
        .ok_or_else(|| invalid("inflation", "utility", "closed-form claim prices exist for log and power utility only"))?;
    h.ensure_same_space(&e.k)?;
    let hj = h.at(j)?;
    let (k, m, l) = (e.k.at(j)?, e.m.at(j)?, e.lambda.at(j)?);
    let integrand: Vec<f64> = (0..hj.len()).map(|n| hj[n] * k[n].powf(ex) / (l[n] * m[n])).collect();
    let mean = e.k.space().expectation(&integrand, j)?;
    let grid = e.k.space().grid();
    let front = e.lambda.value(0, 0) * e.m.value(0, 0) / e.k.value(0, 0).powf(ex);
    Ok(front * (-gamma * (grid.time(j) - grid.time(0))).exp() * mean)
}

/// The same value through the nominal kernel, `E[pi_j H_j] / pi_0`.
pub fn price_claim_via_kernel(u: &UtilitySpec, e: &EconomyPath, gamma: f64, h: &AdaptedProcess, j: usize) -> Result<f64> {
    let pi = nominal_kernel(u, e, gamma, 1.0, f64::INFINITY)?;
    h.ensure_same_space(&pi)?;
    let (hj, pj) = (h.at(j)?, pi.at(j)?);
    let weighted: Vec<f64> = hj.iter().zip(pj).map(|(h, p)| h * p).collect();
    Ok(e.k.space().expectation(&weighted, j)? / pi.value(0, 0))
}

/// Nominal payoff `C_j * units` of a claim paying a fixed number of goods.
pub fn cpi_indexed_payoff(e: &EconomyPath, units: f64, j: usize) -> Result<AdaptedProcess> {
    let c = e.c.at(j)?.iter().map(|c| c * units).collect();
    AdaptedProcess::new(e.k.space().clone(), j, vec![c])
}
