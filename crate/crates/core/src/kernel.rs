//! Pricing-kernel constructions.
//!
//! A strictly increasing adapted driver `G` with `G_0 = 0` yields a kernel
//! `pi_i = E_i[G_inf] - G_i`, a positive-return asset `Bbar` and the
//! martingale `rhobar = pi * Bbar`. The Doob decomposition splits any
//! supermartingale kernel into a martingale minus a previsible increasing
//! process, and both give tail-sum representations of the kernel.
//!
//! Horizon convention: quantities beyond the last level are summarised by a
//! terminal tail. A driver is either supplied one level past the valuation
//! horizon (`G_inf = G_{N+1}`), or to the horizon together with a strictly
//! positive per-terminal-node tail (`G_inf = G_N + tail`).

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::probspace::{
    is_strict_supermartingale, martingale_defect, supermartingale_excess, AdaptedProcess, Deviation,
};

const MODULE: &str = "kernel";

/// Strictly increasing adapted driver with `G_0 = 0`.
#[derive(Debug, Clone)]
pub struct IncreasingDriver {
    g: AdaptedProcess,
    tail: Option<Vec<f64>>,
}

impl IncreasingDriver {
    /// Driver known up to its last level, constant afterwards. The kernel is
    /// valued one level earlier.
    pub fn new(g: AdaptedProcess, strictness: f64) -> Result<Self> {
        Self::validate(&g, strictness)?;
        if g.end() < 2 {
            return Err(invalid(MODULE, "driver", "needs levels 0..=N+1 with N >= 1"));
        }
        Ok(Self { g, tail: None })
    }

    /// Driver with a declared remaining increment `G_inf - G_N` per terminal
    /// node; the kernel is valued to the driver's last level.
    pub fn with_tail(g: AdaptedProcess, tail: Vec<f64>, strictness: f64) -> Result<Self> {
        Self::validate(&g, strictness)?;
        let n = g.end();
        if n < 1 {
            return Err(invalid(MODULE, "driver", "needs levels 0..=N with N >= 1"));
        }
        if tail.len() != g.space().num_nodes(n) {
            return Err(invalid(MODULE, "tail", "one value per terminal node required"));
        }
        if let Some(node) = tail.iter().position(|&t| !(t.is_finite() && t > strictness)) {
            return Err(Error::PropertyViolated {
                what: "positive driver tail",
                index: n,
                node,
                deviation: tail[node],
            });
        }
        Ok(Self { g, tail: Some(tail) })
    }

    /// Driver built by accumulating node increments `g_i` (`i >= 1`).
    pub fn from_increments(increments: &AdaptedProcess, tail: Option<Vec<f64>>, strictness: f64) -> Result<Self> {
        if increments.start() != 1 {
            return Err(invalid(MODULE, "increments", "increments start at index 1"));
        }
        let space = increments.space().clone();
        let mut levels = vec![vec![0.0]];
        for i in 1..=increments.end() {
            let prev = &levels[i - 1];
            let inc = increments.at(i)?;
            let lvl = (0..space.num_nodes(i))
                .map(|n| prev[space.parent(i, n).unwrap()] + inc[n])
                .collect();
            levels.push(lvl);
        }
        let g = AdaptedProcess::new(space, 0, levels)?;
        match tail {
            Some(t) => Self::with_tail(g, t, strictness),
            None => Self::new(g, strictness),
        }
    }

    fn validate(g: &AdaptedProcess, strictness: f64) -> Result<()> {
        if g.start() != 0 || g.value(0, 0) != 0.0 {
            return Err(invalid(MODULE, "driver", "G must start at index 0 with G_0 = 0"));
        }
        let space = g.space();
        for i in 1..=g.end() {
            for n in 0..space.num_nodes(i) {
                let inc = g.value(i, n) - g.value(i - 1, space.parent(i, n).unwrap());
                if !(inc > strictness) {
                    return Err(Error::PropertyViolated {
                        what: "strictly increasing driver",
                        index: i,
                        node: n,
                        deviation: inc,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn process(&self) -> &AdaptedProcess {
        &self.g
    }

    /// Last index at which the kernel is valued.
    pub fn horizon(&self) -> usize {
        match self.tail {
            Some(_) => self.g.end(),
            None => self.g.end() - 1,
        }
    }

    /// `G_inf` on the driver's last level.
    fn terminal(&self) -> Vec<f64> {
        let last = self.g.at(self.g.end()).unwrap();
        match &self.tail {
            Some(t) => last.iter().zip(t).map(|(a, b)| a + b).collect(),
            None => last.to_vec(),
        }
    }

    /// Increment `g_i` at `(i, node)`, `i >= 1`.
    pub fn increment(&self, i: usize, node: usize) -> f64 {
        let p = self.g.space().parent(i, node).unwrap();
        self.g.value(i, node) - self.g.value(i - 1, p)
    }
}

/// Jointly constructed kernel, positive-return rate, positive-return asset
/// and likelihood-ratio martingale.
#[derive(Debug, Clone)]
pub struct PricingKernelBundle {
    pub pi: AdaptedProcess,
    /// Per-period return, defined from index 1.
    pub rbar: AdaptedProcess,
    pub bbar: AdaptedProcess,
    pub rhobar: AdaptedProcess,
    /// `E_N[G_inf] - G_N` on the horizon level; equals `pi_N`.
    pub tail: Vec<f64>,
}

impl PricingKernelBundle {
    pub fn horizon(&self) -> usize {
        self.pi.end()
    }
}

/// Builds the kernel bundle from an increasing driver.
pub fn kernel_from_driver(d: &IncreasingDriver) -> Result<PricingKernelBundle> {
    let space = d.g.space().clone();
    let n = d.horizon();
    let last = d.g.end();

    // E_i[G_inf] for i = 0..=n by backward induction from the driver's last level.
    let mut cond = vec![Vec::new(); n + 1];
    let mut v = d.terminal();
    if last == n {
        cond[n] = v.clone();
    }
    for i in (0..last).rev() {
        v = space.expect_step(&v, i);
        if i <= n {
            cond[i] = v.clone();
        }
    }
    let pi_levels: Vec<Vec<f64>> = (0..=n)
        .map(|i| cond[i].iter().zip(d.g.at(i).unwrap()).map(|(e, g)| e - g).collect())
        .collect();
    for (i, lvl) in pi_levels.iter().enumerate() {
        if let Some(node) = lvl.iter().position(|&p| !(p > 0.0)) {
            return Err(Error::PropertyViolated { what: "positive kernel", index: i, node, deviation: lvl[node] });
        }
    }
    let pi = AdaptedProcess::new(space.clone(), 0, pi_levels)?;
    let rbar = AdaptedProcess::from_fn(space.clone(), 1, n, |i, node| d.increment(i, node) / pi.value(i, node))?;
    let bbar = accumulate_returns(&rbar, n)?;
    let rhobar = pi.zip_with(&bbar, |a, b| a * b)?;
    let tail = pi.at(n)?.to_vec();
    Ok(PricingKernelBundle { pi, rbar, bbar, rhobar, tail })
}

/// `B_0 = 1`, `B_i = B_{parent} (1 + r_i)` up to index `n`.
pub(crate) fn accumulate_returns(r: &AdaptedProcess, n: usize) -> Result<AdaptedProcess> {
    let space = r.space().clone();
    let mut levels = vec![vec![1.0]];
    for i in 1..=n {
        let rates = r.at(i)?;
        let prev = &levels[i - 1];
        let lvl = (0..space.num_nodes(i))
            .map(|node| prev[space.parent(i, node).unwrap()] * (1.0 + rates[node]))
            .collect();
        levels.push(lvl);
    }
    AdaptedProcess::new(space, 0, levels)
}

/// Martingale part `Y` and previsible increasing part `A` with `pi = Y - A`.
#[derive(Debug, Clone)]
pub struct DoobParts {
    pub y: AdaptedProcess,
    pub a: AdaptedProcess,
}

/// Doob decomposition `A_i = sum_{n<i} (pi_n - E_n[pi_{n+1}])`, `Y = pi + A`.
pub fn doob_decompose(pi: &AdaptedProcess, tol: f64) -> Result<DoobParts> {
    if pi.start() != 0 {
        return Err(invalid(MODULE, "pi", "kernel must start at index 0"));
    }
    let excess = supermartingale_excess(pi);
    if pi.end() > 0 && excess.max > tol {
        return Err(Error::PropertyViolated {
            what: "supermartingale",
            index: excess.index,
            node: excess.node,
            deviation: excess.max,
        });
    }
    let space = pi.space().clone();
    let mut a_levels = vec![vec![0.0]];
    for i in 1..=pi.end() {
        let e = space.expect_step(pi.at(i)?, i - 1);
        let prev_a = &a_levels[i - 1];
        let step: Vec<f64> = pi
            .at(i - 1)?
            .iter()
            .zip(&e)
            .zip(prev_a)
            .map(|((p, e), a)| a + (p - e))
            .collect();
        a_levels.push(space.broadcast(&step, i - 1, i));
    }
    let a = AdaptedProcess::new(space, 0, a_levels)?;
    let y = pi.zip_with(&a, |p, a| p + a)?;
    Ok(DoobParts { y, a })
}

/// `pi_i` recomputed as `E_i[sum_{n=i+1..N} pi_n rbar_n + tail]`, where
/// `tail` lives on the horizon level.
pub fn kernel_as_conditional_tail(pi: &AdaptedProcess, rbar: &AdaptedProcess, tail: &[f64]) -> Result<AdaptedProcess> {
    pi.ensure_same_space(rbar)?;
    let flows = pi.zip_with(rbar, |p, r| p * r)?;
    tail_sum(&flows, pi.end(), tail)
}

/// `V_i = E_i[sum_{n=i+1..N} flow_n + tail_N]` for `i = 0..=N`.
pub(crate) fn tail_sum(flows: &AdaptedProcess, n: usize, tail: &[f64]) -> Result<AdaptedProcess> {
    let space = flows.space().clone();
    if tail.len() != space.num_nodes(n) {
        return Err(invalid(MODULE, "tail", "one value per horizon node required"));
    }
    let mut levels = vec![Vec::new(); n + 1];
    levels[n] = tail.to_vec();
    for i in (0..n).rev() {
        let next: Vec<f64> = levels[i + 1].iter().zip(flows.at(i + 1)?).map(|(v, f)| v + f).collect();
        levels[i] = space.expect_step(&next, i);
    }
    AdaptedProcess::new(space, 0, levels)
}

/// Right-hand side `E_i[sum_{n>=i} pi_n r_{n+1} P_{n,n+1}]` with the natural
/// short rate and one-period bond, truncated at the horizon with `tail`
/// (exact when `tail = pi_N`).
pub fn kernel_short_rate_form(pi: &AdaptedProcess, tail: &[f64], strictness: f64) -> Result<AdaptedProcess> {
    if !is_strict_supermartingale(pi, strictness)? {
        let e = supermartingale_excess(pi);
        return Err(Error::PropertyViolated {
            what: "strict supermartingale kernel",
            index: e.index,
            node: e.node,
            deviation: e.max,
        });
    }
    let space = pi.space().clone();
    let n = pi.end();
    // Summand at n, previsible for n+1: pi_n r_{n+1} P_{n,n+1}.
    let summand = AdaptedProcess::from_fn(space.clone(), 0, n, |i, node| {
        if i == n {
            return 0.0;
        }
        let p = pi.value(i, node);
        let e: f64 = space.children(i, node).map(|c| space.branch_prob(i + 1, c) * pi.value(i + 1, c)).sum();
        let bond = e / p;
        let rate = p / e - 1.0;
        p * rate * bond
    })?;
    let mut levels = vec![Vec::new(); n + 1];
    levels[n] = tail.to_vec();
    for i in (0..n).rev() {
        let e = space.expect_step(&levels[i + 1], i);
        levels[i] = e.iter().zip(summand.at(i)?).map(|(a, b)| a + b).collect();
    }
    AdaptedProcess::new(space, 0, levels)
}

/// Re-extracts `G_i = sum_{n<=i} pi_n rbar_n` from a bundle.
pub fn driver_from_bundle(b: &PricingKernelBundle) -> Result<AdaptedProcess> {
    let space = b.pi.space().clone();
    let flows = b.pi.zip_with(&b.rbar, |p, r| p * r)?;
    let mut levels = vec![vec![0.0]];
    for i in 1..=b.horizon() {
        let f = flows.at(i)?;
        let prev = &levels[i - 1];
        levels.push((0..space.num_nodes(i)).map(|n| prev[space.parent(i, n).unwrap()] + f[n]).collect());
    }
    AdaptedProcess::new(space, 0, levels)
}

/// Summary of the bundle invariants.
#[derive(Debug, Clone, Serialize)]
pub struct BundleCheck {
    pub rhobar_martingale: Deviation,
    /// Smallest one-step increase of `Bbar`.
    pub bbar_min_increase: f64,
    pub min_pi: f64,
}

pub fn check_bundle(b: &PricingKernelBundle) -> BundleCheck {
    let space = b.pi.space();
    let mut min_inc = f64::INFINITY;
    for i in 1..=b.horizon() {
        for n in 0..space.num_nodes(i) {
            let p = space.parent(i, n).unwrap();
            min_inc = min_inc.min(b.bbar.value(i, n) - b.bbar.value(i - 1, p));
        }
    }
    BundleCheck { rhobar_martingale: martingale_defect(&b.rhobar), bbar_min_increase: min_inc, min_pi: b.pi.min() }
}
