//! Discount bonds implied by a kernel, rational models, the
//! Flesaker–Hughston representation and the natural money-market account.

use std::sync::Arc;

use serde::Serialize;

use crate::assets::Asset;
use crate::error::{invalid, Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::kernel::{accumulate_returns, doob_decompose, driver_from_bundle, PricingKernelBundle};
use crate::probspace::{is_martingale, martingale_defect, supermartingale_excess, AdaptedProcess, Deviation, LatticeSpace};

const MODULE: &str = "bonds";

/// Prices `P_ij` for every node at index `i` and maturity `i < j <= N`.
#[derive(Debug, Clone)]
pub struct DiscountBondSurface {
    space: Arc<LatticeSpace>,
    horizon: usize,
    /// `[i][node][j - i - 1]`
    prices: Vec<Vec<Vec<f64>>>,
}

/// One row of the surface export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BondQuote {
    pub i: usize,
    pub node: usize,
    pub j: usize,
    pub price: f64,
    pub rate: f64,
}

impl DiscountBondSurface {
    fn from_fn<F: Fn(usize, usize, usize) -> f64>(space: Arc<LatticeSpace>, horizon: usize, f: F) -> Self {
        let prices = (0..=horizon)
            .map(|i| {
                (0..space.num_nodes(i))
                    .map(|node| (i + 1..=horizon).map(|j| f(i, node, j)).collect())
                    .collect()
            })
            .collect();
        Self { space, horizon, prices }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn space(&self) -> &Arc<LatticeSpace> {
        &self.space
    }

    pub fn price(&self, i: usize, node: usize, j: usize) -> Result<f64> {
        if i >= self.horizon || j <= i || j > self.horizon {
            return Err(Error::IndexOutOfRange { index: j, lo: i + 1, hi: self.horizon });
        }
        self.prices[i]
            .get(node)
            .map(|row| row[j - i - 1])
            .ok_or(Error::IndexOutOfRange { index: node, lo: 0, hi: self.space.num_nodes(i) - 1 })
    }

    /// Simple rate `R_ij = 1 / P_ij - 1`.
    pub fn rate(&self, i: usize, node: usize, j: usize) -> Result<f64> {
        Ok(1.0 / self.price(i, node, j)? - 1.0)
    }

    /// Curve `(j, P_ij, R_ij)` at one node.
    pub fn curve_at(&self, i: usize, node: usize) -> Result<Vec<BondQuote>> {
        if i >= self.horizon {
            return Err(Error::IndexOutOfRange { index: i, lo: 0, hi: self.horizon - 1 });
        }
        (i + 1..=self.horizon)
            .map(|j| {
                let price = self.price(i, node, j)?;
                Ok(BondQuote { i, node, j, price, rate: 1.0 / price - 1.0 })
            })
            .collect()
    }

    /// Probability-weighted average of `P_ij` over the nodes at index `i`.
    /// The reported rate is that of the averaged price.
    pub fn mean_curve(&self, i: usize) -> Result<Vec<BondQuote>> {
        if i >= self.horizon {
            return Err(Error::IndexOutOfRange { index: i, lo: 0, hi: self.horizon - 1 });
        }
        let probs = self.space.probs(i);
        Ok((i + 1..=self.horizon)
            .map(|j| {
                let price: f64 = probs.iter().enumerate().map(|(n, p)| p * self.prices[i][n][j - i - 1]).sum();
                BondQuote { i, node: 0, j, price, rate: 1.0 / price - 1.0 }
            })
            .collect())
    }

    /// All quotes ordered by `(i, node, j)`.
    pub fn quotes(&self) -> impl Iterator<Item = BondQuote> + '_ {
        self.prices.iter().enumerate().flat_map(move |(i, nodes)| {
            nodes.iter().enumerate().flat_map(move |(node, row)| {
                row.iter().enumerate().map(move |(k, &price)| BondQuote { i, node, j: i + 1 + k, price, rate: 1.0 / price - 1.0 })
            })
        })
    }

    /// Largest `|P_ij - other.P_ij|`.
    pub fn max_gap(&self, other: &DiscountBondSurface) -> Deviation {
        let mut dev = Deviation::none();
        for (a, b) in self.quotes().zip(other.quotes()) {
            dev.update((a.price - b.price).abs(), a.i, a.node);
        }
        dev
    }

    /// Checks `0 < P_ij < 1` and strictly decreasing in maturity.
    pub fn check_monotone(&self) -> Option<BondQuote> {
        let mut prev: Option<BondQuote> = None;
        for q in self.quotes() {
            if !(q.price > 0.0 && q.price < 1.0) {
                return Some(q);
            }
            if let Some(p) = prev {
                if p.i == q.i && p.node == q.node && q.price >= p.price {
                    return Some(q);
                }
            }
            prev = Some(q);
        }
        None
    }

    /// Bond maturing at `j` as an asset: unit dividend at `j`, zero value from `j` on.
    pub fn bond_asset(&self, j: usize) -> Result<Asset> {
        if j == 0 || j > self.horizon {
            return Err(Error::IndexOutOfRange { index: j, lo: 1, hi: self.horizon });
        }
        let s = AdaptedProcess::from_fn(self.space.clone(), 0, self.horizon, |i, n| {
            if i < j {
                self.prices[i][n][j - i - 1]
            } else {
                0.0
            }
        })?;
        let d = AdaptedProcess::deterministic(self.space.clone(), 0, self.horizon, |i| f64::from(u8::from(i == j)))?;
        Asset::new(s, d, true)
    }

    /// Non-dividend view of the bond: `P_ij` before maturity, `1` at `j`.
    pub fn bond_value_to_maturity(&self, j: usize) -> Result<AdaptedProcess> {
        if j == 0 || j > self.horizon {
            return Err(Error::IndexOutOfRange { index: j, lo: 1, hi: self.horizon });
        }
        AdaptedProcess::from_fn(self.space.clone(), 0, j, |i, n| if i < j { self.prices[i][n][j - i - 1] } else { 1.0 })
    }
}

fn require_strict_kernel(pi: &AdaptedProcess, strictness: f64) -> Result<()> {
    if pi.start() != 0 || pi.end() < 1 {
        return Err(invalid(MODULE, "pi", "kernel must be defined on 0..=N with N >= 1"));
    }
    if let Some(node) = pi.at(0)?.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::PropertyViolated { what: "positive kernel", index: 0, node, deviation: pi.value(0, node) });
    }
    if pi.min() <= 0.0 {
        return Err(invalid(MODULE, "pi", "kernel must be strictly positive"));
    }
    let e = supermartingale_excess(pi);
    if e.max >= -strictness {
        return Err(Error::PropertyViolated { what: "strict supermartingale kernel", index: e.index, node: e.node, deviation: e.max });
    }
    Ok(())
}

/// `P_ij = E_i[pi_j] / pi_i`. Maturities are processed independently.
pub fn bond_surface(pi: &AdaptedProcess, strictness: f64, exec: Exec) -> Result<DiscountBondSurface> {
    require_strict_kernel(pi, strictness)?;
    let space = pi.space().clone();
    let n = pi.end();
    // expected[j - 1][i] = E_i[pi_j] on level i, i < j
    let expected: Vec<Vec<Vec<f64>>> = map_indexed(n, exec, |k| {
        let j = k + 1;
        let mut out = vec![Vec::new(); j];
        let mut v = pi.at(j).unwrap().to_vec();
        for i in (0..j).rev() {
            v = space.expect_step(&v, i);
            out[i] = v.clone();
        }
        out
    });
    Ok(DiscountBondSurface::from_fn(space, n, |i, node, j| expected[j - 1][i][node] / pi.value(i, node)))
}

/// Deterministic sequence supplied either in closed form or explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sequence {
    /// `scale * ratio^i`
    Geometric { scale: f64, ratio: f64 },
    Explicit { values: Vec<f64> },
}

impl Sequence {
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Sequence::Geometric { scale, ratio } => Ok((0..=n).map(|i| scale * ratio.powi(i as i32)).collect()),
            Sequence::Explicit { values } => {
                if values.len() < n + 1 {
                    return Err(invalid(MODULE, "sequence", format!("need {} values, got {}", n + 1, values.len())));
                }
                Ok(values[..=n].to_vec())
            }
        }
    }
}

const SEQUENCE_DECREASE_TOL: f64 = 1e-14;

/// `pi_i = alpha_i + beta_i N_i`.
#[derive(Debug, Clone)]
pub struct RationalModelSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub n: AdaptedProcess,
}

impl RationalModelSpec {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, n: AdaptedProcess, martingale_tol: f64) -> Result<Self> {
        let h = n.end();
        if n.start() != 0 || alpha.len() != h + 1 || beta.len() != h + 1 {
            return Err(invalid("RationalModelSpec", "sequences", "alpha, beta and N must cover 0..=N"));
        }
        for (name, seq) in [("alpha", &alpha), ("beta", &beta)] {
            if seq.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(invalid("RationalModelSpec", name, "must be strictly positive"));
            }
            if let Some(k) = seq.windows(2).position(|w| !(w[0] - w[1] > SEQUENCE_DECREASE_TOL)) {
                return Err(invalid("RationalModelSpec", name, format!("not strictly decreasing at index {}", k + 1)));
            }
        }
        if n.min() <= 0.0 {
            return Err(invalid("RationalModelSpec", "N", "martingale must be strictly positive"));
        }
        let dev = martingale_defect(&n);
        if dev.max > martingale_tol {
            return Err(Error::PropertyViolated { what: "RationalModelSpec martingale N", index: dev.index, node: dev.node, deviation: dev.max });
        }
        Ok(Self { alpha, beta, n })
    }

    pub fn kernel(&self) -> Result<AdaptedProcess> {
        AdaptedProcess::from_fn(self.n.space().clone(), 0, self.n.end(), |i, k| self.alpha[i] + self.beta[i] * self.n.value(i, k))
    }

    /// Closed-form `P_ij = (alpha_j + beta_j N_i) / (alpha_i + beta_i N_i)`.
    pub fn closed_form_surface(&self) -> DiscountBondSurface {
        DiscountBondSurface::from_fn(self.n.space().clone(), self.n.end(), |i, k, j| {
            let nv = self.n.value(i, k);
            (self.alpha[j] + self.beta[j] * nv) / (self.alpha[i] + self.beta[i] * nv)
        })
    }

    /// Product form of the previsible money-market account,
    /// `B_i = prod_{n=1..i} (alpha_{n-1} + beta_{n-1} N_{n-1}) / (alpha_n + beta_n N_{n-1})`.
    pub fn money_market_product(&self) -> Result<AdaptedProcess> {
        let space = self.n.space().clone();
        let mut levels = vec![vec![1.0]];
        for i in 1..=self.n.end() {
            let prev = &levels[i - 1];
            let lvl = (0..space.num_nodes(i))
                .map(|k| {
                    let p = space.parent(i, k).unwrap();
                    let np = self.n.value(i - 1, p);
                    prev[p] * (self.alpha[i - 1] + self.beta[i - 1] * np) / (self.alpha[i] + self.beta[i] * np)
                })
                .collect();
            levels.push(lvl);
        }
        AdaptedProcess::new(space, 0, levels)
    }
}

#[derive(Debug, Clone)]
pub struct RationalModel {
    pub pi: AdaptedProcess,
    /// Prices from the kernel, `E_i[pi_j] / pi_i`.
    pub surface: DiscountBondSurface,
    pub closed_form: DiscountBondSurface,
}

pub fn rational_model(spec: &RationalModelSpec, strictness: f64, exec: Exec) -> Result<RationalModel> {
    let pi = spec.kernel()?;
    let surface = bond_surface(&pi, strictness, exec)?;
    Ok(RationalModel { pi, surface, closed_form: spec.closed_form_surface() })
}

/// Positive martingales `m_{in} = E_i[g_n]`, `n = 1..=N+1`, whose tail sums
/// give the kernel and the bond prices. Element `N+1` carries the
/// post-horizon mass `E_i[pi_N]`.
#[derive(Debug, Clone)]
pub struct FhFamily {
    /// `members[n - 1]` is defined on `0..=min(n, N)`.
    pub members: Vec<AdaptedProcess>,
    horizon: usize,
}

impl FhFamily {
    /// Family from driver increments `g_n` (`n = 1..=N`) and the horizon tail.
    pub fn from_increments(increments: &AdaptedProcess, tail: &[f64]) -> Result<Self> {
        let space = increments.space().clone();
        let n_max = increments.end();
        if increments.start() != 1 {
            return Err(invalid(MODULE, "increments", "increments start at index 1"));
        }
        if increments.min() <= 0.0 || tail.iter().any(|&t| !(t > 0.0)) {
            return Err(invalid(MODULE, "increments", "kernel not representable with strictly positive increments"));
        }
        let mut members = Vec::with_capacity(n_max + 1);
        for n in 1..=n_max + 1 {
            let (top, values) = if n <= n_max { (n, increments.at(n)?.to_vec()) } else { (n_max, tail.to_vec()) };
            let mut levels = vec![Vec::new(); top + 1];
            levels[top] = values;
            for i in (0..top).rev() {
                levels[i] = space.expect_step(&levels[i + 1], i);
            }
            members.push(AdaptedProcess::new(space.clone(), 0, levels)?);
        }
        Ok(Self { members, horizon: n_max })
    }

    /// Family from a driver-built bundle: `g_n = pi_n rbar_n`.
    pub fn from_bundle(b: &PricingKernelBundle) -> Result<Self> {
        let g = driver_from_bundle(b)?;
        let space = g.space().clone();
        let inc = AdaptedProcess::from_fn(space.clone(), 1, b.horizon(), |i, k| g.value(i, k) - g.value(i - 1, space.parent(i, k).unwrap()))?;
        Self::from_increments(&inc, &b.tail)
    }

    /// Family from the kernel's own Doob increments (a previsible driver).
    pub fn from_kernel(pi: &AdaptedProcess, strictness: f64) -> Result<Self> {
        require_strict_kernel(pi, strictness)?;
        let parts = doob_decompose(pi, 0.0)?;
        let space = pi.space().clone();
        let inc = AdaptedProcess::from_fn(space.clone(), 1, pi.end(), |i, k| parts.a.value(i, k) - parts.a.value(i - 1, space.parent(i, k).unwrap()))?;
        Self::from_increments(&inc, pi.at(pi.end())?)
    }

    /// `m_{in}` at `(i, node)`.
    pub fn value(&self, i: usize, node: usize, n: usize) -> f64 {
        self.members[n - 1].value(i, node)
    }

    /// `sum_{n=i+1..N+1} m_{in}`, which reproduces `pi_i`.
    pub fn kernel(&self) -> Result<AdaptedProcess> {
        let space = self.members[0].space().clone();
        AdaptedProcess::from_fn(space, 0, self.horizon, |i, k| (i + 1..=self.horizon + 1).map(|n| self.value(i, k, n)).sum())
    }

    /// `P_ij = sum_{n>j} m_{in} / sum_{n>i} m_{in}`.
    pub fn surface(&self) -> DiscountBondSurface {
        let space = self.members[0].space().clone();
        let h = self.horizon;
        DiscountBondSurface::from_fn(space, h, |i, k, j| {
            let num: f64 = (j + 1..=h + 1).map(|n| self.value(i, k, n)).sum();
            let den: f64 = (i + 1..=h + 1).map(|n| self.value(i, k, n)).sum();
            num / den
        })
    }

    /// Worst martingale defect and smallest value over all members.
    pub fn check(&self) -> (Deviation, f64) {
        let mut dev = Deviation::none();
        let mut min = f64::INFINITY;
        for m in &self.members {
            let d = martingale_defect(m);
            if d.max > dev.max {
                dev = d;
            }
            min = min.min(m.min());
        }
        (dev, min)
    }
}

/// Natural previsible money-market account.
#[derive(Debug, Clone)]
pub struct MoneyMarketAccount {
    pub b: AdaptedProcess,
    /// Short rate, defined from index 1; sibling nodes share a value.
    pub r: AdaptedProcess,
    /// `rho_i = pi_i B_i`.
    pub rho: AdaptedProcess,
}

/// `1 + r_i = pi_{i-1} / E_{i-1}[pi_i]`, `B_i = prod (1 + r_n)`.
pub fn natural_mma(pi: &AdaptedProcess, strictness: f64) -> Result<MoneyMarketAccount> {
    require_strict_kernel(pi, strictness)?;
    let space = pi.space().clone();
    let n = pi.end();
    let mut r_levels = Vec::with_capacity(n);
    for i in 1..=n {
        let e = space.expect_step(pi.at(i)?, i - 1);
        let per_parent: Vec<f64> = pi.at(i - 1)?.iter().zip(&e).map(|(p, e)| p / e - 1.0).collect();
        r_levels.push(space.broadcast(&per_parent, i - 1, i));
    }
    let r = AdaptedProcess::new(space, 1, r_levels)?;
    let b = accumulate_returns(&r, n)?;
    let rho = pi.zip_with(&b, |p, b| p * b)?;
    Ok(MoneyMarketAccount { b, r, rho })
}

/// Largest `|P_{i-1,i} - 1/(1 + r_i)|`.
pub fn one_period_identity_gap(surface: &DiscountBondSurface, mma: &MoneyMarketAccount) -> Result<Deviation> {
    let space = surface.space().clone();
    let mut dev = Deviation::none();
    for i in 1..=surface.horizon() {
        for k in 0..space.num_nodes(i) {
            let p = space.parent(i, k).unwrap();
            let bond = surface.price(i - 1, p, i)?;
            dev.update((bond - 1.0 / (1.0 + mma.r.value(i, k))).abs(), i, k);
        }
    }
    Ok(dev)
}

/// Martingale defect of `X / B` under the measure with density `rho / rho_0`:
/// worst `|E_i[(rho_{i+1}/rho_i) X_{i+1}/B_{i+1}] - X_i/B_i|`.
pub fn q_martingale_defect(mma: &MoneyMarketAccount, x: &AdaptedProcess) -> Result<Deviation> {
    x.ensure_same_space(&mma.b)?;
    let space = x.space().clone();
    let mut dev = Deviation::none();
    for i in x.start()..x.end() {
        for k in 0..space.num_nodes(i) {
            let rho_i = mma.rho.value(i, k);
            let e: f64 = space
                .children(i, k)
                .map(|c| space.branch_prob(i + 1, c) * mma.rho.value(i + 1, c) / rho_i * x.value(i + 1, c) / mma.b.value(i + 1, c))
                .sum();
            dev.update((e - x.value(i, k) / mma.b.value(i, k)).abs(), i, k);
        }
    }
    Ok(dev)
}

/// Comparison of the Doob increasing part with the money-market sum.
#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    /// `|A_i - sum_{n<i} pi_n r_{n+1} P_{n,n+1}|`.
    pub doob_gap: Deviation,
    /// `|G_i - A_i|` where `G` is built from the induced positive return.
    pub induced_driver_gap: Deviation,
    /// Martingale defect of `pi * Bbar` for the induced positive-return asset.
    pub induced_rhobar: Deviation,
    pub induced_bbar_min_increase: f64,
}

/// Checks that the Doob increasing part equals the accumulated
/// `pi_n r_{n+1} P_{n,n+1}`, and that `rbar_i = r_i pi_{i-1} P_{i-1,i} / pi_i`
/// defines a positive-return asset whose tail decomposition is the Doob one.
pub fn doob_vs_mma_bridge(pi: &AdaptedProcess, strictness: f64) -> Result<BridgeReport> {
    let mma = natural_mma(pi, strictness)?;
    let parts = doob_decompose(pi, 0.0)?;
    let space = pi.space().clone();
    let n = pi.end();

    let mut sum_levels = vec![vec![0.0]];
    let mut rbar_levels = Vec::with_capacity(n);
    for i in 1..=n {
        let e = space.expect_step(pi.at(i)?, i - 1);
        let prev = &sum_levels[i - 1];
        let lvl: Vec<f64> = (0..space.num_nodes(i))
            .map(|k| {
                let p = space.parent(i, k).unwrap();
                let pi_p = pi.value(i - 1, p);
                let bond = e[p] / pi_p;
                prev[p] + pi_p * mma.r.value(i, k) * bond
            })
            .collect();
        let rbar: Vec<f64> = (0..space.num_nodes(i))
            .map(|k| {
                let p = space.parent(i, k).unwrap();
                let pi_p = pi.value(i - 1, p);
                mma.r.value(i, k) * pi_p * (e[p] / pi_p) / pi.value(i, k)
            })
            .collect();
        sum_levels.push(lvl);
        rbar_levels.push(rbar);
    }
    let summed = AdaptedProcess::new(space.clone(), 0, sum_levels)?;
    let rbar = AdaptedProcess::new(space.clone(), 1, rbar_levels)?;
    let bbar = accumulate_returns(&rbar, n)?;
    let rhobar = pi.zip_with(&bbar, |p, b| p * b)?;
    let bundle = PricingKernelBundle { pi: pi.clone(), rbar, bbar: bbar.clone(), rhobar: rhobar.clone(), tail: pi.at(n)?.to_vec() };
    let g = driver_from_bundle(&bundle)?;

    let mut doob_gap = Deviation::none();
    let mut driver_gap = Deviation::none();
    let mut min_inc = f64::INFINITY;
    for i in 0..=n {
        for k in 0..space.num_nodes(i) {
            doob_gap.update((parts.a.value(i, k) - summed.value(i, k)).abs(), i, k);
            driver_gap.update((parts.a.value(i, k) - g.value(i, k)).abs(), i, k);
            if i > 0 {
                min_inc = min_inc.min(bbar.value(i, k) - bbar.value(i - 1, space.parent(i, k).unwrap()));
            }
        }
    }
    Ok(BridgeReport {
        doob_gap,
        induced_driver_gap: driver_gap,
        induced_rhobar: martingale_defect(&rhobar),
        induced_bbar_min_increase: min_inc,
    })
}

/// True when `rho = pi B` passes the martingale test.
pub fn rho_is_martingale(mma: &MoneyMarketAccount, tol: f64) -> bool {
    is_martingale(&mma.rho, tol)
}
