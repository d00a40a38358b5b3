//! Scenario execution.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use sdfkit::assets::{axiom_a_defect, price_income_asset, transversality_defect, Asset};
use sdfkit::bonds::{
    bond_surface, doob_vs_mma_bridge, natural_mma, one_period_identity_gap, rational_model, BondQuote, DiscountBondSurface, FhFamily,
    MoneyMarketAccount, RationalModelSpec,
};
use sdfkit::infoflow::{
    bridge_covariance_check, filter_martingale_check, filter_tower_check, markov_reduction_check, simulate_ensemble, XFactor,
};
use sdfkit::inflation::{
    economy_from_information, foc_residuals, nominal_kernel, price_claim, price_claim_via_kernel, real_kernel, solve_mu, velocity,
    AgentProblem, EconomyPath, InformationEconomy, UtilityConfig, UtilitySpec,
};
use sdfkit::kernel::{doob_decompose, kernel_as_conditional_tail, kernel_from_driver, kernel_short_rate_form, check_bundle, IncreasingDriver};
use sdfkit::probspace::{martingale_defect, supermartingale_excess, Deviation};
use sdfkit::{AdaptedProcess, Exec, LatticeSpace, Tolerances};
use serde::Serialize;

use crate::report::{Check, Location, Report, TailDisclosure, Value};
use crate::scenario::{ClaimSpec, IncomeAssetSpec, ModelSpec, Payoff, Scenario};

#[derive(Debug, Clone, Serialize)]
pub struct KernelRow {
    pub i: usize,
    pub node_id: usize,
    pub parent_id: Option<usize>,
    pub t: f64,
    pub prob: f64,
    pub pi: f64,
    pub mma: Option<f64>,
    pub short_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EconomyRow {
    pub i: usize,
    /// Lattice node, or path id for simulated economies.
    pub node_id: usize,
    pub t: f64,
    pub k: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub pi: f64,
    pub real_pi: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleRow {
    pub path_id: usize,
    pub i: usize,
    pub xi: f64,
    pub filtered: f64,
    pub factor: String,
}

#[derive(Debug, Clone)]
pub struct Outputs {
    pub report: Report,
    pub bonds: Vec<BondQuote>,
    pub kernel: Vec<KernelRow>,
    pub economy: Vec<EconomyRow>,
    pub ensemble: Vec<EnsembleRow>,
    /// Kept for the `curve` command.
    pub surface: Option<DiscountBondSurface>,
}

fn loc(d: &Deviation) -> Option<Location> {
    Some(Location { index: d.index, node: d.node })
}

fn max_gap(a: &AdaptedProcess, b: &AdaptedProcess) -> Result<Deviation> {
    let mut d = Deviation { max: 0.0, index: 0, node: 0 };
    let gap = a.zip_with(b, |x, y| (x - y).abs())?;
    for (k, lvl) in gap.levels().iter().enumerate() {
        for (n, &v) in lvl.iter().enumerate() {
            if v > d.max {
                d = Deviation { max: v, index: gap.start() + k, node: n };
            }
        }
    }
    Ok(d)
}

fn utility(cfg: &UtilityConfig, numeric: bool) -> Result<UtilitySpec> {
    let u = UtilitySpec::from_config(cfg)?;
    Ok(if numeric { u.as_generic()? } else { u })
}

struct Ctx {
    tol: Tolerances,
    seed: u64,
    exec: Exec,
}

pub fn run(sc: &Scenario, seed: u64, paths: usize, tol: Tolerances, exec: Exec) -> Result<Outputs> {
    let grid = sc.grid.build()?;
    let ctx = Ctx { tol, seed, exec };
    let mut out = Outputs {
        report: Report {
            scenario: sc.name.clone(),
            model: sc.model.kind().to_string(),
            seed,
            paths,
            horizon: grid.horizon(),
            passed: false,
            invariants: Vec::new(),
            tails: Vec::new(),
            results: Vec::new(),
        },
        bonds: Vec::new(),
        kernel: Vec::new(),
        economy: Vec::new(),
        ensemble: Vec::new(),
        surface: None,
    };
    if sc.model.needs_lattice() {
        let lattice = sc.lattice.as_ref().context("this model needs a \"lattice\" section")?;
        let space = lattice.build(grid)?;
        run_lattice(sc, &space, &ctx, &mut out)?;
    } else {
        if !sc.instruments.income_assets.is_empty() {
            bail!("income assets need a lattice model");
        }
        run_information(sc, &grid, paths, &ctx, &mut out)?;
    }
    out.report.finalize();
    Ok(out)
}

fn run_lattice(sc: &Scenario, space: &Arc<LatticeSpace>, ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let n = space.horizon();
    let tol = &ctx.tol;
    let checks = &mut out.report.invariants;
    let pi = match &sc.model {
        ModelSpec::DriverKernel { increments, tail, tail_bound } => {
            let inc = increments.build(space, 1, n, ctx.seed)?;
            let driver = match tail {
                Some(t) => {
                    let tail = t.build(space, n, n, ctx.seed)?.at(n)?.to_vec();
                    IncreasingDriver::from_increments(&inc, Some(tail), tol.strictness)?
                }
                None => IncreasingDriver::from_increments(&inc, None, tol.strictness)?,
            };
            let b = kernel_from_driver(&driver)?;
            let bc = check_bundle(&b);
            checks.push(Check::deviation("positive_return_density_martingale", &bc.rhobar_martingale, tol.martingale));
            checks.push(Check::positive("positive_return_asset_increasing", bc.bbar_min_increase));
            let rebuilt = kernel_as_conditional_tail(&b.pi, &b.rbar, &b.tail)?;
            checks.push(Check::deviation("kernel_tail_identity", &max_gap(&rebuilt, &b.pi)?, tol.reconstruction));
            let h = b.horizon();
            let mass = b.pi.mean(h)?;
            out.report.tails.push(TailDisclosure::new("kernel_horizon_mass", mass, *tail_bound));
            out.report.results.push(Value::exact("kernel_horizon_mass", mass));
            b.pi
        }
        ModelSpec::Rational { alpha, beta, n: nspec } => {
            let nproc = nspec.build(space, 0, n, ctx.seed)?;
            let spec = RationalModelSpec::new(alpha.values(n)?, beta.values(n)?, nproc, tol.martingale)?;
            let m = rational_model(&spec, tol.strictness, ctx.exec)?;
            checks.push(Check::deviation("rational_closed_form_bonds", &m.surface.max_gap(&m.closed_form), tol.reconstruction));
            let mma = natural_mma(&m.pi, tol.strictness)?;
            let prod = spec.money_market_product()?;
            checks.push(Check::deviation("rational_money_market_product", &max_gap(&mma.b, &prod)?, tol.one_period));
            m.pi
        }
        ModelSpec::Inflation { utility: ucfg, numeric, gamma, wealth, k, m, lambda } => {
            let u = utility(ucfg, *numeric)?;
            let e = EconomyPath::solve(&u, k.build(space, 0, n, ctx.seed)?, m.build(space, 0, n, ctx.seed)?, lambda.build(space, 0, n, ctx.seed)?)?;
            let mu = match wealth {
                Some(w) => {
                    let problem = AgentProblem::new(u.clone(), *gamma, *w)?;
                    let mu = solve_mu(&problem, &e)?;
                    let resid = sdfkit::inflation::budget_residual(&problem, &e, mu)?;
                    checks.push(Check::at_most("budget_identity", resid, tol.foc, None));
                    mu
                }
                None => 1.0,
            };
            out.report.results.push(Value::exact("mu", mu));
            let pi = nominal_kernel(&u, &e, *gamma, mu, tol.foc)?;
            let foc = foc_residuals(&u, &e, *gamma, mu, &pi)?;
            checks.push(Check::deviation("foc_consumption", &foc.consumption, tol.foc));
            checks.push(Check::deviation("foc_liquidity", &foc.liquidity, tol.foc));
            let v = velocity(&e)?;
            if let UtilityConfig::Log { a, b } = ucfg {
                let want = e.lambda.map(|l| a / b * l)?;
                checks.push(Check::deviation("log_velocity_identity", &max_gap(&v, &want)?, tol.reconstruction));
            }
            let real = real_kernel(&pi, &e.c)?;
            for i in 0..=n {
                for node in 0..space.num_nodes(i) {
                    out.economy.push(EconomyRow {
                        i,
                        node_id: node,
                        t: space.grid().time(i),
                        k: e.k.value(i, node),
                        m: e.m.value(i, node),
                        lambda: e.lambda.value(i, node),
                        c: e.c.value(i, node),
                        pi: pi.value(i, node),
                        real_pi: real.value(i, node),
                        velocity: v.value(i, node),
                    });
                }
            }
            for claim in &sc.instruments.claims {
                lattice_claim(&u, &e, *gamma, claim, tol, &mut out.report)?;
            }
            pi
        }
        ModelSpec::InformationEconomy { .. } => unreachable!("information economies run without a lattice"),
    };
    if !matches!(sc.model, ModelSpec::Inflation { .. }) && !sc.instruments.claims.is_empty() {
        bail!("claims need an inflation model");
    }
    kernel_pipeline(&pi, space, sc, ctx, out)
}

fn lattice_claim(u: &UtilitySpec, e: &EconomyPath, gamma: f64, claim: &ClaimSpec, tol: &Tolerances, report: &mut Report) -> Result<()> {
    let j = claim.maturity;
    let space = e.k.space();
    let h = match claim.payoff {
        Payoff::Nominal { amount } => AdaptedProcess::constant(space.clone(), j, j, amount)?,
        Payoff::CpiIndexed { units } => sdfkit::inflation::cpi_indexed_payoff(e, units, j)?,
    };
    let via_kernel = price_claim_via_kernel(u, e, gamma, &h, j)?;
    report.results.push(Value::exact(format!("claim:{}", claim.name), via_kernel));
    if u.consumption_exponent().is_some() {
        let closed = price_claim(u, e, gamma, &h, j)?;
        let gap = (closed - via_kernel).abs() / via_kernel.abs().max(1.0);
        report.invariants.push(Check::at_most(format!("claim_closed_form_vs_kernel:{}", claim.name), gap, tol.reconstruction, None));
    }
    Ok(())
}

fn kernel_pipeline(pi: &AdaptedProcess, space: &Arc<LatticeSpace>, sc: &Scenario, ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let tol = &ctx.tol;
    let n = pi.end();
    let checks = &mut out.report.invariants;
    checks.push(Check::positive("kernel_positive", pi.min()));
    let excess = supermartingale_excess(pi);
    let strict = Check::at_most("kernel_strict_supermartingale", excess.max, -tol.strictness, loc(&excess));
    let is_strict = strict.passed;
    // Nominal kernels of an economy may carry negative rates; bonds are
    // then skipped rather than failed.
    if matches!(sc.model, ModelSpec::Inflation { .. }) && !is_strict {
        out.report.results.push(Value::exact("bonds_skipped_non_positive_rates", 1.0));
        push_kernel_rows(pi, None, space, out);
        return income_assets(pi, &sc.instruments.income_assets, ctx, out);
    }
    checks.push(strict);
    if !is_strict {
        push_kernel_rows(pi, None, space, out);
        return income_assets(pi, &sc.instruments.income_assets, ctx, out);
    }

    let parts = doob_decompose(pi, 0.0)?;
    checks.push(Check::deviation("doob_martingale_part", &martingale_defect(&parts.y), tol.martingale));
    let recon = parts.y.zip_with(&parts.a, |y, a| y - a)?;
    checks.push(Check::deviation("doob_reconstruction", &max_gap(&recon, pi)?, tol.reconstruction));
    let bridge = doob_vs_mma_bridge(pi, tol.strictness)?;
    checks.push(Check::deviation("doob_vs_money_market", &bridge.doob_gap, tol.reconstruction));
    let short_form = kernel_short_rate_form(pi, pi.at(n)?, tol.strictness)?;
    checks.push(Check::deviation("kernel_short_rate_tail", &max_gap(&short_form, pi)?, tol.reconstruction));

    let surface = bond_surface(pi, tol.strictness, ctx.exec)?;
    let fh = FhFamily::from_kernel(pi, tol.strictness)?;
    let (fh_dev, fh_min) = fh.check();
    checks.push(Check::deviation("fh_members_martingale", &fh_dev, tol.martingale));
    checks.push(Check::positive("fh_members_positive", fh_min));
    checks.push(Check::deviation("fh_bond_reconstruction", &fh.surface().max_gap(&surface), tol.reconstruction));
    let monotone = surface.check_monotone();
    checks.push(Check {
        name: "bond_prices_in_unit_interval_and_decreasing".into(),
        passed: monotone.is_none(),
        max_deviation: monotone.map_or(0.0, |q| q.price),
        tolerance: 0.0,
        location: monotone.map(|q| Location { index: q.i, node: q.node }),
        note: monotone.map(|q| format!("first offending maturity {}", q.j)),
    });
    let mut worst = Deviation { max: 0.0, index: 0, node: 0 };
    for j in 1..=n {
        let d = axiom_a_defect(&surface.bond_asset(j)?, pi)?;
        if d.max > worst.max {
            worst = d;
        }
    }
    checks.push(Check::deviation("bond_axiom_a", &worst, tol.axiom_a));
    let mma = natural_mma(pi, tol.strictness)?;
    checks.push(Check::deviation("money_market_density_martingale", &martingale_defect(&mma.rho), tol.martingale));
    checks.push(Check::deviation("one_period_bond_rate_identity", &one_period_identity_gap(&surface, &mma)?, tol.one_period));

    out.bonds = surface.quotes().collect();
    push_kernel_rows(pi, Some(&mma), space, out);
    out.surface = Some(surface);
    income_assets(pi, &sc.instruments.income_assets, ctx, out)
}

fn push_kernel_rows(pi: &AdaptedProcess, mma: Option<&MoneyMarketAccount>, space: &Arc<LatticeSpace>, out: &mut Outputs) {
    for i in 0..=pi.end() {
        for node in 0..space.num_nodes(i) {
            out.kernel.push(KernelRow {
                i,
                node_id: node,
                parent_id: space.parent(i, node),
                t: space.grid().time(i),
                prob: space.prob(i, node),
                pi: pi.value(i, node),
                mma: mma.map(|m| m.b.value(i, node)),
                short_rate: mma.filter(|_| i > 0).map(|m| m.r.value(i, node)),
            });
        }
    }
}

fn income_assets(pi: &AdaptedProcess, specs: &[IncomeAssetSpec], ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let space = pi.space();
    let n = pi.end();
    for a in specs {
        let d = a.dividend.build(space, 0, n, ctx.seed)?;
        let terminal = match &a.terminal {
            Some(t) => Some(t.build(space, n, n, ctx.seed)?.at(n)?.to_vec()),
            None => None,
        };
        let mut s = price_income_asset(&d, pi, terminal.as_deref())?;
        if let Some(p) = &a.perturb {
            s = s.perturbed(p.index, p.node, p.delta)?;
        }
        let asset = Asset::new(s, d, true)?;
        let dev = axiom_a_defect(&asset, pi)?;
        out.report.invariants.push(Check::deviation(format!("axiom_a:{}", a.name), &dev, ctx.tol.axiom_a));
        out.report.results.push(Value::exact(format!("asset_price:{}", a.name), asset.s.value(0, 0)));
        let tv = transversality_defect(&asset, pi)?;
        out.report.tails.push(TailDisclosure::new(format!("retained_value:{}", a.name), tv, a.tail_bound));
    }
    Ok(())
}

fn run_information(sc: &Scenario, grid: &sdfkit::TimeGrid, paths: usize, ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let ModelSpec::InformationEconomy { utility: ucfg, numeric, gamma, factors, k, m, lambda, markov_index } = &sc.model else {
        unreachable!("lattice models are handled elsewhere")
    };
    if paths < 2 {
        bail!("Monte Carlo runs need at least two paths");
    }
    let tol = &ctx.tol;
    let u = utility(ucfg, *numeric)?;
    let xf = factors
        .iter()
        .map(|f| XFactor::new(f.label.clone(), f.reveal_index, f.prior.clone()))
        .collect::<sdfkit::Result<Vec<_>>>()?;
    let sigmas: Vec<f64> = factors.iter().map(|f| f.sigma).collect();
    let spec = InformationEconomy::new(xf.clone(), sigmas.clone(), k.clone(), m.clone(), lambda.clone())?;
    let sim = economy_from_information(&spec, &u, grid, paths, ctx.seed, ctx.exec)?;

    for (a, f) in xf.iter().enumerate() {
        let ens = simulate_ensemble(f, sigmas[a], grid, paths, ctx.seed, a as u64, ctx.exec)?;
        let j = f.reveal_index;
        for (p, path) in sim.paths.iter().enumerate() {
            for i in 0..=j {
                out.ensemble.push(EnsembleRow { path_id: p, i, xi: path.xi[a][i], filtered: path.estimates[a][i], factor: f.label.clone() });
            }
        }
        let drift = filter_martingale_check(&ens, |x| x, ctx.exec)?;
        let worst = drift.iter().fold((0.0f64, 0usize), |acc, d| if d.z > acc.0 { (d.z, d.i) } else { acc });
        out.report.invariants.push(Check::at_most(
            format!("filter_martingale:{}", f.label),
            worst.0,
            tol.mc_se,
            Some(Location { index: worst.1, node: 0 }),
        ));
        if j >= 2 {
            let mut tz = (0.0f64, 0usize);
            for i in 1..j {
                let t = filter_tower_check(&ens, |x| x, i, ctx.exec)?;
                if t.z > tz.0 {
                    tz = (t.z, i);
                }
            }
            out.report.invariants.push(Check::at_most(format!("filter_tower:{}", f.label), tz.0, tol.mc_se, Some(Location { index: tz.1, node: 0 })));
            let cov = bridge_covariance_check(grid, 1, j - 1, j, paths, ctx.seed, ctx.exec)?;
            out.report.invariants.push(Check::at_most(format!("bridge_covariance:{}", f.label), cov.z, tol.mc_se, None));
            let mi = markov_index.unwrap_or(j / 2).clamp(1, j - 1);
            let check = match markov_reduction_check(&ens, |x| x, mi, 8, 8, 30, ctx.exec) {
                Ok(rep) => Check::at_most(format!("markov_reduction:{}", f.label), rep.max_z, tol.markov_se, Some(Location { index: mi, node: 0 }))
                    .with_note(format!("64 bins, smallest bin {}", rep.min_count)),
                Err(e @ sdfkit::Error::InsufficientSamples { .. }) => Check::failed(format!("markov_reduction:{}", f.label), tol.markov_se, e.to_string()),
                Err(e) => return Err(e.into()),
            };
            out.report.invariants.push(check);
        }
    }

    for claim in &sc.instruments.claims {
        let j = claim.maturity;
        let est = match claim.payoff {
            Payoff::Nominal { amount } => sim.price_claim(&u, *gamma, j, |_| amount)?,
            Payoff::CpiIndexed { units } => sim.price_claim(&u, *gamma, j, |p| units * p.c[j])?,
        };
        out.report.results.push(Value::estimate(format!("claim:{}", claim.name), &est.kernel));
        if let Some(cf) = est.closed_form {
            let gap = (cf.mean - est.kernel.mean).abs() / est.kernel.mean.abs().max(1.0);
            out.report.invariants.push(Check::at_most(format!("claim_closed_form_vs_kernel:{}", claim.name), gap, tol.reconstruction, None));
        }
    }

    for (p, path) in sim.paths.iter().enumerate() {
        for i in 0..=grid.horizon() {
            let pi = sim.kernel(&u, *gamma, 1.0, p, i);
            out.economy.push(EconomyRow {
                i,
                node_id: p,
                t: grid.time(i),
                k: path.k[i],
                m: path.m[i],
                lambda: path.lambda[i],
                c: path.c[i],
                pi,
                real_pi: pi * path.c[i],
                velocity: path.k[i] * path.c[i] / path.m[i],
            });
        }
    }
    Ok(())
}
