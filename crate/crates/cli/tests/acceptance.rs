//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use sdfkit::assets::{axiom_a_defect, binomial_positive_return, constant_value_asset, price_income_asset, Asset};
use sdfkit::bonds::{bond_surface, natural_mma, one_period_identity_gap, rational_model, FhFamily, RationalModelSpec};
use sdfkit::infoflow::{
    bridge_covariance_check, filter_expect, filter_martingale_check, markov_reduction_check, sample_bridge, simulate_ensemble, Prior, XFactor,
};
use sdfkit::inflation::*;
use sdfkit::kernel::{doob_decompose, kernel_as_conditional_tail, kernel_from_driver, IncreasingDriver};
use sdfkit::probspace::{is_potential, is_strict_supermartingale};
use sdfkit::rng::stream_rng;
use sdfkit::{AdaptedProcess, Exec, LatticeSpace, TimeGrid};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(name: &str, dev: f64, tol: f64) -> Result<(), String> {
    ensure(dev <= tol, || format!("{name}: deviation {dev:e} exceeds {tol:e}"))
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Every root-to-leaf path of a tree with its probability; conditional
/// expectations are computed by summing over the paths through a node.
struct PathOracle {
    space: Arc<LatticeSpace>,
    nodes: Vec<Vec<usize>>,
    prob: Vec<f64>,
}

impl PathOracle {
    fn new(space: &Arc<LatticeSpace>) -> Self {
        let n = space.horizon();
        let mut nodes = Vec::new();
        let mut prob = Vec::new();
        for leaf in 0..space.num_nodes(n) {
            let mut path = vec![0; n + 1];
            path[n] = leaf;
            let mut p = 1.0;
            for i in (1..=n).rev() {
                p *= space.branch_prob(i, path[i]);
                path[i - 1] = space.parent(i, path[i]).unwrap();
            }
            nodes.push(path);
            prob.push(p);
        }
        Self { space: space.clone(), nodes, prob }
    }

    /// `E_i[f(path)]` for every node at level `i`.
    fn cond<F: Fn(&[usize]) -> f64>(&self, i: usize, f: F) -> Vec<f64> {
        let m = self.space.num_nodes(i);
        let (mut num, mut den) = (vec![0.0; m], vec![0.0; m]);
        for (path, p) in self.nodes.iter().zip(&self.prob) {
            num[path[i]] += p * f(path);
            den[path[i]] += p;
        }
        num.iter().zip(&den).map(|(a, b)| a / b).collect()
    }

    /// Largest `|E_i[x_{i+1}] - x_i|` over the process's levels.
    fn martingale_gap(&self, x: &AdaptedProcess) -> f64 {
        let mut worst = 0.0f64;
        for i in x.start()..x.end() {
            let e = self.cond(i, |p| x.value(i + 1, p[i + 1]));
            for (node, v) in e.iter().enumerate() {
                worst = worst.max((v - x.value(i, node)).abs());
            }
        }
        worst
    }
}

fn max_gap(a: &AdaptedProcess, b: &AdaptedProcess) -> f64 {
    a.zip_with(b, |x, y| (x - y).abs()).unwrap().levels().iter().flatten().copied().fold(0.0, f64::max)
}

fn lattice_exactness() -> Outcome {
    let start = Instant::now();
    let space = Arc::new(LatticeSpace::binomial(TimeGrid::uniform(10, 0.25).map_err(s)?, 0.45).map_err(s)?);
    let n = space.horizon();
    let mut rng = stream_rng(2024, 1, 0);
    let inc = AdaptedProcess::from_fn(space.clone(), 1, n, |_, _| rng.random_range(0.01..0.2)).map_err(s)?;
    let tail: Vec<f64> = (0..space.num_nodes(n)).map(|_| rng.random_range(0.5..1.5)).collect();
    let driver = IncreasingDriver::from_increments(&inc, Some(tail.clone()), 0.0).map_err(s)?;
    let b = kernel_from_driver(&driver).map_err(s)?;
    let pi = &b.pi;
    let oracle = PathOracle::new(&space);
    let tol = 1e-10;

    // Kernel: remaining driver plus tail, enumerated along paths.
    let mut kernel_gap = 0.0f64;
    for i in 0..=n {
        let want = oracle.cond(i, |p| (i + 1..=n).map(|k| inc.value(k, p[k])).sum::<f64>() + tail[p[n]]);
        for (node, w) in want.iter().enumerate() {
            kernel_gap = kernel_gap.max((pi.value(i, node) - w).abs());
        }
    }
    within("kernel vs enumerated driver", kernel_gap, tol)?;
    within("tail identity", max_gap(&kernel_as_conditional_tail(pi, &b.rbar, &b.tail).map_err(s)?, pi), tol)?;

    // Strict supermartingale, positivity and finite-horizon potential proxy.
    for i in 0..n {
        let e = oracle.cond(i, |p| pi.value(i + 1, p[i + 1]));
        for (node, v) in e.iter().enumerate() {
            ensure(*v < pi.value(i, node), || format!("kernel not strictly decreasing in expectation at ({i}, {node})"))?;
        }
    }
    ensure(pi.min() > 0.0, || "kernel not positive".into())?;
    let means: Vec<f64> = (0..=n).map(|i| oracle.cond(0, |p| pi.value(i, p[i]))[0]).collect();
    ensure(means.windows(2).all(|w| w[1] < w[0]), || "mean kernel not decreasing".into())?;
    let tail_mass = oracle.cond(0, |p| tail[p[n]])[0];
    within("horizon mass equals declared tail", (means[n] - tail_mass).abs(), tol)?;
    ensure(is_strict_supermartingale(pi, 1e-12).map_err(s)?, || "library strictness predicate rejects the kernel".into())?;
    ensure(is_potential(pi, tail_mass + 1e-12), || "library potential predicate rejects the kernel".into())?;
    ensure(!is_potential(pi, 0.5 * tail_mass), || "potential predicate ignores the tail mass".into())?;

    // Doob parts.
    let parts = doob_decompose(pi, 0.0).map_err(s)?;
    within("pi = Y - A", max_gap(&parts.y.zip_with(&parts.a, |y, a| y - a).map_err(s)?, pi), tol)?;
    within("Y martingale", oracle.martingale_gap(&parts.y), tol)?;
    for i in 1..=n {
        for node in 0..space.num_nodes(i) {
            let p = space.parent(i, node).unwrap();
            ensure(parts.a.value(i, node) > parts.a.value(i - 1, p), || format!("A not increasing at ({i}, {node})"))?;
            let first = space.children(i - 1, p).start;
            ensure(parts.a.value(i, node) == parts.a.value(i, first), || format!("A not previsible at ({i}, {node})"))?;
        }
    }

    // Bonds: direct pricing against enumeration and the FH reconstruction.
    let direct = bond_surface(pi, 0.0, Exec::default()).map_err(s)?;
    let mut bond_gap = 0.0f64;
    for j in 1..=n {
        for i in 0..j {
            let e = oracle.cond(i, |p| pi.value(j, p[j]));
            for (node, v) in e.iter().enumerate() {
                bond_gap = bond_gap.max((direct.price(i, node, j).map_err(s)? - v / pi.value(i, node)).abs());
            }
        }
    }
    within("bond prices vs enumeration", bond_gap, tol)?;
    let fh = FhFamily::from_bundle(&b).map_err(s)?;
    within("FH reconstruction", fh.surface().max_gap(&direct).max, 1e-11)?;

    // Axiom A for every constructed asset.
    let mut axiom = 0.0f64;
    for j in 1..=n {
        axiom = axiom.max(axiom_a_defect(&direct.bond_asset(j).map_err(s)?, pi).map_err(s)?.max);
    }
    let d = AdaptedProcess::from_fn(space.clone(), 0, n, |i, node| 1.0 + 0.1 * space.label(i, node) as f64).map_err(s)?;
    let terminal: Vec<f64> = (0..space.num_nodes(n)).map(|k| 10.0 + (k % 7) as f64).collect();
    let sx = price_income_asset(&d, pi, Some(&terminal)).map_err(s)?;
    let income = Asset::new(sx.clone(), d.clone(), true).map_err(s)?;
    axiom = axiom.max(axiom_a_defect(&income, pi).map_err(s)?.max);
    axiom = axiom.max(axiom_a_defect(&constant_value_asset(&b.bbar, 0.0).map_err(s)?, pi).map_err(s)?.max);
    within("Axiom A", axiom, tol)?;
    let s0 = oracle.cond(0, |p| (1..=n).map(|k| pi.value(k, p[k]) * d.value(k, p[k])).sum::<f64>() + pi.value(n, p[n]) * terminal[p[n]])[0];
    within("income asset vs enumeration", (s0 / pi.value(0, 0) - sx.value(0, 0)).abs(), tol)?;

    // Natural money-market account.
    let mma = natural_mma(pi, 0.0).map_err(s)?;
    within("rho martingale", oracle.martingale_gap(&mma.rho), tol)?;
    within("one-period identity", one_period_identity_gap(&direct, &mma).map_err(s)?.max, 1e-13)?;

    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("runtime {elapsed:?} exceeds 5 s"))?;
    Ok(format!("kernel {kernel_gap:.1e}, bonds {bond_gap:.1e}, axiom A {axiom:.1e}, {:.2} s", elapsed.as_secs_f64()))
}

fn rational_cross_check() -> Outcome {
    let space = Arc::new(LatticeSpace::binomial(TimeGrid::uniform(8, 0.5).map_err(s)?, 0.5).map_err(s)?);
    let nproc = AdaptedProcess::from_fn(space.clone(), 0, 8, |i, k| {
        let u = space.label(i, k) as i32;
        1.25f64.powi(u) * 0.75f64.powi(i as i32 - u)
    })
    .map_err(s)?;
    let alpha: Vec<f64> = (0..=8).map(|i| 0.6 * 0.96f64.powi(i)).collect();
    let beta: Vec<f64> = (0..=8).map(|i| 0.4 * 0.88f64.powi(i)).collect();
    let spec = RationalModelSpec::new(alpha.clone(), beta.clone(), nproc.clone(), 1e-13).map_err(s)?;
    let m = rational_model(&spec, 0.0, Exec::default()).map_err(s)?;
    let mut gap = 0.0f64;
    for i in 0..8 {
        for k in 0..space.num_nodes(i) {
            let nv = nproc.value(i, k);
            for j in i + 1..=8 {
                let closed = (alpha[j] + beta[j] * nv) / (alpha[i] + beta[i] * nv);
                gap = gap.max((m.surface.price(i, k, j).map_err(s)? - closed).abs());
            }
        }
    }
    within("closed form vs kernel pricing", gap, 1e-12)?;
    let mma = natural_mma(&m.pi, 0.0).map_err(s)?;
    let mut mgap = 0.0f64;
    for i in 0..=8 {
        for k in 0..space.num_nodes(i) {
            let mut prod = 1.0;
            for nidx in 1..=i {
                let a = space.ancestor(i, k, nidx - 1);
                let nv = nproc.value(nidx - 1, a);
                prod *= (alpha[nidx - 1] + beta[nidx - 1] * nv) / (alpha[nidx] + beta[nidx] * nv);
            }
            mgap = mgap.max((mma.b.value(i, k) - prod).abs());
        }
    }
    within("money-market product", mgap, 1e-13)?;
    Ok(format!("bond gap {gap:.1e}, account gap {mgap:.1e}"))
}

fn binomial_construction() -> Outcome {
    let (s0, u, d, b0, b1, sbar0, dbar) = (100.0, 120.0, 90.0, 1.0, 1.05, 100.0, 102.0);
    let q = binomial_positive_return(s0, u, d, b0, b1, sbar0, dbar).map_err(s)?;
    // Hand recomputation: forward 105, p* = (105 - 90)/30, Ubar = (105 - 0.5 * 102)/0.5.
    let p_hand = (s0 * b1 / b0 - d) / (u - d);
    let u_hand = (sbar0 * b1 / b0 - (1.0 - p_hand) * dbar) / p_hand;
    within("p*", (q.p_star - 0.5).abs(), 1e-13)?;
    within("p* hand", (q.p_star - p_hand).abs(), 1e-13)?;
    within("Ubar", (q.u_bar - 108.0).abs(), 1e-13)?;
    within("Ubar hand", (q.u_bar - u_hand).abs(), 1e-13)?;
    ensure(q.u_bar > sbar0 && dbar > sbar0, || "outcomes not above the initial value".into())?;
    let rn = b0 / b1 * (q.p_star * q.u_bar + (1.0 - q.p_star) * dbar);
    within("risk-neutral identity", (rn - sbar0).abs(), 1e-13)?;
    let stock = b0 / b1 * (q.p_star * u + (1.0 - q.p_star) * d);
    within("risk-neutral stock", (stock - s0).abs(), 1e-13)?;
    Ok(format!("p* = {}, Ubar = {}", q.p_star, q.u_bar))
}

fn filtering_suite() -> Outcome {
    let start = Instant::now();
    let paths = 100_000;
    let exec = Exec::default();

    let g = TimeGrid::uniform(3, 1.0).map_err(s)?;
    for p in 0..1000u64 {
        let b = sample_bridge(&g, 3, &mut stream_rng(5, 9, p)).map_err(s)?;
        ensure(b.values[0] == 0.0 && b.values[3] == 0.0, || format!("bridge not pinned on path {p}"))?;
    }
    let g2 = TimeGrid::new(vec![0.0, 1.0, 2.0]).map_err(s)?;
    let var = bridge_covariance_check(&g2, 1, 1, 2, paths, 1, exec).map_err(s)?;
    within("Var beta_12 target", (var.target - 1.0 * (2.0 - 1.0) / 2.0).abs(), 0.0)?;
    within("Var beta_12 (SE)", var.z, 3.0)?;
    let cov = bridge_covariance_check(&g, 1, 2, 3, paths, 2, exec).map_err(s)?;
    within("Cov beta_13 beta_23 target", (cov.target - 1.0 * (3.0 - 2.0) / 3.0).abs(), 1e-15)?;
    within("Cov beta_13 beta_23 (SE)", cov.z, 3.0)?;

    let f = XFactor::new("x", 4, Prior::Discrete { atoms: vec![0.0, 1.0], weights: vec![0.5, 0.5] }).map_err(s)?;
    let mut bayes = 0.0f64;
    for &(sigma, ti, tj) in &[(0.5f64, 0.5f64, 2.0f64), (1.0, 1.0, 2.0), (3.0, 1.9, 2.0), (10.0, 0.1, 1.0)] {
        for &xi in &[-3.0f64, -0.2, 0.0, 0.7, 2.5, 40.0] {
            let l1 = (tj / (tj - ti) * (sigma * xi - 0.5 * sigma * sigma * ti)).exp();
            let want = if l1.is_infinite() { 1.0 } else { 0.5 * l1 / (0.5 + 0.5 * l1) };
            bayes = bayes.max((filter_expect(|x| x, &f, xi, sigma, ti, tj).map_err(s)? - want).abs());
        }
    }
    within("two-atom Bayes ratio", bayes, 1e-12)?;

    let grid = TimeGrid::uniform(4, 0.5).map_err(s)?;
    let ens = simulate_ensemble(&f, 1.0, &grid, paths, 3, 0, exec).map_err(s)?;
    for p in &ens.paths {
        ensure(p.xi[0] == 0.0 && p.xi[4] == 1.0 * 2.0 * p.x, || "information path not pinned".into())?;
    }
    let drift = filter_martingale_check(&ens, |x| x, exec).map_err(s)?;
    let worst = drift.iter().map(|d| d.z).fold(0.0, f64::max);
    within("filter drift (SE)", worst, 3.0)?;
    let markov = markov_reduction_check(&ens, |x| x, 2, 8, 8, 30, exec).map_err(s)?;
    within("Markov bins (SE)", markov.max_z, 4.0)?;

    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("runtime {elapsed:?} exceeds 60 s"))?;
    Ok(format!(
        "cov z {:.2}/{:.2}, Bayes {bayes:.1e}, drift z {worst:.2}, Markov z {:.2}, {:.1} s",
        var.z,
        cov.z,
        markov.max_z,
        elapsed.as_secs_f64()
    ))
}

fn multiplicative(space: &Arc<LatticeSpace>, x0: f64, u: f64, d: f64) -> AdaptedProcess {
    AdaptedProcess::from_fn(space.clone(), 0, space.horizon(), |i, n| {
        let ups = space.label(i, n) as i32;
        x0 * u.powi(ups) * d.powi(i as i32 - ups)
    })
    .unwrap()
}

fn inflation_suite() -> Outcome {
    let space = Arc::new(LatticeSpace::binomial(TimeGrid::uniform(6, 0.5).map_err(s)?, 0.55).map_err(s)?);
    let oracle = PathOracle::new(&space);
    let k = multiplicative(&space, 2.0, 1.08, 0.97);
    let m = multiplicative(&space, 100.0, 1.05, 1.01);
    let lambda = multiplicative(&space, 0.03, 1.1, 0.92);
    let gamma = 0.04;
    let h = multiplicative(&space, 1.0, 1.3, 0.8);

    // FOC residuals on constructed economies.
    let log = UtilitySpec::log(1.5, 0.5).map_err(s)?;
    let power = UtilitySpec::power(1.2, 0.7, -0.6, 0.35).map_err(s)?;
    let numeric = UtilitySpec::exponential(1.0, 2.0).map_err(s)?.as_generic().map_err(s)?;
    let mut foc = 0.0f64;
    for u in [&log, &power, &numeric] {
        let e = EconomyPath::solve(u, k.clone(), m.clone(), lambda.clone()).map_err(s)?;
        let pi = nominal_kernel(u, &e, gamma, 0.8, 1e-10).map_err(s)?;
        foc = foc.max(foc_residuals(u, &e, gamma, 0.8, &pi).map_err(s)?.max());
    }
    within("FOC residuals", foc, 1e-10)?;

    // Log identities.
    let (a, b) = (1.5, 0.5);
    let e = EconomyPath::solve(&log, k.clone(), m.clone(), lambda.clone()).map_err(s)?;
    let v = velocity(&e).map_err(s)?;
    let mut ident = 0.0f64;
    for i in 0..=6 {
        for n in 0..space.num_nodes(i) {
            ident = ident.max((k.value(i, n) * e.c.value(i, n) - a / b * lambda.value(i, n) * m.value(i, n)).abs());
            ident = ident.max((v.value(i, n) - a / b * lambda.value(i, n)).abs());
        }
    }
    within("kC = (A/B) lambda M and v = (A/B) lambda", ident, 1e-12)?;

    // Claim prices: closed form vs kernel, plus an enumerated oracle.
    let mut claim_gap = 0.0f64;
    for u in [&log, &power] {
        let e = EconomyPath::solve(u, k.clone(), m.clone(), lambda.clone()).map_err(s)?;
        let pi = nominal_kernel(u, &e, gamma, 1.0, 1e-10).map_err(s)?;
        for j in 1..=6 {
            let closed = price_claim(u, &e, gamma, &h, j).map_err(s)?;
            let kern = price_claim_via_kernel(u, &e, gamma, &h, j).map_err(s)?;
            let enumerated = oracle.cond(0, |p| pi.value(j, p[j]) * h.value(j, p[j]))[0] / pi.value(0, 0);
            claim_gap = claim_gap.max((closed - kern).abs()).max((closed - enumerated).abs());
        }
    }
    within("claim closed form vs kernel", claim_gap, 1e-11)?;

    // Consumption independence of log prices.
    let moved = EconomyPath::solve(&log, multiplicative(&space, 5.0, 0.9, 1.3), m.clone(), lambda.clone()).map_err(s)?;
    let mut indep = 0.0f64;
    for j in 1..=6 {
        indep = indep.max((price_claim_via_kernel(&log, &e, gamma, &h, j).map_err(s)? - price_claim_via_kernel(&log, &moved, gamma, &h, j).map_err(s)?).abs());
    }
    within("log prices under perturbed k", indep, 1e-13)?;

    // Directions: more money at the claim date lowers H_0 for H = 1;
    // more money raises the price level.
    let one = AdaptedProcess::constant(space.clone(), 0, 6, 1.0).map_err(s)?;
    for j in 1..=6 {
        let bumped = AdaptedProcess::from_fn(space.clone(), 0, 6, |i, n| m.value(i, n) * if i == j { 1.1 } else { 1.0 }).map_err(s)?;
        let loose = EconomyPath::solve(&log, k.clone(), bumped, lambda.clone()).map_err(s)?;
        ensure(price_claim(&log, &loose, gamma, &one, j).map_err(s)? < price_claim(&log, &e, gamma, &one, j).map_err(s)?, || format!("H_0 did not fall at maturity {j}"))?;
        ensure(loose.c.value(j, 0) > e.c.value(j, 0), || format!("price level did not rise at {j}"))?;
    }

    // Multiplier.
    let problem = AgentProblem::new(power.clone(), gamma, 12.0).map_err(s)?;
    let ep = EconomyPath::solve(&power, k.clone(), m.clone(), lambda.clone()).map_err(s)?;
    let mu = solve_mu(&problem, &ep).map_err(s)?;
    within("budget residual", budget_residual(&problem, &ep, mu).map_err(s)?, 1e-10)?;
    let s5 = Arc::new(LatticeSpace::binomial(TimeGrid::uniform(4, 1.0).map_err(s)?, 0.5).map_err(s)?);
    let unit = UtilitySpec::log(1.0, 1.0).map_err(s)?;
    let e5 = EconomyPath::solve(&unit, multiplicative(&s5, 1.0, 1.1, 0.9), multiplicative(&s5, 10.0, 1.05, 0.98), multiplicative(&s5, 0.05, 1.0, 1.0)).map_err(s)?;
    let mu1 = solve_mu(&AgentProblem::new(unit.clone(), 0.0, 10.0).map_err(s)?, &e5).map_err(s)?;
    // Each of the five dates contributes A + B = 2 against W = 10.
    within("log example mu = 1", (mu1 - 1.0).abs(), 1e-13)?;
    let w = 7.5;
    let mu_log = solve_mu(&AgentProblem::new(log.clone(), gamma, w).map_err(s)?, &e).map_err(s)?;
    let want_log = (a + b) * (0..=6).map(|i| (-gamma * space.grid().time(i)).exp()).sum::<f64>() / w;
    within("log multiplier formula", ((mu_log - want_log) / want_log).abs(), 1e-10)?;

    // Monte Carlo: money supply driven by a two-atom factor.
    let grid = TimeGrid::uniform(4, 0.5).map_err(s)?;
    let x = XFactor::new("money", 4, Prior::Discrete { atoms: vec![0.0, 1.0], weights: vec![0.6, 0.4] }).map_err(s)?;
    let spec = InformationEconomy::new(
        vec![x],
        vec![1.0],
        FactorMap::constant(2.0),
        FactorMap { base: 100.0, growth: 0.0, loadings: vec![1.0], form: MapForm::Linear },
        FactorMap::constant(0.02),
    )
    .map_err(s)?;
    let sim = economy_from_information(&spec, &unit, &grid, 50_000, 17, Exec::default()).map_err(s)?;
    let est = sim.price_claim(&unit, 0.05, 4, |_| 1.0).map_err(s)?;
    let lm0 = 0.02 * 100.0 * 1.4;
    let want = lm0 * (-0.05f64 * 2.0).exp() * (0.6 / 2.0 + 0.4 / 4.0);
    within("MC kernel value (SE)", est.kernel.z_score(want), 3.0)?;
    within("MC closed form value (SE)", est.closed_form.ok_or("no closed form")?.z_score(want), 3.0)?;
    Ok(format!("FOC {foc:.1e}, claims {claim_gap:.1e}, independence {indep:.1e}, MC z {:.2}", est.kernel.z_score(want)))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sdfkit")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run_cli(scen: &Path, out: &Path, extra: &[&str]) -> Result<i32, String> {
    let status = Command::new(bin())
        .args(["simulate", "--scenario"])
        .arg(scen)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .map_err(s)?;
    Ok(status.status.code().unwrap_or(-1))
}

const FILES: [&str; 5] = ["report.json", "bonds.csv", "kernel.csv", "economy.csv", "ensemble.csv"];

fn identical(a: &Path, b: &Path) -> Result<(), String> {
    for f in FILES {
        let x = std::fs::read(a.join(f)).map_err(s)?;
        let y = std::fs::read(b.join(f)).map_err(s)?;
        ensure(x == y, || format!("{f} differs between runs"))?;
    }
    Ok(())
}

fn claim_values(dir: &Path) -> Result<Vec<(String, f64, f64)>, String> {
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).map_err(s)?).map_err(s)?;
    Ok(v["results"]
        .as_array()
        .ok_or("no results")?
        .iter()
        .filter_map(|r| Some((r["name"].as_str()?.to_string(), r["value"].as_f64()?, r["std_error"].as_f64()?)))
        .collect())
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(s)?;
    let d = |n: &str| tmp.path().join(n);
    for sc in ["driver_kernel.json", "rational.json", "explicit_tree.json", "broken_asset.json", "inflation_log.json", "inflation_power.json", "inflation_generic.json"] {
        let first = run_cli(&scenario(sc), &d("a"), &[])?;
        let second = run_cli(&scenario(sc), &d("b"), &[])?;
        ensure(first == second && first != 2, || format!("{sc}: exit codes {first} and {second}"))?;
        identical(&d("a"), &d("b")).map_err(|e| format!("{sc}: {e}"))?;
    }
    let info = scenario("information_economy.json");
    ensure(run_cli(&info, &d("c"), &["--paths", "4000", "--seed", "5"])? == 0, || "information run failed".into())?;
    ensure(run_cli(&info, &d("e"), &["--paths", "4000", "--seed", "5", "--sequential"])? == 0, || "sequential run failed".into())?;
    identical(&d("c"), &d("e"))?;
    ensure(run_cli(&info, &d("f"), &["--paths", "4000", "--seed", "6"])? == 0, || "reseeded run failed".into())?;
    let (x, y) = (claim_values(&d("c"))?, claim_values(&d("f"))?);
    ensure(!x.is_empty() && x.len() == y.len(), || "claim estimates missing".into())?;
    let mut worst = 0.0f64;
    for ((name, a, sa), (_, b, sb)) in x.iter().zip(&y) {
        ensure(a != b, || format!("{name} unchanged by the seed"))?;
        let z = (a - b).abs() / (sa * sa + sb * sb).sqrt();
        ensure(z < 3.0, || format!("{name} moved by {z:.2} combined SE"))?;
        worst = worst.max(z);
    }
    Ok(format!("byte-identical reruns; reseeded estimates within {worst:.2} combined SE"))
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("lattice exactness", lattice_exactness),
        ("rational-model cross-check", rational_cross_check),
        ("binomial positive-return construction", binomial_construction),
        ("filtering", filtering_suite),
        ("inflation", inflation_suite),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
