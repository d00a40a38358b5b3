mod common;

use std::sync::Arc;

use sdfkit::infoflow::*;
use sdfkit::rng::stream_rng;
use sdfkit::{Exec, TimeGrid};

fn two_atom(j: usize) -> XFactor {
    XFactor::new("x", j, Prior::Discrete { atoms: vec![0.0, 1.0], weights: vec![0.5, 0.5] }).unwrap()
}

#[test]
fn bridge_covariances() {
    let g2 = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
    let var = bridge_covariance_check(&g2, 1, 1, 2, 20_000, 1, Exec::default()).unwrap();
    assert_eq!(var.target, 0.5);
    assert!(var.z < 3.0, "{var:?}");
    let g3 = TimeGrid::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let cov = bridge_covariance_check(&g3, 1, 2, 3, 20_000, 2, Exec::default()).unwrap();
    assert!((cov.target - 1.0 / 3.0).abs() < 1e-15);
    assert!(cov.z < 3.0, "{cov:?}");
}

#[test]
fn single_atom_prior_leaves_a_bridge() {
    let grid = TimeGrid::new(vec![0.0, 0.5, 1.5, 2.0]).unwrap();
    let f = XFactor::new("x", 3, Prior::Discrete { atoms: vec![2.5], weights: vec![1.0] }).unwrap();
    let sigma = 0.8;
    let ens = simulate_ensemble(&f, sigma, &grid, 20_000, 3, 0, Exec::default()).unwrap();
    let prods: Vec<f64> = ens
        .paths
        .iter()
        .map(|p| (p.xi[1] - sigma * 0.5 * 2.5) * (p.xi[2] - sigma * 1.5 * 2.5))
        .collect();
    let est = sdfkit::stats::Estimate::from_samples(&prods);
    assert!(est.z_score(0.5 * (2.0 - 1.5) / 2.0) < 3.0, "{est:?}");
}

#[test]
fn filter_against_two_atom_bayes() {
    let f = XFactor::new("x", 2, Prior::Discrete { atoms: vec![-1.0, 2.0], weights: vec![0.3, 0.7] }).unwrap();
    let (sigma, ti, tj) = (0.9f64, 1.2f64, 3.0f64);
    for xi in [-4.0, -1.0, 0.0, 0.5, 2.0, 7.0] {
        let lik = |x: f64| (tj / (tj - ti) * (sigma * x * xi - 0.5 * sigma * sigma * x * x * ti)).exp();
        let (w0, w1) = (0.3 * lik(-1.0), 0.7 * lik(2.0));
        let want = (w0 * (-1.0f64).powi(3) + w1 * 8.0) / (w0 + w1);
        let got = filter_expect(|x| x * x * x, &f, xi, sigma, ti, tj).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn filter_tower_and_martingale() {
    let grid = TimeGrid::uniform(5, 0.4).unwrap();
    let f = XFactor::new("u", 5, Prior::Uniform { lo: 0.0, hi: 2.0 }).unwrap();
    let ens = simulate_ensemble(&f, 1.5, &grid, 20_000, 9, 1, Exec::default()).unwrap();
    for i in 1..5 {
        let t = filter_tower_check(&ens, |x| x * x, i, Exec::default()).unwrap();
        assert!(t.z < 3.0, "{t:?}");
    }
    for d in filter_martingale_check(&ens, |x| x, Exec::default()).unwrap() {
        assert!(d.z < 3.0, "{d:?}");
    }
}

#[test]
fn continuous_density_prior() {
    let density = DensityFn(Arc::new(|x: f64| 3.0 * x * x));
    let f = XFactor::new("d", 2, Prior::Density { density, lo: 0.0, hi: 1.0 }).unwrap();
    assert!((f.prior_expect(|x| x) - 0.75).abs() < 1e-12);
    let grid = TimeGrid::uniform(2, 1.0).unwrap();
    let ens = simulate_ensemble(&f, 2.0, &grid, 20_000, 4, 0, Exec::default()).unwrap();
    let t = filter_tower_check(&ens, |x| x, 1, Exec::default()).unwrap();
    assert!(t.z < 3.0, "{t:?}");
}

#[test]
fn terminal_gap_shrinks_with_signal() {
    let grid = TimeGrid::uniform(4, 0.5).unwrap();
    let gaps: Vec<f64> = [0.5, 2.0, 8.0]
        .iter()
        .map(|&s| {
            let ens = simulate_ensemble(&two_atom(4), s, &grid, 5000, 1, 0, Exec::default()).unwrap();
            terminal_gap(&ens, |x| x, Exec::default()).unwrap().mean_abs
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn markov_reduction() {
    let grid = TimeGrid::uniform(4, 0.5).unwrap();
    let ens = simulate_ensemble(&two_atom(4), 1.0, &grid, 30_000, 5, 0, Exec::default()).unwrap();
    let rep = markov_reduction_check(&ens, |x| x, 2, 8, 8, 30, Exec::default()).unwrap();
    assert_eq!(rep.bins.len(), 64);
    assert!(rep.max_z < 4.0, "max z {}", rep.max_z);
    let ens0 = simulate_ensemble(&two_atom(4), 0.0, &grid, 2000, 5, 0, Exec::default()).unwrap();
    let rows = ens0.filtered(|x| x, Exec::default()).unwrap();
    assert!(rows.iter().all(|r| r[..4].iter().all(|&v| v == 0.5)));
}

#[test]
fn ensembles_are_reproducible() {
    let grid = TimeGrid::uniform(3, 1.0).unwrap();
    let a = simulate_ensemble(&two_atom(3), 1.0, &grid, 100, 77, 4, Exec::Parallel).unwrap();
    let b = simulate_ensemble(&two_atom(3), 1.0, &grid, 100, 77, 4, Exec::Sequential).unwrap();
    let c = simulate_ensemble(&two_atom(3), 1.0, &grid, 100, 78, 4, Exec::Sequential).unwrap();
    assert_eq!(a.paths, b.paths);
    assert_ne!(a.paths, c.paths);
    let mut rng = stream_rng(77, 4, 10);
    assert_eq!(sample_information(&two_atom(3), 1.0, &grid, &mut rng).unwrap(), a.paths[10]);
}
