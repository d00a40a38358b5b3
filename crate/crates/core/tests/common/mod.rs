#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdfkit::{AdaptedProcess, LatticeSpace, TimeGrid};

pub fn binomial(periods: usize, dt: f64, up: f64) -> Arc<LatticeSpace> {
    Arc::new(LatticeSpace::binomial(TimeGrid::uniform(periods, dt).unwrap(), up).unwrap())
}

/// `x0 * u^ups * d^downs` on the binomial tree.
pub fn multiplicative(space: &Arc<LatticeSpace>, x0: f64, u: f64, d: f64) -> AdaptedProcess {
    AdaptedProcess::from_fn(space.clone(), 0, space.horizon(), |i, n| {
        let ups = space.label(i, n) as i32;
        x0 * u.powi(ups) * d.powi(i as i32 - ups)
    })
    .unwrap()
}

/// Probability of reaching `node` at level `i`, as a product of branch
/// probabilities along its ancestry.
pub fn path_prob(space: &LatticeSpace, i: usize, node: usize) -> f64 {
    (1..=i).map(|k| space.branch_prob(k, space.ancestor(i, node, k))).product()
}

/// `E_i[v_j]` at `node` by summing over every descendant of `node` at level `j`.
pub fn oracle_cond(space: &LatticeSpace, v: &[f64], j: usize, i: usize, node: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (m, &vm) in v.iter().enumerate().take(space.num_nodes(j)) {
        if space.ancestor(j, m, i) == node {
            let p = path_prob(space, j, m);
            num += p * vm;
            den += p;
        }
    }
    num / den
}

pub fn oracle_mean(space: &LatticeSpace, v: &[f64], j: usize) -> f64 {
    oracle_cond(space, v, j, 0, 0)
}

/// Random strictly increasing driver: positive increments in `[lo, hi)`.
pub fn random_increments(space: &Arc<LatticeSpace>, seed: u64, lo: f64, hi: f64) -> AdaptedProcess {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AdaptedProcess::from_fn(space.clone(), 1, space.horizon(), |_, _| rng.random_range(lo..hi)).unwrap()
}

pub fn random_tail(space: &Arc<LatticeSpace>, seed: u64, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    (0..space.num_nodes(space.horizon())).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
