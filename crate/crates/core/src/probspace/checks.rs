//! Martingale, supermartingale and potential predicates.
//!
//! Each predicate has a `*_defect` companion returning the worst node so
//! reports can name coordinates.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::probspace::AdaptedProcess;

/// Largest signed violation of a node-wise property and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub max: f64,
    pub index: usize,
    pub node: usize,
}

impl Deviation {
    pub(crate) fn none() -> Self {
        Self { max: 0.0, index: 0, node: 0 }
    }

    pub(crate) fn update(&mut self, value: f64, index: usize, node: usize) {
        if value > self.max || value.is_nan() {
            *self = Self { max: value, index, node };
        }
    }
}

/// Worst `|E_i[x_{i+1}] - x_i|` over consecutive pairs.
pub fn martingale_defect(x: &AdaptedProcess) -> Deviation {
    let mut dev = Deviation::none();
    let space = x.space();
    for i in x.start()..x.end() {
        let e = space.expect_step(&x.levels()[i + 1 - x.start()], i);
        for (node, (&ev, &xv)) in e.iter().zip(&x.levels()[i - x.start()]).enumerate() {
            dev.update((ev - xv).abs(), i, node);
        }
    }
    dev
}

pub fn is_martingale(x: &AdaptedProcess, tol: f64) -> bool {
    martingale_defect(x).max <= tol
}

/// Worst `E_i[x_{i+1}] - x_i` (positive means the supermartingale property fails).
pub fn supermartingale_excess(x: &AdaptedProcess) -> Deviation {
    let mut dev = Deviation { max: f64::NEG_INFINITY, index: 0, node: 0 };
    let space = x.space();
    for i in x.start()..x.end() {
        let e = space.expect_step(&x.levels()[i + 1 - x.start()], i);
        for (node, (&ev, &xv)) in e.iter().zip(&x.levels()[i - x.start()]).enumerate() {
            dev.update(ev - xv, i, node);
        }
    }
    dev
}

/// `E_i[x_{i+1}] < x_i - margin` at every node. Consecutive steps suffice:
/// strictness then propagates to all `i < j` by the tower property.
pub fn is_strict_supermartingale(x: &AdaptedProcess, margin: f64) -> Result<bool> {
    if x.min() <= 0.0 {
        return Err(invalid("probspace", "x", "strict supermartingale test needs a positive process"));
    }
    if x.start() == x.end() {
        return Ok(false);
    }
    Ok(supermartingale_excess(x).max < -margin)
}

/// Finite-horizon potential test: non-negative, supermartingale within
/// `1e-12`, and horizon mean at most `tail_tol`.
pub fn is_potential(x: &AdaptedProcess, tail_tol: f64) -> bool {
    if x.min() < 0.0 {
        return false;
    }
    if x.start() < x.end() && supermartingale_excess(x).max > 1e-12 {
        return false;
    }
    match x.mean(x.end()) {
        Ok(m) => m <= tail_tol,
        Err(_) => false,
    }
}
