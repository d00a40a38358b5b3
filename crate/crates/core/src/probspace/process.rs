use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::probspace::LatticeSpace;

/// A real-valued process with one value per node, defined on levels
/// `start..=end` of a shared [`LatticeSpace`].
///
/// Values are attached to nodes, and a node fixes its whole history, so
/// adaptedness holds by construction.
#[derive(Debug, Clone)]
pub struct AdaptedProcess {
    space: Arc<LatticeSpace>,
    start: usize,
    levels: Vec<Vec<f64>>,
}

impl AdaptedProcess {
    pub fn new(space: Arc<LatticeSpace>, start: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("probspace", "levels", "process needs at least one level"));
        }
        let end = start + levels.len() - 1;
        space.check_index(end)?;
        for (k, lvl) in levels.iter().enumerate() {
            let i = start + k;
            if lvl.len() != space.num_nodes(i) {
                return Err(invalid(
                    "probspace",
                    "levels",
                    format!("level {i} has {} values for {} nodes", lvl.len(), space.num_nodes(i)),
                ));
            }
            if let Some(node) = lvl.iter().position(|v| !v.is_finite()) {
                return Err(invalid("probspace", "levels", format!("non-finite value at ({i}, {node})")));
            }
        }
        Ok(Self { space, start, levels })
    }

    /// Process on `start..=end` with values `f(i, node)`.
    pub fn from_fn<F>(space: Arc<LatticeSpace>, start: usize, end: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> f64,
    {
        space.check_index(end)?;
        let levels = (start..=end)
            .map(|i| (0..space.num_nodes(i)).map(|n| f(i, n)).collect())
            .collect();
        Self::new(space, start, levels)
    }

    /// Constant process on `start..=end`.
    pub fn constant(space: Arc<LatticeSpace>, start: usize, end: usize, c: f64) -> Result<Self> {
        Self::from_fn(space, start, end, |_, _| c)
    }

    /// Deterministic process `f(i)` on `start..=end`.
    pub fn deterministic<F: FnMut(usize) -> f64>(space: Arc<LatticeSpace>, start: usize, end: usize, mut f: F) -> Result<Self> {
        Self::from_fn(space, start, end, |i, _| f(i))
    }

    pub fn space(&self) -> &Arc<LatticeSpace> {
        &self.space
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.start + self.levels.len() - 1
    }

    pub fn at(&self, i: usize) -> Result<&[f64]> {
        if i < self.start || i > self.end() {
            return Err(Error::Undefined(i));
        }
        Ok(&self.levels[i - self.start])
    }

    /// Value at `(i, node)`; panics outside the defined range.
    pub fn value(&self, i: usize, node: usize) -> f64 {
        self.levels[i - self.start][node]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn same_space(&self, other: &AdaptedProcess) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    pub(crate) fn ensure_same_space(&self, other: &AdaptedProcess) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// `E_i[x_j]`.
    pub fn cond_expect(&self, j: usize, i: usize) -> Result<Vec<f64>> {
        self.space.cond_expect(self.at(j)?, j, i)
    }

    /// Unconditional mean at level `i`.
    pub fn mean(&self, i: usize) -> Result<f64> {
        self.space.expectation(self.at(i)?, i)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let levels = self.levels.iter().map(|l| l.iter().map(|&v| f(v)).collect()).collect();
        Self::new(self.space.clone(), self.start, levels)
    }

    /// Node-wise combination over the common index range.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        self.ensure_same_space(other)?;
        let lo = self.start.max(other.start);
        let hi = self.end().min(other.end());
        if lo > hi {
            return Err(invalid("probspace", "range", "processes have no common index"));
        }
        let levels = (lo..=hi)
            .map(|i| {
                let a = &self.levels[i - self.start];
                let b = &other.levels[i - other.start];
                a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
            })
            .collect();
        Self::new(self.space.clone(), lo, levels)
    }

    /// Restriction to `start..=end`.
    pub fn restrict(&self, start: usize, end: usize) -> Result<Self> {
        if start < self.start || end > self.end() || start > end {
            return Err(Error::IndexOutOfRange { index: end, lo: self.start, hi: self.end() });
        }
        Self::new(
            self.space.clone(),
            start,
            self.levels[start - self.start..=end - self.start].to_vec(),
        )
    }

    /// Copy with a single node value changed.
    pub fn perturbed(&self, i: usize, node: usize, delta: f64) -> Result<Self> {
        let mut out = self.clone();
        self.at(i)?;
        let lvl = &mut out.levels[i - self.start];
        if node >= lvl.len() {
            return Err(Error::IndexOutOfRange { index: node, lo: 0, hi: lvl.len().saturating_sub(1) });
        }
        lvl[node] += delta;
        Ok(out)
    }

    pub fn min(&self) -> f64 {
        self.levels.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}
