//! Finite filtered probability spaces represented as trees.
//!
//! Nodes are stored level by level. The children of a node occupy a
//! contiguous, ordered range of the next level, and every node except the
//! root has exactly one parent, so a node identifies its whole history.

use std::ops::Range;

use crate::error::{invalid, Error, Result};
use crate::probspace::TimeGrid;

const PROB_SUM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
struct Level {
    parent: Vec<usize>,
    branch_prob: Vec<f64>,
    prob: Vec<f64>,
    children: Vec<Range<usize>>,
    label: Vec<u32>,
}

/// A finite tree of nodes on a [`TimeGrid`] with strictly positive branch
/// probabilities. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpace {
    grid: TimeGrid,
    levels: Vec<Level>,
}

impl LatticeSpace {
    /// Builds a tree by asking `branches(level, node)` for the branch
    /// probabilities of each non-terminal node. Child labels are the branch
    /// ordinal within the parent.
    pub fn from_branching<F>(grid: TimeGrid, mut branches: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Vec<f64>,
    {
        let mut levels = vec![Level {
            parent: vec![],
            branch_prob: vec![1.0],
            prob: vec![1.0],
            children: vec![],
            label: vec![0],
        }];
        for i in 0..grid.horizon() {
            let count = levels[i].prob.len();
            let mut next = Level {
                parent: vec![],
                branch_prob: vec![],
                prob: vec![],
                children: vec![],
                label: vec![],
            };
            let mut ranges = Vec::with_capacity(count);
            for node in 0..count {
                let probs = branches(i, node);
                check_branch(i, node, &probs)?;
                let first = next.prob.len();
                for (k, &p) in probs.iter().enumerate() {
                    next.parent.push(node);
                    next.branch_prob.push(p);
                    next.prob.push(levels[i].prob[node] * p);
                    next.label.push(k as u32);
                }
                ranges.push(first..next.prob.len());
            }
            levels[i].children = ranges;
            levels.push(next);
        }
        let last = levels.len() - 1;
        levels[last].children = vec![0..0; levels[last].prob.len()];
        Ok(Self { grid, levels })
    }

    /// Explicit tree: `parents[i]` and `probs[i]` describe the nodes at level
    /// `i + 1`. Parent indices must be non-decreasing so that siblings are
    /// contiguous.
    pub fn from_parents(grid: TimeGrid, parents: Vec<Vec<usize>>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if parents.len() != grid.horizon() || probs.len() != grid.horizon() {
            return Err(invalid("probspace", "tree", "need one parent/prob list per period"));
        }
        let mut counts = 1usize;
        for (i, (par, pr)) in parents.iter().zip(&probs).enumerate() {
            if par.len() != pr.len() || par.is_empty() {
                return Err(invalid("probspace", "tree", format!("level {} has mismatched lists", i + 1)));
            }
            if par.windows(2).any(|w| w[1] < w[0]) {
                return Err(invalid("probspace", "tree", format!("level {} parents not sorted", i + 1)));
            }
            if par.iter().any(|&p| p >= counts) {
                return Err(invalid("probspace", "tree", format!("level {} refers to a missing parent", i + 1)));
            }
            counts = par.len();
        }
        Self::from_branching(grid, |i, node| {
            parents[i]
                .iter()
                .zip(&probs[i])
                .filter(|(&p, _)| p == node)
                .map(|(_, &q)| q)
                .collect()
        })
    }

    /// Binary tree with branch probabilities `(up_prob, 1 - up_prob)`. Node
    /// labels count the up-moves along the path, which gives the recombining
    /// view through [`LatticeSpace::merged_probabilities`].
    pub fn binomial(grid: TimeGrid, up_prob: f64) -> Result<Self> {
        if !(up_prob > 0.0 && up_prob < 1.0) {
            return Err(invalid("probspace", "up_prob", format!("{up_prob} not in (0, 1)")));
        }
        let mut space = Self::from_branching(grid, |_, _| vec![up_prob, 1.0 - up_prob])?;
        for i in 1..space.levels.len() {
            let (head, tail) = space.levels.split_at_mut(i);
            let prev = &head[i - 1];
            let level = &mut tail[0];
            for c in 0..level.label.len() {
                let up = u32::from(level.label[c] == 0);
                level.label[c] = prev.label[level.parent[c]] + up;
            }
        }
        Ok(space)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn horizon(&self) -> usize {
        self.grid.horizon()
    }

    pub fn num_nodes(&self, i: usize) -> usize {
        self.levels[i].prob.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.levels.iter().map(|l| l.prob.len()).sum()
    }

    pub fn parent(&self, i: usize, node: usize) -> Option<usize> {
        (i > 0).then(|| self.levels[i].parent[node])
    }

    pub fn children(&self, i: usize, node: usize) -> Range<usize> {
        self.levels[i].children[node].clone()
    }

    /// Probability of reaching `node` at level `i` from its parent.
    pub fn branch_prob(&self, i: usize, node: usize) -> f64 {
        self.levels[i].branch_prob[node]
    }

    /// Unconditional probability of `node` at level `i`.
    pub fn prob(&self, i: usize, node: usize) -> f64 {
        self.levels[i].prob[node]
    }

    pub fn probs(&self, i: usize) -> &[f64] {
        &self.levels[i].prob
    }

    pub fn label(&self, i: usize, node: usize) -> u32 {
        self.levels[i].label[node]
    }

    /// Unconditional probabilities of the merged states (nodes sharing a
    /// label) at level `i`, indexed by label.
    pub fn merged_probabilities(&self, i: usize) -> Vec<f64> {
        let level = &self.levels[i];
        let size = level.label.iter().copied().max().unwrap_or(0) as usize + 1;
        let mut out = vec![0.0; size];
        for (l, p) in level.label.iter().zip(&level.prob) {
            out[*l as usize] += p;
        }
        out
    }

    /// Ancestor of `node` (at level `i`) living at level `k <= i`.
    pub fn ancestor(&self, i: usize, node: usize, k: usize) -> usize {
        let mut n = node;
        for lvl in (k + 1..=i).rev() {
            n = self.levels[lvl].parent[n];
        }
        n
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i > self.horizon() {
            return Err(Error::IndexOutOfRange { index: i, lo: 0, hi: self.horizon() });
        }
        Ok(())
    }

    /// One backward-induction step: given values on level `i + 1`, returns
    /// the conditional expectations on level `i`. Children are summed in
    /// their stored order.
    pub fn expect_step(&self, next: &[f64], i: usize) -> Vec<f64> {
        let child = &self.levels[i + 1];
        debug_assert_eq!(next.len(), child.prob.len());
        self.levels[i]
            .children
            .iter()
            .map(|r| r.clone().map(|c| child.branch_prob[c] * next[c]).sum())
            .collect()
    }

    /// `E_i[x]` for `x` given on level `j >= i`.
    pub fn cond_expect(&self, values: &[f64], j: usize, i: usize) -> Result<Vec<f64>> {
        self.check_index(j)?;
        if i > j {
            return Err(Error::IndexOutOfRange { index: i, lo: 0, hi: j });
        }
        if values.len() != self.num_nodes(j) {
            return Err(Error::Undefined(j));
        }
        let mut v = values.to_vec();
        for k in (i..j).rev() {
            v = self.expect_step(&v, k);
        }
        Ok(v)
    }

    /// Unconditional expectation of `x` on level `j`.
    pub fn expectation(&self, values: &[f64], j: usize) -> Result<f64> {
        Ok(self.cond_expect(values, j, 0)?[0])
    }

    /// Copies level-`i` values down to level `j >= i` (each node inherits its
    /// ancestor's value).
    pub fn broadcast(&self, values: &[f64], i: usize, j: usize) -> Vec<f64> {
        let mut v = values.to_vec();
        for k in i + 1..=j {
            v = self.levels[k].parent.iter().map(|&p| v[p]).collect();
        }
        v
    }
}

fn check_branch(i: usize, node: usize, probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(invalid("probspace", "branches", format!("node ({i}, {node}) has no successor")));
    }
    if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(invalid(
            "probspace",
            "branches",
            format!("node ({i}, {node}) has a branch probability outside (0, 1]"),
        ));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(invalid(
            "probspace",
            "branches",
            format!("node ({i}, {node}) probabilities sum to {sum}"),
        ));
    }
    Ok(())
}
