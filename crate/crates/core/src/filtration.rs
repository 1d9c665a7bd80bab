//! Finite filtered probability spaces as scenario trees.
//!
//! Nodes are numbered level-major: every node at level `k` has a smaller id
//! than every node at level `k + 1`, and the root is node 0. The nodes at
//! level `k` are the atoms of the sigma-algebra at grid time `k * h`, and each
//! leaf (always at the horizon level `N`) is one scenario.

use std::ops::Range;

use crate::error::{Error, Result};

/// Tolerance on the sum of outgoing edge probabilities.
pub const STOCHASTICITY_TOL: f64 = 1e-12;

/// Uniform time grid `t_k = k * h`, `k = 0..=levels`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    h: f64,
    levels: usize,
}

impl GridSpec {
    pub fn new(h: f64, levels: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Grid(format!("step h must be positive, got {h}")));
        }
        if levels == 0 {
            return Err(Error::Grid("horizon must be at least one level".into()));
        }
        Ok(GridSpec { h, levels })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Horizon level `N`; it stands in for the time at infinity.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.h
    }

    /// Number of grid steps needed to cover a duration `d` (rounded up).
    pub fn steps(&self, d: f64) -> usize {
        let x = d / self.h;
        let r = x.round();
        if (x - r).abs() < 1e-9 {
            r.max(0.0) as usize
        } else {
            x.ceil().max(0.0) as usize
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilteredTree {
    grid: GridSpec,
    parent: Vec<Option<usize>>,
    level: Vec<usize>,
    edge_prob: Vec<f64>,
    node_prob: Vec<f64>,
    children: Vec<Vec<usize>>,
    level_start: Vec<usize>,
    // ancestors[n][k] is the level-k ancestor of n (ancestors[n][level(n)] == n)
    ancestors: Vec<Vec<usize>>,
}

impl FilteredTree {
    /// Builds a tree from parent links and edge probabilities, both indexed by
    /// node id. `parents[0]` must be `None`; every other node must point to a
    /// parent with a smaller id, and ids must be level-major.
    pub fn new(grid: GridSpec, parents: Vec<Option<usize>>, edge_probs: Vec<f64>) -> Result<Self> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::Tree {
                node: 0,
                reason: "empty tree".into(),
            });
        }
        if edge_probs.len() != n {
            return Err(Error::Shape(format!(
                "{} parent links but {} edge probabilities",
                n,
                edge_probs.len()
            )));
        }
        if parents[0].is_some() {
            return Err(Error::Tree {
                node: 0,
                reason: "node 0 must be the root".into(),
            });
        }
        let big_n = grid.levels();
        let mut level = vec![0usize; n];
        let mut children = vec![Vec::new(); n];
        for id in 1..n {
            let p = parents[id].ok_or_else(|| Error::Tree {
                node: id,
                reason: "second root".into(),
            })?;
            if p >= id {
                return Err(Error::Tree {
                    node: id,
                    reason: format!("parent {p} does not precede the node"),
                });
            }
            level[id] = level[p] + 1;
            if level[id] < level[id - 1] {
                return Err(Error::Tree {
                    node: id,
                    reason: "node ids are not level-major".into(),
                });
            }
            if level[id] > big_n {
                return Err(Error::Tree {
                    node: id,
                    reason: format!("level {} exceeds horizon {}", level[id], big_n),
                });
            }
            children[p].push(id);
        }
        for id in 0..n {
            let pr = edge_probs[id];
            if id > 0 && !(pr.is_finite() && pr > 0.0) {
                return Err(Error::Tree {
                    node: id,
                    reason: format!("edge probability {pr} is not positive"),
                });
            }
            if level[id] < big_n && children[id].is_empty() {
                return Err(Error::Tree {
                    node: id,
                    reason: format!("leaf at level {} before the horizon {}", level[id], big_n),
                });
            }
            if !children[id].is_empty() {
                let sum: f64 = children[id].iter().map(|&c| edge_probs[c]).sum();
                if (sum - 1.0).abs() > STOCHASTICITY_TOL {
                    return Err(Error::Stochasticity { node: id, sum });
                }
            }
        }

        let mut level_start = vec![0usize; big_n + 2];
        for k in 0..=big_n {
            level_start[k + 1] = level_start[k] + level.iter().filter(|&&l| l == k).count();
        }
        let mut node_prob = vec![1.0; n];
        let mut ancestors: Vec<Vec<usize>> = Vec::with_capacity(n);
        ancestors.push(vec![0]);
        for id in 1..n {
            let p = parents[id].unwrap();
            node_prob[id] = node_prob[p] * edge_probs[id];
            let mut a = ancestors[p].clone();
            a.push(id);
            ancestors.push(a);
        }
        let mut edge_prob = edge_probs;
        edge_prob[0] = 1.0;
        Ok(FilteredTree {
            grid,
            parent: parents,
            level,
            edge_prob,
            node_prob,
            children,
            level_start,
            ancestors,
        })
    }

    /// Full tree where every non-leaf node has `branching` equally likely children.
    pub fn regular(grid: GridSpec, branching: usize) -> Result<Self> {
        if branching == 0 {
            return Err(Error::Tree {
                node: 0,
                reason: "branching must be positive".into(),
            });
        }
        let mut parents = vec![None];
        let mut probs = vec![1.0];
        let mut frontier = vec![0usize];
        for _ in 0..grid.levels() {
            let mut next = Vec::new();
            for &p in &frontier {
                for _ in 0..branching {
                    parents.push(Some(p));
                    probs.push(1.0 / branching as f64);
                    next.push(parents.len() - 1);
                }
            }
            frontier = next;
        }
        Self::new(grid, parents, probs)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn levels(&self) -> usize {
        self.grid.levels
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn level(&self, node: usize) -> usize {
        self.level[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Conditional probability of moving from the parent to `node`.
    pub fn edge_prob(&self, node: usize) -> f64 {
        self.edge_prob[node]
    }

    /// Unconditional probability of the atom `node`.
    pub fn prob(&self, node: usize) -> f64 {
        self.node_prob[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    pub fn nodes_at(&self, level: usize) -> Range<usize> {
        self.level_start[level]..self.level_start[level + 1]
    }

    pub fn count_at(&self, level: usize) -> usize {
        self.level_start[level + 1] - self.level_start[level]
    }

    /// Position of `node` among the nodes of its level.
    pub fn local_index(&self, node: usize) -> usize {
        node - self.level_start[self.level[node]]
    }

    /// The level-`k` ancestor of `node`; panics if `k > level(node)`.
    pub fn ancestor(&self, node: usize, k: usize) -> usize {
        self.ancestors[node][k]
    }

    /// Path from the root to `node`, inclusive.
    pub fn path(&self, node: usize) -> &[usize] {
        &self.ancestors[node]
    }

    pub fn scenario_count(&self) -> usize {
        self.count_at(self.levels())
    }

    pub fn leaf(&self, scenario: usize) -> usize {
        self.level_start[self.levels()] + scenario
    }

    pub fn scenario_prob(&self, scenario: usize) -> f64 {
        self.node_prob[self.leaf(scenario)]
    }

    /// The node a scenario passes through at level `k`.
    pub fn scenario_node(&self, scenario: usize, k: usize) -> usize {
        self.ancestors[self.leaf(scenario)][k]
    }

    pub fn scenarios(&self) -> Range<usize> {
        0..self.scenario_count()
    }

    /// Scenarios whose path passes through `node`.
    pub fn scenarios_through(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let k = self.level[node];
        self.scenarios()
            .filter(move |&s| self.scenario_node(s, k) == node)
    }

    /// `E[values(next level) | node]` for a full per-node vector.
    pub fn next_expectation(&self, values: &[f64], node: usize) -> f64 {
        self.children[node]
            .iter()
            .map(|&c| self.edge_prob[c] * values[c])
            .sum()
    }

    /// `E[X | F_k]` for a variable `X` measurable at level `m >= k`.
    pub fn condition(&self, rv: &RandomVariable, k: usize) -> Result<RandomVariable> {
        if k > rv.level || rv.level > self.levels() {
            return Err(Error::LevelMismatch {
                from: rv.level,
                to: k,
            });
        }
        if rv.values.len() != self.count_at(rv.level) {
            return Err(Error::Shape(format!(
                "level-{} variable has {} values, tree has {} nodes there",
                rv.level,
                rv.values.len(),
                self.count_at(rv.level)
            )));
        }
        let mut cur = rv.values.clone();
        for l in (k..rv.level).rev() {
            let next_start = self.level_start[l + 1];
            cur = self
                .nodes_at(l)
                .map(|n| {
                    self.children[n]
                        .iter()
                        .map(|&c| self.edge_prob[c] * cur[c - next_start])
                        .sum()
                })
                .collect();
        }
        Ok(RandomVariable {
            level: k,
            values: cur,
        })
    }

    pub fn expectation(&self, rv: &RandomVariable) -> Result<f64> {
        Ok(self.condition(rv, 0)?.values[0])
    }

    /// Probability-weighted sum of a scenario-indexed vector.
    pub fn scenario_expectation(&self, values: &[f64]) -> f64 {
        self.scenarios()
            .map(|s| self.scenario_prob(s) * values[s])
            .sum()
    }

    /// Conditional expectation of scenario-indexed values given the
    /// sigma-algebra at the stopping time whose realized level on each
    /// scenario is `stop_levels[s]`. Returns one value per boundary node.
    pub fn condition_at_times(&self, values: &[f64], stop_levels: &[usize]) -> BoundaryValues {
        let mut mass = vec![0.0; self.node_count()];
        let mut weight = vec![0.0; self.node_count()];
        let mut hit = vec![false; self.node_count()];
        for s in self.scenarios() {
            let b = self.scenario_node(s, stop_levels[s]);
            let p = self.scenario_prob(s);
            mass[b] += p * values[s];
            weight[b] += p;
            hit[b] = true;
        }
        let nodes: Vec<usize> = (0..self.node_count()).filter(|&n| hit[n]).collect();
        let values = nodes.iter().map(|&n| mass[n] / weight[n]).collect();
        BoundaryValues { nodes, values }
    }
}

/// A variable measurable with respect to the atoms at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    pub level: usize,
    pub values: Vec<f64>,
}

impl RandomVariable {
    pub fn constant(tree: &FilteredTree, level: usize, c: f64) -> Self {
        RandomVariable {
            level,
            values: vec![c; tree.count_at(level)],
        }
    }

    /// Value on the level-`self.level` atom containing `node`.
    pub fn at_node(&self, tree: &FilteredTree, node: usize) -> f64 {
        self.values[tree.local_index(tree.ancestor(node, self.level))]
    }
}

/// One real value per node of the tree, at every level.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProcess {
    pub values: Vec<f64>,
}

impl AdaptedProcess {
    pub fn from_fn(tree: &FilteredTree, f: impl FnMut(usize) -> f64) -> Self {
        AdaptedProcess {
            values: (0..tree.node_count()).map(f).collect(),
        }
    }

    pub fn constant(tree: &FilteredTree, c: f64) -> Self {
        AdaptedProcess {
            values: vec![c; tree.node_count()],
        }
    }

    pub fn at(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn at_level(&self, tree: &FilteredTree, level: usize) -> RandomVariable {
        RandomVariable {
            level,
            values: self.values[tree.nodes_at(level)].to_vec(),
        }
    }

    /// Reads the process along each scenario at the given levels.
    pub fn sample(&self, tree: &FilteredTree, levels: &[usize]) -> Vec<f64> {
        tree.scenarios()
            .map(|s| self.values[tree.scenario_node(s, levels[s])])
            .collect()
    }
}

/// Values attached to the boundary nodes of a stopping time.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundaryValues {
    pub fn expectation(&self, tree: &FilteredTree) -> f64 {
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&n, v)| tree.prob(n) * v)
            .sum()
    }

    pub fn get(&self, node: usize) -> Option<f64> {
        self.nodes.binary_search(&node).ok().map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().copied().zip(self.values.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn coin() -> FilteredTree {
        instances::coin_tree()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(GridSpec::new(0.0, 2).is_err());
        assert!(GridSpec::new(-1.0, 2).is_err());
        assert!(GridSpec::new(1.0, 0).is_err());
        let g = GridSpec::new(0.5, 3).unwrap();
        assert_eq!(g.steps(0.5), 1);
        assert_eq!(g.steps(0.7), 2);
        assert_eq!(g.steps(1.5), 3);
    }

    #[test]
    fn rejects_substochastic_node() {
        let g = GridSpec::new(1.0, 1).unwrap();
        let err =
            FilteredTree::new(g, vec![None, Some(0), Some(0)], vec![1.0, 0.5, 0.4]).unwrap_err();
        assert!(matches!(err, Error::Stochasticity { node: 0, .. }));
    }

    #[test]
    fn rejects_early_leaf_and_bad_order() {
        let g = GridSpec::new(1.0, 2).unwrap();
        // node 2 is a leaf at level 1
        let err = FilteredTree::new(
            g,
            vec![None, Some(0), Some(0), Some(1)],
            vec![1.0, 0.5, 0.5, 1.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Tree { node: 2, .. }));
        let err = FilteredTree::new(
            g,
            vec![None, Some(0), Some(1), Some(0), Some(3)],
            vec![1.0, 0.5, 1.0, 0.5, 1.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Tree { .. }));
    }

    #[test]
    fn condition_constant_is_constant() {
        let t = FilteredTree::regular(GridSpec::new(1.0, 3).unwrap(), 2).unwrap();
        let rv = RandomVariable::constant(&t, 3, 4.25);
        for k in 0..=3 {
            let c = t.condition(&rv, k).unwrap();
            assert!(c.values.iter().all(|&v| (v - 4.25).abs() < 1e-12));
        }
    }

    #[test]
    fn coin_weighted_average() {
        let t = coin();
        let rv = RandomVariable {
            level: 1,
            values: vec![4.0, 0.0],
        };
        assert_eq!(t.condition(&rv, 0).unwrap().values, vec![2.0]);
        assert_eq!(t.expectation(&rv).unwrap(), 2.0);
    }

    #[test]
    fn condition_upward_is_an_error() {
        let t = coin();
        let rv = RandomVariable::constant(&t, 1, 1.0);
        assert!(matches!(
            t.condition(&rv, 2),
            Err(Error::LevelMismatch { from: 1, to: 2 })
        ));
    }

    #[test]
    fn stopping_boundary_conditioning() {
        let t = coin();
        let vals = vec![3.0, -1.0];
        // stop at level 2: values unchanged
        let b = t.condition_at_times(&vals, &[2, 2]);
        assert_eq!(b.values, vals);
        // stop at 0: the mean
        let b = t.condition_at_times(&vals, &[0, 0]);
        assert_eq!(b.nodes, vec![0]);
        assert_eq!(b.values, vec![1.0]);
        // stop at 1: each level-1 atom holds one scenario
        let b = t.condition_at_times(&vals, &[1, 1]);
        assert_eq!(b.nodes, vec![1, 2]);
        assert_eq!(b.values, vec![3.0, -1.0]);
        assert!((b.expectation(&t) - 1.0).abs() < 1e-15);
    }
}
