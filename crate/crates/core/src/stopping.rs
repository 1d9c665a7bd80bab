//! Stopping times, reaction families and stopping strategies.
//!
//! A [`StoppingTime`] is a set of marked nodes; its value on a scenario is the
//! first level along the path whose node is marked. Leaves always count as
//! marked, so every stopping time is bounded by the horizon.

use std::fmt;

use crate::error::{Error, Result};
use crate::filtration::FilteredTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingTime {
    floor: usize,
    stop: Vec<bool>,
}

impl StoppingTime {
    /// Wraps raw node marks without checking them; see [`StoppingTime::validate`].
    pub fn from_marks(floor: usize, stop: Vec<bool>) -> Self {
        StoppingTime { floor, stop }
    }

    /// Deterministic time `k` (capped at the horizon).
    pub fn at_level(tree: &FilteredTree, k: usize) -> Self {
        let k = k.min(tree.levels());
        let stop = (0..tree.node_count())
            .map(|n| tree.level(n) == k || tree.is_leaf(n))
            .collect();
        StoppingTime { floor: k, stop }
    }

    /// First level `>= floor` at which `pred` holds, forced at the horizon.
    pub fn first_hit(
        tree: &FilteredTree,
        floor: usize,
        mut pred: impl FnMut(usize) -> bool,
    ) -> Self {
        let stop = (0..tree.node_count())
            .map(|n| tree.is_leaf(n) || (tree.level(n) >= floor && pred(n)))
            .collect();
        StoppingTime { floor, stop }
    }

    /// Builds the stopping time realizing `times[s]` on each scenario, or
    /// reports the first scenario on which no adapted rule can do so.
    pub fn from_scenario_times(tree: &FilteredTree, floor: usize, times: &[usize]) -> Result<Self> {
        if times.len() != tree.scenario_count() {
            return Err(Error::Shape(format!(
                "{} scenario times for {} scenarios",
                times.len(),
                tree.scenario_count()
            )));
        }
        let mut stop: Vec<bool> = (0..tree.node_count()).map(|n| tree.is_leaf(n)).collect();
        for s in tree.scenarios() {
            let k = times[s].min(tree.levels());
            stop[tree.scenario_node(s, k)] = true;
        }
        let st = StoppingTime { floor, stop };
        let realized = st.realized_all(tree);
        for s in tree.scenarios() {
            let expected = times[s].min(tree.levels());
            if realized[s] != expected {
                return Err(Error::NotAdapted {
                    scenario: s,
                    expected,
                    found: realized[s],
                });
            }
        }
        Ok(st)
    }

    pub fn floor(&self) -> usize {
        self.floor
    }

    pub fn marks(&self) -> &[bool] {
        &self.stop
    }

    pub fn is_marked(&self, node: usize) -> bool {
        self.stop[node]
    }

    pub fn with_floor(mut self, floor: usize) -> Self {
        self.floor = floor;
        self
    }

    /// For each node, the level at which the time has been realized on the
    /// path up to and including that node, if any.
    pub fn hit_levels(&self, tree: &FilteredTree) -> Vec<Option<usize>> {
        let mut hit = vec![None; tree.node_count()];
        for n in 0..tree.node_count() {
            let inherited = tree.parent(n).and_then(|p| hit[p]);
            hit[n] = inherited.or_else(|| (self.stop[n] || tree.is_leaf(n)).then(|| tree.level(n)));
        }
        hit
    }

    /// Whether the time has occurred at or before each node.
    pub fn occurred(&self, tree: &FilteredTree) -> Vec<bool> {
        self.hit_levels(tree)
            .into_iter()
            .map(|h| h.is_some())
            .collect()
    }

    pub fn realized_all(&self, tree: &FilteredTree) -> Vec<usize> {
        let hit = self.hit_levels(tree);
        tree.scenarios()
            .map(|s| hit[tree.leaf(s)].expect("leaves always stop"))
            .collect()
    }

    pub fn realized(&self, tree: &FilteredTree, scenario: usize) -> usize {
        tree.path(tree.leaf(scenario))
            .iter()
            .find(|&&n| self.stop[n] || tree.is_leaf(n))
            .map(|&n| tree.level(n))
            .unwrap_or(tree.levels())
    }

    /// Nodes at which the time is realized.
    pub fn boundary(&self, tree: &FilteredTree) -> Vec<usize> {
        let hit = self.hit_levels(tree);
        (0..tree.node_count())
            .filter(|&n| hit[n] == Some(tree.level(n)))
            .collect()
    }

    /// `self >= other` on every scenario.
    pub fn dominates(&self, tree: &FilteredTree, other: &StoppingTime) -> bool {
        self.realized_all(tree)
            .iter()
            .zip(other.realized_all(tree))
            .all(|(a, b)| *a >= b)
    }

    pub fn validate(&self, tree: &FilteredTree, component: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.stop.len() != tree.node_count() {
            out.push(Violation::Shape {
                component: component.to_string(),
                reason: format!("{} marks for {} nodes", self.stop.len(), tree.node_count()),
            });
            return out;
        }
        for n in 0..tree.node_count() {
            if tree.is_leaf(n) && !self.stop[n] {
                out.push(Violation::HorizonForcing {
                    component: component.to_string(),
                    node: n,
                });
            }
            if self.stop[n] && tree.level(n) < self.floor {
                out.push(Violation::BelowFloor {
                    component: component.to_string(),
                    node: n,
                    floor: self.floor,
                });
            }
        }
        out
    }
}

/// One stopping time per anchor level `k < N`, each strictly later than `k`.
/// The anchor `N` entry is the constant `N` and is not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyFamily {
    entries: Vec<StoppingTime>,
}

impl StrategyFamily {
    pub fn new(entries: Vec<StoppingTime>) -> Self {
        StrategyFamily { entries }
    }

    /// Every entry waits for the horizon.
    pub fn horizon(tree: &FilteredTree) -> Self {
        let n = tree.levels();
        StrategyFamily {
            entries: (0..n)
                .map(|k| StoppingTime::at_level(tree, n).with_floor(k + 1))
                .collect(),
        }
    }

    /// Entry `k` stops at `k + 1`.
    pub fn next_level(tree: &FilteredTree) -> Self {
        StrategyFamily {
            entries: (0..tree.levels())
                .map(|k| StoppingTime::at_level(tree, k + 1))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[StoppingTime] {
        &self.entries
    }

    /// `None` for the horizon anchor.
    pub fn entry(&self, anchor: usize) -> Option<&StoppingTime> {
        self.entries.get(anchor)
    }

    pub fn set_entry(&mut self, anchor: usize, time: StoppingTime) {
        self.entries[anchor] = time;
    }

    /// Realized value of `entry(anchor)` on one scenario.
    pub fn realized_entry(&self, tree: &FilteredTree, anchor: usize, scenario: usize) -> usize {
        match self.entry(anchor) {
            Some(t) => t.realized(tree, scenario),
            None => tree.levels(),
        }
    }

    /// Table `[anchor][scenario]` of realized entry values, anchors `0..=N`.
    pub fn realized_table(&self, tree: &FilteredTree) -> Vec<Vec<usize>> {
        let mut table: Vec<Vec<usize>> =
            self.entries.iter().map(|e| e.realized_all(tree)).collect();
        while table.len() <= tree.levels() {
            table.push(vec![tree.levels(); tree.scenario_count()]);
        }
        table
    }

    /// `phi(sigma)`: on each scenario, the entry anchored at the realized
    /// value of `sigma`, evaluated on that scenario.
    pub fn react_at(&self, tree: &FilteredTree, sigma_times: &[usize]) -> Vec<usize> {
        let mut cache: Vec<Option<Vec<usize>>> = vec![None; tree.levels() + 1];
        sigma_times
            .iter()
            .enumerate()
            .map(|(s, &k)| {
                if k >= tree.levels() || k >= self.entries.len() {
                    return tree.levels();
                }
                cache[k].get_or_insert_with(|| self.entries[k].realized_all(tree))[s]
            })
            .collect()
    }

    pub fn validate(&self, tree: &FilteredTree, component: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.entries.len() != tree.levels() {
            out.push(Violation::Shape {
                component: component.to_string(),
                reason: format!(
                    "{} entries for {} anchors",
                    self.entries.len(),
                    tree.levels()
                ),
            });
            return out;
        }
        for (k, e) in self.entries.iter().enumerate() {
            let name = format!("{component}[{k}]");
            if e.stop.len() != tree.node_count() {
                out.extend(e.validate(tree, &name));
                continue;
            }
            for n in 0..tree.node_count() {
                if tree.is_leaf(n) && !e.stop[n] {
                    out.push(Violation::HorizonForcing {
                        component: name.clone(),
                        node: n,
                    });
                }
                if e.stop[n] && tree.level(n) <= k {
                    out.push(Violation::StrictAnticipativity {
                        component: name.clone(),
                        anchor: k,
                        node: n,
                    });
                }
            }
        }
        out
    }
}

/// A first stopping time together with a reaction family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingStrategy {
    pub first: StoppingTime,
    pub reaction: StrategyFamily,
}

impl StoppingStrategy {
    pub fn new(first: StoppingTime, reaction: StrategyFamily) -> Self {
        StoppingStrategy { first, reaction }
    }

    pub fn validate(&self, tree: &FilteredTree) -> Vec<Violation> {
        self.validate_as(tree, "")
    }

    /// Same as [`StoppingStrategy::validate`] with components prefixed by `name`.
    pub fn validate_as(&self, tree: &FilteredTree, name: &str) -> Vec<Violation> {
        let sep = if name.is_empty() { "" } else { "." };
        let mut v = self.first.validate(tree, &format!("{name}{sep}first"));
        v.extend(
            self.reaction
                .validate(tree, &format!("{name}{sep}reaction")),
        );
        v
    }
}

/// Realized `(rho[tau], tau[rho])` on every scenario.
pub fn outcome(
    tree: &FilteredTree,
    rho: &StoppingStrategy,
    tau: &StoppingStrategy,
) -> Vec<(usize, usize)> {
    let r0 = rho.first.realized_all(tree);
    let t0 = tau.first.realized_all(tree);
    let r1 = rho.reaction.react_at(tree, &t0);
    let t1 = tau.reaction.react_at(tree, &r0);
    tree.scenarios()
        .map(|s| {
            let a = if r0[s] <= t0[s] { r0[s] } else { r1[s] };
            let b = if t0[s] <= r0[s] { t0[s] } else { t1[s] };
            (a, b)
        })
        .collect()
}

/// `rho[tau]` on every scenario.
pub fn compose(tree: &FilteredTree, rho: &StoppingStrategy, tau: &StoppingStrategy) -> Vec<usize> {
    let r0 = rho.first.realized_all(tree);
    let t0 = tau.first.realized_all(tree);
    let r1 = rho.reaction.react_at(tree, &t0);
    tree.scenarios()
        .map(|s| if r0[s] <= t0[s] { r0[s] } else { r1[s] })
        .collect()
}

/// Number of distinct stopping times on the subtree below `root` that do not
/// stop before level `floor` (leaves always stop).
pub fn count_subtree_times(tree: &FilteredTree, root: usize, floor: usize) -> f64 {
    if tree.is_leaf(root) {
        return 1.0;
    }
    let inner: f64 = tree
        .children(root)
        .iter()
        .map(|&c| count_subtree_times(tree, c, floor))
        .product();
    if tree.level(root) >= floor {
        1.0 + inner
    } else {
        inner
    }
}

/// All distinct stopping times on the subtree below `root` with the given
/// floor, each as the list of nodes where it is realized. Refuses when the
/// count exceeds `cap`.
pub fn enumerate_subtree_times(
    tree: &FilteredTree,
    root: usize,
    floor: usize,
    cap: u64,
) -> Result<Vec<Vec<usize>>> {
    let needed = count_subtree_times(tree, root, floor);
    if needed > cap as f64 {
        return Err(Error::EnumerationCap { needed, cap });
    }
    Ok(subtree_times(tree, root, floor))
}

fn subtree_times(tree: &FilteredTree, root: usize, floor: usize) -> Vec<Vec<usize>> {
    if tree.is_leaf(root) {
        return vec![vec![root]];
    }
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for &c in tree.children(root) {
        let sub = subtree_times(tree, c, floor);
        acc = acc
            .iter()
            .flat_map(|a| {
                sub.iter().map(move |b| {
                    let mut v = a.clone();
                    v.extend_from_slice(b);
                    v
                })
            })
            .collect();
    }
    if tree.level(root) >= floor {
        acc.insert(0, vec![root]);
    }
    acc
}

/// Every stopping time on the whole tree with the given floor.
pub fn enumerate_stopping_times(
    tree: &FilteredTree,
    floor: usize,
    cap: u64,
) -> Result<Vec<StoppingTime>> {
    Ok(enumerate_subtree_times(tree, 0, floor, cap)?
        .into_iter()
        .map(|nodes| {
            let mut stop = vec![false; tree.node_count()];
            for n in nodes {
                stop[n] = true;
            }
            StoppingTime::first_hit(tree, floor, |n| stop[n])
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Shape {
        component: String,
        reason: String,
    },
    HorizonForcing {
        component: String,
        node: usize,
    },
    BelowFloor {
        component: String,
        node: usize,
        floor: usize,
    },
    StrictAnticipativity {
        component: String,
        anchor: usize,
        node: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { component, reason } => write!(f, "shape: {component}: {reason}"),
            Violation::HorizonForcing { component, node } => {
                write!(f, "horizon forcing: {component} does not stop at leaf {node}")
            }
            Violation::BelowFloor { component, node, floor } => {
                write!(f, "floor: {component} stops at node {node} below level {floor}")
            }
            Violation::StrictAnticipativity { component, anchor, node } => write!(
                f,
                "strict anticipativity: {component} stops at node {node}, not after its anchor {anchor}"
            ),
        }
    }
}
