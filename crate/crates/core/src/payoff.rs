//! Payoff fields, their modulus of continuity, and exact game evaluation.
//!
//! `U^i(j, k)` is stored as a random variable at level `max(j, k)`, which is
//! exactly the measurability the game requires: the payoff is revealed when
//! the later of the two stopping levels is reached.

use crate::error::{Error, Result};
use crate::filtration::{BoundaryValues, FilteredTree, RandomVariable};
use crate::stopping::{outcome, StoppingStrategy, StoppingTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    /// 1-based number, as used in reports.
    pub fn number(self) -> usize {
        self.index() + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffField {
    levels: usize,
    // [player][j * (levels + 1) + k], values over the level-max(j, k) nodes
    values: [Vec<Vec<f64>>; 2],
}

impl PayoffField {
    /// Builds a field by evaluating `f(player, j, k, node)` on every node at
    /// level `max(j, k)`.
    pub fn from_fn(
        tree: &FilteredTree,
        mut f: impl FnMut(Player, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let n = tree.levels();
        let mut values: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        for p in Player::BOTH {
            for j in 0..=n {
                for k in 0..=n {
                    let col: Vec<f64> = tree
                        .nodes_at(j.max(k))
                        .map(|node| f(p, j, k, node))
                        .collect();
                    values[p.index()].push(col);
                }
            }
        }
        Self::from_values(tree, values)
    }

    /// Validates raw storage against the tree.
    pub fn from_values(tree: &FilteredTree, values: [Vec<Vec<f64>>; 2]) -> Result<Self> {
        let n = tree.levels();
        for p in Player::BOTH {
            let v = &values[p.index()];
            if v.len() != (n + 1) * (n + 1) {
                return Err(Error::Shape(format!(
                    "player {} has {} level pairs, expected {}",
                    p.number(),
                    v.len(),
                    (n + 1) * (n + 1)
                )));
            }
            for j in 0..=n {
                for k in 0..=n {
                    let col = &v[j * (n + 1) + k];
                    let m = j.max(k);
                    if col.len() != tree.count_at(m) {
                        return Err(Error::Shape(format!(
                            "player {} pair ({j}, {k}) has {} values, level {m} has {} nodes",
                            p.number(),
                            col.len(),
                            tree.count_at(m)
                        )));
                    }
                    if let Some(i) = col.iter().position(|x| !x.is_finite()) {
                        return Err(Error::Shape(format!(
                            "player {} pair ({j}, {k}) has a non-finite value at node {}",
                            p.number(),
                            tree.nodes_at(m).start + i
                        )));
                    }
                }
            }
        }
        Ok(PayoffField { levels: n, values })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    fn idx(&self, j: usize, k: usize) -> usize {
        j * (self.levels + 1) + k
    }

    /// Values of `U^i(j, k)` over the level-`max(j, k)` nodes.
    pub fn slice(&self, player: Player, j: usize, k: usize) -> &[f64] {
        &self.values[player.index()][self.idx(j, k)]
    }

    pub fn random_variable(&self, player: Player, j: usize, k: usize) -> RandomVariable {
        RandomVariable {
            level: j.max(k),
            values: self.slice(player, j, k).to_vec(),
        }
    }

    pub fn raw(&self) -> &[Vec<Vec<f64>>; 2] {
        &self.values
    }

    /// `M = sup |U^i|` over both players.
    pub fn bound(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `sup U^i - inf U^i` for one player.
    pub fn oscillation(&self, player: Player) -> f64 {
        let it = self.values[player.index()].iter().flatten();
        let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    /// Checks `U^2 = -U^1` entrywise within `tol`.
    pub fn check_zero_sum(&self, tree: &FilteredTree, tol: f64) -> Result<()> {
        let n = self.levels;
        for j in 0..=n {
            for k in 0..=n {
                let a = self.slice(Player::One, j, k);
                let b = self.slice(Player::Two, j, k);
                if let Some(i) = a.iter().zip(b).position(|(x, y)| (x + y).abs() > tol) {
                    return Err(Error::NotZeroSum {
                        first: j,
                        second: k,
                        node: tree.nodes_at(j.max(k)).start + i,
                    });
                }
            }
        }
        Ok(())
    }

    /// Relabels the players: the new `U^1(j, k)` is the old `U^2(k, j)` and
    /// vice versa.
    pub fn swapped(&self) -> PayoffField {
        let n = self.levels;
        let mut values: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        for p in Player::BOTH {
            for j in 0..=n {
                for k in 0..=n {
                    values[p.index()].push(self.slice(p.other(), k, j).to_vec());
                }
            }
        }
        PayoffField { levels: n, values }
    }
}

/// Modulus of continuity on the grid: `table[m]` bounds payoff differences
/// between level pairs at combined distance `m` steps (that is, `m * h`).
#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    h: f64,
    table: Vec<f64>,
}

impl Modulus {
    pub fn new(h: f64, table: Vec<f64>) -> Self {
        Modulus { h, table }
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn at_steps(&self, m: usize) -> f64 {
        self.table[m.min(self.table.len() - 1)]
    }

    /// `r(d)` for a real distance, rounding `d` up to the grid.
    pub fn at(&self, d: f64) -> f64 {
        let x = d / self.h;
        let m = if (x - x.round()).abs() < 1e-9 {
            x.round()
        } else {
            x.ceil()
        };
        self.at_steps(m.max(0.0) as usize)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.table.windows(2).all(|w| w[0] <= w[1]) && self.table[0] == 0.0
    }
}

/// A tree together with the payoff fields of both players.
#[derive(Debug, Clone)]
pub struct StoppingGame {
    pub tree: FilteredTree,
    pub payoff: PayoffField,
}

impl StoppingGame {
    pub fn new(tree: FilteredTree, payoff: PayoffField) -> Result<Self> {
        if payoff.levels() != tree.levels() {
            return Err(Error::Shape(format!(
                "payoff horizon {} does not match tree horizon {}",
                payoff.levels(),
                tree.levels()
            )));
        }
        Ok(StoppingGame { tree, payoff })
    }

    pub fn levels(&self) -> usize {
        self.tree.levels()
    }

    /// `U^i(j, k)` on the atom containing `node`; `node` must sit at level
    /// `max(j, k)` or deeper.
    pub fn value(&self, player: Player, j: usize, k: usize, node: usize) -> f64 {
        let m = j.max(k);
        let a = self.tree.ancestor(node, m);
        self.payoff.slice(player, j, k)[self.tree.local_index(a)]
    }

    pub fn payoff_at(&self, player: Player, j: usize, k: usize, scenario: usize) -> f64 {
        self.value(player, j, k, self.tree.leaf(scenario))
    }

    pub fn modulus(&self) -> Modulus {
        empirical_modulus(self)
    }

    /// Per-scenario payoff `U^i(rho[tau], tau[rho])`.
    pub fn evaluate_scenarios(
        &self,
        player: Player,
        rho: &StoppingStrategy,
        tau: &StoppingStrategy,
    ) -> Vec<f64> {
        outcome(&self.tree, rho, tau)
            .into_iter()
            .enumerate()
            .map(|(s, (a, b))| self.payoff_at(player, a, b, s))
            .collect()
    }

    /// `u^i(rho, tau) = E[U^i(rho[tau], tau[rho])]`.
    pub fn evaluate(&self, player: Player, rho: &StoppingStrategy, tau: &StoppingStrategy) -> f64 {
        self.tree
            .scenario_expectation(&self.evaluate_scenarios(player, rho, tau))
    }

    /// Conditional game value at the boundary of `sigma`, for strategies
    /// whose first components do not stop before `sigma`.
    pub fn evaluate_subgame(
        &self,
        player: Player,
        rho: &StoppingStrategy,
        tau: &StoppingStrategy,
        sigma: &StoppingTime,
    ) -> Result<BoundaryValues> {
        let s_times = sigma.realized_all(&self.tree);
        for (name, st) in [("rho", &rho.first), ("tau", &tau.first)] {
            let t = st.realized_all(&self.tree);
            if let Some(s) = self.tree.scenarios().find(|&s| t[s] < s_times[s]) {
                return Err(Error::NotInSubgame(format!(
                    "{name} stops at level {} before the sub-game root {} on scenario {s}",
                    t[s], s_times[s]
                )));
            }
        }
        let vals = self.evaluate_scenarios(player, rho, tau);
        Ok(self.tree.condition_at_times(&vals, &s_times))
    }

    pub fn swapped(&self) -> StoppingGame {
        StoppingGame {
            tree: self.tree.clone(),
            payoff: self.payoff.swapped(),
        }
    }
}

/// Smallest non-decreasing `r` on grid distances satisfying the modulus
/// inequality for both players along every scenario.
pub fn empirical_modulus(game: &StoppingGame) -> Modulus {
    let n = game.levels();
    let side = n + 1;
    let mut exact = vec![0.0f64; 2 * n + 1];
    let mut grid = vec![0.0; side * side];
    for p in Player::BOTH {
        for s in game.tree.scenarios() {
            for j in 0..=n {
                for k in 0..=n {
                    grid[j * side + k] = game.payoff_at(p, j, k, s);
                }
            }
            for a in 0..grid.len() {
                let (j, k) = (a / side, a % side);
                for b in (a + 1)..grid.len() {
                    let (j2, k2) = (b / side, b % side);
                    let d = j.abs_diff(j2) + k.abs_diff(k2);
                    let diff = (grid[a] - grid[b]).abs();
                    if diff > exact[d] {
                        exact[d] = diff;
                    }
                }
            }
        }
    }
    let mut run = 0.0f64;
    let table = exact
        .into_iter()
        .map(|x| {
            run = run.max(x);
            run
        })
        .collect();
    Modulus::new(game.tree.grid().h(), table)
}
