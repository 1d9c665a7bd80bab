//! Zero-sum Dynkin game on a band `(X, Y, Z)`.
//!
//! The sup player receives `L` when stopping alone, the inf player makes the
//! sup player receive `H` when stopping alone, and a joint stop pays `Z`.
//! With `L <= Z <= H` the one-step game at every node has a pure value,
//! `median(L, E[v_next], H)`, so the whole game is solved by backward
//! induction and a saddle point is read off the contact sets `{v = L}` and
//! `{v = H}`.

use crate::error::{Error, Result};
use crate::filtration::{AdaptedProcess, BoundaryValues, FilteredTree};
use crate::stopping::StoppingTime;

/// Band tolerance for the `L <= Z <= H` precondition.
pub const BAND_TOL: f64 = 1e-9;

/// Which of the two stoppers maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `sup_rho inf_tau`: the band is `X <= Z <= Y` (player 1's game).
    RhoSup,
    /// `sup_tau inf_rho`: the band is `Y <= Z <= X` (player 2's game).
    TauSup,
}

pub(crate) fn median(a: f64, b: f64, c: f64) -> f64 {
    a.min(b).max(a.max(b).min(c))
}

#[derive(Debug, Clone)]
pub struct DynkinSolution {
    pub orientation: Orientation,
    pub value: AdaptedProcess,
    /// Sup player's stop-alone payoff.
    pub lower: AdaptedProcess,
    /// Payoff when the inf player stops alone.
    pub upper: AdaptedProcess,
    pub diagonal: AdaptedProcess,
}

/// `V(rho_0, tau_0) = E[X_rho 1{rho<tau} + Y_tau 1{rho>tau} + Z_rho 1{rho=tau}]`.
pub fn evaluate_v(
    tree: &FilteredTree,
    x: &AdaptedProcess,
    y: &AdaptedProcess,
    z: &AdaptedProcess,
    rho0: &StoppingTime,
    tau0: &StoppingTime,
) -> f64 {
    let r = rho0.realized_all(tree);
    let t = tau0.realized_all(tree);
    tree.scenarios()
        .map(|s| {
            let v = if r[s] < t[s] {
                x.at(tree.scenario_node(s, r[s]))
            } else if r[s] > t[s] {
                y.at(tree.scenario_node(s, t[s]))
            } else {
                z.at(tree.scenario_node(s, r[s]))
            };
            tree.scenario_prob(s) * v
        })
        .sum()
}

/// Solves the game on the band by the median recursion.
pub fn solve(
    tree: &FilteredTree,
    x: &AdaptedProcess,
    y: &AdaptedProcess,
    z: &AdaptedProcess,
    orientation: Orientation,
) -> Result<DynkinSolution> {
    let (lower, upper) = match orientation {
        Orientation::RhoSup => (x, y),
        Orientation::TauSup => (y, x),
    };
    for n in 0..tree.node_count() {
        let (l, d, u) = (lower.at(n), z.at(n), upper.at(n));
        if l > d + BAND_TOL || d > u + BAND_TOL {
            return Err(Error::BandViolation {
                node: n,
                lower: l,
                diagonal: d,
                upper: u,
            });
        }
    }
    let mut value = AdaptedProcess::constant(tree, 0.0);
    for n in tree.nodes_at(tree.levels()) {
        value.values[n] = z.at(n);
    }
    for k in (0..tree.levels()).rev() {
        for n in tree.nodes_at(k) {
            let c = tree.next_expectation(&value.values, n);
            value.values[n] = median(lower.at(n), c, upper.at(n));
        }
    }
    Ok(DynkinSolution {
        orientation,
        value,
        lower: lower.clone(),
        upper: upper.clone(),
        diagonal: z.clone(),
    })
}

impl DynkinSolution {
    pub fn root_value(&self) -> f64 {
        self.value.at(0)
    }

    /// Saddle pair `(rho_0, tau_0)` of the whole game.
    pub fn saddle(&self, tree: &FilteredTree) -> (StoppingTime, StoppingTime) {
        self.saddle_from(tree, &StoppingTime::at_level(tree, 0))
    }

    /// Saddle pair of the sub-game that starts at `from`: each player stops
    /// at the first node at or after `from` where the value meets its
    /// stop-alone payoff.
    pub fn saddle_from(
        &self,
        tree: &FilteredTree,
        from: &StoppingTime,
    ) -> (StoppingTime, StoppingTime) {
        let occurred = from.occurred(tree);
        let sup_stop = StoppingTime::first_hit(tree, 0, |n| {
            let (v, l) = (self.value.at(n), self.lower.at(n));
            occurred[n] && v <= l + tie(v, l)
        });
        let inf_stop = StoppingTime::first_hit(tree, 0, |n| {
            let (v, u) = (self.value.at(n), self.upper.at(n));
            occurred[n] && v >= u - tie(v, u)
        });
        match self.orientation {
            Orientation::RhoSup => (sup_stop, inf_stop),
            Orientation::TauSup => (inf_stop, sup_stop),
        }
    }

    /// `v` at the nodes where `sigma` is realized.
    pub fn subgame_value_at(&self, tree: &FilteredTree, sigma: &StoppingTime) -> BoundaryValues {
        let nodes = sigma.boundary(tree);
        let values = nodes.iter().map(|&n| self.value.at(n)).collect();
        BoundaryValues { nodes, values }
    }

    /// Largest deviation from the median recursion over all nodes, plus the
    /// leaf condition `v_N = Z_N`.
    pub fn recursion_residual(&self, tree: &FilteredTree) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..tree.node_count() {
            let target = if tree.is_leaf(n) {
                self.diagonal.at(n)
            } else {
                let c = tree.next_expectation(&self.value.values, n);
                median(self.lower.at(n), c, self.upper.at(n))
            };
            worst = worst.max((self.value.at(n) - target).abs());
        }
        worst
    }
}

fn tie(a: f64, b: f64) -> f64 {
    1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Worst submartingale violation of `v` on the nodes strictly before `mu`:
/// `min(0, min_n E_n[v_next] - v_n)`.
pub fn check_submartingale(tree: &FilteredTree, v: &AdaptedProcess, mu: &StoppingTime) -> f64 {
    let occurred = mu.occurred(tree);
    (0..tree.node_count())
        .filter(|&n| !occurred[n] && !tree.is_leaf(n))
        .map(|n| tree.next_expectation(&v.values, n) - v.at(n))
        .fold(0.0f64, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelopes::build_envelopes;
    use crate::instances;
    use crate::payoff::Player;
    use crate::stopping::enumerate_stopping_times;

    #[test]
    fn median_of_three() {
        assert_eq!(median(0.0, 2.0, 2.0), 2.0);
        assert_eq!(median(3.0, 1.0, 2.0), 2.0);
        assert_eq!(median(1.0, 5.0, 3.0), 3.0);
        assert_eq!(median(-1.0, -1.0, 4.0), -1.0);
    }

    #[test]
    fn constant_band() {
        let g = instances::constant(0.5, 2, 2);
        let c = AdaptedProcess::constant(&g.tree, 0.5);
        let sol = solve(&g.tree, &c, &c, &c, Orientation::RhoSup).unwrap();
        assert!(sol.value.values.iter().all(|&v| v == 0.5));
        let (r, t) = sol.saddle(&g.tree);
        assert!(r.realized_all(&g.tree).iter().all(|&k| k == 0));
        assert!(t.realized_all(&g.tree).iter().all(|&k| k == 0));
        assert_eq!(evaluate_v(&g.tree, &c, &c, &c, &r, &t), 0.5);
    }

    #[test]
    fn det2_band_against_enumeration() {
        let g = instances::det2();
        let env = build_envelopes(&g);
        let p = Player::One;
        let (x, y, z) = (env.x(p), env.y(p), env.z(p));
        let sol = solve(&g.tree, x, y, z, Orientation::RhoSup).unwrap();
        assert_eq!(sol.value.values, vec![2.0, 2.0, 2.0]);
        let all = enumerate_stopping_times(&g.tree, 0, 1000).unwrap();
        assert_eq!(all.len(), 3);
        let lower = all
            .iter()
            .map(|r| {
                all.iter()
                    .map(|t| evaluate_v(&g.tree, x, y, z, r, t))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let upper = all
            .iter()
            .map(|t| {
                all.iter()
                    .map(|r| evaluate_v(&g.tree, x, y, z, r, t))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(lower, 2.0);
        assert_eq!(upper, 2.0);
        let (r, t) = sol.saddle(&g.tree);
        assert_eq!(evaluate_v(&g.tree, x, y, z, &r, &t), 2.0);
        assert_eq!(
            evaluate_v(
                &g.tree,
                x,
                y,
                z,
                &StoppingTime::at_level(&g.tree, 2),
                &StoppingTime::at_level(&g.tree, 0)
            ),
            2.0
        );
        assert_eq!(
            evaluate_v(
                &g.tree,
                x,
                y,
                z,
                &StoppingTime::at_level(&g.tree, 1),
                &StoppingTime::at_level(&g.tree, 1)
            ),
            1.0
        );
        let mu = StoppingTime::first_hit(&g.tree, 0, |n| sol.value.at(n) <= x.at(n) + 0.5);
        assert!(check_submartingale(&g.tree, &sol.value, &mu) >= 0.0);
    }

    #[test]
    fn band_violation_names_node() {
        let t = instances::coin_tree();
        let mut x = AdaptedProcess::constant(&t, 0.0);
        let y = AdaptedProcess::constant(&t, 1.0);
        let z = AdaptedProcess::constant(&t, 0.5);
        x.values[3] = 0.7;
        let err = solve(&t, &x, &y, &z, Orientation::RhoSup).unwrap_err();
        assert!(matches!(err, Error::BandViolation { node: 3, .. }));
        // the same processes are a valid band for the other orientation only if reversed
        assert!(solve(&t, &y, &x, &z, Orientation::TauSup).is_err());
    }

    #[test]
    fn subgame_values_and_constant_submartingale() {
        let g = instances::coin();
        let env = build_envelopes(&g);
        let p = Player::One;
        let sol = solve(&g.tree, env.x(p), env.y(p), env.z(p), Orientation::RhoSup).unwrap();
        let root = sol.subgame_value_at(&g.tree, &StoppingTime::at_level(&g.tree, 0));
        assert_eq!(root.values, vec![sol.root_value()]);
        let leaves = sol.subgame_value_at(&g.tree, &StoppingTime::at_level(&g.tree, 2));
        for (n, v) in leaves.iter() {
            assert_eq!(v, env.z(p).at(n));
        }
        let c = AdaptedProcess::constant(&g.tree, 3.0);
        assert_eq!(
            check_submartingale(&g.tree, &c, &StoppingTime::at_level(&g.tree, 2)),
            0.0
        );
    }
}
