//! Anchored optimal-stopping values and their exact optimizers.
//!
//! For a player `i` and an anchor level `t`, freezing one argument of the
//! payoff at `t` leaves a single-agent stopping problem in the other argument.
//! Solving it by backward induction gives the processes
//!
//! * `X^i_t`: stop first at `t`, opponent's stopping time `sigma >= t` optimized
//!   (inf for player 1, sup for player 2),
//! * `Y^i_t`: opponent first at `t`, own stopping time `sigma >= t` optimized
//!   (sup for player 1, inf for player 2),
//! * `Z^i_t = U^i(t, t)`,
//!
//! together with optimal stopping times that attain them exactly. Reaction
//! families are then read off with the next-grid-anchor rule: entry `k` is
//! the optimizer anchored at `k + 1`.

use crate::filtration::{AdaptedProcess, FilteredTree, RandomVariable};
use crate::payoff::{Player, StoppingGame};
use crate::stopping::{StoppingTime, StrategyFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Sup,
    Inf,
}

/// Which payoff argument is held at the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `U(t, sigma)`
    FirstFrozen,
    /// `U(sigma, t)`
    SecondFrozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Built from the `Y`-optimizers: how the first player reacts.
    Rho,
    /// Built from the `X`-optimizers: how the second player reacts.
    Tau,
}

pub(crate) fn tie_tol(a: f64, b: f64) -> f64 {
    1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Whether stopping with `stop` is at least as good as continuing with `cont`.
pub(crate) fn prefers_stop(sense: Sense, stop: f64, cont: f64) -> bool {
    match sense {
        Sense::Sup => stop >= cont - tie_tol(stop, cont),
        Sense::Inf => stop <= cont + tie_tol(stop, cont),
    }
}

/// Value process and optimal stopping time of a single-agent problem.
#[derive(Debug, Clone)]
pub struct Snell {
    /// At nodes below the floor this is the conditional value of continuing.
    pub values: Vec<f64>,
    pub stop: StoppingTime,
}

/// Backward induction for `opt_{sigma >= floor} E[reward(sigma)]`, where
/// stopping at a non-leaf node is further restricted to nodes with
/// `allowed(node)`. Ties stop at the earliest level.
pub fn snell(
    tree: &FilteredTree,
    floor: usize,
    sense: Sense,
    mut reward: impl FnMut(usize, usize) -> f64,
    allowed: impl Fn(usize) -> bool,
) -> Snell {
    let big_n = tree.levels();
    let mut values = vec![0.0; tree.node_count()];
    let mut stop = vec![false; tree.node_count()];
    for n in tree.nodes_at(big_n) {
        values[n] = reward(big_n, n);
        stop[n] = true;
    }
    for k in (0..big_n).rev() {
        for n in tree.nodes_at(k) {
            let cont = tree.next_expectation(&values, n);
            if k >= floor && allowed(n) {
                let now = reward(k, n);
                if prefers_stop(sense, now, cont) {
                    values[n] = now;
                    stop[n] = true;
                    continue;
                }
            }
            values[n] = cont;
        }
    }
    Snell {
        values,
        stop: StoppingTime::from_marks(floor, stop),
    }
}

/// Snell problem for player `i` with one payoff argument frozen at `anchor`
/// and stopping allowed from `floor` on.
pub fn anchored_snell(
    game: &StoppingGame,
    player: Player,
    anchor: usize,
    floor: usize,
    side: Side,
    sense: Sense,
) -> Snell {
    snell(
        &game.tree,
        floor,
        sense,
        |k, n| match side {
            Side::FirstFrozen => game.value(player, anchor, k, n),
            Side::SecondFrozen => game.value(player, k, anchor, n),
        },
        |_| true,
    )
}

/// The anchored value at level `anchor` with its optimal stopping time.
pub fn anchored_value(
    game: &StoppingGame,
    player: Player,
    anchor: usize,
    side: Side,
    sense: Sense,
) -> (RandomVariable, StoppingTime) {
    let sn = anchored_snell(game, player, anchor, anchor, side, sense);
    let rv = RandomVariable {
        level: anchor,
        values: sn.values[game.tree.nodes_at(anchor)].to_vec(),
    };
    (rv, sn.stop)
}

/// Sense used for the `X` process of a player.
pub fn x_sense(player: Player) -> Sense {
    match player {
        Player::One => Sense::Inf,
        Player::Two => Sense::Sup,
    }
}

/// Sense used for the `Y` process of a player.
pub fn y_sense(player: Player) -> Sense {
    match player {
        Player::One => Sense::Sup,
        Player::Two => Sense::Inf,
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeSet {
    pub x: [AdaptedProcess; 2],
    pub y: [AdaptedProcess; 2],
    pub z: [AdaptedProcess; 2],
    /// `rho_bar[i][n]` attains `Y^i` at anchor `n`.
    pub rho_bar: [Vec<StoppingTime>; 2],
    /// `tau_bar[i][n]` attains `X^i` at anchor `n`.
    pub tau_bar: [Vec<StoppingTime>; 2],
    /// Optimizer slack; zero because every optimizer is exact.
    pub optimizer_slack: f64,
}

impl EnvelopeSet {
    pub fn x(&self, p: Player) -> &AdaptedProcess {
        &self.x[p.index()]
    }

    pub fn y(&self, p: Player) -> &AdaptedProcess {
        &self.y[p.index()]
    }

    pub fn z(&self, p: Player) -> &AdaptedProcess {
        &self.z[p.index()]
    }

    /// Reaction family with entry `k` equal to the optimizer anchored at
    /// `k + 1`; the horizon anchor is implicit.
    pub fn family(&self, kind: FamilyKind, player: Player) -> StrategyFamily {
        let table = match kind {
            FamilyKind::Rho => &self.rho_bar[player.index()],
            FamilyKind::Tau => &self.tau_bar[player.index()],
        };
        let n = table.len() - 1;
        StrategyFamily::new(
            (0..n)
                .map(|k| table[k + 1].clone().with_floor(k + 1))
                .collect(),
        )
    }

    pub fn rho_h(&self, player: Player) -> StrategyFamily {
        self.family(FamilyKind::Rho, player)
    }

    pub fn tau_h(&self, player: Player) -> StrategyFamily {
        self.family(FamilyKind::Tau, player)
    }

    /// Worst ordering violation: `X <= Z <= Y` for player 1 and
    /// `Y <= Z <= X` for player 2. Non-negative when the ordering holds.
    pub fn ordering_margin(&self, player: Player) -> f64 {
        let (lo, hi) = match player {
            Player::One => (self.x(player), self.y(player)),
            Player::Two => (self.y(player), self.x(player)),
        };
        let z = self.z(player);
        (0..z.values.len())
            .map(|n| (z.at(n) - lo.at(n)).min(hi.at(n) - z.at(n)))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn build_envelopes(game: &StoppingGame) -> EnvelopeSet {
    let tree = &game.tree;
    let big_n = tree.levels();
    let mk = || AdaptedProcess::constant(tree, 0.0);
    let mut x = [mk(), mk()];
    let mut y = [mk(), mk()];
    let mut z = [mk(), mk()];
    let mut rho_bar: [Vec<StoppingTime>; 2] = [Vec::new(), Vec::new()];
    let mut tau_bar: [Vec<StoppingTime>; 2] = [Vec::new(), Vec::new()];
    for p in Player::BOTH {
        let i = p.index();
        for t in 0..=big_n {
            let sx = anchored_snell(game, p, t, t, Side::FirstFrozen, x_sense(p));
            let sy = anchored_snell(game, p, t, t, Side::SecondFrozen, y_sense(p));
            for n in tree.nodes_at(t) {
                x[i].values[n] = sx.values[n];
                y[i].values[n] = sy.values[n];
                z[i].values[n] = game.value(p, t, t, n);
            }
            tau_bar[i].push(sx.stop);
            rho_bar[i].push(sy.stop);
        }
    }
    EnvelopeSet {
        x,
        y,
        z,
        rho_bar,
        tau_bar,
        optimizer_slack: 0.0,
    }
}

/// Node-wise `E_t[U^i(t, phi(t))]` (first argument at the node's level) or
/// `E_t[U^i(phi(t), t)]` (second argument at the node's level).
pub fn reaction_value(
    game: &StoppingGame,
    player: Player,
    family: &StrategyFamily,
    side: Side,
) -> AdaptedProcess {
    let tree = &game.tree;
    let table = family.realized_table(tree);
    let mut out = AdaptedProcess::constant(tree, 0.0);
    for (t, row) in table.iter().enumerate() {
        let vals: Vec<f64> = tree
            .scenarios()
            .map(|s| {
                let r = row[s];
                match side {
                    Side::FirstFrozen => game.payoff_at(player, t, r, s),
                    Side::SecondFrozen => game.payoff_at(player, r, t, s),
                }
            })
            .collect();
        let b = tree.condition_at_times(&vals, &vec![t; tree.scenario_count()]);
        for (n, v) in b.iter() {
            out.values[n] = v;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Report {
    /// `min_t -|X_t - E_t[U(t, tau_h(t))]|`
    pub slack_x: f64,
    /// `min_t -|E_t[U(rho_h(t), t)] - Y_t|`
    pub slack_y: f64,
    pub epsilon: f64,
    /// `r(h) < epsilon / 3`
    pub step_condition: bool,
}

impl Lemma2Report {
    pub fn passed(&self) -> bool {
        let bound = -2.0 * self.epsilon - 1e-9;
        self.slack_x > bound && self.slack_y > bound
    }
}

/// Node-wise check that the next-anchor families lose at most `2 epsilon`
/// against the exact anchored values.
pub fn check_lemma2(
    game: &StoppingGame,
    env: &EnvelopeSet,
    player: Player,
    rho_h: &StrategyFamily,
    tau_h: &StrategyFamily,
    epsilon: f64,
) -> Lemma2Report {
    let ex = reaction_value(game, player, tau_h, Side::FirstFrozen);
    let ey = reaction_value(game, player, rho_h, Side::SecondFrozen);
    let x = env.x(player);
    let y = env.y(player);
    let worst = |a: &AdaptedProcess, b: &AdaptedProcess| {
        (0..a.values.len())
            .map(|n| -(a.at(n) - b.at(n)).abs())
            .fold(0.0f64, f64::min)
    };
    let r_h = game.modulus().at_steps(1);
    Lemma2Report {
        slack_x: worst(x, &ex),
        slack_y: worst(&ey, y),
        epsilon,
        step_condition: r_h < epsilon / 3.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn brute_anchor(values: &[f64], anchor: usize, sense: Sense) -> f64 {
        // single-scenario enumeration over sigma in anchor..=N
        let it = values[anchor..].iter().copied();
        match sense {
            Sense::Sup => it.fold(f64::NEG_INFINITY, f64::max),
            Sense::Inf => it.fold(f64::INFINITY, f64::min),
        }
    }

    #[test]
    fn constant_envelopes_and_earliest_ties() {
        let g = instances::constant(2.5, 3, 2);
        let env = build_envelopes(&g);
        for p in Player::BOTH {
            for n in 0..g.tree.node_count() {
                assert!((env.x(p).at(n) - 2.5).abs() < 1e-12);
                assert!((env.y(p).at(n) - 2.5).abs() < 1e-12);
                assert_eq!(env.z(p).at(n), 2.5);
            }
            let fam = env.rho_h(p);
            for k in 0..3 {
                let r = fam.entry(k).unwrap().realized_all(&g.tree);
                assert!(r.iter().all(|&v| v == k + 1));
            }
        }
    }

    #[test]
    fn det2_matches_enumeration() {
        let g = instances::det2();
        let env = build_envelopes(&g);
        for t in 0..=2usize {
            let x_slice: Vec<f64> = (0..=2).map(|s| g.payoff_at(Player::One, t, s, 0)).collect();
            let y_slice: Vec<f64> = (0..=2).map(|s| g.payoff_at(Player::One, s, t, 0)).collect();
            assert_eq!(
                env.x(Player::One).at(t),
                brute_anchor(&x_slice, t, Sense::Inf)
            );
            assert_eq!(
                env.y(Player::One).at(t),
                brute_anchor(&y_slice, t, Sense::Sup)
            );
            assert_eq!(env.x(Player::One).at(t), t as f64);
            assert_eq!(env.y(Player::One).at(t), 2.0);
            assert_eq!(env.tau_bar[0][t].realized(&g.tree, 0), t);
            assert_eq!(env.rho_bar[0][t].realized(&g.tree, 0), 2);
        }
        let rho_h = env.rho_h(Player::One);
        assert_eq!(rho_h.react_at(&g.tree, &[0]), vec![2]);
        assert_eq!(rho_h.react_at(&g.tree, &[1]), vec![2]);
        let tau_h = env.tau_h(Player::One);
        assert_eq!(tau_h.react_at(&g.tree, &[0]), vec![1]);
        assert_eq!(tau_h.react_at(&g.tree, &[1]), vec![2]);
        assert!(env.ordering_margin(Player::One) >= 0.0);
        assert!(env.ordering_margin(Player::Two) >= 0.0);
    }

    #[test]
    fn lemma2_det2() {
        let g = instances::det2();
        let env = build_envelopes(&g);
        let p = Player::One;
        let rep = check_lemma2(&g, &env, p, &env.rho_h(p), &env.tau_h(p), 1.5);
        // X_t = t against U(t, t + 1) = t + 1
        assert_eq!(rep.slack_x, -1.0);
        assert_eq!(rep.slack_y, 0.0);
        assert!(rep.passed());
        assert!(!rep.step_condition);
        let rep = check_lemma2(&g, &env, p, &env.rho_h(p), &env.tau_h(p), 3.5);
        assert!(rep.step_condition && rep.passed());
    }

    #[test]
    fn lemma2_constant_has_zero_slack() {
        let g = instances::constant(1.0, 2, 2);
        let env = build_envelopes(&g);
        for p in Player::BOTH {
            let rep = check_lemma2(&g, &env, p, &env.rho_h(p), &env.tau_h(p), 0.1);
            assert_eq!((rep.slack_x, rep.slack_y), (0.0, 0.0));
            assert!(rep.passed());
        }
    }
}
