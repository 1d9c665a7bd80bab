//! Best responses against a fixed opponent and Nash-gap certificates.
//!
//! The deviator's problem splits in two phases. While the opponent's first
//! component has not fired, the deviator solves a stopping problem whose
//! stop-now reward is the conditional payoff against the opponent's reaction.
//! Once the opponent fires at level `s`, the deviator's reaction is a plain
//! Snell problem in its own stopping time with the opponent's time frozen at
//! `s` and stopping allowed from `s + 1`.

use crate::envelopes::{snell, Sense};
use crate::error::{Error, Result};
use crate::payoff::{Player, StoppingGame};
use crate::stopping::{
    count_subtree_times, enumerate_stopping_times, enumerate_subtree_times, StoppingStrategy,
    StoppingTime, StrategyFamily,
};

/// Default cap on the number of deviations the enumeration oracle may try.
pub const ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct BestResponse {
    pub value: f64,
    pub strategy: StoppingStrategy,
    /// Conditional best-response value at each node, given that the opponent
    /// has not fired strictly before it.
    pub node_values: Vec<f64>,
}

/// Deviator's payoff when it stops at `own` and the opponent at `opp`.
fn own_payoff(game: &StoppingGame, player: Player, own: usize, opp: usize, node: usize) -> f64 {
    match player {
        Player::One => game.value(Player::One, own, opp, node),
        Player::Two => game.value(Player::Two, opp, own, node),
    }
}

/// Exact best response of `player` against `opponent` over all stopping
/// strategies.
pub fn best_response(
    game: &StoppingGame,
    player: Player,
    opponent: &StoppingStrategy,
) -> BestResponse {
    best_response_from(game, player, opponent, None)
}

/// Best response in the sub-game where the deviator's first component may
/// not fire before `start`.
pub fn best_response_from(
    game: &StoppingGame,
    player: Player,
    opponent: &StoppingStrategy,
    start: Option<&StoppingTime>,
) -> BestResponse {
    let tree = &game.tree;
    let big_n = tree.levels();

    // phase B: one Snell problem per anchor
    let mut reaction_values = vec![0.0; tree.node_count()];
    let mut entries = Vec::with_capacity(big_n);
    for s in 0..big_n {
        let sn = snell(
            tree,
            s + 1,
            Sense::Sup,
            |k, n| own_payoff(game, player, k, s, n),
            |_| true,
        );
        for n in tree.nodes_at(s) {
            reaction_values[n] = sn.values[n];
        }
        entries.push(sn.stop);
    }

    // stop-now rewards against the opponent's reaction
    let opp_react = opponent.reaction.realized_table(tree);
    let mut stop_now = vec![0.0; tree.node_count()];
    for (k, row) in opp_react.iter().enumerate() {
        let vals: Vec<f64> = tree
            .scenarios()
            .map(|s| own_payoff(game, player, k, row[s], tree.leaf(s)))
            .collect();
        let b = tree.condition_at_times(&vals, &vec![k; tree.scenario_count()]);
        for (n, v) in b.iter() {
            stop_now[n] = v;
        }
    }

    let opp_hit = opponent.first.hit_levels(tree);
    let allowed: Vec<bool> = match start {
        Some(st) => st.occurred(tree),
        None => vec![true; tree.node_count()],
    };

    let mut value = vec![0.0; tree.node_count()];
    let mut stop = vec![false; tree.node_count()];
    for k in (0..=big_n).rev() {
        for n in tree.nodes_at(k) {
            let opp_fires_here = opp_hit[n] == Some(k);
            let opp_fired_before = matches!(opp_hit[n], Some(l) if l < k);
            if opp_fired_before {
                continue;
            }
            if tree.is_leaf(n) {
                value[n] = own_payoff(game, player, k, k, n);
                stop[n] = true;
                continue;
            }
            let (now, cont) = if opp_fires_here {
                (own_payoff(game, player, k, k, n), reaction_values[n])
            } else {
                (stop_now[n], tree.next_expectation(&value, n))
            };
            if allowed[n] && now >= cont - crate::envelopes::tie_tol(now, cont) {
                value[n] = now;
                stop[n] = true;
            } else {
                value[n] = cont;
            }
        }
    }

    let first = StoppingTime::first_hit(tree, 0, |n| stop[n]);
    BestResponse {
        value: value[0],
        strategy: StoppingStrategy::new(first, StrategyFamily::new(entries)),
        node_values: value,
    }
}

/// Brute-force best response: tries every first stopping time together with
/// every reaction on the subtrees where the opponent's first component fires.
pub fn enumerate_best_response(
    game: &StoppingGame,
    player: Player,
    opponent: &StoppingStrategy,
    cap: u64,
) -> Result<f64> {
    let tree = &game.tree;
    let big_n = tree.levels();
    let fire_nodes: Vec<usize> = opponent
        .first
        .boundary(tree)
        .into_iter()
        .filter(|&m| tree.level(m) < big_n)
        .collect();

    let mut needed = count_subtree_times(tree, 0, 0);
    for &m in &fire_nodes {
        needed *= count_subtree_times(tree, m, tree.level(m) + 1);
    }
    if needed > cap as f64 {
        return Err(Error::EnumerationCap { needed, cap });
    }

    let firsts = enumerate_stopping_times(tree, 0, cap)?;
    let options: Vec<Vec<Vec<usize>>> = fire_nodes
        .iter()
        .map(|&m| enumerate_subtree_times(tree, m, tree.level(m) + 1, cap))
        .collect::<Result<_>>()?;

    let fires_at: Vec<bool> = {
        let mut v = vec![false; tree.node_count()];
        for &m in &fire_nodes {
            v[m] = true;
        }
        v
    };

    let mut best = f64::NEG_INFINITY;
    let mut choice = vec![0usize; fire_nodes.len()];
    loop {
        let mut marks = vec![vec![false; tree.node_count()]; big_n];
        for (s, row) in marks.iter_mut().enumerate() {
            for n in tree.nodes_at(s + 1) {
                let p = tree.parent(n).unwrap();
                if !fires_at[p] {
                    row[n] = true;
                }
            }
        }
        for (i, &m) in fire_nodes.iter().enumerate() {
            let s = tree.level(m);
            for &n in &options[i][choice[i]] {
                marks[s][n] = true;
            }
        }
        let reaction = StrategyFamily::new(
            marks
                .into_iter()
                .enumerate()
                .map(|(s, row)| StoppingTime::first_hit(tree, s + 1, |n| row[n]))
                .collect(),
        );
        for first in &firsts {
            let dev = StoppingStrategy::new(first.clone(), reaction.clone());
            let v = match player {
                Player::One => game.evaluate(Player::One, &dev, opponent),
                Player::Two => game.evaluate(Player::Two, opponent, &dev),
            };
            best = best.max(v);
        }

        // mixed-radix increment
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(best);
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dp,
    Enumeration,
}

#[derive(Debug, Clone)]
pub struct GapReport {
    /// `u^i(rho*, tau*)`
    pub values: [f64; 2],
    /// Best unilateral deviation value of each player.
    pub best: [f64; 2],
    pub gaps: [f64; 2],
    pub witnesses: Option<[StoppingStrategy; 2]>,
    pub method: Method,
}

impl GapReport {
    pub fn gap(&self, p: Player) -> f64 {
        self.gaps[p.index()]
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps[0].max(self.gaps[1])
    }

    /// Both gaps within `epsilon`.
    pub fn certifies(&self, epsilon: f64) -> bool {
        self.gaps.iter().all(|&g| g <= epsilon)
    }
}

pub fn nash_gap(game: &StoppingGame, rho: &StoppingStrategy, tau: &StoppingStrategy) -> GapReport {
    let values = [
        game.evaluate(Player::One, rho, tau),
        game.evaluate(Player::Two, rho, tau),
    ];
    let b1 = best_response(game, Player::One, tau);
    let b2 = best_response(game, Player::Two, rho);
    let best = [b1.value, b2.value];
    GapReport {
        values,
        best,
        gaps: [best[0] - values[0], best[1] - values[1]],
        witnesses: Some([b1.strategy, b2.strategy]),
        method: Method::Dp,
    }
}

/// Same certificate computed by exhaustive enumeration.
pub fn nash_gap_enumerated(
    game: &StoppingGame,
    rho: &StoppingStrategy,
    tau: &StoppingStrategy,
    cap: u64,
) -> Result<GapReport> {
    let values = [
        game.evaluate(Player::One, rho, tau),
        game.evaluate(Player::Two, rho, tau),
    ];
    let best = [
        enumerate_best_response(game, Player::One, tau, cap)?,
        enumerate_best_response(game, Player::Two, rho, cap)?,
    ];
    Ok(GapReport {
        values,
        best,
        gaps: [best[0] - values[0], best[1] - values[1]],
        witnesses: None,
        method: Method::Enumeration,
    })
}
