//! Scenario-sum oracles used by the integration tests. They work from the
//! raw parent links and edge probabilities only.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stopgame::filtration::{AdaptedProcess, FilteredTree};
use stopgame::generate::{generate, GenerateParams};
use stopgame::payoff::{Player, StoppingGame};
use stopgame::stopping::{StoppingStrategy, StoppingTime, StrategyFamily};

/// Root-to-leaf node lists, leaves in increasing id order.
pub fn paths(tree: &FilteredTree) -> Vec<Vec<usize>> {
    (0..tree.node_count())
        .filter(|&n| tree.is_leaf(n))
        .map(|leaf| {
            let mut p = vec![leaf];
            while let Some(q) = tree.parent(*p.last().unwrap()) {
                p.push(q);
            }
            p.reverse();
            p
        })
        .collect()
}

pub fn path_prob(tree: &FilteredTree, path: &[usize]) -> f64 {
    path.iter().map(|&n| tree.edge_prob(n)).product()
}

/// First marked level at or after the floor.
pub fn realized(time: &StoppingTime, path: &[usize]) -> usize {
    (time.floor()..path.len())
        .find(|&k| time.marks()[path[k]])
        .unwrap_or(path.len() - 1)
}

/// Every stopping time with floor 0, by brute force over mark patterns on
/// the non-leaf nodes, deduplicated by realized times.
pub fn all_stopping_times(tree: &FilteredTree) -> Vec<StoppingTime> {
    let inner: Vec<usize> = (0..tree.node_count())
        .filter(|&n| !tree.is_leaf(n))
        .collect();
    assert!(inner.len() <= 16, "too many inner nodes for brute force");
    let ps = paths(tree);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << inner.len()) {
        let mut marks: Vec<bool> = (0..tree.node_count()).map(|n| tree.is_leaf(n)).collect();
        for (i, &n) in inner.iter().enumerate() {
            marks[n] = mask & (1 << i) != 0;
        }
        let t = StoppingTime::from_marks(0, marks);
        let key: Vec<usize> = ps.iter().map(|p| realized(&t, p)).collect();
        if seen.insert(key) {
            out.push(t);
        }
    }
    out
}

/// `E[values | node]` for a leaf-indexed variable.
pub fn conditional(tree: &FilteredTree, leaf_values: &[f64], node: usize) -> f64 {
    let ps = paths(tree);
    let (mut num, mut den) = (0.0, 0.0);
    for (s, p) in ps.iter().enumerate() {
        if p.contains(&node) {
            let w = path_prob(tree, p);
            num += w * leaf_values[s];
            den += w;
        }
    }
    num / den
}

/// `(rho[tau], tau[rho])` on one path.
pub fn compose_on_path(
    rho: &StoppingStrategy,
    tau: &StoppingStrategy,
    path: &[usize],
) -> (usize, usize) {
    let n = path.len() - 1;
    let r0 = realized(&rho.first, path);
    let t0 = realized(&tau.first, path);
    let react = |s: &StoppingStrategy, at: usize| {
        if at == n {
            n
        } else {
            realized(&s.reaction.entries()[at], path)
        }
    };
    let a = if r0 <= t0 { r0 } else { react(rho, t0) };
    let b = if t0 <= r0 { t0 } else { react(tau, r0) };
    (a, b)
}

/// `E[U^i(rho[tau], tau[rho])]` by scenario sums.
pub fn game_value(
    game: &StoppingGame,
    player: Player,
    rho: &StoppingStrategy,
    tau: &StoppingStrategy,
) -> f64 {
    let tree = &game.tree;
    paths(tree)
        .iter()
        .map(|p| {
            let (a, b) = compose_on_path(rho, tau, p);
            path_prob(tree, p) * game.value(player, a, b, p[a.max(b)])
        })
        .sum()
}

/// Dynkin criterion `E[X 1{r<t} + Y 1{r>t} + Z 1{r=t}]` by scenario sums.
pub fn dynkin_value(
    tree: &FilteredTree,
    x: &AdaptedProcess,
    y: &AdaptedProcess,
    z: &AdaptedProcess,
    r: &StoppingTime,
    t: &StoppingTime,
) -> f64 {
    paths(tree)
        .iter()
        .map(|p| {
            let (a, b) = (realized(r, p), realized(t, p));
            let v = match a.cmp(&b) {
                std::cmp::Ordering::Less => x.at(p[a]),
                std::cmp::Ordering::Greater => y.at(p[b]),
                std::cmp::Ordering::Equal => z.at(p[a]),
            };
            path_prob(tree, p) * v
        })
        .sum()
}

pub fn random_time(
    tree: &FilteredTree,
    floor: usize,
    rng: &mut ChaCha8Rng,
    p: f64,
) -> StoppingTime {
    StoppingTime::first_hit(tree, floor, |_| rng.gen_bool(p))
}

pub fn random_strategy(tree: &FilteredTree, rng: &mut ChaCha8Rng) -> StoppingStrategy {
    let p = rng.gen_range(0.1..0.9);
    let first = random_time(tree, 0, rng, p);
    let entries = (0..tree.levels())
        .map(|k| random_time(tree, k + 1, rng, p))
        .collect();
    StoppingStrategy::new(first, StrategyFamily::new(entries))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generated instances with at most `max_nodes` nodes.
pub fn tiny_instances(count: usize, max_nodes: usize, zero_sum: bool) -> Vec<StoppingGame> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < count {
        let g = generate(&GenerateParams {
            seed,
            levels: 2 + (seed as usize % 2),
            h: 0.5,
            branching: 2,
            lipschitz: 1.0,
            scale: 5.0,
            zero_sum,
        })
        .unwrap();
        if g.tree.node_count() <= max_nodes {
            out.push(g);
        }
        seed += 1;
    }
    out
}

/// Parameters for the `i`-th generated instance of a suite: `N` in 2..=6,
/// branching 2 or 3, `h` and `L` varied.
pub fn suite_params(i: usize, zero_sum: bool) -> GenerateParams {
    GenerateParams {
        seed: 1000 + i as u64,
        levels: 2 + i % 5,
        h: [0.5, 0.25, 1.0][i % 3],
        branching: 2 + i % 2,
        lipschitz: [1.0, 0.5, 2.0, 0.1][i % 4],
        scale: 10.0,
        zero_sum,
    }
}

/// An epsilon with `r(h) <= L h < epsilon / 3`.
pub fn suite_epsilon(p: &GenerateParams) -> f64 {
    3.3 * p.lipschitz * p.h
}
