//! Small hand-built games with known answers.

use crate::filtration::{FilteredTree, GridSpec};
use crate::payoff::{PayoffField, Player, StoppingGame};

/// Both payoffs equal `c` everywhere, on a regular tree with unit step.
pub fn constant(c: f64, levels: usize, branching: usize) -> StoppingGame {
    let tree = FilteredTree::regular(GridSpec::new(1.0, levels).unwrap(), branching).unwrap();
    let payoff = PayoffField::from_fn(&tree, |_, _, _, _| c).unwrap();
    StoppingGame::new(tree, payoff).unwrap()
}

/// One deterministic scenario over levels 0, 1, 2 with `U^1(j, k) = max(j, k)`
/// and `U^2 = -U^1`.
pub fn det2() -> StoppingGame {
    let tree = FilteredTree::regular(GridSpec::new(1.0, 2).unwrap(), 1).unwrap();
    let payoff = PayoffField::from_fn(&tree, |p, j, k, _| {
        let v = j.max(k) as f64;
        match p {
            Player::One => v,
            Player::Two => -v,
        }
    })
    .unwrap();
    StoppingGame::new(tree, payoff).unwrap()
}

/// Root, two equally likely level-1 nodes (1 = up, 2 = down) and one child
/// under each at level 2 (3 under up, 4 under down).
pub fn coin_tree() -> FilteredTree {
    FilteredTree::new(
        GridSpec::new(1.0, 2).unwrap(),
        vec![None, Some(0), Some(0), Some(1), Some(2)],
        vec![1.0, 0.5, 0.5, 1.0, 1.0],
    )
    .unwrap()
}

/// Zero-sum game on [`coin_tree`]: `U^1(j, k) = 0` when `max(j, k) = 0`,
/// otherwise `+max(j, k)` on the up branch and `-max(j, k)` on the down branch.
pub fn coin() -> StoppingGame {
    let tree = coin_tree();
    let payoff = PayoffField::from_fn(&tree, |p, j, k, node| {
        let m = j.max(k);
        let v = if m == 0 {
            0.0
        } else {
            let up = tree.ancestor(node, 1) == 1;
            if up {
                m as f64
            } else {
                -(m as f64)
            }
        };
        match p {
            Player::One => v,
            Player::Two => -v,
        }
    })
    .unwrap();
    StoppingGame::new(tree, payoff).unwrap()
}
