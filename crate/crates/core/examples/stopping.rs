//! Stopping times, reaction families and the composed outcome.
use stopgame::instances::coin_tree;
use stopgame::stopping::outcome;
use stopgame::{StoppingStrategy, StoppingTime, StrategyFamily};

fn main() {
    let tree = coin_tree();
    // stop at the up node, otherwise at the horizon
    let sigma = StoppingTime::first_hit(&tree, 0, |n| n == 1);
    println!("sigma realizes {:?}", sigma.realized_all(&tree));

    let rho = StoppingStrategy::new(
        StoppingTime::at_level(&tree, 2),
        StrategyFamily::next_level(&tree),
    );
    let tau = StoppingStrategy::new(sigma, StrategyFamily::horizon(&tree));
    for (s, (a, b)) in outcome(&tree, &rho, &tau).into_iter().enumerate() {
        println!("scenario {s}: rho[tau] = {a}, tau[rho] = {b}");
    }

    let bad = StrategyFamily::new(vec![
        StoppingTime::at_level(&tree, 0),
        StoppingTime::at_level(&tree, 2),
    ]);
    for v in bad.validate(&tree, "reaction") {
        println!("violation: {v}");
    }
}
