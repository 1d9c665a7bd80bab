//! Best responses and Nash gaps, checked against brute-force enumeration.
use stopgame::instances::coin;
use stopgame::verify::{nash_gap, nash_gap_enumerated, ENUMERATION_CAP};
use stopgame::{best_response, Player, StoppingStrategy, StoppingTime, StrategyFamily};

fn main() {
    let game = coin();
    let tree = &game.tree;
    let stop_now = StoppingStrategy::new(
        StoppingTime::at_level(tree, 0),
        StrategyFamily::next_level(tree),
    );
    let wait = StoppingStrategy::new(
        StoppingTime::at_level(tree, 2),
        StrategyFamily::horizon(tree),
    );

    let br = best_response(&game, Player::One, &wait);
    println!("player 1 against a waiting opponent can reach {}", br.value);

    let dp = nash_gap(&game, &stop_now, &wait);
    let en = nash_gap_enumerated(&game, &stop_now, &wait, ENUMERATION_CAP).unwrap();
    println!("gaps by dynamic programming {:?}", dp.gaps);
    println!("gaps by enumeration         {:?}", en.gaps);
}
