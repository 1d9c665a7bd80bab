//! The one-sided envelopes X, Y, Z and the next-anchor families.
use stopgame::envelopes::build_envelopes;
use stopgame::instances::det2;
use stopgame::Player;

fn main() {
    let game = det2();
    let env = build_envelopes(&game);
    for p in Player::BOTH {
        println!(
            "player {}: X = {:?}, Y = {:?}, Z = {:?}, ordering margin {}",
            p.number(),
            env.x(p).values,
            env.y(p).values,
            env.z(p).values,
            env.ordering_margin(p)
        );
    }
    let tau_h = env.tau_h(Player::One);
    println!(
        "tau_h reacts to a stop at 0 with {:?}",
        tau_h.react_at(&game.tree, &[0])
    );
}
