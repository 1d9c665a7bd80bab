//! Solving a Dynkin game on the envelope band and reading off a saddle point.
use stopgame::dynkin::{evaluate_v, solve, Orientation};
use stopgame::envelopes::build_envelopes;
use stopgame::instances::coin;
use stopgame::Player;

fn main() {
    let game = coin();
    let tree = &game.tree;
    let env = build_envelopes(&game);
    let p = Player::One;
    let sol = solve(tree, env.x(p), env.y(p), env.z(p), Orientation::RhoSup).unwrap();
    println!("value process {:?}", sol.value.values);
    let (rho0, tau0) = sol.saddle(tree);
    println!(
        "rho_0 realizes {:?}, tau_0 realizes {:?}",
        rho0.realized_all(tree),
        tau0.realized_all(tree)
    );
    println!(
        "V(rho_0, tau_0) = {} = root value {}",
        evaluate_v(tree, env.x(p), env.y(p), env.z(p), &rho0, &tau0),
        sol.root_value()
    );
}
