//! An 18 epsilon equilibrium of a generated non-zero-sum game, with the
//! delta-condition ledger.
use stopgame::generate::{generate, GenerateParams};
use stopgame::{assemble_nonzero_sum, SolveOptions};

fn main() {
    let params = GenerateParams {
        seed: 7,
        levels: 5,
        branching: 3,
        ..Default::default()
    };
    let game = generate(&params).unwrap();
    let eps = 3.3 * params.lipschitz * params.h;
    let bundle = assemble_nonzero_sum(&game, SolveOptions::new(eps)).unwrap();
    let d = &bundle.diagnostics;
    let tree = &game.tree;
    let mu = bundle.mu.as_ref().unwrap();
    println!("mu_1 {:?}", mu[0].realized_all(tree));
    println!("mu_2 {:?}", mu[1].realized_all(tree));
    for c in &d.delta.as_ref().unwrap().conditions {
        println!(
            "{:>5}  {} measured {:.4}",
            if c.passed { "pass" } else { "fail" },
            c.name,
            c.measured
        );
    }
    println!(
        "gaps {:?}, bound {}, certified {}",
        d.gaps.gaps,
        d.bound,
        bundle.certified()
    );
}
