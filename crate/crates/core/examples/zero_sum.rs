//! A 5 epsilon equilibrium of a generated zero-sum game.
use stopgame::generate::{generate, GenerateParams};
use stopgame::{assemble_zero_sum, SolveOptions};

fn main() {
    let params = GenerateParams {
        seed: 42,
        levels: 5,
        zero_sum: true,
        ..Default::default()
    };
    let game = generate(&params).unwrap();
    let eps = 3.3 * params.lipschitz * params.h;
    let bundle = assemble_zero_sum(&game, SolveOptions::new(eps)).unwrap();
    let d = &bundle.diagnostics;
    println!("r(h) = {:.4}, epsilon = {eps}", d.step_modulus);
    println!("game value {:.4}", d.dynkin_values[0]);
    println!(
        "gaps {:?}, bound {}, certified {}",
        d.gaps.gaps,
        d.bound,
        bundle.certified()
    );
}
