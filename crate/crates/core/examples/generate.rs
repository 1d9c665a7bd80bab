//! A seeded random instance, its empirical modulus and its JSON form.
use stopgame::generate::{describe, generate, GenerateParams};
use stopgame::io::instance_to_string;

fn main() {
    let params = GenerateParams {
        seed: 1,
        levels: 3,
        h: 0.5,
        branching: 2,
        lipschitz: 1.0,
        scale: 10.0,
        zero_sum: false,
    };
    let game = generate(&params).unwrap();
    let r = game.modulus();
    for (m, v) in r.table().iter().enumerate() {
        println!(
            "r({}) = {:.4} <= {}",
            m as f64 * params.h,
            v,
            m as f64 * params.h * params.lipschitz
        );
    }
    let text = instance_to_string(&game, Some(&describe(&params)));
    println!(
        "{} bytes of stopgame/v1 JSON, {} nodes",
        text.len(),
        game.tree.node_count()
    );
}
