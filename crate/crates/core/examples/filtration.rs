//! Conditional expectations on a two-scenario tree.
use stopgame::filtration::RandomVariable;
use stopgame::instances::coin_tree;
use stopgame::StoppingTime;

fn main() {
    let tree = coin_tree();
    println!(
        "{} nodes, {} scenarios, N = {}",
        tree.node_count(),
        tree.scenario_count(),
        tree.levels()
    );

    let rv = RandomVariable {
        level: 1,
        values: vec![4.0, 0.0],
    };
    let root = tree.condition(&rv, 0).unwrap();
    println!("E[rv] = {}", root.values[0]);

    let leaves = vec![1.0, 3.0];
    let sigma = StoppingTime::at_level(&tree, 1);
    for (node, v) in tree
        .condition_at_times(&leaves, &sigma.realized_all(&tree))
        .iter()
    {
        println!("E[leaf value | node {node}] = {v}");
    }
}
