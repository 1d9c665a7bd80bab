//! Random instances with a controlled modulus of continuity.
//!
//! Trees get a random number of children per node (between 1 and the
//! branching bound) and random edge probabilities. Payoffs are filled in
//! level by level: at a node of level `m` every level pair with
//! `max(j, k) = m` is drawn uniformly from the interval that keeps the field
//! `L`-Lipschitz (in `h`-scaled L1 distance) against every value already fixed
//! on the node's path, intersected with `[-M, M]`. Such an interval is never
//! empty, so the result satisfies `r(d) <= L d` by construction and stays
//! measurable at the later of the two levels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filtration::{FilteredTree, GridSpec};
use crate::payoff::{PayoffField, StoppingGame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateParams {
    pub seed: u64,
    pub levels: usize,
    pub h: f64,
    pub branching: usize,
    pub lipschitz: f64,
    pub scale: f64,
    /// Generate only player 1's field and set `U^2 = -U^1`.
    pub zero_sum: bool,
}

impl Default for GenerateParams {
    fn default() -> Self {
        GenerateParams {
            seed: 0,
            levels: 3,
            h: 0.5,
            branching: 2,
            lipschitz: 1.0,
            scale: 10.0,
            zero_sum: false,
        }
    }
}

pub fn generate(params: &GenerateParams) -> Result<StoppingGame> {
    if params.branching == 0 {
        return Err(Error::Grid("branching must be positive".into()));
    }
    if !(params.lipschitz >= 0.0 && params.lipschitz.is_finite()) {
        return Err(Error::Grid(format!(
            "lipschitz constant {} is not valid",
            params.lipschitz
        )));
    }
    if !(params.scale > 0.0 && params.scale.is_finite()) {
        return Err(Error::Grid(format!(
            "payoff scale {} is not positive",
            params.scale
        )));
    }
    let grid = GridSpec::new(params.h, params.levels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let tree = random_tree(grid, params.branching, &mut rng)?;

    let first = random_field(&tree, params.lipschitz, params.scale, &mut rng);
    let second = if params.zero_sum {
        first
            .iter()
            .map(|col| col.iter().map(|v| -v).collect())
            .collect()
    } else {
        random_field(&tree, params.lipschitz, params.scale, &mut rng)
    };
    let payoff = PayoffField::from_values(&tree, [first, second])?;
    StoppingGame::new(tree, payoff)
}

fn random_tree(grid: GridSpec, branching: usize, rng: &mut ChaCha8Rng) -> Result<FilteredTree> {
    let mut parents = vec![None];
    let mut probs = vec![1.0];
    let mut frontier = vec![0usize];
    for _ in 0..grid.levels() {
        let mut next = Vec::new();
        for &p in &frontier {
            let count = rng.gen_range(1..=branching);
            let weights: Vec<f64> = (0..count).map(|_| rng.gen_range(0.25..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in weights {
                parents.push(Some(p));
                probs.push(w / total);
                next.push(parents.len() - 1);
            }
        }
        frontier = next;
    }
    FilteredTree::new(grid, parents, probs)
}

/// Level pairs with `max(j, k) = m`, in fill order.
fn shell(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(2 * m + 1);
    for i in 0..m {
        out.push((m, i));
        out.push((i, m));
    }
    out.push((m, m));
    out
}

fn random_field(
    tree: &FilteredTree,
    lipschitz: f64,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let big_n = tree.levels();
    let side = big_n + 1;
    let step = lipschitz * tree.grid().h();
    let mut field: Vec<Vec<f64>> = (0..side * side)
        .map(|idx| vec![0.0; tree.count_at((idx / side).max(idx % side))])
        .collect();
    for n in 0..tree.node_count() {
        let m = tree.level(n);
        // values already fixed on this node's path
        let mut fixed: Vec<((usize, usize), f64)> = Vec::new();
        for j in 0..m {
            for k in 0..m {
                let a = tree.ancestor(n, j.max(k));
                fixed.push(((j, k), field[j * side + k][tree.local_index(a)]));
            }
        }
        for (j, k) in shell(m) {
            let mut lo = -scale;
            let mut hi = scale;
            for &((j2, k2), v) in &fixed {
                let d = (j.abs_diff(j2) + k.abs_diff(k2)) as f64 * step;
                lo = lo.max(v - d);
                hi = hi.min(v + d);
            }
            let v = if hi > lo {
                rng.gen_range(lo..=hi)
            } else {
                0.5 * (lo + hi)
            };
            field[j * side + k][tree.local_index(n)] = v;
            fixed.push(((j, k), v));
        }
    }
    field
}

/// Metadata describing how an instance was generated.
pub fn describe(params: &GenerateParams) -> crate::io::Metadata {
    crate::io::Metadata {
        seed: Some(params.seed),
        lipschitz: Some(params.lipschitz),
        scale: Some(params.scale),
        branching: Some(params.branching),
        zero_sum: Some(params.zero_sum),
    }
}
