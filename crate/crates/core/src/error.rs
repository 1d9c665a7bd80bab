use thiserror::Error;

use crate::stopping::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("malformed tree at node {node}: {reason}")]
    Tree { node: usize, reason: String },

    #[error("stochasticity violated at node {node}: outgoing probabilities sum to {sum}")]
    Stochasticity { node: usize, sum: f64 },

    #[error("level mismatch: cannot condition a level-{from} variable onto level {to}")]
    LevelMismatch { from: usize, to: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(
        "band condition violated at node {node}: lower {lower}, diagonal {diagonal}, upper {upper}"
    )]
    BandViolation {
        node: usize,
        lower: f64,
        diagonal: f64,
        upper: f64,
    },

    #[error("payoff is not zero-sum at level pair ({first}, {second}), node {node}")]
    NotZeroSum {
        first: usize,
        second: usize,
        node: usize,
    },

    #[error("strategy does not start after the sub-game root: {0}")]
    NotInSubgame(String),

    #[error("enumeration needs {needed} combinations, cap is {cap}")]
    EnumerationCap { needed: f64, cap: u64 },

    #[error("not a stopping time: scenario {scenario} realizes {expected} but the node marks give {found}")]
    NotAdapted {
        scenario: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid strategy: {}", format_violations(.0))]
    InvalidStrategy(Vec<Violation>),

    #[error("parse error at {locus}: {reason}")]
    Parse { locus: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
