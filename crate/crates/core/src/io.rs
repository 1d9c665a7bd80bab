//! The `stopgame/v1` JSON documents.
//!
//! Three kinds share the schema tag: `instance` (tree plus payoffs),
//! `strategies` (a strategy pair) and `result` (a solved bundle, which embeds
//! a strategy pair so it can be handed to the verifier directly). A fourth
//! kind, `verification`, is written by the verifier. Node ids are the
//! level-major ids of [`FilteredTree`]. The canonical form of a document is
//! whatever [`to_canonical_string`] produces; loading and saving it again is
//! byte-exact.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{EquilibriumBundle, Mode};
use crate::error::{Error, Result};
use crate::filtration::{AdaptedProcess, FilteredTree, GridSpec};
use crate::payoff::{PayoffField, Player, StoppingGame};
use crate::stopping::{StoppingStrategy, StoppingTime, StrategyFamily};
use crate::verify::{GapReport, Method};

pub const SCHEMA: &str = "stopgame/v1";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_sum: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub game: StoppingGame,
    pub metadata: Option<Metadata>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDoc {
    pub h: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    pub level: usize,
    pub parent: Option<usize>,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeDoc {
    pub nodes: Vec<NodeDoc>,
}

/// `player[j][k]` lists the values at the level `max(j, k)` nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PayoffDoc {
    pub player1: Vec<Vec<Vec<f64>>>,
    pub player2: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub schema: String,
    pub kind: String,
    pub grid: GridDoc,
    pub tree: TreeDoc,
    pub payoffs: PayoffDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

/// A stopping time as its floor and the sorted ids of its marked nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDoc {
    pub floor: usize,
    pub stop: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDoc {
    pub first: TimeDoc,
    /// Entry `k` answers an opponent stop at level `k`.
    pub reaction: Vec<TimeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyPairDoc {
    pub rho: StrategyDoc,
    pub tau: StrategyDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategiesDoc {
    pub schema: String,
    pub kind: String,
    pub strategies: StrategyPairDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapDoc {
    pub method: String,
    pub values: [f64; 2],
    pub best: [f64; 2],
    pub gaps: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaConditionDoc {
    pub name: String,
    pub player: Option<usize>,
    pub measured: f64,
    /// `None` when the threshold is unbounded.
    pub threshold: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma2Doc {
    pub player: usize,
    pub slack_x: f64,
    pub slack_y: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessesDoc {
    pub x: [Vec<f64>; 2],
    pub y: [Vec<f64>; 2],
    pub z: [Vec<f64>; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<[Vec<f64>; 2]>,
    pub v: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub step_modulus: f64,
    pub step_condition: bool,
    pub lemma2: Vec<Lemma2Doc>,
    pub delta_conditions: Vec<DeltaConditionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submartingale: Option<[f64; 2]>,
    pub dynkin_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDoc {
    pub schema: String,
    pub kind: String,
    pub mode: String,
    pub epsilon: f64,
    pub h: f64,
    pub delta_steps: usize,
    pub delta: f64,
    pub strategies: StrategyPairDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<[TimeDoc; 2]>,
    pub processes: ProcessesDoc,
    pub gaps: GapDoc,
    pub bound: f64,
    pub certified: bool,
    pub diagnostics: DiagnosticsDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationDoc {
    pub schema: String,
    pub kind: String,
    pub epsilon: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<GapDoc>,
    pub violations: Vec<String>,
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::ZeroSum => "zero-sum",
        Mode::NonZeroSum => "nonzero-sum",
    }
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "zero-sum" => Ok(Mode::ZeroSum),
        "nonzero-sum" => Ok(Mode::NonZeroSum),
        other => Err(Error::Parse {
            locus: "mode".into(),
            reason: format!("unknown mode `{other}`, expected zero-sum or nonzero-sum"),
        }),
    }
}

pub fn to_canonical_string<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn parse_doc<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        locus: format!("line {} column {}", e.line(), e.column()),
        reason: e.to_string(),
    })
}

fn check_header(schema: &str, kind: &str, expected: &[&str]) -> Result<()> {
    if schema != SCHEMA {
        return Err(Error::Parse {
            locus: "schema".into(),
            reason: format!("expected `{SCHEMA}`, found `{schema}`"),
        });
    }
    if !expected.contains(&kind) {
        return Err(Error::Parse {
            locus: "kind".into(),
            reason: format!("expected one of {expected:?}, found `{kind}`"),
        });
    }
    Ok(())
}

pub fn instance_to_doc(game: &StoppingGame, metadata: Option<&Metadata>) -> InstanceDoc {
    let tree = &game.tree;
    let side = tree.levels() + 1;
    let nodes = (0..tree.node_count())
        .map(|n| NodeDoc {
            id: n,
            level: tree.level(n),
            parent: tree.parent(n),
            prob: tree.edge_prob(n),
        })
        .collect();
    let nest = |flat: &Vec<Vec<f64>>| -> Vec<Vec<Vec<f64>>> {
        (0..side)
            .map(|j| (0..side).map(|k| flat[j * side + k].clone()).collect())
            .collect()
    };
    let raw = game.payoff.raw();
    InstanceDoc {
        schema: SCHEMA.into(),
        kind: "instance".into(),
        grid: GridDoc {
            h: tree.grid().h(),
            levels: tree.levels(),
        },
        tree: TreeDoc { nodes },
        payoffs: PayoffDoc {
            player1: nest(&raw[0]),
            player2: nest(&raw[1]),
        },
        metadata: metadata.cloned(),
    }
}

pub fn instance_from_doc(doc: InstanceDoc) -> Result<Instance> {
    check_header(&doc.schema, &doc.kind, &["instance"])?;
    let grid = GridSpec::new(doc.grid.h, doc.grid.levels)?;
    let mut parents = Vec::with_capacity(doc.tree.nodes.len());
    let mut probs = Vec::with_capacity(doc.tree.nodes.len());
    for (i, node) in doc.tree.nodes.iter().enumerate() {
        if node.id != i {
            return Err(Error::Parse {
                locus: format!("tree.nodes[{i}].id"),
                reason: format!("expected id {i}, found {}", node.id),
            });
        }
        parents.push(node.parent);
        probs.push(node.prob);
    }
    let tree = FilteredTree::new(grid, parents, probs)?;
    for (i, node) in doc.tree.nodes.iter().enumerate() {
        if node.level != tree.level(i) {
            return Err(Error::Tree {
                node: i,
                reason: format!(
                    "declared level {} but parent links give {}",
                    node.level,
                    tree.level(i)
                ),
            });
        }
    }
    let side = tree.levels() + 1;
    let flatten = |name: &str, nested: Vec<Vec<Vec<f64>>>| -> Result<Vec<Vec<f64>>> {
        if nested.len() != side || nested.iter().any(|row| row.len() != side) {
            return Err(Error::Shape(format!(
                "payoffs.{name} must be a {side} x {side} table"
            )));
        }
        Ok(nested.into_iter().flatten().collect())
    };
    let first = flatten("player1", doc.payoffs.player1)?;
    let second = flatten("player2", doc.payoffs.player2)?;
    let payoff = PayoffField::from_values(&tree, [first, second])?;
    Ok(Instance {
        game: StoppingGame::new(tree, payoff)?,
        metadata: doc.metadata,
    })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    instance_from_doc(parse_doc(text)?)
}

pub fn instance_to_string(game: &StoppingGame, metadata: Option<&Metadata>) -> String {
    to_canonical_string(&instance_to_doc(game, metadata))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn save_instance(path: &Path, game: &StoppingGame, metadata: Option<&Metadata>) -> Result<()> {
    fs::write(path, instance_to_string(game, metadata))?;
    Ok(())
}

pub fn time_to_doc(time: &StoppingTime) -> TimeDoc {
    TimeDoc {
        floor: time.floor(),
        stop: time
            .marks()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(n, _)| n)
            .collect(),
    }
}

pub fn time_from_doc(tree: &FilteredTree, doc: &TimeDoc, locus: &str) -> Result<StoppingTime> {
    let mut marks = vec![false; tree.node_count()];
    for &n in &doc.stop {
        if n >= tree.node_count() {
            return Err(Error::Parse {
                locus: locus.into(),
                reason: format!("node {n} does not exist"),
            });
        }
        marks[n] = true;
    }
    Ok(StoppingTime::from_marks(doc.floor, marks))
}

pub fn strategy_to_doc(s: &StoppingStrategy) -> StrategyDoc {
    StrategyDoc {
        first: time_to_doc(&s.first),
        reaction: s.reaction.entries().iter().map(time_to_doc).collect(),
    }
}

pub fn strategy_from_doc(
    tree: &FilteredTree,
    doc: &StrategyDoc,
    name: &str,
) -> Result<StoppingStrategy> {
    let first = time_from_doc(tree, &doc.first, &format!("{name}.first"))?;
    let entries = doc
        .reaction
        .iter()
        .enumerate()
        .map(|(k, t)| time_from_doc(tree, t, &format!("{name}.reaction[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(StoppingStrategy::new(first, StrategyFamily::new(entries)))
}

pub fn pair_to_doc(rho: &StoppingStrategy, tau: &StoppingStrategy) -> StrategyPairDoc {
    StrategyPairDoc {
        rho: strategy_to_doc(rho),
        tau: strategy_to_doc(tau),
    }
}

/// Decodes a strategy pair and runs the full validation. Invalid strategies
/// come back as [`Error::InvalidStrategy`] listing every violation.
pub fn pair_from_doc(
    tree: &FilteredTree,
    doc: &StrategyPairDoc,
) -> Result<(StoppingStrategy, StoppingStrategy)> {
    let rho = strategy_from_doc(tree, &doc.rho, "rho")?;
    let tau = strategy_from_doc(tree, &doc.tau, "tau")?;
    let mut violations = rho.validate_as(tree, "rho");
    violations.extend(tau.validate_as(tree, "tau"));
    if violations.is_empty() {
        Ok((rho, tau))
    } else {
        Err(Error::InvalidStrategy(violations))
    }
}

pub fn strategies_to_string(rho: &StoppingStrategy, tau: &StoppingStrategy) -> String {
    to_canonical_string(&StrategiesDoc {
        schema: SCHEMA.into(),
        kind: "strategies".into(),
        strategies: pair_to_doc(rho, tau),
    })
}

#[derive(Deserialize)]
struct AnyStrategies {
    schema: String,
    kind: String,
    strategies: StrategyPairDoc,
}

/// Reads the strategy pair out of a `strategies` or `result` document.
pub fn parse_strategies(
    tree: &FilteredTree,
    text: &str,
) -> Result<(StoppingStrategy, StoppingStrategy)> {
    let doc: AnyStrategies = parse_doc(text)?;
    check_header(&doc.schema, &doc.kind, &["strategies", "result"])?;
    pair_from_doc(tree, &doc.strategies)
}

pub fn load_strategies(
    tree: &FilteredTree,
    path: &Path,
) -> Result<(StoppingStrategy, StoppingStrategy)> {
    parse_strategies(tree, &fs::read_to_string(path)?)
}

pub fn gap_to_doc(g: &GapReport) -> GapDoc {
    GapDoc {
        method: match g.method {
            Method::Dp => "dynamic-programming".into(),
            Method::Enumeration => "enumeration".into(),
        },
        values: g.values,
        best: g.best,
        gaps: g.gaps,
    }
}

fn pair_values(p: &[AdaptedProcess; 2]) -> [Vec<f64>; 2] {
    [p[0].values.clone(), p[1].values.clone()]
}

pub fn result_to_doc(bundle: &EquilibriumBundle) -> ResultDoc {
    let d = &bundle.diagnostics;
    let env = &bundle.envelopes;
    let delta_conditions = d
        .delta
        .as_ref()
        .map(|rep| {
            rep.conditions
                .iter()
                .map(|c| DeltaConditionDoc {
                    name: c.name.into(),
                    player: c.player.map(Player::number),
                    measured: c.measured,
                    threshold: c.threshold.is_finite().then_some(c.threshold),
                    passed: c.passed,
                })
                .collect()
        })
        .unwrap_or_default();
    let lemma2 = d
        .lemma2
        .iter()
        .enumerate()
        .map(|(i, r)| Lemma2Doc {
            player: i + 1,
            slack_x: r.slack_x,
            slack_y: r.slack_y,
            passed: r.passed(),
        })
        .collect();
    ResultDoc {
        schema: SCHEMA.into(),
        kind: "result".into(),
        mode: mode_name(bundle.mode).into(),
        epsilon: bundle.epsilon,
        h: bundle.h,
        delta_steps: bundle.delta_steps,
        delta: bundle.delta_steps as f64 * bundle.h,
        strategies: pair_to_doc(&bundle.rho, &bundle.tau),
        mu: bundle
            .mu
            .as_ref()
            .map(|m| [time_to_doc(&m[0]), time_to_doc(&m[1])]),
        processes: ProcessesDoc {
            x: pair_values(&env.x),
            y: pair_values(&env.y),
            z: pair_values(&env.z),
            w: bundle.w.as_ref().map(pair_values),
            v: bundle.v.iter().map(|p| p.values.clone()).collect(),
        },
        gaps: gap_to_doc(&d.gaps),
        bound: d.bound,
        certified: bundle.certified(),
        diagnostics: DiagnosticsDoc {
            step_modulus: d.step_modulus,
            step_condition: d.step_condition,
            lemma2,
            delta_conditions,
            submartingale: d.submartingale,
            dynkin_values: d.dynkin_values.clone(),
        },
    }
}

pub fn parse_result(text: &str) -> Result<ResultDoc> {
    let doc: ResultDoc = parse_doc(text)?;
    check_header(&doc.schema, &doc.kind, &["result"])?;
    Ok(doc)
}
