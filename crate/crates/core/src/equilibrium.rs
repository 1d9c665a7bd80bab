//! Assembly of approximate equilibria.
//!
//! The zero-sum construction pairs the saddle point of the Dynkin game on
//! `(X, Y, Z)` with the next-anchor reaction families. The non-zero-sum
//! construction solves one Dynkin game per player, finds the first time
//! `mu_i` at which each game's value comes within `epsilon` of the player's
//! one-sided value `W^i`, and splices the saddle points of the two games
//! (started `delta` after `mu_i`) with the reaction families of both players.

use crate::dynkin::{self, check_submartingale, DynkinSolution, Orientation};
use crate::envelopes::{
    build_envelopes, check_lemma2, reaction_value, EnvelopeSet, Lemma2Report, Side,
};
use crate::error::{Error, Result};
use crate::filtration::AdaptedProcess;
use crate::payoff::{Player, StoppingGame};
use crate::stopping::{StoppingStrategy, StoppingTime, StrategyFamily};
use crate::verify::{best_response_from, nash_gap, GapReport};

/// Zero-sum tolerance for `U^2 = -U^1`.
pub const ZERO_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub epsilon: f64,
    /// `delta` in grid steps.
    pub delta_steps: usize,
}

impl SolveOptions {
    pub fn new(epsilon: f64) -> Self {
        SolveOptions {
            epsilon,
            delta_steps: 1,
        }
    }

    pub fn with_delta_steps(mut self, steps: usize) -> Self {
        self.delta_steps = steps;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Grid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.delta_steps == 0 {
            return Err(Error::Grid("delta must be a positive multiple of h".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ZeroSum,
    NonZeroSum,
}

impl Mode {
    /// Multiple of epsilon the construction is certified for.
    pub fn bound_factor(self) -> f64 {
        match self {
            Mode::ZeroSum => 5.0,
            Mode::NonZeroSum => 18.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCondition {
    pub name: &'static str,
    /// `None` when the condition is shared by both players.
    pub player: Option<Player>,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub steps: usize,
    pub delta: f64,
    pub conditions: Vec<DeltaCondition>,
}

impl DeltaReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// `r(h)` from the empirical modulus.
    pub step_modulus: f64,
    /// `r(h) < epsilon / 3`
    pub step_condition: bool,
    pub lemma2: Vec<Lemma2Report>,
    pub delta: Option<DeltaReport>,
    /// Worst submartingale violation of `v^i` before `mu_i`.
    pub submartingale: Option<[f64; 2]>,
    /// Root values of the Dynkin games that were solved.
    pub dynkin_values: Vec<f64>,
    pub gaps: GapReport,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct EquilibriumBundle {
    pub mode: Mode,
    pub rho: StoppingStrategy,
    pub tau: StoppingStrategy,
    pub mu: Option<[StoppingTime; 2]>,
    pub delta_steps: usize,
    pub epsilon: f64,
    pub h: f64,
    pub envelopes: EnvelopeSet,
    pub w: Option<[AdaptedProcess; 2]>,
    /// Value processes of the solved Dynkin games, player 1's first.
    pub v: Vec<AdaptedProcess>,
    pub diagnostics: Diagnostics,
}

impl EquilibriumBundle {
    /// Both measured gaps within the certified multiple of epsilon.
    pub fn certified(&self) -> bool {
        self.diagnostics
            .gaps
            .certifies(self.diagnostics.bound + 1e-9)
    }
}

/// `W^1_t = E_t[U^1(t, tau_h^2(t))]` and `W^2_t = E_t[U^2(rho_h^1(t), t)]`.
pub fn build_w(
    game: &StoppingGame,
    tau_h2: &StrategyFamily,
    rho_h1: &StrategyFamily,
) -> [AdaptedProcess; 2] {
    [
        reaction_value(game, Player::One, tau_h2, Side::FirstFrozen),
        reaction_value(game, Player::Two, rho_h1, Side::SecondFrozen),
    ]
}

/// First entry into `{v <= W + epsilon}`; leaves always belong to it.
pub fn hitting_mu(
    game: &StoppingGame,
    v: &AdaptedProcess,
    w: &AdaptedProcess,
    epsilon: f64,
) -> StoppingTime {
    StoppingTime::first_hit(&game.tree, 0, |n| {
        v.at(n) <= w.at(n) + epsilon + 1e-12 * (1.0 + v.at(n).abs())
    })
}

/// Realized `min(sigma + steps, N)` as a stopping time.
fn shifted(game: &StoppingGame, times: &[usize], steps: usize) -> Result<StoppingTime> {
    let big_n = game.levels();
    let t: Vec<usize> = times.iter().map(|&m| (m + steps).min(big_n)).collect();
    StoppingTime::from_scenario_times(&game.tree, 0, &t)
}

fn mean_abs_shift(game: &StoppingGame, a: &AdaptedProcess, times: &[usize], steps: usize) -> f64 {
    let tree = &game.tree;
    let big_n = tree.levels();
    tree.scenarios()
        .map(|s| {
            let m = times[s];
            let later = a.at(tree.scenario_node(s, (m + steps).min(big_n)));
            let now = a.at(tree.scenario_node(s, m));
            tree.scenario_prob(s) * (later - now).abs()
        })
        .sum()
}

/// Evaluates the `delta` conditions of the non-zero-sum construction for
/// `delta = steps * h`. Conditions are reported, never enforced.
#[allow(clippy::too_many_arguments)]
pub fn choose_delta(
    game: &StoppingGame,
    env: &EnvelopeSet,
    w: &[AdaptedProcess; 2],
    v: &[AdaptedProcess; 2],
    mu: &[StoppingTime; 2],
    epsilon: f64,
    steps: usize,
) -> DeltaReport {
    let tree = &game.tree;
    let h = tree.grid().h();
    let delta = steps as f64 * h;
    let times = [mu[0].realized_all(tree), mu[1].realized_all(tree)];
    let r_delta = game.modulus().at_steps(steps);
    let mut conditions = vec![DeltaCondition {
        name: "r(delta) < epsilon",
        player: None,
        measured: r_delta,
        threshold: epsilon,
        passed: r_delta < epsilon,
    }];
    for p in Player::BOTH {
        let i = p.index();
        let own = &times[i];
        let other = &times[1 - i];

        let dw = mean_abs_shift(game, &w[i], own, steps);
        conditions.push(DeltaCondition {
            name: "E|W(mu+delta) - W(mu)| < epsilon",
            player: Some(p),
            measured: dw,
            threshold: epsilon,
            passed: dw < epsilon,
        });

        // ([mu/h] + 1) h - mu, with mu on the grid
        let prob: f64 = tree
            .scenarios()
            .filter(|&s| {
                let m = own[s];
                (((m + 1) - m) as f64) * h < 2.0 * delta
            })
            .map(|s| tree.scenario_prob(s))
            .sum();
        let osc = game.payoff.oscillation(p);
        conditions.push(DeltaCondition {
            name: "P{([mu/h]+1)h - mu < 2 delta} < epsilon / M",
            player: Some(p),
            measured: prob,
            threshold: if osc > 0.0 {
                epsilon / osc
            } else {
                f64::INFINITY
            },
            passed: osc * prob < epsilon,
        });

        // the player's own one-sided value at the opponent's hitting time
        let band = match p {
            Player::One => env.y(p),
            Player::Two => env.x(p),
        };
        let db = mean_abs_shift(game, band, other, steps);
        conditions.push(DeltaCondition {
            name: match p {
                Player::One => "E|Y(mu_2+delta) - Y(mu_2)| < epsilon",
                Player::Two => "E|X(mu_1+delta) - X(mu_1)| < epsilon",
            },
            player: Some(p),
            measured: db,
            threshold: epsilon,
            passed: db < epsilon,
        });

        let dv = mean_abs_shift(game, &v[i], own, steps);
        conditions.push(DeltaCondition {
            name: "E|v(mu+delta) - v(mu)| < epsilon",
            player: Some(p),
            measured: dv,
            threshold: epsilon,
            passed: dv < epsilon,
        });
    }
    DeltaReport {
        steps,
        delta,
        conditions,
    }
}

fn ensure_valid(game: &StoppingGame, s: &StoppingStrategy) -> Result<()> {
    let v = s.validate(&game.tree);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidStrategy(v))
    }
}

/// Zero-sum equilibrium: Dynkin saddle point plus next-anchor reactions.
pub fn assemble_zero_sum(game: &StoppingGame, opts: SolveOptions) -> Result<EquilibriumBundle> {
    opts.check()?;
    game.payoff.check_zero_sum(&game.tree, ZERO_SUM_TOL)?;
    let tree = &game.tree;
    let env = build_envelopes(game);
    let p = Player::One;
    let sol = dynkin::solve(tree, env.x(p), env.y(p), env.z(p), Orientation::RhoSup)?;
    let (rho0, tau0) = sol.saddle(tree);
    let rho = StoppingStrategy::new(rho0, env.rho_h(p));
    let tau = StoppingStrategy::new(tau0, env.tau_h(p));
    ensure_valid(game, &rho)?;
    ensure_valid(game, &tau)?;

    let r_h = game.modulus().at_steps(1);
    let lemma2 = vec![check_lemma2(
        game,
        &env,
        p,
        &rho.reaction,
        &tau.reaction,
        opts.epsilon,
    )];
    let gaps = nash_gap(game, &rho, &tau);
    let diagnostics = Diagnostics {
        step_modulus: r_h,
        step_condition: r_h < opts.epsilon / 3.0,
        lemma2,
        delta: None,
        submartingale: None,
        dynkin_values: vec![sol.root_value()],
        gaps,
        bound: Mode::ZeroSum.bound_factor() * opts.epsilon,
    };
    Ok(EquilibriumBundle {
        mode: Mode::ZeroSum,
        rho,
        tau,
        mu: None,
        delta_steps: opts.delta_steps,
        epsilon: opts.epsilon,
        h: tree.grid().h(),
        envelopes: env,
        w: None,
        v: vec![sol.value],
        diagnostics,
    })
}

/// Both Dynkin games of the non-zero-sum construction.
pub fn solve_player_games(game: &StoppingGame, env: &EnvelopeSet) -> Result<[DynkinSolution; 2]> {
    let tree = &game.tree;
    let (p1, p2) = (Player::One, Player::Two);
    Ok([
        dynkin::solve(tree, env.x(p1), env.y(p1), env.z(p1), Orientation::RhoSup)?,
        dynkin::solve(tree, env.x(p2), env.y(p2), env.z(p2), Orientation::TauSup)?,
    ])
}

/// Non-zero-sum equilibrium spliced from the two players' Dynkin games.
#[allow(clippy::needless_range_loop)]
pub fn assemble_nonzero_sum(game: &StoppingGame, opts: SolveOptions) -> Result<EquilibriumBundle> {
    opts.check()?;
    let tree = &game.tree;
    let big_n = tree.levels();
    let eps = opts.epsilon;
    let d = opts.delta_steps;
    let (p1, p2) = (Player::One, Player::Two);

    let env = build_envelopes(game);
    let rho_h1 = env.rho_h(p1);
    let tau_h1 = env.tau_h(p1);
    let rho_h2 = env.rho_h(p2);
    let tau_h2 = env.tau_h(p2);
    let w = build_w(game, &tau_h2, &rho_h1);
    let [g1, g2] = solve_player_games(game, &env)?;

    let mu = [
        hitting_mu(game, &g1.value, &w[0], eps),
        hitting_mu(game, &g2.value, &w[1], eps),
    ];
    let m1 = mu[0].realized_all(tree);
    let m2 = mu[1].realized_all(tree);

    let start1 = shifted(game, &m1, d)?;
    let start2 = shifted(game, &m2, d)?;
    let (_, tau1_late) = g1.saddle_from(tree, &start1);
    let (rho2_late, _) = g2.saddle_from(tree, &start2);
    let t1 = tau1_late.realized_all(tree);
    let r2 = rho2_late.realized_all(tree);

    let scen = tree.scenarios();
    let rho0_times: Vec<usize> = scen
        .clone()
        .map(|s| if m1[s] <= m2[s] { m1[s] } else { r2[s] })
        .collect();
    let tau0_times: Vec<usize> = scen
        .clone()
        .map(|s| if m1[s] <= m2[s] { t1[s] } else { m2[s] })
        .collect();
    let threshold: Vec<usize> = scen
        .clone()
        .map(|s| (m1[s].min(m2[s]) + d).min(big_n))
        .collect();

    let tables = [
        rho_h1.realized_table(tree),
        rho_h2.realized_table(tree),
        tau_h1.realized_table(tree),
        tau_h2.realized_table(tree),
    ];
    let mut rho_entries = Vec::with_capacity(big_n);
    let mut tau_entries = Vec::with_capacity(big_n);
    for a in 0..big_n {
        let late = |s: usize| a >= threshold[s];
        let r: Vec<usize> = scen
            .clone()
            .map(|s| {
                if late(s) && m1[s] > m2[s] {
                    tables[1][a][s]
                } else {
                    tables[0][a][s]
                }
            })
            .collect();
        let t: Vec<usize> = scen
            .clone()
            .map(|s| {
                if late(s) && m1[s] <= m2[s] {
                    tables[2][a][s]
                } else {
                    tables[3][a][s]
                }
            })
            .collect();
        rho_entries.push(StoppingTime::from_scenario_times(tree, a + 1, &r)?);
        tau_entries.push(StoppingTime::from_scenario_times(tree, a + 1, &t)?);
    }
    let rho = StoppingStrategy::new(
        StoppingTime::from_scenario_times(tree, 0, &rho0_times)?,
        StrategyFamily::new(rho_entries),
    );
    let tau = StoppingStrategy::new(
        StoppingTime::from_scenario_times(tree, 0, &tau0_times)?,
        StrategyFamily::new(tau_entries),
    );
    ensure_valid(game, &rho)?;
    ensure_valid(game, &tau)?;

    let v = [g1.value.clone(), g2.value.clone()];
    let delta = choose_delta(game, &env, &w, &v, &mu, eps, d);
    let submartingale = [
        check_submartingale(tree, &v[0], &mu[0]),
        check_submartingale(tree, &v[1], &mu[1]),
    ];
    let r_h = game.modulus().at_steps(1);
    let lemma2 = vec![
        check_lemma2(game, &env, p1, &rho_h1, &tau_h1, eps),
        check_lemma2(game, &env, p2, &rho_h2, &tau_h2, eps),
    ];
    let gaps = nash_gap(game, &rho, &tau);
    let diagnostics = Diagnostics {
        step_modulus: r_h,
        step_condition: r_h < eps / 3.0,
        lemma2,
        delta: Some(delta),
        submartingale: Some(submartingale),
        dynkin_values: vec![g1.root_value(), g2.root_value()],
        gaps,
        bound: Mode::NonZeroSum.bound_factor() * eps,
    };
    let [v1, v2] = v;
    Ok(EquilibriumBundle {
        mode: Mode::NonZeroSum,
        rho,
        tau,
        mu: Some(mu),
        delta_steps: d,
        epsilon: eps,
        h: tree.grid().h(),
        envelopes: env,
        w: Some(w),
        v: vec![v1, v2],
        diagnostics,
    })
}

pub fn assemble(game: &StoppingGame, mode: Mode, opts: SolveOptions) -> Result<EquilibriumBundle> {
    match mode {
        Mode::ZeroSum => assemble_zero_sum(game, opts),
        Mode::NonZeroSum => assemble_nonzero_sum(game, opts),
    }
}

/// Worst excess of player 1's sub-game best response at `sigma` against
/// `(tau_sigma, tau_h)` over `v_sigma + 4 epsilon`, across the boundary of
/// `sigma`. Non-positive when the bound holds.
pub fn remark1_bound_check(game: &StoppingGame, sigma: &StoppingTime, epsilon: f64) -> Result<f64> {
    game.payoff.check_zero_sum(&game.tree, ZERO_SUM_TOL)?;
    let tree = &game.tree;
    let env = build_envelopes(game);
    let p = Player::One;
    let sol = dynkin::solve(tree, env.x(p), env.y(p), env.z(p), Orientation::RhoSup)?;
    let (_, tau_sigma) = sol.saddle_from(tree, sigma);
    let opponent = StoppingStrategy::new(tau_sigma, env.tau_h(p));
    let br = best_response_from(game, p, &opponent, Some(sigma));
    Ok(sigma
        .boundary(tree)
        .into_iter()
        .map(|n| br.node_values[n] - sol.value.at(n) - 4.0 * epsilon)
        .fold(f64::NEG_INFINITY, f64::max))
}
