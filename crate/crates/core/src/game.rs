//! Safe zero-sum two-player Markov games.
//!
//! The agent (max player) must stay out of the unsafe region whatever the
//! adversary (min player) does. A game is stored as an MDP over joint
//! actions `a · B + b`, which lets sampling, occupancy and exact evaluation be
//! shared with the single-agent code.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{config_err, Error, Result};
use crate::mdp::{episode_return, episode_violation, sample_episode, MixedPolicy, Policy, SafetySpec, TabularMdp};
use crate::metrics::{EpisodeRecord, RunMetrics};
use crate::nash::solve_matrix_game;
use crate::oracle::policy_value;
use crate::safety::{compute_supports, SafetyStructures, Supports};
use crate::stats::LearnerStats;
use crate::sucbvi::SucbviBonuses;

/// Two-player tabular game with rewards `r_h(s, a, b)` for the max player.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularGame {
    joint: TabularMdp,
    agent_actions: usize,
    adversary_actions: usize,
}

impl TabularGame {
    /// `transitions` is `[h][s][a][b][s']` and `rewards` is `[h][s][a][b]`.
    pub fn new(
        num_states: usize,
        agent_actions: usize,
        adversary_actions: usize,
        horizon: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        initial_state: usize,
    ) -> Result<Self> {
        if agent_actions == 0 || adversary_actions == 0 {
            return Err(config_err("both players need at least one action"));
        }
        let joint =
            TabularMdp::new(num_states, agent_actions * adversary_actions, horizon, transitions, rewards, initial_state)?;
        Ok(Self { joint, agent_actions, adversary_actions })
    }

    pub fn num_states(&self) -> usize {
        self.joint.num_states()
    }

    pub fn agent_actions(&self) -> usize {
        self.agent_actions
    }

    pub fn adversary_actions(&self) -> usize {
        self.adversary_actions
    }

    pub fn horizon(&self) -> usize {
        self.joint.horizon()
    }

    pub fn initial_state(&self) -> usize {
        self.joint.initial_state()
    }

    #[inline]
    pub fn joint_action(&self, a: usize, b: usize) -> usize {
        a * self.adversary_actions + b
    }

    pub fn split_action(&self, joint: usize) -> (usize, usize) {
        (joint / self.adversary_actions, joint % self.adversary_actions)
    }

    pub fn transition_row(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        self.joint.transition_row(h, s, self.joint_action(a, b))
    }

    pub fn reward(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.joint.reward(h, s, self.joint_action(a, b))
    }

    /// The game as an MDP over joint actions.
    pub fn joint_mdp(&self) -> &TabularMdp {
        &self.joint
    }
}

/// Strategies `μ_h(·|s)` and `υ_h(·|s)` of both players.
#[derive(Debug, Clone, PartialEq)]
pub struct GamePolicy {
    pub agent: MixedPolicy,
    pub adversary: MixedPolicy,
}

impl GamePolicy {
    /// Product distribution over joint actions.
    pub fn joint(&self) -> Policy {
        let (na, nb) = (self.agent.num_actions(), self.adversary.num_actions());
        let (horizon, ns) = (self.agent.horizon(), self.agent.num_states());
        let mut probs = Vec::with_capacity(horizon * ns * na * nb);
        for h in 0..horizon {
            for s in 0..ns {
                for &p in self.agent.row(h, s) {
                    probs.extend(self.adversary.row(h, s).iter().map(|q| p * q));
                }
            }
        }
        MixedPolicy::new(horizon, ns, na * nb, probs).expect("product of valid rows").into()
    }
}

/// Merges `Δ_h(s, a, b)` over `b`.
pub fn union_supports(joint: &Supports, agent_actions: usize, adversary_actions: usize) -> Supports {
    let (horizon, ns) = (joint.horizon(), joint.num_states());
    let mut merged = Supports::empty(horizon, ns, agent_actions);
    for h in 0..horizon {
        for s in 0..ns {
            for a in 0..agent_actions {
                for b in 0..adversary_actions {
                    for &next in joint.successors(h, s, a * adversary_actions + b) {
                        merged.insert(h, s, a, next);
                    }
                }
            }
        }
    }
    merged
}

/// Unsafe sets and safe agent actions of a game.
///
/// `s ∈ U_h` when every agent action has some adversary reply that can reach
/// `U_{h+1}`, and `a` is safe when no reply can. Both are the single-agent
/// recursions applied to the supports merged over the adversary's actions.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSafetyStructures {
    pub joint_supports: Supports,
    pub agent: SafetyStructures,
}

impl GameSafetyStructures {
    pub fn from_supports(joint_supports: Supports, agent_actions: usize, adversary_actions: usize, unsafe_terminal: &[bool]) -> Self {
        let merged = union_supports(&joint_supports, agent_actions, adversary_actions);
        Self { joint_supports, agent: SafetyStructures::from_supports(merged, unsafe_terminal) }
    }

    pub fn analyze(game: &TabularGame, safety: &SafetySpec) -> Result<Self> {
        safety.check_dims(game.num_states())?;
        Ok(Self::from_supports(
            compute_supports(game.joint_mdp()),
            game.agent_actions(),
            game.adversary_actions(),
            &safety.unsafe_states(),
        ))
    }

    pub fn is_unsafe(&self, h: usize, s: usize) -> bool {
        self.agent.is_unsafe(h, s)
    }

    pub fn is_safe_action(&self, h: usize, s: usize, a: usize) -> bool {
        self.agent.is_safe_action(h, s, a)
    }

    pub fn is_feasible(&self, initial_state: usize) -> bool {
        !self.is_unsafe(0, initial_state)
    }

    /// Row mask at `(h, s)`: unsafe actions are masked outside `U_h`.
    fn row_mask(&self, h: usize, s: usize, agent_actions: usize) -> Vec<bool> {
        let inside = self.is_unsafe(h, s);
        (0..agent_actions).map(|a| !inside && !self.is_safe_action(h, s, a)).collect()
    }
}

/// Values and equilibrium strategies from a backward Nash recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct GamePlan {
    num_states: usize,
    /// `[h][s]`, `h = 0..=H`.
    values: Vec<f64>,
    pub policy: GamePolicy,
}

impl GamePlan {
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.values[h * self.num_states + s]
    }

    pub fn initial_value(&self, s: usize) -> f64 {
        self.value(0, s)
    }
}

/// Backward recursion shared by the exact solver and the learner. `q_entry`
/// fills `Q_h(s, a, b)` given the next-step values.
fn nash_recursion(
    ns: usize,
    na: usize,
    nb: usize,
    horizon: usize,
    structures: &GameSafetyStructures,
    mut q_entry: impl FnMut(usize, usize, usize, usize, &[f64]) -> f64,
) -> Result<GamePlan> {
    let mut values = vec![0.0; (horizon + 1) * ns];
    let mut agent = vec![0.0; horizon * ns * na];
    let mut adversary = vec![0.0; horizon * ns * nb];
    let mut q = vec![0.0; na * nb];
    for h in (0..horizon).rev() {
        for s in 0..ns {
            {
                let next = &values[(h + 1) * ns..(h + 2) * ns];
                for a in 0..na {
                    for b in 0..nb {
                        q[a * nb + b] = q_entry(h, s, a, b, next);
                    }
                }
            }
            let mask = structures.row_mask(h, s, na);
            let sol = solve_matrix_game(&q, na, nb, Some(&mask))?;
            values[h * ns + s] = sol.value;
            agent[(h * ns + s) * na..(h * ns + s + 1) * na].copy_from_slice(&sol.row);
            adversary[(h * ns + s) * nb..(h * ns + s + 1) * nb].copy_from_slice(&sol.col);
        }
    }
    let policy = GamePolicy {
        agent: MixedPolicy::new(horizon, ns, na, agent)?,
        adversary: MixedPolicy::new(horizon, ns, nb, adversary)?,
    };
    Ok(GamePlan { num_states: ns, values, policy })
}

/// Exact safe minimax values of the true game.
pub fn exact_minimax(game: &TabularGame, safety: &SafetySpec) -> Result<GamePlan> {
    let structures = GameSafetyStructures::analyze(game, safety)?;
    if !structures.is_feasible(game.initial_state()) {
        return Err(Error::Feasibility { state: game.initial_state() });
    }
    let (ns, na, nb, horizon) = (game.num_states(), game.agent_actions(), game.adversary_actions(), game.horizon());
    nash_recursion(ns, na, nb, horizon, &structures, |h, s, a, b, next| {
        game.reward(h, s, a, b) + game.transition_row(h, s, a, b).iter().zip(next).map(|(p, v)| p * v).sum::<f64>()
    })
}

/// Adversary's exact best response to the agent's strategy: a deterministic
/// policy minimising the agent's value, returned as a mixed policy.
pub fn best_response(game: &TabularGame, agent: &MixedPolicy) -> MixedPolicy {
    let (ns, na, nb, horizon) = (game.num_states(), game.agent_actions(), game.adversary_actions(), game.horizon());
    let mut values = vec![0.0; (horizon + 1) * ns];
    let mut probs = vec![0.0; horizon * ns * nb];
    for h in (0..horizon).rev() {
        for s in 0..ns {
            let mu = agent.row(h, s);
            let next = &values[(h + 1) * ns..(h + 2) * ns];
            let mut best = (0, f64::INFINITY);
            for b in 0..nb {
                let v: f64 = (0..na)
                    .filter(|&a| mu[a] > 0.0)
                    .map(|a| {
                        let ev: f64 = game.transition_row(h, s, a, b).iter().zip(next).map(|(p, v)| p * v).sum();
                        mu[a] * (game.reward(h, s, a, b) + ev)
                    })
                    .sum();
                if v < best.1 {
                    best = (b, v);
                }
            }
            values[h * ns + s] = best.1;
            probs[(h * ns + s) * nb + best.0] = 1.0;
        }
    }
    MixedPolicy::new(horizon, ns, nb, probs).expect("one-hot rows")
}

/// Exact `V_1^{μ,υ}(s_1)`.
pub fn game_policy_value(game: &TabularGame, policy: &GamePolicy) -> f64 {
    policy_value(game.joint_mdp(), &policy.joint(), None)
}

/// How the adversary plays during learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdversaryMode {
    /// The learner's own equilibrium strategy `υ^k`.
    #[default]
    SelfPlay,
    /// Exact best response to `μ^k` on the true game.
    BestResponse,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConfig {
    pub delta: f64,
    pub episodes: usize,
    pub adversary: AdversaryMode,
}

impl GameConfig {
    pub fn new(delta: f64, episodes: usize) -> Self {
        Self { delta, episodes, adversary: AdversaryMode::default() }
    }
}

/// Optimistic Nash value iteration with safety masks learned online.
#[derive(Debug, Clone)]
pub struct SafeGameLearner {
    ns: usize,
    na: usize,
    nb: usize,
    horizon: usize,
    threshold: f64,
    rewards: Vec<f64>,
    /// `ln(5SABHK/δ)`.
    bonus_log: f64,
    cost_bonuses: SucbviBonuses,
    stats: LearnerStats,
    estimated: GameSafetyStructures,
}

impl SafeGameLearner {
    pub fn new(game: &TabularGame, threshold: f64, cfg: GameConfig) -> Result<Self> {
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) || cfg.episodes == 0 {
            return Err(config_err("need 0 < delta < 1 and a positive episode budget"));
        }
        let (ns, na, nb, horizon) = (game.num_states(), game.agent_actions(), game.adversary_actions(), game.horizon());
        let stats = LearnerStats::new(horizon, ns, na * nb);
        let estimated = GameSafetyStructures::from_supports(stats.supports().clone(), na, nb, &vec![false; ns]);
        let k = cfg.episodes as f64;
        Ok(Self {
            ns,
            na,
            nb,
            horizon,
            threshold,
            rewards: game.joint_mdp().rewards().to_vec(),
            bonus_log: libm::log(5.0 * (ns * na * nb * horizon) as f64 * k / cfg.delta),
            cost_bonuses: SucbviBonuses::new(ns, na * nb, horizon, cfg.episodes, cfg.delta),
            stats,
            estimated,
        })
    }

    /// `7H sqrt(ln(5SABHK/δ) / n)`; `H` at `n = 0`.
    pub fn bonus(&self, n: u64) -> f64 {
        let h = self.horizon as f64;
        if n == 0 {
            return h;
        }
        7.0 * h * libm::sqrt(self.bonus_log / n as f64)
    }

    pub fn stats(&self) -> &LearnerStats {
        &self.stats
    }

    pub fn estimated(&self) -> &GameSafetyStructures {
        &self.estimated
    }

    /// Refreshes the unsafe-set estimates and solves the optimistic game.
    pub fn plan(&mut self) -> Result<GamePlan> {
        let b = self.cost_bonuses;
        let terminal = self.stats.estimated_unsafe(self.threshold, |n| b.beta(n));
        self.estimated = GameSafetyStructures::from_supports(self.stats.supports().clone(), self.na, self.nb, &terminal);
        let cap = self.horizon as f64;
        let (ns, na, nb) = (self.ns, self.na, self.nb);
        let this = &*self;
        nash_recursion(ns, na, nb, self.horizon, &self.estimated, |h, s, a, b, next| {
            let j = a * nb + b;
            let n = this.stats.visits(h, s, j);
            if n == 0 {
                return cap;
            }
            let r = this.rewards[(h * ns + s) * na * nb + j];
            (r + this.stats.expected_next(h, s, j, next) + this.bonus(n)).min(cap)
        })
    }

    pub fn observe_step(&mut self, h: usize, s: usize, joint: usize, cost_signal: f64, next: usize) -> bool {
        self.stats.observe(h, s, joint, cost_signal, next)
    }
}

/// Runs the safe game learner against the chosen adversary and logs regret
/// against the exact safe minimax value.
pub fn game_run<R: Rng + ?Sized>(game: &TabularGame, safety: &SafetySpec, cfg: GameConfig, rng: &mut R) -> Result<RunMetrics> {
    game_run_observed(game, safety, cfg, rng, |_, _, _| {})
}

/// [`game_run`] with a hook that sees the learner, its plan and the record of
/// each episode.
pub fn game_run_observed<R, F>(
    game: &TabularGame,
    safety: &SafetySpec,
    cfg: GameConfig,
    rng: &mut R,
    mut hook: F,
) -> Result<RunMetrics>
where
    R: Rng + ?Sized,
    F: FnMut(&SafeGameLearner, &GamePlan, &EpisodeRecord),
{
    let reference = exact_minimax(game, safety)?.initial_value(game.initial_state());
    let mut learner = SafeGameLearner::new(game, safety.threshold(), cfg)?;
    let mut metrics = RunMetrics::new(reference);
    let (horizon, ns, nb) = (game.horizon(), game.num_states(), game.adversary_actions());
    let uniform = MixedPolicy::uniform(horizon, ns, nb);
    for _ in 0..cfg.episodes {
        let plan = learner.plan()?;
        let adversary = match cfg.adversary {
            AdversaryMode::SelfPlay => plan.policy.adversary.clone(),
            AdversaryMode::BestResponse => best_response(game, &plan.policy.agent),
            AdversaryMode::Uniform => uniform.clone(),
        };
        let played = GamePolicy { agent: plan.policy.agent.clone(), adversary };
        let joint = played.joint();
        let traj = sample_episode(game.joint_mdp(), safety, &joint, rng)?;
        let mut novel = false;
        for st in &traj.steps {
            novel |= learner.observe_step(st.step, st.state, st.action, st.cost_signal, st.next_state);
        }
        let value = policy_value(game.joint_mdp(), &joint, None);
        let record = *metrics.push(episode_return(&traj), value, episode_violation(&traj, safety), novel);
        hook(&learner, &plan, &record);
    }
    Ok(metrics)
}

/// A four-state game where the adversary can push the agent into a hazard.
///
/// From the start, agent action 0 leads to a rewarding ledge unless the
/// adversary plays 1, which diverts to a plaza. On the ledge agent action 0
/// pays 1 but the adversary's action 1 throws the agent into the hazard;
/// agent action 1 retreats to the plaza. The plaza is absorbing and pays a
/// matching-pennies reward. `H = 3`, threshold 1/2, noiseless costs.
pub fn ledge_game() -> Result<(TabularGame, SafetySpec)> {
    const START: usize = 0;
    const LEDGE: usize = 1;
    const PLAZA: usize = 2;
    const HAZARD: usize = 3;
    let (ns, na, nb, horizon) = (4, 2, 2, 3);
    let mut p = vec![0.0; horizon * ns * na * nb * ns];
    let mut r = vec![0.0; horizon * ns * na * nb];
    for h in 0..horizon {
        for s in 0..ns {
            for a in 0..na {
                for b in 0..nb {
                    let j = ((h * ns + s) * na + a) * nb + b;
                    let next = match (s, a, b) {
                        (START, 0, 0) => LEDGE,
                        (START, _, _) => PLAZA,
                        (LEDGE, 0, 0) => LEDGE,
                        (LEDGE, 0, _) => HAZARD,
                        (LEDGE, _, _) => PLAZA,
                        _ => s,
                    };
                    p[j * ns + next] = 1.0;
                    r[j] = match s {
                        LEDGE if a == 0 => 1.0,
                        PLAZA if a == b => 1.0,
                        _ => 0.0,
                    };
                }
            }
        }
    }
    let game = TabularGame::new(ns, na, nb, horizon, p, r, START)?;
    let safety = SafetySpec::new(vec![0.0, 0.0, 0.0, 1.0], 0.5, crate::mdp::NoiseModel::None)?;
    Ok((game, safety))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nash::best_response_gap;
    use crate::safety::safe_optimal_plan;
    use crate::sucbvi::{Sucbvi, SucbviConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ledge_structures() {
        let (game, safety) = ledge_game().unwrap();
        let st = GameSafetyStructures::analyze(&game, &safety).unwrap();
        // on the ledge, action 0 is unsafe against reply 1
        for h in 0..2 {
            assert!(!st.is_safe_action(h, 1, 0));
            assert!(st.is_safe_action(h, 1, 1));
            assert!(!st.is_unsafe(h, 1));
        }
        assert!(st.is_feasible(0));
        let plan = exact_minimax(&game, &safety).unwrap();
        // plaza pays 1/2 per step under mixing; the ledge is only worth its
        // retreat, so the start is worth 0 + 2 * 1/2
        assert!((plan.initial_value(0) - 1.0).abs() < 1e-12);
        assert!((plan.value(2, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adversarial_reach_makes_state_unsafe() {
        // one action, two replies; reply 1 reaches the unsafe state
        let (ns, na, nb, horizon) = (2, 1, 2, 2);
        let mut p = vec![0.0; horizon * ns * na * nb * ns];
        for h in 0..horizon {
            for s in 0..ns {
                for b in 0..nb {
                    let j = ((h * ns + s) * na) * nb + b;
                    let next = if s == 0 && b == 1 { 1 } else { s };
                    p[j * ns + next] = 1.0;
                }
            }
        }
        let game = TabularGame::new(ns, na, nb, horizon, p, vec![0.0; horizon * ns * na * nb], 0).unwrap();
        let safety = SafetySpec::new(vec![0.0, 1.0], 0.5, crate::mdp::NoiseModel::None).unwrap();
        let st = GameSafetyStructures::analyze(&game, &safety).unwrap();
        assert!(st.is_unsafe(0, 0));
        assert!(matches!(exact_minimax(&game, &safety), Err(Error::Feasibility { .. })));
        assert!(matches!(
            game_run(&game, &safety, GameConfig::new(0.1, 1), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::Feasibility { .. })
        ));
    }

    #[test]
    fn fresh_learner_is_unmasked_and_saturated() {
        let (game, safety) = ledge_game().unwrap();
        let mut learner = SafeGameLearner::new(&game, safety.threshold(), GameConfig::new(0.1, 1)).unwrap();
        let plan = learner.plan().unwrap();
        for h in 0..3 {
            for s in 0..4 {
                assert_eq!(plan.value(h, s), 3.0);
            }
        }
    }

    #[test]
    fn single_reply_game_matches_the_mdp_learner() {
        // B = 1: the game learner's values equal SUCBVI's on the same data
        let (mdp, safety) = crate::env::GridLayout::default_5x5().build().unwrap();
        let game = TabularGame::new(
            mdp.num_states(),
            mdp.num_actions(),
            1,
            mdp.horizon(),
            mdp.transitions().to_vec(),
            mdp.rewards().to_vec(),
            mdp.initial_state(),
        )
        .unwrap();
        let k = 50;
        let mut cfg = SucbviConfig::new(0.1, k);
        cfg.tie_break = crate::stats::TieBreak::LowestIndex;
        let mut agent = Sucbvi::new(&mdp, 0.5, cfg).unwrap();
        let mut learner = SafeGameLearner::new(&game, 0.5, GameConfig::new(0.1, k)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..k {
            let policy: Policy = agent.begin_episode().clone().into();
            let plan = learner.plan().unwrap();
            for h in 0..mdp.horizon() {
                for s in 0..mdp.num_states() {
                    assert!((plan.value(h, s) - agent.value(h, s)).abs() < 1e-9, "h = {h}, s = {s}");
                }
            }
            let traj = sample_episode(&mdp, &safety, &policy, &mut rng).unwrap();
            for st in &traj.steps {
                agent.observe_step(st.step, st.state, st.action, st.cost_signal, st.next_state);
                learner.observe_step(st.step, st.state, st.action, st.cost_signal, st.next_state);
            }
        }
    }

    #[test]
    fn single_reply_minimax_is_safe_optimum() {
        let (mdp, safety) = crate::env::GridLayout::default_5x5().build().unwrap();
        let game = TabularGame::new(25, 4, 1, 10, mdp.transitions().to_vec(), mdp.rewards().to_vec(), mdp.initial_state()).unwrap();
        let truth = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let expected = safe_optimal_plan(&mdp, &truth, None).unwrap().initial_value(mdp.initial_state());
        assert!((exact_minimax(&game, &safety).unwrap().initial_value(mdp.initial_state()) - expected).abs() < 1e-9);
    }

    #[test]
    fn minimax_strategies_are_stagewise_equilibria() {
        let (game, safety) = ledge_game().unwrap();
        let plan = exact_minimax(&game, &safety).unwrap();
        let br = best_response(&game, &plan.policy.agent);
        let v_br = game_policy_value(&game, &GamePolicy { agent: plan.policy.agent.clone(), adversary: br });
        assert!((v_br - plan.initial_value(0)).abs() < 1e-9);
        // stage games at the plaza are matching pennies
        let q = [1.0 + 0.5, 0.5, 0.5, 1.0 + 0.5];
        let sol = solve_matrix_game(&q, 2, 2, None).unwrap();
        assert!(best_response_gap(&q, None, &sol) < 1e-12);
        for (x, y) in plan.policy.agent.row(1, 2).iter().zip(&sol.row) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn self_play_learns_the_safe_value() {
        let (game, safety) = ledge_game().unwrap();
        // the bonus only drops below the value gaps after a few hundred
        // thousand visits per pair
        let k = 300_000;
        let metrics = game_run(&game, &safety, GameConfig::new(0.1, k), &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert!((metrics.reference_value - 1.0).abs() < 1e-12);
        let tail: f64 = metrics.episodes[k - 500..].iter().map(|r| r.policy_value).sum::<f64>() / 500.0;
        assert!((tail - 1.0).abs() <= 0.05, "tail value {tail}");
        // the hazard is found once and then avoided
        assert_eq!(metrics.violation_between(k / 2, k), 0.0);
        let budget = 4 * 4 * 2 * 2 * 3;
        assert!(metrics.novel_successor_episodes() <= budget);
    }

    #[test]
    fn best_response_and_uniform_adversaries_run() {
        let (game, safety) = ledge_game().unwrap();
        for mode in [AdversaryMode::BestResponse, AdversaryMode::Uniform] {
            let cfg = GameConfig { adversary: mode, ..GameConfig::new(0.1, 200) };
            let a = game_run(&game, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            let b = game_run(&game, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 200);
        }
    }
}
