//! Reward-free exploration under step-wise safety constraints.
//!
//! The explorer rolls out the policy that is greedy with respect to an
//! uncertainty table `W̄`, restricted to the estimated safe actions, until
//! `W̄_1(s_1, π_1(s_1)) ≤ ε/2`. It then hands back the empirical model, the
//! observed supports and the estimated unsafe set, from which a near-optimal
//! safe policy can be planned for any reward.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{config_err, Error, Result};
use crate::mdp::{episode_return, episode_violation, sample_episode, DeterministicPolicy, Policy, SafetySpec, TabularMdp};
use crate::metrics::{RfeCheckpoint, RunMetrics};
use crate::oracle::{expected_violation, policy_value};
use crate::safety::{check_feasibility, safe_optimal_plan, unconstrained_plan, Plan, SafetyStructures, Supports};
use crate::stats::{select_action, LearnerStats, TieBreak};
use crate::sucbvi::SucbviBonuses;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfeConfig {
    /// Target accuracy ε.
    pub epsilon: f64,
    pub delta: f64,
    /// Hard limit on the number of episodes; [`default_episode_cap`] when
    /// unset.
    pub episode_cap: Option<usize>,
    /// `false` gives the unconstrained explorer: no safe-action masks, no
    /// `SHγ/n` term and no unsafe-set estimate.
    pub safe: bool,
    pub tie_break: TieBreak,
    /// Evaluate the output policy every this many episodes.
    pub checkpoint_every: Option<usize>,
}

impl RfeConfig {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self { epsilon, delta, episode_cap: None, safe: true, tie_break: TieBreak::default(), checkpoint_every: None }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.episode_cap = Some(cap);
        self
    }

    pub fn unconstrained(mut self) -> Self {
        self.safe = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(config_err("epsilon must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err("delta must lie in (0, 1)"));
        }
        if self.episode_cap == Some(0) || self.checkpoint_every == Some(0) {
            return Err(config_err("episode cap and checkpoint interval must be positive"));
        }
        Ok(())
    }
}

/// Ten times `(S²AH²/ε + H⁴SA/ε²)(ln(1/δ) + S)`, saturating at `usize::MAX`.
pub fn default_episode_cap(num_states: usize, num_actions: usize, horizon: usize, epsilon: f64, delta: f64) -> usize {
    let (s, a, h) = (num_states as f64, num_actions as f64, horizon as f64);
    let bound = (s * s * a * h * h / epsilon + h * h * h * h * s * a / (epsilon * epsilon)) * (libm::log(1.0 / delta) + s);
    let cap = libm::ceil(10.0 * bound);
    if cap >= usize::MAX as f64 {
        usize::MAX
    } else {
        cap as usize
    }
}

/// Exploration bonuses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfeBonuses {
    num_states: usize,
    horizon: f64,
    /// `ln(2SAH/δ)`.
    log_term: f64,
    /// Adds `SHγ(n)/n` to the bonus.
    safety_term: bool,
}

impl RfeBonuses {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize, delta: f64, safety_term: bool) -> Self {
        let log_term = libm::log(2.0 * (num_states * num_actions * horizon) as f64 / delta);
        Self { num_states, horizon: horizon as f64, log_term, safety_term }
    }

    /// `γ(n) = 2(ln(2SAH/δ) + (S-1) ln(e(1 + n/(S-1))))`, and
    /// `2 ln(2SAH/δ)` for a single state.
    pub fn gamma(&self, n: u64) -> f64 {
        if self.num_states == 1 {
            return 2.0 * self.log_term;
        }
        let s1 = (self.num_states - 1) as f64;
        2.0 * (self.log_term + s1 * (1.0 + libm::log1p(n as f64 / s1)))
    }

    /// `2H sqrt(2γ(n)/n) + SHγ(n)/n`, without the second term for the
    /// unconstrained explorer; `+∞` at `n = 0`.
    pub fn bonus(&self, n: u64) -> f64 {
        if n == 0 {
            return f64::INFINITY;
        }
        let (g, nf) = (self.gamma(n), n as f64);
        let base = 2.0 * self.horizon * libm::sqrt(2.0 * g / nf);
        if self.safety_term {
            base + self.num_states as f64 * self.horizon * g / nf
        } else {
            base
        }
    }
}

/// What the explorer hands back: enough to plan for any reward.
#[derive(Debug, Clone, PartialEq)]
pub struct RfeOutput {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub initial_state: usize,
    /// Empirical `P̂`, laid out like `TabularMdp::transitions`; unvisited
    /// pairs are uniform.
    pub transitions: Vec<f64>,
    pub supports: Supports,
    /// Estimated `U_H`; empty for the unconstrained explorer.
    pub unsafe_terminal: Vec<bool>,
    pub episodes: usize,
    /// Whether the stopping rule fired before the cap.
    pub converged: bool,
}

impl RfeOutput {
    /// `P̂` as an MDP carrying `reward`.
    pub fn empirical_mdp(&self, reward: &[f64]) -> Result<TabularMdp> {
        TabularMdp::new(
            self.num_states,
            self.num_actions,
            self.horizon,
            self.transitions.clone(),
            reward.to_vec(),
            self.initial_state,
        )
    }

    pub fn estimated_structures(&self) -> SafetyStructures {
        SafetyStructures::from_supports(self.supports.clone(), &self.unsafe_terminal)
    }
}

/// Safe-optimal plan on the estimates for `reward`.
pub fn plan_from_output(out: &RfeOutput, reward: &[f64]) -> Result<Plan> {
    if out.unsafe_terminal.len() != out.num_states {
        return Err(config_err("unsafe set does not match the state count"));
    }
    let mdp = out.empirical_mdp(reward)?;
    safe_optimal_plan(&mdp, &out.estimated_structures(), None)
}

/// Explorer state between episodes.
#[derive(Debug, Clone)]
pub struct RfeExplorer {
    cfg: RfeConfig,
    cap: usize,
    bonuses: RfeBonuses,
    cost_bonuses: SucbviBonuses,
    threshold: f64,
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    initial_state: usize,
    stats: LearnerStats,
    estimated: SafetyStructures,
    /// `[h][s][a]`.
    uncertainty: Vec<f64>,
    policy: DeterministicPolicy,
    episodes: usize,
}

impl RfeExplorer {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize, initial_state: usize, threshold: f64, cfg: RfeConfig) -> Result<Self> {
        cfg.validate()?;
        if num_states == 0 || num_actions == 0 || horizon == 0 || initial_state >= num_states {
            return Err(config_err("invalid explorer dimensions"));
        }
        let cap = cfg
            .episode_cap
            .unwrap_or_else(|| default_episode_cap(num_states, num_actions, horizon, cfg.epsilon, cfg.delta));
        let stats = LearnerStats::new(horizon, num_states, num_actions);
        let estimated = SafetyStructures::from_supports(stats.supports().clone(), &vec![false; num_states]);
        let mut explorer = Self {
            cfg,
            cap,
            bonuses: RfeBonuses::new(num_states, num_actions, horizon, cfg.delta, cfg.safe),
            cost_bonuses: SucbviBonuses::new(num_states, num_actions, horizon, cap, cfg.delta),
            threshold,
            num_states,
            num_actions,
            horizon,
            initial_state,
            stats,
            estimated,
            uncertainty: vec![horizon as f64; horizon * num_states * num_actions],
            policy: DeterministicPolicy::constant(horizon, num_states, 0),
            episodes: 0,
        };
        explorer.refresh();
        Ok(explorer)
    }

    pub fn episode_cap(&self) -> usize {
        self.cap
    }

    pub fn bonuses(&self) -> &RfeBonuses {
        &self.bonuses
    }

    pub fn stats(&self) -> &LearnerStats {
        &self.stats
    }

    pub fn estimated(&self) -> &SafetyStructures {
        &self.estimated
    }

    pub fn policy(&self) -> &DeterministicPolicy {
        &self.policy
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    #[inline]
    pub fn uncertainty(&self, h: usize, s: usize, a: usize) -> f64 {
        self.uncertainty[(h * self.num_states + s) * self.num_actions + a]
    }

    /// `W̄_1(s_1, π_1(s_1))`.
    pub fn stopping_value(&self) -> f64 {
        self.uncertainty(0, self.initial_state, self.policy.action(0, self.initial_state))
    }

    pub fn should_stop(&self) -> bool {
        self.stopping_value() <= self.cfg.epsilon / 2.0
    }

    fn unsafe_terminal(&self) -> Vec<bool> {
        if self.cfg.safe {
            let b = self.cost_bonuses;
            self.stats.estimated_unsafe(self.threshold, |n| b.beta(n))
        } else {
            vec![false; self.num_states]
        }
    }

    /// Recomputes the safety estimates, `W̄` and the greedy policy.
    pub fn refresh(&mut self) {
        let (ns, na, horizon) = (self.num_states, self.num_actions, self.horizon);
        self.estimated = SafetyStructures::from_supports(self.stats.supports().clone(), &self.unsafe_terminal());
        let cap = horizon as f64;
        let mut safe_max = vec![0.0; ns];
        let mut any_max = vec![0.0; ns];
        for h in (0..horizon).rev() {
            if h + 1 < horizon {
                for sp in 0..ns {
                    let row = &self.uncertainty[((h + 1) * ns + sp) * na..((h + 1) * ns + sp + 1) * na];
                    any_max[sp] = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    safe_max[sp] = (0..na)
                        .filter(|&b| self.estimated.is_safe_action(h + 1, sp, b))
                        .map(|b| row[b])
                        .fold(f64::NEG_INFINITY, f64::max);
                    if safe_max[sp] == f64::NEG_INFINITY {
                        safe_max[sp] = any_max[sp];
                    }
                }
            }
            for s in 0..ns {
                for a in 0..na {
                    let n = self.stats.visits(h, s, a);
                    let idx = (h * ns + s) * na + a;
                    self.uncertainty[idx] = if n == 0 {
                        cap
                    } else {
                        let restricted =
                            self.cfg.safe && !self.estimated.is_unsafe(h, s) && self.estimated.is_safe_action(h, s, a);
                        let next = if restricted { &safe_max } else { &any_max };
                        let propagated = self.stats.expected_next(h, s, a, next);
                        (self.bonuses.bonus(n) + propagated).min(cap)
                    };
                }
                let row = &self.uncertainty[(h * ns + s) * na..(h * ns + s + 1) * na];
                let est = &self.estimated;
                let stats = &self.stats;
                let visits = |a: usize| stats.visits(h, s, a);
                let safe_choice = if self.cfg.safe {
                    select_action(row, |a| est.is_safe_action(h, s, a), visits, self.cfg.tie_break)
                } else {
                    None
                };
                let (a, _) = safe_choice
                    .or_else(|| select_action(row, |_| true, visits, self.cfg.tie_break))
                    .expect("at least one action");
                self.policy.set_action(h, s, a);
            }
        }
    }

    pub fn observe_step(&mut self, h: usize, s: usize, a: usize, cost_signal: f64, next: usize) -> bool {
        self.stats.observe(h, s, a, cost_signal, next)
    }

    pub fn finish_episode(&mut self) {
        self.episodes += 1;
        self.refresh();
    }

    pub fn output(&self) -> RfeOutput {
        RfeOutput {
            num_states: self.num_states,
            num_actions: self.num_actions,
            horizon: self.horizon,
            initial_state: self.initial_state,
            transitions: self.stats.empirical_transitions(),
            supports: self.stats.supports().clone(),
            unsafe_terminal: self.estimated.unsafe_sets.last().cloned().unwrap_or_else(|| vec![false; self.num_states]),
            episodes: self.episodes,
            converged: self.should_stop(),
        }
    }
}

/// Exact quality of the policy planned from `out` for the true rewards.
/// NaN entries mean the estimates admit no feasible plan.
pub fn evaluate_output(mdp: &TabularMdp, safety: &SafetySpec, out: &RfeOutput, safe_value: f64) -> RfeCheckpoint {
    match plan_from_output(out, mdp.rewards()) {
        Ok(plan) => {
            let policy: Policy = plan.policy.into();
            RfeCheckpoint {
                episode: out.episodes,
                optimality_gap: safe_value - policy_value(mdp, &policy, None),
                expected_violation: expected_violation(mdp, safety, &policy),
            }
        }
        Err(_) => RfeCheckpoint { episode: out.episodes, optimality_gap: f64::NAN, expected_violation: f64::NAN },
    }
}

/// Explores until the stopping rule fires or the cap is reached.
///
/// The logged regret of each exploration episode is measured against the
/// safe optimum of the true rewards. Evaluation needs a feasible model.
pub fn explore<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    safety: &SafetySpec,
    cfg: RfeConfig,
    rng: &mut R,
) -> Result<(RfeOutput, RunMetrics)> {
    explore_observed(mdp, safety, cfg, rng, |_| {})
}

/// [`explore`] with a hook called after every refresh.
pub fn explore_observed<R, F>(
    mdp: &TabularMdp,
    safety: &SafetySpec,
    cfg: RfeConfig,
    rng: &mut R,
    mut hook: F,
) -> Result<(RfeOutput, RunMetrics)>
where
    R: Rng + ?Sized,
    F: FnMut(&RfeExplorer),
{
    let truth = SafetyStructures::analyze(mdp, safety)?;
    if !check_feasibility(&truth, mdp.initial_state()) {
        return Err(Error::Feasibility { state: mdp.initial_state() });
    }
    let safe_value = safe_optimal_plan(mdp, &truth, None)?.initial_value(mdp.initial_state());
    let mut explorer = RfeExplorer::new(
        mdp.num_states(),
        mdp.num_actions(),
        mdp.horizon(),
        mdp.initial_state(),
        safety.threshold(),
        cfg,
    )?;
    hook(&explorer);
    let mut metrics = RunMetrics::new(safe_value);
    while !explorer.should_stop() && explorer.episodes() < explorer.episode_cap() {
        let policy: Policy = explorer.policy().clone().into();
        let traj = sample_episode(mdp, safety, &policy, rng)?;
        let mut novel = false;
        for st in &traj.steps {
            novel |= explorer.observe_step(st.step, st.state, st.action, st.cost_signal, st.next_state);
        }
        explorer.finish_episode();
        hook(&explorer);
        let value = policy_value(mdp, &policy, None);
        metrics.push(episode_return(&traj), value, episode_violation(&traj, safety), novel);
        if cfg.checkpoint_every.is_some_and(|every| explorer.episodes() % every == 0) {
            metrics.checkpoints.push(evaluate_output(mdp, safety, &explorer.output(), safe_value));
        }
    }
    let out = explorer.output();
    if metrics.checkpoints.last().is_none_or(|c| c.episode != out.episodes) {
        metrics.checkpoints.push(evaluate_output(mdp, safety, &out, safe_value));
    }
    metrics.converged = Some(out.converged);
    Ok((out, metrics))
}

/// Unconstrained plan on the estimates, used by the baseline explorer.
pub fn plan_unconstrained_from_output(out: &RfeOutput, reward: &[f64]) -> Result<Plan> {
    unconstrained_plan(&out.empirical_mdp(reward)?, None)
}
