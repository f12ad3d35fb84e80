//! Finite episodic MDPs, policies, trajectories and the noisy cost channel.
//!
//! Steps are 0-based throughout the API: step `h` here is step `h + 1` in the
//! usual 1-based episodic notation, and `horizon` steps are taken per episode.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{config_err, Result};

/// Tolerance on the row sums of a transition table.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;
/// Tolerance on the row sums of a mixed policy.
pub const MIXED_ROW_TOLERANCE: f64 = 1e-9;

/// Finite-horizon tabular MDP with a dense `(h, s, a, s')` transition tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    transitions: Vec<f64>,
    rewards: Vec<f64>,
    initial_state: usize,
}

impl TabularMdp {
    /// Builds and validates an MDP.
    ///
    /// `transitions` is laid out as `[h][s][a][s']` and `rewards` as
    /// `[h][s][a]`, both flattened in row-major order.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        initial_state: usize,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(config_err("S, A and H must all be positive"));
        }
        let pairs = horizon * num_states * num_actions;
        if transitions.len() != pairs * num_states {
            return Err(config_err(format!(
                "transition table has {} entries, expected {}",
                transitions.len(),
                pairs * num_states
            )));
        }
        if rewards.len() != pairs {
            return Err(config_err(format!(
                "reward table has {} entries, expected {pairs}",
                rewards.len()
            )));
        }
        if initial_state >= num_states {
            return Err(config_err(format!(
                "initial state {initial_state} out of range (S = {num_states})"
            )));
        }
        for (idx, row) in transitions.chunks(num_states).enumerate() {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(config_err(format!("transition row {idx} has an entry outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(config_err(format!("transition row {idx} sums to {sum}")));
            }
        }
        if rewards.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(config_err("rewards must lie in [0, 1]"));
        }
        Ok(Self { num_states, num_actions, horizon, transitions, rewards, initial_state })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    #[inline]
    pub(crate) fn pair_index(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.num_states + s) * self.num_actions + a
    }

    /// `P_h(· | s, a)` as a slice of length `S`.
    #[inline]
    pub fn transition_row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let start = self.pair_index(h, s, a) * self.num_states;
        &self.transitions[start..start + self.num_states]
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.rewards[self.pair_index(h, s, a)]
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Same dynamics with a different reward table.
    pub fn with_rewards(&self, rewards: Vec<f64>) -> Result<Self> {
        Self::new(
            self.num_states,
            self.num_actions,
            self.horizon,
            self.transitions.clone(),
            rewards,
            self.initial_state,
        )
    }
}

/// Noise added to the true cost when the agent observes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// `z(s) = c(s)` exactly.
    None,
    /// `z(s) = c(s) + ζ` with `ζ ~ N(0, 1)`.
    Gaussian,
}

/// Per-state safety cost together with the threshold and observation noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetySpec {
    cost: Vec<f64>,
    threshold: f64,
    noise: NoiseModel,
}

impl SafetySpec {
    pub fn new(cost: Vec<f64>, threshold: f64, noise: NoiseModel) -> Result<Self> {
        if cost.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(config_err("costs must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(config_err(format!("threshold {threshold} outside [0, 1]")));
        }
        Ok(Self { cost, threshold, noise })
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn num_states(&self) -> usize {
        self.cost.len()
    }

    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        Self::new(self.cost.clone(), threshold, self.noise)
    }

    pub fn with_noise(&self, noise: NoiseModel) -> Self {
        Self { noise, ..self.clone() }
    }

    /// Indicator of `U = {s | c(s) > τ}`.
    pub fn unsafe_states(&self) -> Vec<bool> {
        self.cost.iter().map(|&c| c > self.threshold).collect()
    }

    /// `(c(s) - τ)_+`.
    #[inline]
    pub fn excess(&self, s: usize) -> f64 {
        (self.cost[s] - self.threshold).max(0.0)
    }

    /// `min_{s ∈ U} (c(s) - τ)_+`, or `None` when nothing is unsafe.
    pub fn cost_gap(&self) -> Option<f64> {
        (0..self.cost.len())
            .filter(|&s| self.cost[s] > self.threshold)
            .map(|s| self.excess(s))
            .reduce(f64::min)
    }

    /// Draws the noisy cost signal observed at state `s`.
    pub fn observe<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> f64 {
        match self.noise {
            NoiseModel::None => self.cost[s],
            NoiseModel::Gaussian => {
                let zeta: f64 = rng.sample(StandardNormal);
                self.cost[s] + zeta
            }
        }
    }

    pub fn check_dims(&self, num_states: usize) -> Result<()> {
        if self.cost.len() != num_states {
            return Err(config_err(format!(
                "cost table has {} states, model has {num_states}",
                self.cost.len()
            )));
        }
        Ok(())
    }
}

/// Deterministic Markov policy `π_h(s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicy {
    horizon: usize,
    num_states: usize,
    actions: Vec<usize>,
}

impl DeterministicPolicy {
    /// Policy that plays `action` everywhere.
    pub fn constant(horizon: usize, num_states: usize, action: usize) -> Self {
        Self { horizon, num_states, actions: vec![action; horizon * num_states] }
    }

    /// `actions` is laid out as `[h][s]`.
    pub fn from_actions(horizon: usize, num_states: usize, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != horizon * num_states {
            return Err(config_err("policy table has the wrong size"));
        }
        Ok(Self { horizon, num_states, actions })
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.num_states + s]
    }

    #[inline]
    pub fn set_action(&mut self, h: usize, s: usize, a: usize) {
        self.actions[h * self.num_states + s] = a;
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }
}

/// Markov policy with a distribution over actions per `(h, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPolicy {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl MixedPolicy {
    /// `probs` is laid out as `[h][s][a]`; each row must sum to one.
    pub fn new(horizon: usize, num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != horizon * num_states * num_actions {
            return Err(config_err("mixed policy table has the wrong size"));
        }
        for row in probs.chunks(num_actions) {
            if row.iter().any(|p| *p < 0.0 || !p.is_finite()) {
                return Err(config_err("mixed policy has a negative or non-finite entry"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > MIXED_ROW_TOLERANCE {
                return Err(config_err(format!("mixed policy row sums to {sum}")));
            }
        }
        Ok(Self { horizon, num_states, num_actions, probs })
    }

    pub fn uniform(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        Self { horizon, num_states, num_actions, probs: vec![p; horizon * num_states * num_actions] }
    }

    #[inline]
    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let start = (h * self.num_states + s) * self.num_actions;
        &self.probs[start..start + self.num_actions]
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }
}

/// A Markov policy, deterministic or mixed.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Deterministic(DeterministicPolicy),
    Mixed(MixedPolicy),
}

impl From<DeterministicPolicy> for Policy {
    fn from(p: DeterministicPolicy) -> Self {
        Policy::Deterministic(p)
    }
}

impl From<MixedPolicy> for Policy {
    fn from(p: MixedPolicy) -> Self {
        Policy::Mixed(p)
    }
}

impl Policy {
    pub fn horizon(&self) -> usize {
        match self {
            Policy::Deterministic(p) => p.horizon,
            Policy::Mixed(p) => p.horizon,
        }
    }

    pub fn num_states(&self) -> usize {
        match self {
            Policy::Deterministic(p) => p.num_states,
            Policy::Mixed(p) => p.num_states,
        }
    }

    /// Probability of playing `a` at `(h, s)`.
    #[inline]
    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        match self {
            Policy::Deterministic(p) => f64::from(u8::from(p.action(h, s) == a)),
            Policy::Mixed(p) => p.row(h, s)[a],
        }
    }

    /// Samples an action. Deterministic policies never touch `rng`.
    pub fn act<R: Rng + ?Sized>(&self, h: usize, s: usize, rng: &mut R) -> usize {
        match self {
            Policy::Deterministic(p) => p.action(h, s),
            Policy::Mixed(p) => sample_index(p.row(h, s), rng),
        }
    }

    pub fn as_deterministic(&self) -> Option<&DeterministicPolicy> {
        match self {
            Policy::Deterministic(p) => Some(p),
            Policy::Mixed(_) => None,
        }
    }

    /// Checks that the policy covers `mdp`'s steps, states and actions.
    pub fn check_dims(&self, mdp: &TabularMdp) -> Result<()> {
        if self.horizon() != mdp.horizon() || self.num_states() != mdp.num_states() {
            return Err(config_err(format!(
                "policy dimensions (H = {}, S = {}) do not match the MDP (H = {}, S = {})",
                self.horizon(),
                self.num_states(),
                mdp.horizon(),
                mdp.num_states()
            )));
        }
        match self {
            Policy::Deterministic(p) => {
                if p.actions.iter().any(|&a| a >= mdp.num_actions()) {
                    return Err(config_err("policy selects an action out of range"));
                }
            }
            Policy::Mixed(p) => {
                if p.num_actions != mdp.num_actions() {
                    return Err(config_err("mixed policy action count does not match the MDP"));
                }
            }
        }
        Ok(())
    }
}

/// Inverse-CDF draw from a probability vector. Exact zeros are never drawn.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// One transition of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// 0-based step index.
    pub step: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    /// Noisy cost signal `z` observed at `state`.
    pub cost_signal: f64,
    pub next_state: usize,
}

/// A full episode of exactly `H` steps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// States `s_1, …, s_H` in visit order.
    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|st| st.state)
    }
}

/// Rolls out `policy` for one episode from the MDP's initial state.
pub fn sample_episode<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    safety: &SafetySpec,
    policy: &Policy,
    rng: &mut R,
) -> Result<Trajectory> {
    policy.check_dims(mdp)?;
    safety.check_dims(mdp.num_states())?;
    let mut steps = Vec::with_capacity(mdp.horizon());
    let mut state = mdp.initial_state();
    for h in 0..mdp.horizon() {
        let cost_signal = safety.observe(state, rng);
        let action = policy.act(h, state, rng);
        let next_state = sample_index(mdp.transition_row(h, state, action), rng);
        steps.push(Step { step: h, state, action, reward: mdp.reward(h, state, action), cost_signal, next_state });
        state = next_state;
    }
    Ok(Trajectory { steps })
}

/// `Σ_h (c(s_h) - τ)_+` over the visited states, using true costs.
pub fn episode_violation(traj: &Trajectory, safety: &SafetySpec) -> f64 {
    traj.states().map(|s| safety.excess(s)).sum()
}

/// Sum of the rewards collected in the episode.
pub fn episode_return(traj: &Trajectory) -> f64 {
    traj.steps.iter().map(|st| st.reward).sum()
}
