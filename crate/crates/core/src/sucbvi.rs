//! SUCBVI: optimistic value iteration restricted to estimated safe actions.
//!
//! Each episode the learner lowers its empirical cost means by a confidence
//! width, declares the states whose lowered cost still exceeds the threshold
//! unsafe, propagates that set backwards through the observed supports, and
//! runs bonus-driven value iteration in which states outside the estimated
//! potentially-unsafe set may only use estimated safe actions.
//!
//! With `safe = false` the estimated unsafe set is always empty and the
//! learner is plain UCBVI with Hoeffding bonuses.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{config_err, Error, Result};
use crate::mdp::{episode_return, episode_violation, sample_episode, DeterministicPolicy, Policy, SafetySpec, TabularMdp};
use crate::metrics::{EpisodeRecord, RunMetrics};
use crate::oracle::policy_value;
use crate::safety::{check_feasibility, safe_optimal_plan, unconstrained_plan, SafetyStructures};
use crate::stats::{select_action, LearnerStats, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SucbviConfig {
    /// Confidence parameter δ.
    pub delta: f64,
    /// Episode budget K; enters the bonuses.
    pub episodes: usize,
    /// `false` disables the safety layer (UCBVI).
    pub safe: bool,
    pub tie_break: TieBreak,
}

impl SucbviConfig {
    pub fn new(delta: f64, episodes: usize) -> Self {
        Self { delta, episodes, safe: true, tie_break: TieBreak::default() }
    }

    pub fn unconstrained(mut self) -> Self {
        self.safe = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err("delta must lie in (0, 1)"));
        }
        if self.episodes == 0 {
            return Err(config_err("the episode budget must be positive"));
        }
        Ok(())
    }
}

/// Bonus functions with their log terms precomputed for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SucbviBonuses {
    horizon: f64,
    /// `ln(5SAHK/δ)`.
    alpha_log: f64,
    /// `ln(SK/δ)`.
    beta_log: f64,
}

impl SucbviBonuses {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize, episodes: usize, delta: f64) -> Self {
        let (s, a, h, k) = (num_states as f64, num_actions as f64, horizon as f64, episodes as f64);
        Self::from_logs(h, libm::log(5.0 * s * a * h * k / delta), libm::log(s * k / delta))
    }

    pub fn from_logs(horizon: f64, alpha_log: f64, beta_log: f64) -> Self {
        Self { horizon, alpha_log, beta_log }
    }

    /// `α(n) = 7H sqrt(ln(5SAHK/δ) / n)`; `H` for `n = 0`.
    pub fn alpha(&self, n: u64) -> f64 {
        if n == 0 {
            return self.horizon;
        }
        7.0 * self.horizon * libm::sqrt(self.alpha_log / n as f64)
    }

    /// `β(n) = sqrt(2 ln(SK/δ) / n)`; `+∞` for `n = 0`.
    pub fn beta(&self, n: u64) -> f64 {
        if n == 0 {
            return f64::INFINITY;
        }
        libm::sqrt(2.0 * self.beta_log / n as f64)
    }
}

/// Learner state between episodes.
#[derive(Debug, Clone)]
pub struct Sucbvi {
    cfg: SucbviConfig,
    bonuses: SucbviBonuses,
    threshold: f64,
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    rewards: Vec<f64>,
    stats: LearnerStats,
    estimated: SafetyStructures,
    /// `[h][s][a]`.
    q: Vec<f64>,
    /// `[h][s]`, `h = 0..=H`.
    v: Vec<f64>,
    policy: DeterministicPolicy,
}

impl Sucbvi {
    /// Rewards are known to the learner; the cost function is not.
    pub fn new(mdp: &TabularMdp, threshold: f64, cfg: SucbviConfig) -> Result<Self> {
        cfg.validate()?;
        let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
        let stats = LearnerStats::new(horizon, ns, na);
        let estimated = SafetyStructures::from_supports(stats.supports().clone(), &vec![false; ns]);
        Ok(Self {
            cfg,
            bonuses: SucbviBonuses::new(ns, na, horizon, cfg.episodes, cfg.delta),
            threshold,
            num_states: ns,
            num_actions: na,
            horizon,
            rewards: mdp.rewards().to_vec(),
            stats,
            estimated,
            q: vec![horizon as f64; horizon * ns * na],
            v: vec![0.0; (horizon + 1) * ns],
            policy: DeterministicPolicy::constant(horizon, ns, 0),
        })
    }

    pub fn bonuses(&self) -> &SucbviBonuses {
        &self.bonuses
    }

    pub fn stats(&self) -> &LearnerStats {
        &self.stats
    }

    /// Estimated `Δ^k`, `U_h^k` and `A_h^{k,safe}` from the last
    /// `begin_episode`.
    pub fn estimated(&self) -> &SafetyStructures {
        &self.estimated
    }

    pub fn policy(&self) -> &DeterministicPolicy {
        &self.policy
    }

    #[inline]
    pub fn q_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[(h * self.num_states + s) * self.num_actions + a]
    }

    #[inline]
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.v[h * self.num_states + s]
    }

    /// `c̄(s) = ĉ(s) - β(N(s))`.
    pub fn optimistic_cost(&self, s: usize) -> f64 {
        self.stats.mean_cost(s) - self.bonuses.beta(self.stats.cost_samples(s))
    }

    /// Refreshes the safety estimates and the optimistic values, and returns
    /// the greedy policy for the coming episode.
    pub fn begin_episode(&mut self) -> &DeterministicPolicy {
        let (ns, na, horizon) = (self.num_states, self.num_actions, self.horizon);
        let terminal: Vec<bool> = if self.cfg.safe {
            let bonuses = self.bonuses;
            self.stats.estimated_unsafe(self.threshold, |n| bonuses.beta(n))
        } else {
            vec![false; ns]
        };
        self.estimated = SafetyStructures::from_supports(self.stats.supports().clone(), &terminal);

        let cap = horizon as f64;
        for h in (0..horizon).rev() {
            for s in 0..ns {
                for a in 0..na {
                    let n = self.stats.visits(h, s, a);
                    let idx = (h * ns + s) * na + a;
                    self.q[idx] = if n == 0 {
                        cap
                    } else {
                        let next = &self.v[(h + 1) * ns..(h + 2) * ns];
                        let backup = self.rewards[idx] + self.stats.expected_next(h, s, a, next) + self.bonuses.alpha(n);
                        backup.min(cap)
                    };
                }
                let row = &self.q[(h * ns + s) * na..(h * ns + s + 1) * na];
                let est = &self.estimated;
                let stats = &self.stats;
                let visits = |a: usize| stats.visits(h, s, a);
                let (a, v) = select_action(row, |a| est.allows(h, s, a), visits, self.cfg.tie_break)
                    .or_else(|| select_action(row, |_| true, visits, self.cfg.tie_break))
                    .expect("at least one action");
                self.v[h * ns + s] = v;
                self.policy.set_action(h, s, a);
            }
        }
        &self.policy
    }

    /// Adds `s'` to `Δ_h(s, a)` and updates the counters and cost statistics.
    /// Returns `true` when `s'` was a new successor.
    pub fn observe_step(&mut self, h: usize, s: usize, a: usize, cost_signal: f64, next: usize) -> bool {
        self.stats.observe(h, s, a, cost_signal, next)
    }
}

/// Runs `cfg.episodes` episodes and logs exact regret against the safe
/// optimum (the unconstrained optimum when the safety layer is off).
pub fn run<R: Rng + ?Sized>(mdp: &TabularMdp, safety: &SafetySpec, cfg: SucbviConfig, rng: &mut R) -> Result<RunMetrics> {
    run_observed(mdp, safety, cfg, rng, |_, _| {})
}

/// [`run`] with a hook invoked after every episode with the learner state
/// that produced it.
pub fn run_observed<R, F>(
    mdp: &TabularMdp,
    safety: &SafetySpec,
    cfg: SucbviConfig,
    rng: &mut R,
    mut hook: F,
) -> Result<RunMetrics>
where
    R: Rng + ?Sized,
    F: FnMut(&Sucbvi, &EpisodeRecord),
{
    let reference = if cfg.safe {
        let truth = SafetyStructures::analyze(mdp, safety)?;
        if !check_feasibility(&truth, mdp.initial_state()) {
            return Err(Error::Feasibility { state: mdp.initial_state() });
        }
        safe_optimal_plan(mdp, &truth, None)?.initial_value(mdp.initial_state())
    } else {
        safety.check_dims(mdp.num_states())?;
        unconstrained_plan(mdp, None)?.initial_value(mdp.initial_state())
    };
    let mut agent = Sucbvi::new(mdp, safety.threshold(), cfg)?;
    let mut metrics = RunMetrics::new(reference);
    for _ in 0..cfg.episodes {
        let policy: Policy = agent.begin_episode().clone().into();
        let traj = sample_episode(mdp, safety, &policy, rng)?;
        let mut novel = false;
        for st in &traj.steps {
            novel |= agent.observe_step(st.step, st.state, st.action, st.cost_signal, st.next_state);
        }
        let value = policy_value(mdp, &policy, None);
        let record = *metrics.push(episode_return(&traj), value, episode_violation(&traj, safety), novel);
        hook(&agent, &record);
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::NoiseModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> (TabularMdp, SafetySpec) {
        // 3 states, 2 actions, H = 2; a1 from s0 may reach the unsafe s2.
        let (ns, na, horizon) = (3, 2, 2);
        let mut p = vec![0.0; horizon * ns * na * ns];
        let idx = |h: usize, s: usize, a: usize, n: usize| ((h * ns + s) * na + a) * ns + n;
        for h in 0..horizon {
            for s in 0..ns {
                for a in 0..na {
                    p[idx(h, s, a, s)] = 1.0;
                }
            }
            p[idx(h, 0, 0, 0)] = 0.0;
            p[idx(h, 0, 0, 1)] = 1.0;
            p[idx(h, 0, 1, 0)] = 0.0;
            p[idx(h, 0, 1, 1)] = 0.5;
            p[idx(h, 0, 1, 2)] = 0.5;
        }
        let mut r = vec![0.0; horizon * ns * na];
        r[1] = 1.0;
        (TabularMdp::new(ns, na, horizon, p, r, 0).unwrap(), SafetySpec::new(vec![0.0, 0.0, 1.0], 0.5, NoiseModel::None).unwrap())
    }

    #[test]
    fn alpha_examples() {
        let b = SucbviBonuses::from_logs(1.0, 1.0, 1.0);
        assert_eq!(b.alpha(0), 1.0);
        assert!((b.alpha(49) - 1.0).abs() < 1e-15);
        let b = SucbviBonuses::new(5, 3, 4, 100, 0.1);
        for n in [1u64, 3, 17, 250] {
            assert!((b.alpha(4 * n) - b.alpha(n) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_examples() {
        // SK/δ = e
        let b = SucbviBonuses::from_logs(1.0, 1.0, 1.0);
        assert_eq!(b.beta(0), f64::INFINITY);
        assert!((b.beta(2) - 1.0).abs() < 1e-15);
        for n in [1u64, 9, 40] {
            assert!((b.beta(4 * n) - b.beta(n) / 2.0).abs() < 1e-12);
        }
        // n = 0: c̄ = -∞ ≤ τ
        let (mdp, _) = fixture();
        let agent = Sucbvi::new(&mdp, 0.5, SucbviConfig::new(0.1, 10)).unwrap();
        assert_eq!(agent.optimistic_cost(2), f64::NEG_INFINITY);
    }

    #[test]
    fn first_episode_is_fully_optimistic() {
        let (mdp, _) = fixture();
        for tie_break in [TieBreak::LowestIndex, TieBreak::LeastVisited] {
            let mut cfg = SucbviConfig::new(0.1, 10);
            cfg.tie_break = tie_break;
            let mut agent = Sucbvi::new(&mdp, 0.5, cfg).unwrap();
            let pol = agent.begin_episode().clone();
            assert!(pol.actions().iter().all(|&a| a == 0));
            for h in 0..2 {
                assert!(agent.estimated().unsafe_list(h).is_empty());
                for s in 0..3 {
                    for a in 0..2 {
                        assert_eq!(agent.q_value(h, s, a), 2.0);
                    }
                }
            }
        }
    }

    #[test]
    fn observed_structure_reproduces_true_recursion() {
        // every pair seen, costs converged and noiseless
        let (mdp, safety) = fixture();
        let mut agent = Sucbvi::new(&mdp, 0.5, SucbviConfig::new(0.1, 10)).unwrap();
        for h in 0..2 {
            for s in 0..3 {
                for a in 0..2 {
                    for (n, &p) in mdp.transition_row(h, s, a).iter().enumerate() {
                        if p > 0.0 {
                            agent.observe_step(h, s, a, safety.cost()[s], n);
                        }
                    }
                }
            }
        }
        for _ in 0..10_000 {
            agent.observe_step(1, 2, 0, 1.0, 2);
            agent.observe_step(1, 1, 0, 0.0, 1);
        }
        let pol = agent.begin_episode().clone();
        assert_eq!(agent.estimated().unsafe_list(0), vec![2]);
        assert_eq!(agent.estimated().safe_action_list(0, 0), vec![0]);
        assert_eq!(pol.action(0, 0), 0);
    }

    #[test]
    fn q_and_v_never_exceed_horizon() {
        let (mdp, safety) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = SucbviConfig::new(0.1, 200);
        run_observed(&mdp, &safety, cfg, &mut rng, |agent, _| {
            for h in 0..2 {
                for s in 0..3 {
                    assert!(agent.value(h, s) <= 2.0);
                    for a in 0..2 {
                        assert!(agent.q_value(h, s, a) <= 2.0);
                    }
                }
            }
        })
        .unwrap();
    }

    #[test]
    fn estimated_supports_stay_inside_true_supports() {
        let (mdp, safety) = fixture();
        let truth = crate::safety::compute_supports(&mdp);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut last = 0;
        run_observed(&mdp, &safety, SucbviConfig::new(0.1, 100), &mut rng, |agent, _| {
            assert!(agent.stats().supports().is_subset_of(&truth));
            let len = agent.stats().supports().total_len();
            assert!(len >= last);
            last = len;
        })
        .unwrap();
    }

    #[test]
    fn infeasible_environment_is_rejected() {
        let (mdp, _) = fixture();
        let safety = SafetySpec::new(vec![1.0, 0.0, 0.0], 0.5, NoiseModel::None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(run(&mdp, &safety, SucbviConfig::new(0.1, 3), &mut rng), Err(Error::Feasibility { .. })));
    }

    #[test]
    fn same_seed_same_metrics() {
        let (mdp, safety) = fixture();
        let safety = safety.with_noise(NoiseModel::Gaussian);
        let a = run(&mdp, &safety, SucbviConfig::new(0.1, 50), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = run(&mdp, &safety, SucbviConfig::new(0.1, 50), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }
}
