//! Per-episode accounting of return, regret and step-wise violation.

use alloc::vec::Vec;

/// One row of a run log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode index.
    pub episode: usize,
    /// Realised return of the sampled trajectory.
    pub episode_return: f64,
    /// Exact `V_1^{π^k}(s_1)` on the true model.
    pub policy_value: f64,
    /// `reference_value - policy_value`.
    pub regret: f64,
    pub cumulative_regret: f64,
    /// Step-wise violation of the sampled trajectory.
    pub violation: f64,
    pub cumulative_violation: f64,
    /// Whether some transition of this episode was not yet in the learner's
    /// estimated support.
    pub novel_successor: bool,
    /// Wall-clock time of the episode; filled in by callers that have a clock.
    pub wall_ms: f64,
}

/// Output-policy quality of a reward-free explorer at one point of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfeCheckpoint {
    pub episode: usize,
    /// `V*_1(s_1) - V_1^{π̂}(s_1)` against the safe optimum; NaN when the
    /// estimates admit no feasible plan.
    pub optimality_gap: f64,
    /// Exact expected step-wise violation of the output policy; NaN as above.
    pub expected_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    /// Baseline value the regret is measured against.
    pub reference_value: f64,
    pub episodes: Vec<EpisodeRecord>,
    /// Only meaningful for reward-free explorers.
    pub converged: Option<bool>,
    pub checkpoints: Vec<RfeCheckpoint>,
}

impl RunMetrics {
    pub fn new(reference_value: f64) -> Self {
        Self { reference_value, ..Self::default() }
    }

    /// Appends an episode, maintaining the prefix sums.
    pub fn push(&mut self, episode_return: f64, policy_value: f64, violation: f64, novel_successor: bool) -> &EpisodeRecord {
        let (cum_regret, cum_violation) =
            self.episodes.last().map_or((0.0, 0.0), |r| (r.cumulative_regret, r.cumulative_violation));
        let regret = self.reference_value - policy_value;
        self.episodes.push(EpisodeRecord {
            episode: self.episodes.len() + 1,
            episode_return,
            policy_value,
            regret,
            cumulative_regret: cum_regret + regret,
            violation,
            cumulative_violation: cum_violation + violation,
            novel_successor,
            wall_ms: 0.0,
        });
        self.episodes.last().expect("just pushed")
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn total_violation(&self) -> f64 {
        self.episodes.last().map_or(0.0, |r| r.cumulative_violation)
    }

    pub fn total_regret(&self) -> f64 {
        self.episodes.last().map_or(0.0, |r| r.cumulative_regret)
    }

    /// Violation accrued in episodes `(from, to]` (1-based, inclusive of `to`).
    pub fn violation_between(&self, from: usize, to: usize) -> f64 {
        self.episodes[from..to].iter().map(|r| r.violation).sum()
    }

    /// Mean realised return over episodes `(from, to]`.
    pub fn mean_return_between(&self, from: usize, to: usize) -> f64 {
        let rows = &self.episodes[from..to];
        rows.iter().map(|r| r.episode_return).sum::<f64>() / rows.len() as f64
    }

    pub fn novel_successor_episodes(&self) -> usize {
        self.episodes.iter().filter(|r| r.novel_successor).count()
    }
}
