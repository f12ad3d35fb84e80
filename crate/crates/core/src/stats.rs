//! Visit counters, empirical transitions and cost estimates shared by the
//! learners.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::mdp::TabularMdp;
use crate::safety::Supports;

/// How a learner resolves exact ties in its greedy step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lowest action index.
    LowestIndex,
    /// Fewest visits `N_h(s, a)`, then lowest action index.
    #[default]
    LeastVisited,
}

/// Greedy selection over the allowed actions.
pub(crate) fn select_action(
    values: &[f64],
    allowed: impl Fn(usize) -> bool,
    visits: impl Fn(usize) -> u64,
    tie_break: TieBreak,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (a, &v) in values.iter().enumerate() {
        if !allowed(a) {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, bv)) => v > bv || (v == bv && tie_break == TieBreak::LeastVisited && visits(a) < visits(b)),
        };
        if better {
            best = Some((a, v));
        }
    }
    best
}

/// Counters `N_h(s,a)`, `N_h(s,a,s')`, `N(s)`, the running cost sums and the
/// observed supports `Δ^k`.
#[derive(Debug, Clone)]
pub struct LearnerStats {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    pair_counts: Vec<u64>,
    next_counts: Vec<u64>,
    cost_counts: Vec<u64>,
    cost_sums: Vec<f64>,
    supports: Supports,
}

impl LearnerStats {
    pub fn new(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        let pairs = horizon * num_states * num_actions;
        Self {
            horizon,
            num_states,
            num_actions,
            pair_counts: vec![0; pairs],
            next_counts: vec![0; pairs * num_states],
            cost_counts: vec![0; num_states],
            cost_sums: vec![0.0; num_states],
            supports: Supports::empty(horizon, num_states, num_actions),
        }
    }

    #[inline]
    fn pair(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.num_states + s) * self.num_actions + a
    }

    /// Records one transition and the cost signal observed at `s`.
    /// Returns `true` if `next` was not yet in `Δ_h(s, a)`.
    pub fn observe(&mut self, h: usize, s: usize, a: usize, cost_signal: f64, next: usize) -> bool {
        let p = self.pair(h, s, a);
        self.pair_counts[p] += 1;
        self.next_counts[p * self.num_states + next] += 1;
        self.cost_counts[s] += 1;
        self.cost_sums[s] += cost_signal;
        self.supports.insert(h, s, a, next)
    }

    #[inline]
    pub fn visits(&self, h: usize, s: usize, a: usize) -> u64 {
        self.pair_counts[self.pair(h, s, a)]
    }

    #[inline]
    pub fn transition_count(&self, h: usize, s: usize, a: usize, next: usize) -> u64 {
        self.next_counts[self.pair(h, s, a) * self.num_states + next]
    }

    /// `N(s)`, aggregated over steps.
    pub fn cost_samples(&self, s: usize) -> u64 {
        self.cost_counts[s]
    }

    /// Empirical mean cost `ĉ(s)`; zero before the first sample.
    pub fn mean_cost(&self, s: usize) -> f64 {
        match self.cost_counts[s] {
            0 => 0.0,
            n => self.cost_sums[s] / n as f64,
        }
    }

    pub fn supports(&self) -> &Supports {
        &self.supports
    }

    /// `Σ_{s'} P̂_h(s' | s, a) next[s']`, summed over observed successors.
    /// Unvisited pairs use the uniform distribution.
    pub fn expected_next(&self, h: usize, s: usize, a: usize, next: &[f64]) -> f64 {
        let n = self.visits(h, s, a);
        if n == 0 {
            return next.iter().sum::<f64>() / self.num_states as f64;
        }
        let base = self.pair(h, s, a) * self.num_states;
        let weighted: f64 =
            self.supports.successors(h, s, a).iter().map(|&sp| self.next_counts[base + sp] as f64 * next[sp]).sum();
        weighted / n as f64
    }

    /// `U_H^k = {s | ĉ(s) - β(N(s)) > τ}` for a given confidence width.
    pub fn estimated_unsafe(&self, threshold: f64, width: impl Fn(u64) -> f64) -> Vec<bool> {
        (0..self.num_states).map(|s| self.mean_cost(s) - width(self.cost_counts[s]) > threshold).collect()
    }

    /// Dense `P̂` laid out like `TabularMdp::transitions`.
    pub fn empirical_transitions(&self) -> Vec<f64> {
        let ns = self.num_states;
        let mut table = vec![0.0; self.pair_counts.len() * ns];
        for (p, row) in table.chunks_mut(ns).enumerate() {
            let n = self.pair_counts[p];
            if n == 0 {
                row.iter_mut().for_each(|x| *x = 1.0 / ns as f64);
                continue;
            }
            let counts = &self.next_counts[p * ns..(p + 1) * ns];
            let mut used = 0u64;
            let mut last = 0;
            for (sp, &c) in counts.iter().enumerate() {
                if c > 0 {
                    row[sp] = c as f64 / n as f64;
                    used += c;
                    last = sp;
                }
            }
            debug_assert_eq!(used, n);
            // absorb rounding so the row sums to one
            let rest: f64 = row.iter().enumerate().filter(|&(i, _)| i != last).map(|(_, x)| x).sum();
            row[last] = 1.0 - rest;
        }
        table
    }

    /// `P̂` packaged as an MDP with the supplied rewards.
    pub fn empirical_mdp(&self, rewards: Vec<f64>, initial_state: usize) -> Result<TabularMdp> {
        TabularMdp::new(
            self.num_states,
            self.num_actions,
            self.horizon,
            self.empirical_transitions(),
            rewards,
            initial_state,
        )
    }
}
