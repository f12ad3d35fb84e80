//! Brute-force and forward-recursion oracles.
//!
//! Nothing here calls into the safety recursions or the planners; these
//! routines only push probability mass forward through the true model, so
//! they can be used to check those modules.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, Policy, SafetySpec, TabularMdp};

/// Largest policy space `enumerate_optimal_feasible` accepts.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Per-step state distribution `d_h(s)` under `policy`, `h = 0..H`.
pub fn occupancy(mdp: &TabularMdp, policy: &Policy) -> Vec<Vec<f64>> {
    let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut layers = Vec::with_capacity(horizon);
    let mut d = vec![0.0; ns];
    d[mdp.initial_state()] = 1.0;
    for h in 0..horizon {
        let mut next = vec![0.0; ns];
        if h + 1 < horizon {
            for (s, &mass) in d.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                for a in 0..na {
                    let w = mass * policy.prob(h, s, a);
                    if w == 0.0 {
                        continue;
                    }
                    for (n, p) in mdp.transition_row(h, s, a).iter().enumerate() {
                        next[n] += w * p;
                    }
                }
            }
        }
        layers.push(core::mem::replace(&mut d, next));
    }
    layers
}

/// Exact `V_1^π(s_1)`, optionally under a different reward table.
pub fn policy_value(mdp: &TabularMdp, policy: &Policy, reward_override: Option<&[f64]>) -> f64 {
    let rewards = reward_override.unwrap_or(mdp.rewards());
    let na = mdp.num_actions();
    occupancy(mdp, policy)
        .iter()
        .enumerate()
        .map(|(h, d)| {
            d.iter()
                .enumerate()
                .filter(|(_, &m)| m > 0.0)
                .map(|(s, &m)| m * (0..na).map(|a| policy.prob(h, s, a) * rewards[mdp.pair_index(h, s, a)]).sum::<f64>())
                .sum::<f64>()
        })
        .sum()
}

/// `E_π[Σ_h (c(s_h) - τ)_+]`.
pub fn expected_violation(mdp: &TabularMdp, safety: &SafetySpec, policy: &Policy) -> f64 {
    occupancy(mdp, policy)
        .iter()
        .map(|d| d.iter().enumerate().map(|(s, m)| m * safety.excess(s)).sum::<f64>())
        .sum()
}

/// Probability of visiting `U = {s | c(s) > τ}` at some step of the episode.
///
/// Mass is moved to an absorbing "already hit" bucket the first time it
/// lands on an unsafe state.
pub fn unsafe_reach_probability(mdp: &TabularMdp, safety: &SafetySpec, policy: &Policy) -> f64 {
    let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let unsafe_states = safety.unsafe_states();
    let mut clean = vec![0.0; ns];
    clean[mdp.initial_state()] = 1.0;
    let mut hit = 0.0;
    for h in 0..horizon {
        for s in 0..ns {
            if unsafe_states[s] {
                hit += clean[s];
                clean[s] = 0.0;
            }
        }
        if h + 1 == horizon {
            break;
        }
        let mut next = vec![0.0; ns];
        for (s, &mass) in clean.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for a in 0..na {
                let w = mass * policy.prob(h, s, a);
                if w == 0.0 {
                    continue;
                }
                for (n, p) in mdp.transition_row(h, s, a).iter().enumerate() {
                    next[n] += w * p;
                }
            }
        }
        clean = next;
    }
    hit.min(1.0)
}

struct Enumeration<'a> {
    mdp: &'a TabularMdp,
    unsafe_states: Vec<bool>,
    current: DeterministicPolicy,
    best: Option<(f64, DeterministicPolicy)>,
}

impl Enumeration<'_> {
    /// Tries every action assignment of the states reachable at step `h`.
    /// States with zero mass cannot influence the value, so they keep
    /// action 0.
    fn search(&mut self, h: usize, d: &[f64], value_so_far: f64) {
        let mdp = self.mdp;
        let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
        let reachable: Vec<usize> = (0..ns).filter(|&s| d[s] > 0.0).collect();
        if reachable.iter().any(|&s| self.unsafe_states[s]) {
            return;
        }
        let mut choice = vec![0usize; reachable.len()];
        loop {
            for (&s, &a) in reachable.iter().zip(&choice) {
                self.current.set_action(h, s, a);
            }
            let gained: f64 = reachable.iter().zip(&choice).map(|(&s, &a)| d[s] * mdp.reward(h, s, a)).sum();
            let value = value_so_far + gained;
            if h + 1 == horizon {
                if self.best.as_ref().is_none_or(|(bv, _)| value > *bv) {
                    self.best = Some((value, self.current.clone()));
                }
            } else {
                let mut next = vec![0.0; ns];
                for (&s, &a) in reachable.iter().zip(&choice) {
                    for (n, p) in mdp.transition_row(h, s, a).iter().enumerate() {
                        next[n] += d[s] * p;
                    }
                }
                self.search(h + 1, &next, value);
            }
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == choice.len() {
                    for &s in &reachable {
                        self.current.set_action(h, s, 0);
                    }
                    return;
                }
                choice[pos] += 1;
                if choice[pos] < na {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Best deterministic policy among those that never visit the unsafe set,
/// found by exhaustive search.
pub fn enumerate_optimal_feasible(mdp: &TabularMdp, safety: &SafetySpec) -> Result<(f64, DeterministicPolicy)> {
    let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let size = libm::pow(na as f64, (ns * horizon) as f64);
    if size > ENUMERATION_LIMIT {
        return Err(Error::OracleTooLarge { size, limit: ENUMERATION_LIMIT });
    }
    safety.check_dims(ns)?;
    let mut search = Enumeration {
        mdp,
        unsafe_states: safety.unsafe_states(),
        current: DeterministicPolicy::constant(horizon, ns, 0),
        best: None,
    };
    let mut d = vec![0.0; ns];
    d[mdp.initial_state()] = 1.0;
    search.search(0, &d, 0.0);
    search.best.ok_or(Error::NoFeasiblePolicy)
}
