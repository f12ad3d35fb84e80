//! Reachability analysis of the unsafe set and safe-masked planning.
//!
//! A state is potentially unsafe at step `h` when every action has some
//! chance of reaching a potentially unsafe state at step `h + 1`; the
//! terminal layer is the plain unsafe set. Safe actions are the actions whose
//! whole transition support avoids the next potentially unsafe layer.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config_err, Error, Result};
use crate::mdp::{DeterministicPolicy, SafetySpec, TabularMdp};

/// Transition supports `Δ_h(s, a)`, stored as sorted successor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supports {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    lists: Vec<Vec<usize>>,
}

impl Supports {
    /// All supports empty.
    pub fn empty(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self { horizon, num_states, num_actions, lists: vec![Vec::new(); horizon * num_states * num_actions] }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn index(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.num_states + s) * self.num_actions + a
    }

    #[inline]
    pub fn successors(&self, h: usize, s: usize, a: usize) -> &[usize] {
        &self.lists[self.index(h, s, a)]
    }

    pub fn contains(&self, h: usize, s: usize, a: usize, next: usize) -> bool {
        self.successors(h, s, a).binary_search(&next).is_ok()
    }

    /// Adds `next` to `Δ_h(s, a)`; returns `true` if it was not there yet.
    pub fn insert(&mut self, h: usize, s: usize, a: usize, next: usize) -> bool {
        let idx = self.index(h, s, a);
        let list = &mut self.lists[idx];
        match list.binary_search(&next) {
            Ok(_) => false,
            Err(pos) => {
                list.insert(pos, next);
                true
            }
        }
    }

    /// `Δ_h(s, a) ∩ set ≠ ∅`.
    #[inline]
    pub fn hits(&self, h: usize, s: usize, a: usize, set: &[bool]) -> bool {
        self.successors(h, s, a).iter().any(|&n| set[n])
    }

    /// `true` when every support of `self` is contained in `other`.
    pub fn is_subset_of(&self, other: &Supports) -> bool {
        self.lists.len() == other.lists.len()
            && self.lists.iter().zip(&other.lists).all(|(mine, theirs)| mine.iter().all(|n| theirs.binary_search(n).is_ok()))
    }

    /// Total number of `(h, s, a, s')` entries.
    pub fn total_len(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

/// `Δ_h(s, a) = {s' | P_h(s' | s, a) > 0}`, with an exact zero test.
pub fn compute_supports(mdp: &TabularMdp) -> Supports {
    let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut supports = Supports::empty(horizon, ns, na);
    for h in 0..horizon {
        for s in 0..ns {
            for a in 0..na {
                let idx = supports.index(h, s, a);
                supports.lists[idx] =
                    mdp.transition_row(h, s, a).iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(n, _)| n).collect();
            }
        }
    }
    supports
}

/// Backward recursion for the potentially unsafe sets.
///
/// Returns `H` layers; layer `H - 1` is `unsafe_terminal` and layer `h`
/// adds every state all of whose actions can reach layer `h + 1`.
pub fn compute_unsafe_sets(supports: &Supports, unsafe_terminal: &[bool]) -> Vec<Vec<bool>> {
    let (horizon, ns, na) = (supports.horizon, supports.num_states, supports.num_actions);
    let mut layers = vec![unsafe_terminal.to_vec(); horizon];
    for h in (0..horizon.saturating_sub(1)).rev() {
        let (head, tail) = layers.split_at_mut(h + 1);
        let next = &tail[0];
        let current = &mut head[h];
        for s in 0..ns {
            current[s] = next[s] || (0..na).all(|a| supports.hits(h, s, a, next));
        }
    }
    layers
}

/// Safe-action indicator `[h][s][a]`; every action is safe at the last step.
pub fn compute_safe_actions(supports: &Supports, unsafe_sets: &[Vec<bool>]) -> Vec<bool> {
    let (horizon, ns, na) = (supports.horizon, supports.num_states, supports.num_actions);
    let mut safe = vec![true; horizon * ns * na];
    for h in 0..horizon.saturating_sub(1) {
        for s in 0..ns {
            for a in 0..na {
                safe[(h * ns + s) * na + a] = !supports.hits(h, s, a, &unsafe_sets[h + 1]);
            }
        }
    }
    safe
}

/// Supports, potentially unsafe sets and safe-action sets of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyStructures {
    pub supports: Supports,
    /// `unsafe_sets[h][s]`, `h = 0..H`.
    pub unsafe_sets: Vec<Vec<bool>>,
    /// Flattened `[h][s][a]`.
    pub safe_actions: Vec<bool>,
}

impl SafetyStructures {
    /// Derives both recursions from `supports` and the terminal unsafe set.
    pub fn from_supports(supports: Supports, unsafe_terminal: &[bool]) -> Self {
        let unsafe_sets = compute_unsafe_sets(&supports, unsafe_terminal);
        let safe_actions = compute_safe_actions(&supports, &unsafe_sets);
        Self { supports, unsafe_sets, safe_actions }
    }

    /// Ground-truth structures of a model.
    pub fn analyze(mdp: &TabularMdp, safety: &SafetySpec) -> Result<Self> {
        safety.check_dims(mdp.num_states())?;
        Ok(Self::from_supports(compute_supports(mdp), &safety.unsafe_states()))
    }

    pub fn horizon(&self) -> usize {
        self.supports.horizon
    }

    #[inline]
    pub fn is_unsafe(&self, h: usize, s: usize) -> bool {
        self.unsafe_sets[h][s]
    }

    #[inline]
    pub fn is_safe_action(&self, h: usize, s: usize, a: usize) -> bool {
        let (ns, na) = (self.supports.num_states, self.supports.num_actions);
        self.safe_actions[(h * ns + s) * na + a]
    }

    /// `A_h^safe(s)`.
    pub fn safe_action_list(&self, h: usize, s: usize) -> Vec<usize> {
        (0..self.supports.num_actions).filter(|&a| self.is_safe_action(h, s, a)).collect()
    }

    /// Indices of the states in `U_h`.
    pub fn unsafe_list(&self, h: usize) -> Vec<usize> {
        self.unsafe_sets[h].iter().enumerate().filter(|(_, &u)| u).map(|(s, _)| s).collect()
    }

    /// Whether action `a` may be chosen at `(h, s)` under the masking rule:
    /// restricted to safe actions outside `U_h`, unrestricted inside.
    #[inline]
    pub fn allows(&self, h: usize, s: usize, a: usize) -> bool {
        self.is_unsafe(h, s) || self.is_safe_action(h, s, a)
    }
}

/// `s1 ∉ U_1`.
pub fn check_feasibility(structures: &SafetyStructures, initial_state: usize) -> bool {
    !structures.is_unsafe(0, initial_state)
}

/// Optimal values and a greedy deterministic policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    num_states: usize,
    /// `[h][s]` for `h = 0..=H`; the last layer is zero.
    values: Vec<f64>,
    pub policy: DeterministicPolicy,
}

impl Plan {
    #[inline]
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.values[h * self.num_states + s]
    }

    /// Value of the plan at step 1 from `s`.
    pub fn initial_value(&self, s: usize) -> f64 {
        self.value(0, s)
    }
}

/// Lowest-index argmax over the allowed entries. Returns `None` if nothing is
/// allowed.
pub(crate) fn argmax_allowed(values: &[f64], allowed: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (a, &v) in values.iter().enumerate() {
        if !allowed(a) {
            continue;
        }
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((a, v)),
        }
    }
    best
}

fn backward_plan(mdp: &TabularMdp, rewards: &[f64], allowed: impl Fn(usize, usize, usize) -> bool) -> Plan {
    let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut values = vec![0.0; (horizon + 1) * ns];
    let mut policy = DeterministicPolicy::constant(horizon, ns, 0);
    let mut q = vec![0.0; na];
    for h in (0..horizon).rev() {
        for s in 0..ns {
            {
                let next = &values[(h + 1) * ns..(h + 2) * ns];
                for (a, qa) in q.iter_mut().enumerate() {
                    let row = mdp.transition_row(h, s, a);
                    let ev: f64 = row.iter().zip(next).map(|(p, v)| p * v).sum();
                    *qa = rewards[mdp.pair_index(h, s, a)] + ev;
                }
            }
            let (a, v) = argmax_allowed(&q, |a| allowed(h, s, a))
                .or_else(|| argmax_allowed(&q, |_| true))
                .expect("at least one action");
            values[h * ns + s] = v;
            policy.set_action(h, s, a);
        }
    }
    Plan { num_states: ns, values, policy }
}

fn check_structures(mdp: &TabularMdp, structures: &SafetyStructures) -> Result<()> {
    let sup = &structures.supports;
    if sup.horizon != mdp.horizon() || sup.num_states != mdp.num_states() || sup.num_actions != mdp.num_actions() {
        return Err(config_err("safety structures do not match the MDP dimensions"));
    }
    Ok(())
}

fn resolve_rewards<'a>(mdp: &'a TabularMdp, reward_override: Option<&'a [f64]>) -> Result<&'a [f64]> {
    match reward_override {
        Some(r) if r.len() != mdp.rewards().len() => Err(config_err(format!(
            "reward override has {} entries, expected {}",
            r.len(),
            mdp.rewards().len()
        ))),
        Some(r) => Ok(r),
        None => Ok(mdp.rewards()),
    }
}

/// Safe-optimal backward value iteration.
///
/// Outside `U_h` the maximisation ranges over `A_h^safe(s)`; inside `U_h` it
/// ranges over every action. Ties go to the lowest action index.
pub fn safe_optimal_plan(
    mdp: &TabularMdp,
    structures: &SafetyStructures,
    reward_override: Option<&[f64]>,
) -> Result<Plan> {
    check_structures(mdp, structures)?;
    if !check_feasibility(structures, mdp.initial_state()) {
        return Err(Error::Feasibility { state: mdp.initial_state() });
    }
    let rewards = resolve_rewards(mdp, reward_override)?;
    Ok(backward_plan(mdp, rewards, |h, s, a| structures.allows(h, s, a)))
}

/// Plain (unconstrained) backward value iteration.
pub fn unconstrained_plan(mdp: &TabularMdp, reward_override: Option<&[f64]>) -> Result<Plan> {
    let rewards = resolve_rewards(mdp, reward_override)?;
    Ok(backward_plan(mdp, rewards, |_, _, _| true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::NoiseModel;

    /// 3 states, 2 actions, H = 2. From s0: a0 -> {s1}, a1 -> {s1, s2}.
    /// Every other pair self-loops.
    fn three_state(a0_hits_s2: bool) -> (TabularMdp, SafetySpec) {
        let (ns, na, horizon) = (3, 2, 2);
        let mut p = vec![0.0; horizon * ns * na * ns];
        let idx = |h: usize, s: usize, a: usize, n: usize| ((h * ns + s) * na + a) * ns + n;
        for h in 0..horizon {
            for s in 0..ns {
                for a in 0..na {
                    p[idx(h, s, a, s)] = 1.0;
                }
            }
        }
        for h in 0..horizon {
            p[idx(h, 0, 0, 0)] = 0.0;
            p[idx(h, 0, 1, 0)] = 0.0;
            if a0_hits_s2 {
                p[idx(h, 0, 0, 1)] = 0.5;
                p[idx(h, 0, 0, 2)] = 0.5;
            } else {
                p[idx(h, 0, 0, 1)] = 1.0;
            }
            p[idx(h, 0, 1, 1)] = 0.5;
            p[idx(h, 0, 1, 2)] = 0.5;
        }
        let mut r = vec![0.0; horizon * ns * na];
        // a1 is more rewarding at step 1
        r[1] = 1.0;
        let mdp = TabularMdp::new(ns, na, horizon, p, r, 0).unwrap();
        let safety = SafetySpec::new(vec![0.0, 0.0, 1.0], 0.5, NoiseModel::None).unwrap();
        (mdp, safety)
    }

    #[test]
    fn supports_use_exact_zero_test() {
        let p = vec![1.0, 0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.7, 0.3, 0.0];
        let mdp = TabularMdp::new(3, 1, 1, p, vec![0.0; 3], 0).unwrap();
        let sup = compute_supports(&mdp);
        assert_eq!(sup.successors(0, 0, 0), &[0]);
        assert_eq!(sup.successors(0, 1, 0).len(), 3);
        assert_eq!(sup.successors(0, 2, 0), &[0, 1]);
    }

    #[test]
    fn empty_terminal_set_gives_empty_layers() {
        let (mdp, _) = three_state(false);
        let sup = compute_supports(&mdp);
        let layers = compute_unsafe_sets(&sup, &[false; 3]);
        assert!(layers.iter().all(|l| l.iter().all(|u| !u)));
        let safe = compute_safe_actions(&sup, &layers);
        assert!(safe.iter().all(|&x| x));
    }

    #[test]
    fn three_state_instance_by_hand() {
        let (mdp, safety) = three_state(false);
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        assert_eq!(st.unsafe_list(1), vec![2]);
        assert_eq!(st.unsafe_list(0), vec![2]);
        assert_eq!(st.safe_action_list(0, 0), vec![0]);
        // last step is unrestricted
        assert_eq!(st.safe_action_list(1, 0), vec![0, 1]);
        assert!(check_feasibility(&st, 0));

        let (mdp, safety) = three_state(true);
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        assert_eq!(st.unsafe_list(0), vec![0, 2]);
        assert!(st.safe_action_list(0, 0).is_empty());
        assert!(!check_feasibility(&st, 0));
        assert!(matches!(safe_optimal_plan(&mdp, &st, None), Err(Error::Feasibility { state: 0 })));
    }

    #[test]
    fn initial_state_in_terminal_unsafe_set_is_infeasible() {
        let (mdp, _) = three_state(false);
        let safety = SafetySpec::new(vec![1.0, 0.0, 0.0], 0.5, NoiseModel::None).unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        assert!(!check_feasibility(&st, 0));
    }

    #[test]
    fn safe_plan_avoids_the_tempting_action() {
        let (mdp, safety) = three_state(false);
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let safe = safe_optimal_plan(&mdp, &st, None).unwrap();
        let free = unconstrained_plan(&mdp, None).unwrap();
        assert_eq!(safe.policy.action(0, 0), 0);
        assert_eq!(free.policy.action(0, 0), 1);
        assert_eq!(safe.initial_value(0), 0.0);
        assert_eq!(free.initial_value(0), 1.0);
    }

    #[test]
    fn vacuous_constraint_matches_value_iteration() {
        let (mdp, safety) = three_state(false);
        let relaxed = safety.with_threshold(1.0).unwrap();
        let st = SafetyStructures::analyze(&mdp, &relaxed).unwrap();
        let a = safe_optimal_plan(&mdp, &st, None).unwrap();
        let b = unconstrained_plan(&mdp, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn insert_reports_novelty() {
        let mut sup = Supports::empty(1, 3, 1);
        assert!(sup.insert(0, 0, 0, 2));
        assert!(!sup.insert(0, 0, 0, 2));
        assert!(sup.insert(0, 0, 0, 1));
        assert_eq!(sup.successors(0, 0, 0), &[1, 2]);
        assert_eq!(sup.total_len(), 2);
    }
}
