//! Environment generators: gridworlds, the lower-bound tree instances, a
//! reward-free benchmark and seeded random MDPs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{config_err, Error, Result};
use crate::mdp::{NoiseModel, SafetySpec, TabularMdp};
use crate::safety::{check_feasibility, SafetyStructures};

/// Grid moves, in action-index order.
pub const GRID_ACTIONS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// A deterministic gridworld with one absorbing rewarding goal.
///
/// Cells are `(row, col)` and map to state `row * side + col`. Actions are
/// north (row + 1), south, east (col + 1), west; moves into the border leave
/// the agent in place.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub side: usize,
    pub unsafe_cells: Vec<(usize, usize)>,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub horizon: usize,
    pub threshold: f64,
}

impl GridLayout {
    /// 5×5 grid, start on the middle of the west edge, goal on the middle of
    /// the east edge, two unsafe cells blocking the direct route.
    ///
    /// The unconstrained optimum walks straight east through (2, 2) and sits
    /// on the goal for 6 steps; the safe optimum detours through row 3 and
    /// sits on the goal for 4.
    pub fn default_5x5() -> Self {
        Self { side: 5, unsafe_cells: vec![(1, 2), (2, 2)], start: (2, 0), goal: (2, 4), horizon: 10, threshold: 0.5 }
    }

    pub fn cell_index(&self, (row, col): (usize, usize)) -> usize {
        row * self.side + col
    }

    fn step(&self, (row, col): (usize, usize), action: usize) -> (usize, usize) {
        let (dr, dc) = GRID_ACTIONS[action];
        let clamp = |x: usize, d: isize| (x as isize + d).clamp(0, self.side as isize - 1) as usize;
        (clamp(row, dr), clamp(col, dc))
    }

    /// Builds the MDP with binary costs and noiseless feedback.
    pub fn build(&self) -> Result<(TabularMdp, SafetySpec)> {
        gridworld(self)
    }
}

/// Gridworld MDP and safety spec for `layout`.
pub fn gridworld(layout: &GridLayout) -> Result<(TabularMdp, SafetySpec)> {
    let side = layout.side;
    if side < 2 {
        return Err(config_err("grid side must be at least 2"));
    }
    let in_grid = |(r, c): (usize, usize)| r < side && c < side;
    if !in_grid(layout.start) || !in_grid(layout.goal) || !layout.unsafe_cells.iter().all(|&c| in_grid(c)) {
        return Err(config_err("grid cell out of range"));
    }
    if layout.unsafe_cells.contains(&layout.start) || layout.unsafe_cells.contains(&layout.goal) {
        return Err(config_err("start and goal cells must be safe"));
    }
    let (ns, na, horizon) = (side * side, GRID_ACTIONS.len(), layout.horizon);
    if horizon == 0 {
        return Err(config_err("horizon must be positive"));
    }
    let goal = layout.cell_index(layout.goal);
    let mut p = vec![0.0; horizon * ns * na * ns];
    let mut r = vec![0.0; horizon * ns * na];
    for h in 0..horizon {
        for row in 0..side {
            for col in 0..side {
                let s = layout.cell_index((row, col));
                for a in 0..na {
                    let next = if s == goal { s } else { layout.cell_index(layout.step((row, col), a)) };
                    let pair = (h * ns + s) * na + a;
                    p[pair * ns + next] = 1.0;
                    if s == goal {
                        r[pair] = 1.0;
                    }
                }
            }
        }
    }
    let mut cost = vec![0.0; ns];
    for &cell in &layout.unsafe_cells {
        cost[layout.cell_index(cell)] = 1.0;
    }
    let mdp = TabularMdp::new(ns, na, horizon, p, r, layout.cell_index(layout.start))?;
    let safety = SafetySpec::new(cost, layout.threshold, NoiseModel::None)?;
    let structures = SafetyStructures::analyze(&mdp, &safety)?;
    if !check_feasibility(&structures, mdp.initial_state()) {
        return Err(Error::Feasibility { state: mdp.initial_state() });
    }
    Ok((mdp, safety))
}

fn check_tree_horizon(horizon: usize) -> Result<usize> {
    if horizon < 3 || !horizon.is_multiple_of(3) {
        return Err(config_err(format!("horizon {horizon} must be a positive multiple of 3")));
    }
    Ok(horizon / 3)
}

fn pow(base: usize, exp: usize) -> usize {
    (0..exp).fold(1, |acc, _| acc * base)
}

/// Layout of a complete `degree`-ary tree in heap order: node `i` has
/// children `i * degree + 1 ..= i * degree + degree`.
struct Tree {
    degree: usize,
    internal: usize,
    leaves: usize,
}

impl Tree {
    fn new(degree: usize, depth: usize) -> Self {
        let leaves = pow(degree, depth);
        let internal = (0..depth).map(|d| pow(degree, d)).sum();
        Self { degree, internal, leaves }
    }

    fn child(&self, node: usize, branch: usize) -> usize {
        node * self.degree + 1 + branch
    }

    /// State index of leaf `i`, 1-based.
    fn leaf(&self, i: usize) -> usize {
        self.internal + i - 1
    }
}

/// Number of leaves of the violation lower-bound tree.
pub fn violation_lb_leaves(num_actions: usize, horizon: usize) -> Result<usize> {
    Ok(pow(num_actions, check_tree_horizon(horizon)?))
}

/// `Δ = sqrt((n - 1) / (K H'))` with `H' = 2H/3`, capped at 1/2.
pub fn violation_lb_gap(num_actions: usize, horizon: usize, episodes: usize) -> Result<f64> {
    let n = violation_lb_leaves(num_actions, horizon)?;
    let rest = (2 * horizon / 3) as f64;
    Ok(libm::sqrt((n - 1) as f64 / (episodes as f64 * rest)).min(0.5))
}

/// Hard instance for step-wise violation.
///
/// An `A`-ary tree of depth `H/3` whose leaves `s_1 … s_n` are absorbing.
/// Leaf `i` pays reward 1 per step unless `i = 1`, and costs
/// `1/2 + Δ` unless `i = 1` or `i = variant`. The threshold is 1/2 and cost
/// feedback is Gaussian. Variants are 1-based.
pub fn violation_lb_instance(
    num_actions: usize,
    horizon: usize,
    gap: f64,
    variant: usize,
) -> Result<(TabularMdp, SafetySpec)> {
    let depth = check_tree_horizon(horizon)?;
    if num_actions < 2 {
        return Err(config_err("the tree needs at least 2 actions"));
    }
    if !(0.0..=0.5).contains(&gap) {
        return Err(config_err("gap must lie in [0, 1/2]"));
    }
    let tree = Tree::new(num_actions, depth);
    if variant == 0 || variant > tree.leaves {
        return Err(config_err(format!("variant must lie in 1..={}", tree.leaves)));
    }
    let (ns, na) = (tree.internal + tree.leaves, num_actions);
    let mut p = vec![0.0; horizon * ns * na * ns];
    let mut r = vec![0.0; horizon * ns * na];
    for h in 0..horizon {
        for s in 0..ns {
            for a in 0..na {
                let pair = (h * ns + s) * na + a;
                if s < tree.internal {
                    p[pair * ns + tree.child(s, a)] = 1.0;
                } else {
                    p[pair * ns + s] = 1.0;
                    if s != tree.leaf(1) {
                        r[pair] = 1.0;
                    }
                }
            }
        }
    }
    let mut cost = vec![0.0; ns];
    for i in 1..=tree.leaves {
        cost[tree.leaf(i)] = if i == 1 || i == variant { 0.5 } else { 0.5 + gap };
    }
    Ok((TabularMdp::new(ns, na, horizon, p, r, 0)?, SafetySpec::new(cost, 0.5, NoiseModel::Gaussian)?))
}

/// State indices of the special states of a regret lower-bound instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegretLbStates {
    /// Leaf `s_1`; leaf `i` is `first_leaf + i - 1`.
    pub first_leaf: usize,
    pub leaves: usize,
    /// Absorbing, reward 0.
    pub sink_a: usize,
    /// Absorbing, reward 1.
    pub sink_b: usize,
    /// Absorbing unsafe state with reward `1/2 + Δ'`.
    pub unsafe_state: usize,
}

pub fn regret_lb_states(num_actions: usize, horizon: usize) -> Result<RegretLbStates> {
    let depth = check_tree_horizon(horizon)?;
    if num_actions < 3 {
        return Err(config_err("the regret instance needs at least 3 actions"));
    }
    let tree = Tree::new(num_actions - 1, depth);
    let base = tree.internal + tree.leaves;
    Ok(RegretLbStates { first_leaf: tree.internal, leaves: tree.leaves, sink_a: base, sink_b: base + 1, unsafe_state: base + 2 })
}

/// Hard instance for regret under the safety constraint.
///
/// An `(A-1)`-ary tree of depth `H/3`; every leaf moves to the absorbing
/// `s_A` (reward 0) or `s_B` (reward 1). Leaf `s_1` reaches `s_B` with
/// probability `1/2 + Δ`, leaf `s_variant` (variant ≥ 2) with `1/2 + 2Δ`, the
/// rest with `1/2`. The last action jumps from any non-absorbing state to the
/// absorbing unsafe `s_U` with cost 1 and reward `1/2 + Δ'`. Threshold 0,
/// noiseless costs.
pub fn regret_lb_instance(
    num_actions: usize,
    horizon: usize,
    gap: f64,
    gap_prime: f64,
    variant: usize,
) -> Result<(TabularMdp, SafetySpec)> {
    let layout = regret_lb_states(num_actions, horizon)?;
    if !(0.0..=0.25).contains(&gap) || !(0.0..=0.5).contains(&gap_prime) {
        return Err(config_err("need 0 ≤ Δ ≤ 1/4 and 0 ≤ Δ' ≤ 1/2"));
    }
    if variant == 0 || variant > layout.leaves {
        return Err(config_err(format!("variant must lie in 1..={}", layout.leaves)));
    }
    let tree = Tree::new(num_actions - 1, horizon / 3);
    let (ns, na) = (layout.unsafe_state + 1, num_actions);
    let jump = na - 1;
    let mut p = vec![0.0; horizon * ns * na * ns];
    let mut r = vec![0.0; horizon * ns * na];
    for h in 0..horizon {
        for s in 0..ns {
            for a in 0..na {
                let pair = (h * ns + s) * na + a;
                let row = &mut p[pair * ns..(pair + 1) * ns];
                let absorbing = s == layout.sink_a || s == layout.sink_b || s == layout.unsafe_state;
                if absorbing {
                    row[s] = 1.0;
                } else if a == jump {
                    row[layout.unsafe_state] = 1.0;
                } else if s < tree.internal {
                    row[tree.child(s, a)] = 1.0;
                } else {
                    let leaf = s - layout.first_leaf + 1;
                    let bias = if leaf == 1 {
                        gap
                    } else if leaf == variant {
                        2.0 * gap
                    } else {
                        0.0
                    };
                    row[layout.sink_b] = 0.5 + bias;
                    row[layout.sink_a] = 0.5 - bias;
                }
                if s == layout.sink_b {
                    r[pair] = 1.0;
                } else if s == layout.unsafe_state {
                    r[pair] = 0.5 + gap_prime;
                }
            }
        }
    }
    let mut cost = vec![0.0; ns];
    cost[layout.unsafe_state] = 1.0;
    Ok((TabularMdp::new(ns, na, horizon, p, r, 0)?, SafetySpec::new(cost, 0.0, NoiseModel::None)?))
}

/// Parameters of [`random_mdp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMdpParams {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    /// Probability that a state is unsafe.
    pub unsafe_frac: f64,
    pub threshold: f64,
}

/// Rejection cap of [`random_mdp`].
pub const RANDOM_MDP_TRIES: usize = 1000;

/// Seeded random MDP with sparse rows (support size at most `min(S, 4)`,
/// exact zeros elsewhere), uniform rewards and random costs, resampled until
/// the initial state is feasible.
pub fn random_mdp(params: &RandomMdpParams, seed: u64) -> Result<(TabularMdp, SafetySpec)> {
    check_random_params(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_MDP_TRIES {
        let (mdp, safety) = draw_instance(params, &mut rng)?;
        if check_feasibility(&SafetyStructures::analyze(&mdp, &safety)?, 0) {
            return Ok((mdp, safety));
        }
    }
    Err(Error::Generation { tries: RANDOM_MDP_TRIES })
}

/// One draw of [`random_mdp`] without the feasibility filter.
pub fn random_mdp_unfiltered(params: &RandomMdpParams, seed: u64) -> Result<(TabularMdp, SafetySpec)> {
    check_random_params(params)?;
    draw_instance(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn check_random_params(params: &RandomMdpParams) -> Result<()> {
    if params.num_states == 0 || params.num_actions == 0 || params.horizon == 0 {
        return Err(config_err("S, A and H must all be positive"));
    }
    if !(0.0..=1.0).contains(&params.unsafe_frac) {
        return Err(config_err("unsafe_frac must lie in [0, 1]"));
    }
    Ok(())
}

fn draw_instance(params: &RandomMdpParams, rng: &mut ChaCha8Rng) -> Result<(TabularMdp, SafetySpec)> {
    let RandomMdpParams { num_states: ns, num_actions: na, horizon, unsafe_frac, threshold } = *params;
    let mut states: Vec<usize> = (0..ns).collect();
    let mut p = vec![0.0; horizon * ns * na * ns];
    for row in p.chunks_mut(ns) {
        let k = rng.random_range(1..=ns.min(4));
        states.shuffle(rng);
        let weights: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut assigned = 0.0;
        for (i, (&st, w)) in states[..k].iter().zip(&weights).enumerate() {
            row[st] = if i + 1 == k { 1.0 - assigned } else { w / total };
            assigned += row[st];
        }
    }
    let r: Vec<f64> = (0..horizon * ns * na).map(|_| rng.random::<f64>()).collect();
    let cost: Vec<f64> = (0..ns)
        .map(|_| {
            if threshold < 1.0 && rng.random_bool(unsafe_frac) {
                // strictly above the threshold
                threshold + (1.0 - threshold) * (1.0 - rng.random::<f64>())
            } else {
                threshold * rng.random::<f64>()
            }
        })
        .collect();
    Ok((TabularMdp::new(ns, na, horizon, p, r, 0)?, SafetySpec::new(cost, threshold, NoiseModel::None)?))
}

/// State names of [`rfe_benchmark`], by index.
pub const RFE_STATE_NAMES: [&str; 11] =
    ["start", "corridor-1", "corridor-2", "corridor-3", "corridor-4", "hazard-1", "hazard-2", "goal", "pit", "side-x", "side-y"];

/// Reward-free benchmark with 11 states and 5 actions, `H = 8`.
///
/// From the start, action 0 enters a slippery four-cell corridor that ends at
/// the absorbing goal (in the corridor, action 0 moves forward with
/// probability 0.8 and action 1 with probability 0.6), and
/// action 1 enters a two-cell hazard shortcut (cost 1) that reaches the goal
/// three steps later. The goal pays 1 per step. A pit and two side cells add
/// distractor dynamics. Threshold 1/2, noiseless costs.
pub fn rfe_benchmark() -> Result<(TabularMdp, SafetySpec)> {
    const START: usize = 0;
    const HAZARD_1: usize = 5;
    const HAZARD_2: usize = 6;
    const GOAL: usize = 7;
    const PIT: usize = 8;
    const SIDE_X: usize = 9;
    const SIDE_Y: usize = 10;
    let (ns, na, horizon) = (11, 5, 8);
    let mut row_of = [[[0.0f64; 11]; 5]; 11];
    let mut set = |s: usize, a: usize, outcomes: &[(usize, f64)]| {
        for &(n, p) in outcomes {
            row_of[s][a][n] += p;
        }
    };
    set(START, 0, &[(1, 1.0)]);
    set(START, 1, &[(HAZARD_1, 1.0)]);
    set(START, 2, &[(SIDE_X, 0.7), (START, 0.3)]);
    set(START, 3, &[(START, 1.0)]);
    set(START, 4, &[(SIDE_Y, 1.0)]);
    for c in 1..=4 {
        let forward = if c == 4 { GOAL } else { c + 1 };
        let back = if c == 1 { START } else { c - 1 };
        set(c, 0, &[(forward, 0.8), (c, 0.2)]);
        set(c, 1, &[(forward, 0.6), (c, 0.4)]);
        set(c, 2, &[(PIT, 0.5), (c, 0.5)]);
        set(c, 3, &[(back, 1.0)]);
        set(c, 4, &[(SIDE_X, 1.0)]);
    }
    set(HAZARD_1, 0, &[(HAZARD_2, 1.0)]);
    set(HAZARD_2, 0, &[(GOAL, 1.0)]);
    for a in 1..na {
        set(HAZARD_1, a, &[(HAZARD_1, 1.0)]);
        set(HAZARD_2, a, &[(HAZARD_2, 1.0)]);
    }
    for a in 0..na {
        set(GOAL, a, &[(GOAL, 1.0)]);
        set(PIT, a, &[(PIT, 1.0)]);
    }
    set(SIDE_X, 0, &[(1, 1.0)]);
    set(SIDE_X, 1, &[(SIDE_X, 1.0)]);
    set(SIDE_X, 2, &[(SIDE_Y, 1.0)]);
    set(SIDE_X, 3, &[(START, 1.0)]);
    set(SIDE_X, 4, &[(SIDE_X, 1.0)]);
    set(SIDE_Y, 0, &[(START, 1.0)]);
    for a in 1..na {
        set(SIDE_Y, a, &[(SIDE_Y, 1.0)]);
    }
    let mut p = Vec::with_capacity(horizon * ns * na * ns);
    let mut r = Vec::with_capacity(horizon * ns * na);
    for _ in 0..horizon {
        for (s, rows) in row_of.iter().enumerate() {
            for row in rows {
                p.extend_from_slice(row);
                r.push(if s == GOAL { 1.0 } else { 0.0 });
            }
        }
    }
    let mut cost = vec![0.0; ns];
    cost[HAZARD_1] = 1.0;
    cost[HAZARD_2] = 1.0;
    Ok((TabularMdp::new(ns, na, horizon, p, r, START)?, SafetySpec::new(cost, 0.5, NoiseModel::None)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{policy_value, unsafe_reach_probability};
    use crate::safety::{safe_optimal_plan, unconstrained_plan};
    use crate::Policy;

    #[test]
    fn default_grid_dimensions_and_values() {
        let (mdp, safety) = GridLayout::default_5x5().build().unwrap();
        assert_eq!((mdp.num_states(), mdp.num_actions()), (25, 4));
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let safe = safe_optimal_plan(&mdp, &st, None).unwrap().initial_value(mdp.initial_state());
        let free = unconstrained_plan(&mdp, None).unwrap().initial_value(mdp.initial_state());
        // goal reached at step 7 (safe detour) vs step 5 (straight line)
        assert_eq!(safe, 4.0);
        assert_eq!(free, 6.0);
    }

    #[test]
    fn open_grid_is_feasible() {
        let layout = GridLayout { unsafe_cells: vec![], ..GridLayout::default_5x5() };
        let (mdp, safety) = layout.build().unwrap();
        assert!(check_feasibility(&SafetyStructures::analyze(&mdp, &safety).unwrap(), mdp.initial_state()));
    }

    #[test]
    fn walled_grid_loses_value() {
        // a full wall on column 2 except the top row forces a long detour
        let layout = GridLayout {
            unsafe_cells: vec![(0, 2), (1, 2), (2, 2), (3, 2)],
            ..GridLayout::default_5x5()
        };
        let (mdp, safety) = layout.build().unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let safe = safe_optimal_plan(&mdp, &st, None).unwrap().initial_value(mdp.initial_state());
        let free = unconstrained_plan(&mdp, None).unwrap().initial_value(mdp.initial_state());
        assert!(safe < free);
    }

    #[test]
    fn boxed_in_start_is_feasible_but_worthless() {
        // the west wall lets the agent wait in place forever
        let layout = GridLayout { unsafe_cells: vec![(1, 0), (3, 0), (2, 1)], ..GridLayout::default_5x5() };
        let (mdp, safety) = layout.build().unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        assert_eq!(safe_optimal_plan(&mdp, &st, None).unwrap().initial_value(mdp.initial_state()), 0.0);
        let unsafe_start = GridLayout { unsafe_cells: vec![(2, 0)], ..GridLayout::default_5x5() };
        assert!(unsafe_start.build().is_err());
    }

    #[test]
    fn violation_tree_shape() {
        assert_eq!(violation_lb_leaves(2, 6).unwrap(), 4);
        let (mdp, safety) = violation_lb_instance(2, 6, 0.1, 1).unwrap();
        assert_eq!(mdp.num_states(), 7);
        assert_eq!(safety.unsafe_states().iter().filter(|&&u| u).count(), 3);
        assert!(violation_lb_instance(2, 7, 0.1, 1).is_err());
        assert!(violation_lb_instance(2, 6, 0.1, 5).is_err());
    }

    #[test]
    fn violation_tree_variant_one_safe_value_is_zero() {
        let (mdp, safety) = violation_lb_instance(2, 6, 0.1, 1).unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let plan = safe_optimal_plan(&mdp, &st, None).unwrap();
        assert_eq!(plan.initial_value(0), 0.0);
        let (mdp, safety) = violation_lb_instance(2, 6, 0.1, 3).unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        assert_eq!(safe_optimal_plan(&mdp, &st, None).unwrap().initial_value(0), 4.0);
    }

    #[test]
    fn zero_gap_tree_never_violates() {
        let (mdp, safety) = violation_lb_instance(2, 6, 0.0, 1).unwrap();
        assert!(safety.unsafe_states().iter().all(|u| !u));
        let plan = unconstrained_plan(&mdp, None).unwrap();
        let pol: Policy = plan.policy.into();
        assert_eq!(crate::oracle::expected_violation(&mdp, &safety, &pol), 0.0);
    }

    #[test]
    fn regret_tree_structure() {
        let layout = regret_lb_states(3, 6).unwrap();
        assert_eq!(layout.leaves, 4);
        let (mdp, _) = regret_lb_instance(3, 6, 0.05, 0.3, 1).unwrap();
        let leaf1 = mdp.transition_row(0, layout.first_leaf, 0);
        assert!((leaf1[layout.sink_b] - 0.55).abs() < 1e-15);
        let leaf2 = mdp.transition_row(0, layout.first_leaf + 1, 0);
        assert_eq!(leaf2[layout.sink_b], 0.5);
        let (mdp, _) = regret_lb_instance(3, 6, 0.05, 0.3, 2).unwrap();
        let leaf2 = mdp.transition_row(0, layout.first_leaf + 1, 1);
        assert!((leaf2[layout.sink_b] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn regret_tree_unconstrained_optimum_jumps() {
        let (gap, gap_prime) = (0.05, 0.2);
        let layout = regret_lb_states(3, 6).unwrap();
        let (mdp, safety) = regret_lb_instance(3, 6, gap, gap_prime, 2).unwrap();
        let free = unconstrained_plan(&mdp, None).unwrap();
        let jump = 2;
        for h in 0..5 {
            for s in 0..layout.sink_a {
                assert_eq!(free.policy.action(h, s), jump, "h = {h}, s = {s}");
            }
        }
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let safe = safe_optimal_plan(&mdp, &st, None).unwrap();
        let pol: Policy = safe.policy.clone().into();
        assert_eq!(unsafe_reach_probability(&mdp, &safety, &pol), 0.0);
        for h in 0..5 {
            for s in 0..layout.sink_a {
                assert_ne!(safe.policy.action(h, s), jump);
            }
        }
        assert!((policy_value(&mdp, &pol, None) - safe.initial_value(0)).abs() < 1e-12);
    }

    #[test]
    fn random_mdps_are_reproducible_and_feasible() {
        let params = RandomMdpParams { num_states: 4, num_actions: 2, horizon: 3, unsafe_frac: 0.3, threshold: 0.5 };
        let a = random_mdp(&params, 11).unwrap();
        let b = random_mdp(&params, 11).unwrap();
        assert_eq!(a, b);
        let (mdp, safety) = a;
        assert!(check_feasibility(&SafetyStructures::analyze(&mdp, &safety).unwrap(), 0));
        for row in mdp.transitions().chunks(4) {
            assert!(row.iter().filter(|&&p| p > 0.0).count() <= 4);
        }
        let safe_only = RandomMdpParams { unsafe_frac: 0.0, ..params };
        for seed in 0..20 {
            let (_, safety) = random_mdp(&safe_only, seed).unwrap();
            assert!(safety.unsafe_states().iter().all(|u| !u));
        }
    }

    #[test]
    fn rfe_benchmark_shortcut_is_unsafe() {
        let (mdp, safety) = rfe_benchmark().unwrap();
        assert_eq!((mdp.num_states(), mdp.num_actions()), (11, 5));
        let free = unconstrained_plan(&mdp, None).unwrap();
        assert_eq!(free.initial_value(0), 5.0);
        let pol: Policy = free.policy.into();
        assert_eq!(crate::oracle::expected_violation(&mdp, &safety, &pol), 1.0);
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let safe = safe_optimal_plan(&mdp, &st, None).unwrap();
        assert!(safe.initial_value(0) > 1.0 && safe.initial_value(0) < 5.0);
        let pol: Policy = safe.policy.into();
        assert_eq!(crate::oracle::expected_violation(&mdp, &safety, &pol), 0.0);
    }
}
