use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_rl_core::env::{random_mdp, random_mdp_unfiltered, RandomMdpParams};
use safe_rl_core::oracle::{enumerate_optimal_feasible, expected_violation, occupancy, policy_value, unsafe_reach_probability};
use safe_rl_core::{
    check_feasibility, episode_violation, safe_optimal_plan, sample_episode, unconstrained_plan, Error, MixedPolicy,
    Policy, SafetySpec, SafetyStructures, TabularMdp,
};

fn params(s: usize, a: usize, h: usize, frac: f64) -> RandomMdpParams {
    RandomMdpParams { num_states: s, num_actions: a, horizon: h, unsafe_frac: frac, threshold: 0.5 }
}

/// Same model with every step using the first step's kernel.
fn stationary((mdp, safety): (TabularMdp, SafetySpec)) -> (TabularMdp, SafetySpec) {
    let (ns, na, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let layer = mdp.transitions()[..ns * na * ns].to_vec();
    let p = (0..h).flat_map(|_| layer.iter().copied()).collect();
    (TabularMdp::new(ns, na, h, p, mdp.rewards().to_vec(), 0).unwrap(), safety)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dp_feasibility_is_sound(
        s in 1usize..=4, a in 1usize..=3, h in 1usize..=3, frac in 0.0f64..0.8, seed in any::<u64>()
    ) {
        prop_assume!((a as f64).powi((s * h) as i32) <= 1e6);
        let (mdp, safety) = random_mdp_unfiltered(&params(s, a, h, frac), seed).unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let enumerated = enumerate_optimal_feasible(&mdp, &safety);
        if check_feasibility(&st, 0) {
            let (value, _) = enumerated.unwrap();
            let plan = safe_optimal_plan(&mdp, &st, None).unwrap();
            // masks may be stricter than needed, never looser
            prop_assert!(plan.initial_value(0) <= value + 1e-9);
            let pol: Policy = plan.policy.into();
            prop_assert_eq!(unsafe_reach_probability(&mdp, &safety, &pol), 0.0);
        } else {
            prop_assert!(matches!(enumerated, Ok(_) | Err(Error::NoFeasiblePolicy)));
        }
    }

    #[test]
    fn verdicts_agree_on_stationary_kernels(
        s in 1usize..=4, a in 1usize..=3, h in 1usize..=3, frac in 0.0f64..0.8, seed in any::<u64>()
    ) {
        prop_assume!((a as f64).powi((s * h) as i32) <= 1e6);
        let (mdp, safety) = stationary(random_mdp_unfiltered(&params(s, a, h, frac), seed).unwrap());
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        match enumerate_optimal_feasible(&mdp, &safety) {
            Ok((value, _)) => {
                prop_assert!(check_feasibility(&st, 0));
                let plan = safe_optimal_plan(&mdp, &st, None).unwrap();
                prop_assert!((plan.initial_value(0) - value).abs() < 1e-9);
            }
            Err(Error::NoFeasiblePolicy) => prop_assert!(!check_feasibility(&st, 0)),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn occupancy_layers_are_distributions(s in 1usize..=6, a in 1usize..=3, h in 1usize..=5, seed in any::<u64>()) {
        let (mdp, _) = random_mdp(&params(s, a, h, 0.0), seed).unwrap();
        let pol: Policy = MixedPolicy::uniform(h, s, a).into();
        for layer in occupancy(&mdp, &pol) {
            prop_assert!((layer.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(layer.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn expected_violation_is_linear_in_the_excess(seed in any::<u64>(), scale in 0.0f64..1.0) {
        // with threshold 0 the excess is the cost itself
        let (mdp, safety) = random_mdp(&params(4, 2, 3, 0.5), seed).unwrap();
        let pol: Policy = MixedPolicy::uniform(3, 4, 2).into();
        let base = SafetySpec::new(safety.cost().to_vec(), 0.0, safety.noise()).unwrap();
        let scaled = SafetySpec::new(safety.cost().iter().map(|c| c * scale).collect(), 0.0, safety.noise()).unwrap();
        let lhs = expected_violation(&mdp, &scaled, &pol);
        let rhs = scale * expected_violation(&mdp, &base, &pol);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn safe_value_never_exceeds_unconstrained(seed in any::<u64>()) {
        let (mdp, safety) = random_mdp(&params(5, 3, 4, 0.3), seed).unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        let safe = safe_optimal_plan(&mdp, &st, None).unwrap().initial_value(0);
        let free = unconstrained_plan(&mdp, None).unwrap().initial_value(0);
        prop_assert!(safe <= free + 1e-12);
    }

    #[test]
    fn unsafe_sets_shrink_forward(seed in any::<u64>()) {
        let (mdp, safety) = random_mdp_unfiltered(&params(5, 2, 5, 0.3), seed).unwrap();
        let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
        for h in 0..4 {
            for s in 0..5 {
                prop_assert!(!st.is_unsafe(h + 1, s) || st.is_unsafe(h, s));
            }
        }
    }
}

#[test]
fn monotone_unsafe_sets_are_conservative_for_step_dependent_kernels() {
    // s0 -> s2 -> s0 avoids the unsafe s1, but s0 is potentially unsafe at
    // step 2, and the recursion keeps it unsafe at every earlier step
    let (ns, na, h) = (3, 1, 3);
    let mut p = vec![0.0; h * ns * na * ns];
    let mut set = |step: usize, from: usize, to: usize| p[(step * ns + from) * ns + to] = 1.0;
    set(0, 0, 2);
    set(0, 1, 1);
    set(0, 2, 2);
    set(1, 0, 1);
    set(1, 1, 1);
    set(1, 2, 0);
    for from in 0..ns {
        set(2, from, from);
    }
    let mdp = TabularMdp::new(ns, na, h, p, vec![0.0; h * ns], 0).unwrap();
    let safety = SafetySpec::new(vec![0.0, 1.0, 0.0], 0.5, safe_rl_core::NoiseModel::None).unwrap();
    let st = SafetyStructures::analyze(&mdp, &safety).unwrap();
    assert!(!check_feasibility(&st, 0));
    assert!(enumerate_optimal_feasible(&mdp, &safety).is_ok());
}

#[test]
fn monte_carlo_matches_exact_violation() {
    let (mdp, safety) = random_mdp(&params(5, 2, 4, 0.4), 17).unwrap();
    let pol: Policy = MixedPolicy::uniform(4, 5, 2).into();
    let exact = expected_violation(&mdp, &safety, &pol);
    let reach = unsafe_reach_probability(&mdp, &safety, &pol);
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut sum, mut sq, mut hits) = (0.0, 0.0, 0usize);
    let unsafe_states = safety.unsafe_states();
    for _ in 0..n {
        let traj = sample_episode(&mdp, &safety, &pol, &mut rng).unwrap();
        let v = episode_violation(&traj, &safety);
        sum += v;
        sq += v * v;
        hits += usize::from(traj.steps.iter().any(|s| unsafe_states[s.state]));
    }
    let mean = sum / n as f64;
    let sd = ((sq / n as f64 - mean * mean).max(0.0) / n as f64).sqrt();
    assert!((mean - exact).abs() <= 3.0 * sd + 1e-12, "{mean} vs {exact} (sd {sd})");
    let p = hits as f64 / n as f64;
    let sd_p = (reach * (1.0 - reach) / n as f64).sqrt();
    assert!((p - reach).abs() <= 3.0 * sd_p + 1e-12, "{p} vs {reach}");
}

#[test]
fn exact_value_matches_monte_carlo_return() {
    let (mdp, safety) = random_mdp(&params(4, 3, 3, 0.2), 5).unwrap();
    let pol: Policy = MixedPolicy::uniform(3, 4, 3).into();
    let exact = policy_value(&mdp, &pol, None);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100_000;
    let mean = (0..n)
        .map(|_| safe_rl_core::episode_return(&sample_episode(&mdp, &safety, &pol, &mut rng).unwrap()))
        .sum::<f64>()
        / n as f64;
    // returns lie in [0, H]
    assert!((mean - exact).abs() < 3.0 * 3.0 / (n as f64).sqrt());
}
