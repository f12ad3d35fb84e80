//! Unconstrained comparators: UCBVI and RF-UCRL.
//!
//! Both reuse the safe learners with the safety layer switched off. Violation
//! is still logged against the true costs.

use rand::Rng;

use crate::error::Result;
use crate::mdp::{SafetySpec, TabularMdp};
use crate::metrics::RunMetrics;
use crate::srf_ucrl::{explore, RfeConfig, RfeOutput};
use crate::sucbvi::{self, SucbviConfig};

/// UCBVI: regret is measured against the unconstrained optimum.
pub fn ucbvi_run<R: Rng + ?Sized>(mdp: &TabularMdp, safety: &SafetySpec, cfg: SucbviConfig, rng: &mut R) -> Result<RunMetrics> {
    sucbvi::run(mdp, safety, cfg.unconstrained(), rng)
}

/// RF-UCRL: unrestricted uncertainty recursion with the plain
/// `2H sqrt(2γ/n)` bonus. The returned unsafe set is empty, so planning on
/// the output is unconstrained.
pub fn rf_ucrl_run<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    safety: &SafetySpec,
    cfg: RfeConfig,
    rng: &mut R,
) -> Result<(RfeOutput, RunMetrics)> {
    explore(mdp, safety, cfg.unconstrained(), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{random_mdp, RandomMdpParams};
    use crate::srf_ucrl::plan_unconstrained_from_output;
    use crate::{plan_from_output, safety::unconstrained_plan};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_safe() -> (TabularMdp, SafetySpec) {
        let params = RandomMdpParams { num_states: 4, num_actions: 3, horizon: 3, unsafe_frac: 0.0, threshold: 0.5 };
        random_mdp(&params, 5).unwrap()
    }

    #[test]
    fn ucbvi_matches_sucbvi_when_everything_is_safe() {
        let (mdp, safety) = all_safe();
        let cfg = SucbviConfig::new(0.05, 300);
        let safe = sucbvi::run(&mdp, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let free = ucbvi_run(&mdp, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(safe.reference_value, free.reference_value);
        assert_eq!(safe, free);
    }

    #[test]
    fn ucbvi_regret_is_against_unconstrained_optimum() {
        let (mdp, safety) = crate::env::GridLayout::default_5x5().build().unwrap();
        let m = ucbvi_run(&mdp, &safety, SucbviConfig::new(0.05, 3), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(m.reference_value, unconstrained_plan(&mdp, None).unwrap().initial_value(mdp.initial_state()));
    }

    #[test]
    fn rf_ucrl_output_plans_like_srf_ucrl_on_safe_envs() {
        let (mdp, safety) = all_safe();
        let cfg = RfeConfig::new(0.5, 0.05).with_cap(400);
        let (safe_out, _) = explore(&mdp, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let (free_out, _) = rf_ucrl_run(&mdp, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(free_out.unsafe_terminal.iter().all(|u| !u));
        let a = plan_from_output(&safe_out, mdp.rewards()).unwrap();
        let b = plan_unconstrained_from_output(&free_out, mdp.rewards()).unwrap();
        // the explorers differ only in their bonus, so the estimates can differ
        let va = crate::oracle::policy_value(&mdp, &a.policy.into(), None);
        let vb = crate::oracle::policy_value(&mdp, &b.policy.into(), None);
        let best = unconstrained_plan(&mdp, None).unwrap().initial_value(0);
        assert!(best - va <= 0.5 && best - vb <= 0.5, "{va} {vb} {best}");
    }
}
