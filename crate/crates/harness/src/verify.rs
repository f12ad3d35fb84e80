//! The invariant suite behind `verify`.
//!
//! Every property is checked on instances drawn from the given seed, so a
//! report is reproducible. A failing property carries its first
//! counterexample serialised as JSON.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safe_rl_core::env::{random_mdp, random_mdp_unfiltered, RandomMdpParams};
use safe_rl_core::game::{game_run, ledge_game, GameConfig};
use safe_rl_core::nash::{best_response_gap, expected_payoff, solve_matrix_game};
use safe_rl_core::oracle::{enumerate_optimal_feasible, occupancy, unsafe_reach_probability};
use safe_rl_core::sucbvi::run_observed;
use safe_rl_core::{
    check_feasibility, safe_optimal_plan, Error, MixedPolicy, Policy, SafetySpec, SafetyStructures, SucbviConfig,
    TabularMdp,
};
use serde::Serialize;

use crate::envs::{named, ENV_NAMES};
use crate::error::{HarnessError, Result};
use crate::format::{mdp_to_json, parse_model, ModelFile};

const GRID_FILE: &str = include_str!("../envs/grid5x5.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Size {
    Tiny,
    Small,
}

impl Size {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tiny" => Ok(Size::Tiny),
            "small" => Ok(Size::Small),
            _ => Err(HarnessError::config(format!("unknown size `{s}`; use tiny or small"))),
        }
    }
}

struct Budget {
    instances: usize,
    max_states: usize,
    max_actions: usize,
    max_horizon: usize,
    optimism_runs: u64,
    optimism_episodes: usize,
    game_runs: u64,
    game_episodes: usize,
    matrices: usize,
}

impl Size {
    fn budget(self) -> Budget {
        match self {
            Size::Tiny => Budget {
                instances: 60,
                max_states: 4,
                max_actions: 2,
                max_horizon: 3,
                optimism_runs: 20,
                optimism_episodes: 200,
                game_runs: 4,
                game_episodes: 300,
                matrices: 100,
            },
            Size::Small => Budget {
                instances: 200,
                max_states: 5,
                max_actions: 3,
                max_horizon: 4,
                optimism_runs: 100,
                optimism_episodes: 500,
                game_runs: 20,
                game_episodes: 2000,
                matrices: 500,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl PropertyResult {
    fn new(name: &'static str, failure: Option<(String, String)>, detail: String) -> Self {
        match failure {
            None => Self { name, passed: true, detail, counterexample: None },
            Some((why, example)) => Self { name, passed: false, detail: why, counterexample: Some(example) },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

pub fn run_suite(size: Size, seed: u64) -> Result<VerifyReport> {
    let b = size.budget();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::from(oracle_agreement(&b, &mut rng)?);
    results.extend([
        occupancy_conservation(&b, &mut rng)?,
        optimism_and_budget(&b, rng.random())?,
        game_budget(&b, rng.random())?,
        nash_gaps(&b, &mut rng)?,
        shipped_envs()?,
    ]);
    Ok(VerifyReport { seed, results })
}

fn draw_params(b: &Budget, rng: &mut ChaCha8Rng) -> RandomMdpParams {
    loop {
        let s = rng.random_range(1..=b.max_states);
        let a = rng.random_range(1..=b.max_actions);
        let h = rng.random_range(1..=b.max_horizon);
        if (a as f64).powi((s * h) as i32) <= safe_rl_core::oracle::ENUMERATION_LIMIT {
            return RandomMdpParams { num_states: s, num_actions: a, horizon: h, unsafe_frac: 0.4, threshold: 0.5 };
        }
    }
}

fn counterexample(mdp: &TabularMdp, safety: &SafetySpec) -> String {
    mdp_to_json(mdp, safety)
}

/// Safety DP against exhaustive enumeration.
///
/// Soundness: whenever the DP calls the start feasible, enumeration finds a
/// feasible policy, the DP policy never touches the unsafe set and its value
/// does not exceed the enumerated optimum. Equivalence: the verdicts agree
/// and values match. The unsafe-set recursion is monotone in the step, which
/// is stricter than reachability when kernels change with the step, so
/// equivalence can fail on such instances.
fn oracle_agreement(b: &Budget, rng: &mut ChaCha8Rng) -> Result<[PropertyResult; 2]> {
    let (mut feasible, mut mismatches) = (0, 0);
    let mut unsound = None;
    let mut first_mismatch = None;
    for _ in 0..b.instances {
        let (mdp, safety) = random_mdp_unfiltered(&draw_params(b, rng), rng.random())?;
        let st = SafetyStructures::analyze(&mdp, &safety)?;
        let dp_feasible = check_feasibility(&st, mdp.initial_state());
        let enumerated = match enumerate_optimal_feasible(&mdp, &safety) {
            Ok((value, _)) => Some(value),
            Err(Error::NoFeasiblePolicy) => None,
            Err(e) => return Err(e.into()),
        };
        let (soundness, equivalence) = match (dp_feasible, enumerated) {
            (true, Some(value)) => {
                feasible += 1;
                let plan = safe_optimal_plan(&mdp, &st, None)?;
                let dp = plan.initial_value(mdp.initial_state());
                let reach = unsafe_reach_probability(&mdp, &safety, &plan.policy.into());
                let soundness = if reach != 0.0 {
                    Some(format!("DP policy reaches the unsafe set with probability {reach}"))
                } else if dp > value + 1e-9 {
                    Some(format!("DP value {dp} exceeds the enumerated optimum {value}"))
                } else {
                    None
                };
                let equivalence = ((dp - value).abs() > 1e-9).then(|| format!("DP value {dp} vs enumeration {value}"));
                (soundness, equivalence)
            }
            (true, None) => (Some("DP says feasible, enumeration found no feasible policy".into()), None),
            (false, Some(_)) => (None, Some("DP says infeasible, enumeration found a feasible policy".into())),
            (false, None) => (None, None),
        };
        if let Some(why) = soundness {
            unsound.get_or_insert((why, counterexample(&mdp, &safety)));
        }
        if let Some(why) = equivalence {
            mismatches += 1;
            first_mismatch.get_or_insert((why, counterexample(&mdp, &safety)));
        }
    }
    let detail = format!("{} instances, {feasible} feasible for both", b.instances);
    let equivalence_detail = match &mut first_mismatch {
        Some((why, _)) => {
            *why = format!("{mismatches}/{} instances disagree; first: {why}", b.instances);
            String::new()
        }
        None => detail.clone(),
    };
    Ok([
        PropertyResult::new("feasibility-soundness", unsound, detail),
        PropertyResult::new("feasibility-equivalence", first_mismatch, equivalence_detail),
    ])
}

/// Occupancy layers are probability vectors under the uniform policy.
fn occupancy_conservation(b: &Budget, rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    for _ in 0..b.instances {
        let p = draw_params(b, rng);
        let (mdp, safety) = random_mdp_unfiltered(&p, rng.random())?;
        let policy: Policy = MixedPolicy::uniform(p.horizon, p.num_states, p.num_actions).into();
        for (h, layer) in occupancy(&mdp, &policy).iter().enumerate() {
            let sum: f64 = layer.iter().sum();
            if (sum - 1.0).abs() > 1e-10 || layer.iter().any(|&x| x < 0.0) {
                let why = format!("layer {} sums to {sum}", h + 1);
                return Ok(PropertyResult::new("occupancy", Some((why, counterexample(&mdp, &safety))), String::new()));
            }
        }
    }
    Ok(PropertyResult::new("occupancy", None, format!("{} instances", b.instances)))
}

/// SUCBVI on a fixed 6-state MDP: optimism holds in all but at most 10% of
/// runs, and every run stays within the support-growth budget.
fn optimism_and_budget(b: &Budget, instance_seed: u64) -> Result<PropertyResult> {
    let params = RandomMdpParams { num_states: 6, num_actions: 2, horizon: 4, unsafe_frac: 0.3, threshold: 0.5 };
    let (mdp, safety) = random_mdp(&params, instance_seed)?;
    let st = SafetyStructures::analyze(&mdp, &safety)?;
    let star = safe_optimal_plan(&mdp, &st, None)?;
    let budget = params.num_states.pow(2) * params.num_actions * params.horizon;
    let mut pessimistic = 0;
    let mut worst_novel = 0;
    for seed in 0..b.optimism_runs {
        let mut broken = false;
        let cfg = SucbviConfig::new(0.05, b.optimism_episodes);
        let metrics = run_observed(&mdp, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(seed), |agent, _| {
            for h in 0..params.horizon {
                for s in 0..params.num_states {
                    broken |= agent.value(h, s) < star.value(h, s) - 1e-9;
                }
            }
        })?;
        pessimistic += usize::from(broken);
        worst_novel = worst_novel.max(metrics.novel_successor_episodes());
    }
    let allowed = b.optimism_runs as usize / 10;
    let failure = if pessimistic > allowed {
        Some(format!("{pessimistic}/{} runs were pessimistic somewhere (allowed {allowed})", b.optimism_runs))
    } else if worst_novel > budget {
        Some(format!("a run had {worst_novel} novel-successor episodes, budget {budget}"))
    } else {
        None
    };
    let detail = format!(
        "{pessimistic}/{} pessimistic runs, max novel episodes {worst_novel} <= {budget}",
        b.optimism_runs
    );
    Ok(PropertyResult::new("optimism-and-support-budget", failure.map(|w| (w, counterexample(&mdp, &safety))), detail))
}

fn game_budget(b: &Budget, seed: u64) -> Result<PropertyResult> {
    let (game, safety) = ledge_game()?;
    let budget = game.num_states().pow(2) * game.agent_actions() * game.adversary_actions() * game.horizon();
    let mut worst = 0;
    for i in 0..b.game_runs {
        let cfg = GameConfig::new(0.05, b.game_episodes);
        let m = game_run(&game, &safety, cfg, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i)))?;
        worst = worst.max(m.novel_successor_episodes());
    }
    let failure = (worst > budget).then(|| {
        (format!("{worst} novel-successor episodes, budget {budget}"), crate::format::game_to_json(&game, &safety))
    });
    Ok(PropertyResult::new("game-support-budget", failure, format!("max {worst} <= {budget}")))
}

#[derive(Serialize)]
struct MatrixCase<'a> {
    rows: usize,
    cols: usize,
    payoff: &'a [f64],
    masked: &'a [bool],
}

fn nash_gaps(b: &Budget, rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let mut worst = 0.0f64;
    for _ in 0..b.matrices {
        let (rows, cols) = (rng.random_range(1..=5usize), rng.random_range(1..=5usize));
        let payoff: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut masked: Vec<bool> = (0..rows).map(|_| rng.random_bool(0.3)).collect();
        masked[rng.random_range(0..rows)] = false;
        let sol = solve_matrix_game(&payoff, rows, cols, Some(&masked))?;
        let gap = best_response_gap(&payoff, Some(&masked), &sol);
        worst = worst.max(gap);
        let consistent = (expected_payoff(&payoff, &sol.row, &sol.col) - sol.value).abs() <= 1e-9;
        let mass_ok = masked.iter().zip(&sol.row).all(|(&m, &p)| !m || p == 0.0);
        if gap > 1e-6 || !consistent || !mass_ok {
            let why = format!("gap {gap}, value consistent {consistent}, masked rows empty {mass_ok}");
            let case = serde_json::to_string(&MatrixCase { rows, cols, payoff: &payoff, masked: &masked })?;
            return Ok(PropertyResult::new("nash", Some((why, case)), String::new()));
        }
    }
    Ok(PropertyResult::new("nash", None, format!("{} games, max best-response gap {worst:e}", b.matrices)))
}

/// Built-in environments and the bundled grid file are valid and feasible.
fn shipped_envs() -> Result<PropertyResult> {
    let mut failure = None;
    for name in ENV_NAMES {
        let summary = crate::describe::summarize(&named(name).expect("listed")?)?;
        if !summary.feasible {
            failure = Some((format!("{name} is infeasible"), name.to_owned()));
        }
    }
    let ModelFile::Mdp(file) = parse_model(GRID_FILE)? else {
        return Err(HarnessError::config("bundled grid file is not an MDP"));
    };
    let (mdp, safety) = file.into_model()?;
    if !check_feasibility(&SafetyStructures::analyze(&mdp, &safety)?, mdp.initial_state()) {
        failure = Some(("bundled grid5x5.json is infeasible".into(), GRID_FILE.to_owned()));
    }
    Ok(PropertyResult::new("shipped-envs", failure, format!("{ENV_NAMES:?} and envs/grid5x5.json feasible")))
}
