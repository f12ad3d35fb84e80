//! Multi-seed experiment runs.
//!
//! Seeds run in parallel on a rayon pool (size capped by `SAFE_RL_THREADS`).
//! Each seed owns its learner, an RNG seeded from the seed alone and its
//! output files, so results do not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use safe_rl_core::game::{game_run_observed, GameConfig};
use safe_rl_core::srf_ucrl::explore_observed;
use safe_rl_core::sucbvi::run_observed;
use safe_rl_core::{RfeConfig, RunMetrics, SucbviConfig};
use serde::Serialize;

use crate::config::{Agent, ExperimentConfig};
use crate::describe::{summarize, EnvSummary};
use crate::envs::{resolve, Context, EnvSpec, Model};
use crate::error::{HarnessError, Result};
use crate::output::{
    summarize_checkpoints, summarize_runs, write_checkpoint_summary, write_checkpoints, write_run, write_run_summary,
};

pub const THREADS_VAR: &str = "SAFE_RL_THREADS";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CHECKPOINT_SUMMARY_FILE: &str = "checkpoint_summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct SeedReport {
    pub seed: u64,
    pub csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints_csv: Option<String>,
    pub episodes: usize,
    pub reference_value: f64,
    pub total_regret: f64,
    pub total_violation: f64,
    pub novel_successor_episodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub env: EnvSummary,
    pub summary_csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_summary_csv: Option<String>,
    pub runs: Vec<SeedReport>,
}

/// Thread count from `SAFE_RL_THREADS`; `None` lets rayon decide.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::config(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
    }
}

fn run_file(agent: Agent, seed: u64) -> String {
    format!("{}_seed{seed}.csv", agent.name())
}

fn checkpoint_file(agent: Agent, seed: u64) -> String {
    format!("{}_seed{seed}_checkpoints.csv", agent.name())
}

/// Resolves the environment of `cfg`, or `env_override` when given, and
/// checks it fits the agent.
pub fn load_env(cfg: &ExperimentConfig, base_dir: Option<&Path>, env_override: Option<&EnvSpec>) -> Result<Model> {
    let ctx = Context { base_dir, tau: Some(cfg.tau), episodes: cfg.episodes.or(cfg.episode_cap) };
    let model = resolve(env_override.unwrap_or(&cfg.env), ctx)?;
    match (&model, cfg.agent == Agent::SafeGame) {
        (Model::Game(..), true) | (Model::Mdp(..), false) => Ok(model),
        (Model::Game(..), false) => {
            Err(HarnessError::config(format!("agent {} needs an MDP, not a game", cfg.agent.name())))
        }
        (Model::Mdp(..), true) => Err(HarnessError::config("agent safe-game needs a game environment")),
    }
}

/// Per-episode wall clock; a no-op unless enabled.
struct Timer {
    enabled: bool,
    start: Instant,
    laps: Vec<f64>,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Self { enabled, start: Instant::now(), laps: Vec::new() }
    }

    fn reset(&mut self) {
        self.start = Instant::now();
    }

    fn lap(&mut self) {
        if self.enabled {
            self.laps.push(self.start.elapsed().as_secs_f64() * 1e3);
            self.start = Instant::now();
        }
    }
}

/// Runs one seed and returns its metrics with `wall_ms` filled when timing.
pub fn run_seed(cfg: &ExperimentConfig, model: &Model, seed: u64) -> Result<RunMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut timer = Timer::new(cfg.timing);
    let tie_break = cfg.tie_break.map(Into::into).unwrap_or_default();
    let mut metrics = match (model, cfg.agent) {
        (Model::Mdp(mdp, safety), Agent::Sucbvi | Agent::Ucbvi) => {
            let mut sc = SucbviConfig::new(cfg.delta, cfg.episodes.expect("validated"));
            sc.tie_break = tie_break;
            if cfg.agent == Agent::Ucbvi {
                sc = sc.unconstrained();
            }
            run_observed(mdp, safety, sc, &mut rng, |_, _| timer.lap())?
        }
        (Model::Mdp(mdp, safety), Agent::SrfUcrl | Agent::RfUcrl) => {
            let mut rc = RfeConfig::new(cfg.epsilon.expect("validated"), cfg.delta);
            rc.episode_cap = cfg.budget();
            rc.checkpoint_every = cfg.checkpoint_every;
            rc.tie_break = tie_break;
            if cfg.agent == Agent::RfUcrl {
                rc = rc.unconstrained();
            }
            let mut first = true;
            // the hook also fires once before the first episode
            let (_, metrics) = explore_observed(mdp, safety, rc, &mut rng, |_| {
                if first {
                    first = false;
                    timer.reset();
                } else {
                    timer.lap();
                }
            })?;
            metrics
        }
        (Model::Game(game, safety), Agent::SafeGame) => {
            let mut gc = GameConfig::new(cfg.delta, cfg.episodes.expect("validated"));
            gc.adversary = cfg.adversary.map(Into::into).unwrap_or_default();
            game_run_observed(game, safety, gc, &mut rng, |_, _, _| timer.lap())?
        }
        _ => return Err(HarnessError::config("agent and environment kinds do not match")),
    };
    for (row, ms) in metrics.episodes.iter_mut().zip(&timer.laps) {
        row.wall_ms = *ms;
    }
    Ok(metrics)
}

/// Runs every seed of `cfg`, writes the CSVs and the manifest into
/// `output_dir` (relative to `base_dir` when relative) and returns the
/// manifest.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: Option<&Path>, env_override: Option<&EnvSpec>) -> Result<Manifest> {
    cfg.validate()?;
    let model = load_env(cfg, base_dir, env_override)?;
    let env = summarize(&model)?;
    if !env.feasible {
        return Err(HarnessError::config(format!(
            "environment is infeasible: initial state {} is potentially unsafe",
            env.initial_state
        )));
    }
    let out_dir: PathBuf = match base_dir {
        Some(d) if cfg.output_dir.is_relative() => d.join(&cfg.output_dir),
        _ => cfg.output_dir.clone(),
    };
    fs::create_dir_all(&out_dir).map_err(|e| HarnessError::output(&out_dir, e))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| HarnessError::config(format!("thread pool: {e}")))?;
    let results: Vec<Result<(SeedReport, RunMetrics)>> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let metrics = run_seed(cfg, &model, seed)?;
                let csv = run_file(cfg.agent, seed);
                write_run(&out_dir.join(&csv), &metrics.episodes)?;
                let checkpoints_csv = if cfg.agent.is_reward_free() {
                    let name = checkpoint_file(cfg.agent, seed);
                    write_checkpoints(&out_dir.join(&name), &metrics.checkpoints)?;
                    Some(name)
                } else {
                    None
                };
                let report = SeedReport {
                    seed,
                    csv,
                    checkpoints_csv,
                    episodes: metrics.len(),
                    reference_value: metrics.reference_value,
                    total_regret: metrics.total_regret(),
                    total_violation: metrics.total_violation(),
                    novel_successor_episodes: metrics.novel_successor_episodes(),
                    converged: metrics.converged,
                };
                Ok((report, metrics))
            })
            .collect()
    });
    // join barrier: summaries only after every seed has finished
    let (reports, metrics): (Vec<SeedReport>, Vec<RunMetrics>) = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();

    let runs: Vec<_> = metrics.iter().map(|m| m.episodes.clone()).collect();
    write_run_summary(&out_dir.join(SUMMARY_FILE), cfg.agent.name(), &summarize_runs(&runs))?;
    let checkpoint_summary_csv = if cfg.agent.is_reward_free() {
        let cps: Vec<_> = metrics.iter().map(|m| m.checkpoints.clone()).collect();
        write_checkpoint_summary(&out_dir.join(CHECKPOINT_SUMMARY_FILE), cfg.agent.name(), &summarize_checkpoints(&cps))?;
        Some(CHECKPOINT_SUMMARY_FILE.to_owned())
    } else {
        None
    };

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        env,
        summary_csv: SUMMARY_FILE.to_owned(),
        checkpoint_summary_csv,
        runs: reports,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| HarnessError::output(&path, e))?;
    Ok(manifest)
}
