//! Named environments, generator specs and model files.

use std::path::{Path, PathBuf};

use safe_rl_core::env::{
    regret_lb_instance, rfe_benchmark, violation_lb_gap, violation_lb_instance, GridLayout, RandomMdpParams,
};
use safe_rl_core::game::{ledge_game, TabularGame};
use safe_rl_core::{SafetySpec, TabularMdp};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::format::{read_model, ModelFile};

/// Built-in environments accepted wherever an env name is.
pub const ENV_NAMES: [&str; 3] = ["grid5x5", "rfe11", "ledge"];

#[derive(Debug, Clone)]
pub enum Model {
    Mdp(TabularMdp, SafetySpec),
    Game(TabularGame, SafetySpec),
}

impl Model {
    pub fn safety(&self) -> &SafetySpec {
        match self {
            Model::Mdp(_, s) | Model::Game(_, s) => s,
        }
    }

    /// Replaces the threshold, keeping costs and noise.
    pub fn with_threshold(self, tau: f64) -> Result<Self> {
        Ok(match self {
            Model::Mdp(m, s) => Model::Mdp(m, s.with_threshold(tau)?),
            Model::Game(g, s) => Model::Game(g, s.with_threshold(tau)?),
        })
    }
}

/// An environment reference in a config: a name, a file path or a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvSpec {
    Name(String),
    Generator(Generator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    Gridworld {
        side: usize,
        unsafe_cells: Vec<[usize; 2]>,
        start: [usize; 2],
        goal: [usize; 2],
        horizon: usize,
    },
    Random {
        states: usize,
        actions: usize,
        horizon: usize,
        unsafe_frac: f64,
        seed: u64,
    },
    /// `gap` defaults to the value tuned to the run length.
    ViolationTree {
        actions: usize,
        horizon: usize,
        #[serde(default)]
        gap: Option<f64>,
        variant: usize,
    },
    RegretTree {
        actions: usize,
        horizon: usize,
        gap: f64,
        gap_prime: f64,
        variant: usize,
    },
}

/// What a generator may need from the surrounding config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Context<'a> {
    /// Relative paths are tried against this directory first.
    pub base_dir: Option<&'a Path>,
    pub tau: Option<f64>,
    pub episodes: Option<usize>,
}

pub fn named(name: &str) -> Option<Result<Model>> {
    let model = match name {
        "grid5x5" => GridLayout::default_5x5().build().map(|(m, s)| Model::Mdp(m, s)),
        "rfe11" => rfe_benchmark().map(|(m, s)| Model::Mdp(m, s)),
        "ledge" => ledge_game().map(|(g, s)| Model::Game(g, s)),
        _ => return None,
    };
    Some(model.map_err(Into::into))
}

fn find_file(name: &str, base_dir: Option<&Path>) -> Option<PathBuf> {
    let path = Path::new(name);
    if path.is_relative() {
        if let Some(p) = base_dir.map(|d| d.join(path)).filter(|p| p.is_file()) {
            return Some(p);
        }
    }
    path.is_file().then(|| path.to_path_buf())
}

pub fn load_file(path: &Path) -> Result<Model> {
    Ok(match read_model(path)? {
        ModelFile::Mdp(f) => {
            let (m, s) = f.into_model()?;
            Model::Mdp(m, s)
        }
        ModelFile::Game(f) => {
            let (g, s) = f.into_model()?;
            Model::Game(g, s)
        }
    })
}

/// Resolves `spec`. A threshold in `ctx` overrides the model's own.
pub fn resolve(spec: &EnvSpec, ctx: Context<'_>) -> Result<Model> {
    let model = match spec {
        EnvSpec::Name(name) => match named(name) {
            Some(model) => model?,
            None => match find_file(name, ctx.base_dir) {
                Some(path) => load_file(&path)?,
                None => {
                    return Err(HarnessError::config(format!(
                        "unknown env `{name}`: not one of {ENV_NAMES:?} and no such file"
                    )))
                }
            },
        },
        EnvSpec::Generator(g) => generate(g, ctx)?,
    };
    match ctx.tau {
        Some(tau) => model.with_threshold(tau),
        None => Ok(model),
    }
}

fn generate(g: &Generator, ctx: Context<'_>) -> Result<Model> {
    let tau = ctx.tau.unwrap_or(0.5);
    let (mdp, safety) = match *g {
        Generator::Gridworld { side, ref unsafe_cells, start, goal, horizon } => GridLayout {
            side,
            unsafe_cells: unsafe_cells.iter().map(|&[r, c]| (r, c)).collect(),
            start: (start[0], start[1]),
            goal: (goal[0], goal[1]),
            horizon,
            threshold: tau,
        }
        .build()?,
        Generator::Random { states, actions, horizon, unsafe_frac, seed } => {
            let params =
                RandomMdpParams { num_states: states, num_actions: actions, horizon, unsafe_frac, threshold: tau };
            safe_rl_core::env::random_mdp(&params, seed)?
        }
        Generator::ViolationTree { actions, horizon, gap, variant } => {
            let gap = match (gap, ctx.episodes) {
                (Some(gap), _) => gap,
                (None, Some(k)) => violation_lb_gap(actions, horizon, k)?,
                (None, None) => return Err(HarnessError::config("violation-tree needs `gap` or an episode count")),
            };
            violation_lb_instance(actions, horizon, gap, variant)?
        }
        Generator::RegretTree { actions, horizon, gap, gap_prime, variant } => {
            regret_lb_instance(actions, horizon, gap, gap_prime, variant)?
        }
    };
    Ok(Model::Mdp(mdp, safety))
}
