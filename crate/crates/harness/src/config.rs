//! Experiment configuration: one JSON document per experiment.
//!
//! `delta`, `tau` and `seeds` have no defaults. Regret learners need
//! `episodes`; reward-free explorers need `epsilon` and take `episode_cap`
//! (or `episodes`) as their budget.

use std::fs;
use std::path::{Path, PathBuf};

use safe_rl_core::game::AdversaryMode;
use safe_rl_core::TieBreak;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::envs::EnvSpec;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agent {
    Sucbvi,
    Ucbvi,
    SrfUcrl,
    RfUcrl,
    SafeGame,
}

impl Agent {
    pub fn name(self) -> &'static str {
        match self {
            Agent::Sucbvi => "sucbvi",
            Agent::Ucbvi => "ucbvi",
            Agent::SrfUcrl => "srf-ucrl",
            Agent::RfUcrl => "rf-ucrl",
            Agent::SafeGame => "safe-game",
        }
    }

    pub fn is_reward_free(self) -> bool {
        matches!(self, Agent::SrfUcrl | Agent::RfUcrl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    SelfPlay,
    BestResponse,
    Uniform,
}

impl From<Adversary> for AdversaryMode {
    fn from(a: Adversary) -> Self {
        match a {
            Adversary::SelfPlay => AdversaryMode::SelfPlay,
            Adversary::BestResponse => AdversaryMode::BestResponse,
            Adversary::Uniform => AdversaryMode::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ties {
    LeastVisited,
    LowestIndex,
}

impl From<Ties> for TieBreak {
    fn from(t: Ties) -> Self {
        match t {
            Ties::LeastVisited => TieBreak::LeastVisited,
            Ties::LowestIndex => TieBreak::LowestIndex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub agent: Agent,
    pub env: EnvSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub tau: f64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode_cap: Option<usize>,
    /// Reward-free explorers: evaluate the output policy every this many
    /// episodes, in addition to the final evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<Adversary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<Ties>,
    /// Fill the `wall_ms` column. Off by default so reruns are bit-identical.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::input(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(HarnessError::config(msg));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1]");
        }
        if self.seeds.is_empty() {
            return bad("seeds must list at least one seed");
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("seeds must be distinct");
        }
        if self.agent.is_reward_free() {
            match self.epsilon {
                Some(e) if e > 0.0 && e.is_finite() => {}
                _ => return bad("reward-free agents need a positive epsilon"),
            }
            if self.episodes.is_some() && self.episode_cap.is_some() {
                return bad("give either episodes or episode_cap, not both");
            }
            if self.budget() == Some(0) || self.checkpoint_every == Some(0) {
                return bad("episode budgets must be positive");
            }
        } else {
            match self.episodes {
                Some(k) if k > 0 => {}
                _ => return bad("this agent needs a positive episodes count"),
            }
            if self.epsilon.is_some() || self.episode_cap.is_some() || self.checkpoint_every.is_some() {
                return bad("epsilon, episode_cap and checkpoint_every only apply to srf-ucrl and rf-ucrl");
            }
        }
        if self.adversary.is_some() && self.agent != Agent::SafeGame {
            return bad("adversary only applies to safe-game");
        }
        if self.tie_break.is_some() && self.agent == Agent::SafeGame {
            return bad("safe-game plays mixed strategies; tie_break does not apply");
        }
        Ok(())
    }

    /// Reward-free episode cap, if one was given.
    pub fn budget(&self) -> Option<usize> {
        self.episode_cap.or(self.episodes)
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("plain data serialises");
        hex::encode(Sha256::digest(canonical))
    }
}
