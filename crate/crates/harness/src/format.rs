//! JSON interchange for MDPs and Markov games.
//!
//! Tables are nested arrays indexed `[h][s][a][s']` (games add a `b` axis
//! after `a`). Loading goes through the core constructors, so every
//! normalisation and range check applies.

use std::fs;
use std::path::Path;

use safe_rl_core::game::TabularGame;
use safe_rl_core::{NoiseModel, SafetySpec, TabularMdp};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseTag {
    None,
    Gaussian,
}

impl From<NoiseModel> for NoiseTag {
    fn from(n: NoiseModel) -> Self {
        match n {
            NoiseModel::None => NoiseTag::None,
            NoiseModel::Gaussian => NoiseTag::Gaussian,
        }
    }
}

impl From<NoiseTag> for NoiseModel {
    fn from(n: NoiseTag) -> Self {
        match n {
            NoiseTag::None => NoiseModel::None,
            NoiseTag::Gaussian => NoiseModel::Gaussian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpFile {
    #[serde(rename = "S")]
    pub num_states: usize,
    #[serde(rename = "A")]
    pub num_actions: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "P")]
    pub transitions: Vec<Vec<Vec<Vec<f64>>>>,
    pub r: Vec<Vec<Vec<f64>>>,
    pub c: Vec<f64>,
    pub tau: f64,
    pub s1: usize,
    pub noise: NoiseTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(rename = "S")]
    pub num_states: usize,
    #[serde(rename = "A")]
    pub agent_actions: usize,
    #[serde(rename = "B")]
    pub adversary_actions: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "P")]
    pub transitions: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    pub r: Vec<Vec<Vec<Vec<f64>>>>,
    pub c: Vec<f64>,
    pub tau: f64,
    pub s1: usize,
    pub noise: NoiseTag,
}

/// Flattens a nested table after checking every level has length `dims[i]`.
fn flatten<T: Flat>(table: &[T], dims: &[usize], what: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    if table.len() != dims[0] {
        return Err(HarnessError::config(format!("{what}: expected {} entries, found {}", dims[0], table.len())));
    }
    for t in table {
        t.push_into(&dims[1..], what, &mut out)?;
    }
    Ok(out)
}

trait Flat {
    fn push_into(&self, dims: &[usize], what: &str, out: &mut Vec<f64>) -> Result<()>;
}

impl Flat for f64 {
    fn push_into(&self, _: &[usize], _: &str, out: &mut Vec<f64>) -> Result<()> {
        out.push(*self);
        Ok(())
    }
}

impl<T: Flat> Flat for Vec<T> {
    fn push_into(&self, dims: &[usize], what: &str, out: &mut Vec<f64>) -> Result<()> {
        if self.len() != dims[0] {
            return Err(HarnessError::config(format!("{what}: expected {} entries, found {}", dims[0], self.len())));
        }
        self.iter().try_for_each(|t| t.push_into(&dims[1..], what, out))
    }
}

fn nest(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(<[f64]>::to_vec).collect()
}

impl MdpFile {
    pub fn from_model(mdp: &TabularMdp, safety: &SafetySpec) -> Self {
        let (ns, na, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
        let transitions = mdp
            .transitions()
            .chunks(na * ns * ns)
            .map(|layer| layer.chunks(na * ns).map(|row| nest(row, ns)).collect())
            .collect();
        let r = mdp.rewards().chunks(na * ns).map(|layer| nest(layer, na)).collect();
        debug_assert_eq!(mdp.rewards().len(), h * ns * na);
        Self {
            num_states: ns,
            num_actions: na,
            horizon: h,
            transitions,
            r,
            c: safety.cost().to_vec(),
            tau: safety.threshold(),
            s1: mdp.initial_state(),
            noise: safety.noise().into(),
        }
    }

    pub fn into_model(self) -> Result<(TabularMdp, SafetySpec)> {
        let (ns, na, h) = (self.num_states, self.num_actions, self.horizon);
        let p = flatten(&self.transitions, &[h, ns, na, ns], "P")?;
        let r = flatten(&self.r, &[h, ns, na], "r")?;
        let mdp = TabularMdp::new(ns, na, h, p, r, self.s1)?;
        let safety = SafetySpec::new(self.c, self.tau, self.noise.into())?;
        safety.check_dims(ns)?;
        Ok((mdp, safety))
    }
}

impl GameFile {
    pub fn from_model(game: &TabularGame, safety: &SafetySpec) -> Self {
        let (ns, na, nb, h) = (game.num_states(), game.agent_actions(), game.adversary_actions(), game.horizon());
        let grid = |f: &dyn Fn(usize, usize, usize, usize) -> Vec<f64>| -> Vec<Vec<Vec<Vec<Vec<f64>>>>> {
            (0..h)
                .map(|hh| (0..ns).map(|s| (0..na).map(|a| (0..nb).map(|b| f(hh, s, a, b)).collect()).collect()).collect())
                .collect()
        };
        let transitions = grid(&|hh, s, a, b| game.transition_row(hh, s, a, b).to_vec());
        let r = (0..h)
            .map(|hh| {
                (0..ns).map(|s| (0..na).map(|a| (0..nb).map(|b| game.reward(hh, s, a, b)).collect()).collect()).collect()
            })
            .collect();
        Self {
            num_states: ns,
            agent_actions: na,
            adversary_actions: nb,
            horizon: h,
            transitions,
            r,
            c: safety.cost().to_vec(),
            tau: safety.threshold(),
            s1: game.initial_state(),
            noise: safety.noise().into(),
        }
    }

    pub fn into_model(self) -> Result<(TabularGame, SafetySpec)> {
        let (ns, na, nb, h) = (self.num_states, self.agent_actions, self.adversary_actions, self.horizon);
        let p = flatten(&self.transitions, &[h, ns, na, nb, ns], "P")?;
        let r = flatten(&self.r, &[h, ns, na, nb], "r")?;
        let game = TabularGame::new(ns, na, nb, h, p, r, self.s1)?;
        let safety = SafetySpec::new(self.c, self.tau, self.noise.into())?;
        safety.check_dims(ns)?;
        Ok((game, safety))
    }
}

/// Either kind of model file; games are recognised by their `B` field.
#[derive(Debug, Clone)]
pub enum ModelFile {
    Mdp(MdpFile),
    Game(GameFile),
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("B").is_some() {
        Ok(ModelFile::Game(serde_json::from_value(value)?))
    } else {
        Ok(ModelFile::Mdp(serde_json::from_value(value)?))
    }
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::input(path, e))?;
    parse_model(&text)
}

pub fn mdp_to_json(mdp: &TabularMdp, safety: &SafetySpec) -> String {
    serde_json::to_string(&MdpFile::from_model(mdp, safety)).expect("plain data serialises")
}

pub fn game_to_json(game: &TabularGame, safety: &SafetySpec) -> String {
    serde_json::to_string(&GameFile::from_model(game, safety)).expect("plain data serialises")
}
