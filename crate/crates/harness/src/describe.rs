//! Static summaries of an environment: dimensions, feasibility and values.

use safe_rl_core::game::{exact_minimax, GameSafetyStructures};
use safe_rl_core::{check_feasibility, safe_optimal_plan, unconstrained_plan, Error, SafetyStructures};
use serde::Serialize;

use crate::envs::Model;
use crate::error::Result;
use crate::format::NoiseTag;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvSummary {
    pub kind: &'static str,
    pub states: usize,
    pub actions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary_actions: Option<usize>,
    pub horizon: usize,
    pub initial_state: usize,
    pub tau: f64,
    pub noise: NoiseTag,
    pub unsafe_states: Vec<usize>,
    /// `min (c(s) - τ)_+` over unsafe states.
    pub cost_gap: Option<f64>,
    pub feasible: bool,
    /// Safe optimum (minimax value for games); absent when infeasible.
    pub safe_value: Option<f64>,
    /// Optimum with every state treated as safe.
    pub unconstrained_value: f64,
}

pub fn summarize(model: &Model) -> Result<EnvSummary> {
    let safety = model.safety();
    let unsafe_states: Vec<usize> =
        safety.unsafe_states().iter().enumerate().filter(|(_, &u)| u).map(|(s, _)| s).collect();
    let (kind, dims, feasible, safe_value, unconstrained_value) = match model {
        Model::Mdp(mdp, _) => {
            let st = SafetyStructures::analyze(mdp, safety)?;
            let s1 = mdp.initial_state();
            let feasible = check_feasibility(&st, s1);
            let safe = feasible.then(|| safe_optimal_plan(mdp, &st, None)).transpose()?.map(|p| p.initial_value(s1));
            let free = unconstrained_plan(mdp, None)?.initial_value(s1);
            ("mdp", (mdp.num_states(), mdp.num_actions(), None, mdp.horizon(), s1), feasible, safe, free)
        }
        Model::Game(game, _) => {
            let s1 = game.initial_state();
            let safe = match exact_minimax(game, safety) {
                Ok(plan) => Some(plan.initial_value(s1)),
                Err(Error::Feasibility { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            // no cost exceeds a threshold of 1
            let free = exact_minimax(game, &safety.with_threshold(1.0)?)?.initial_value(s1);
            let dims = (game.num_states(), game.agent_actions(), Some(game.adversary_actions()), game.horizon(), s1);
            ("game", dims, safe.is_some(), safe, free)
        }
    };
    let (states, actions, adversary_actions, horizon, initial_state) = dims;
    Ok(EnvSummary {
        kind,
        states,
        actions,
        adversary_actions,
        horizon,
        initial_state,
        tau: safety.threshold(),
        noise: safety.noise().into(),
        unsafe_states,
        cost_gap: safety.cost_gap(),
        feasible,
        safe_value,
        unconstrained_value,
    })
}

impl std::fmt::Display for EnvSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "kind            {}", self.kind)?;
        match self.adversary_actions {
            Some(b) => writeln!(f, "S, A, B, H      {}, {}, {b}, {}", self.states, self.actions, self.horizon)?,
            None => writeln!(f, "S, A, H         {}, {}, {}", self.states, self.actions, self.horizon)?,
        }
        writeln!(f, "initial state   {}", self.initial_state)?;
        writeln!(f, "tau             {}", self.tau)?;
        writeln!(f, "noise           {:?}", self.noise)?;
        writeln!(f, "unsafe states   {:?}", self.unsafe_states)?;
        match self.cost_gap {
            Some(g) => writeln!(f, "cost gap        {g}")?,
            None => writeln!(f, "cost gap        -")?,
        }
        writeln!(f, "feasible        {}", self.feasible)?;
        match self.safe_value {
            Some(v) => writeln!(f, "safe value      {v}")?,
            None => writeln!(f, "safe value      -")?,
        }
        write!(f, "unconstrained   {}", self.unconstrained_value)
    }
}

/// Per-step unsafe sets and safe actions, one line per step.
pub fn analysis_report(model: &Model) -> Result<String> {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    let join = |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let (horizon, ns, feasible) = match model {
        Model::Mdp(mdp, safety) => {
            let st = SafetyStructures::analyze(mdp, safety)?;
            for h in 0..mdp.horizon() {
                line(format!("h={} U=[{}]", h + 1, join(&st.unsafe_list(h))));
                for s in (0..mdp.num_states()).filter(|&s| !st.is_unsafe(h, s)) {
                    line(format!("  s={s} safe=[{}]", join(&st.safe_action_list(h, s))));
                }
            }
            (mdp.horizon(), mdp.num_states(), check_feasibility(&st, mdp.initial_state()))
        }
        Model::Game(game, safety) => {
            let st = GameSafetyStructures::analyze(game, safety)?;
            for h in 0..game.horizon() {
                let u: Vec<usize> = (0..game.num_states()).filter(|&s| st.is_unsafe(h, s)).collect();
                line(format!("h={} U=[{}]", h + 1, join(&u)));
                for s in (0..game.num_states()).filter(|&s| !st.is_unsafe(h, s)) {
                    let safe: Vec<usize> = (0..game.agent_actions()).filter(|&a| st.is_safe_action(h, s, a)).collect();
                    line(format!("  s={s} safe=[{}]", join(&safe)));
                }
            }
            (game.horizon(), game.num_states(), st.is_feasible(game.initial_state()))
        }
    };
    let summary = summarize(model)?;
    line(format!("H={horizon} S={ns} feasible={feasible}"));
    match summary.safe_value {
        Some(v) => line(format!("V*_1(s1)={v}")),
        None => line("V*_1(s1)=-".into()),
    }
    Ok(out)
}
