//! Scripted adversaries against constant mechanisms on the judge-prosecutor game.
//!
//! Two constant policies straddle the learner's policy trigger. For each one
//! the state trigger is chosen so that this mechanism is the one under which
//! the learner abandons its best-in-hindsight response. Every checkpoint is
//! a separate run on the corresponding prefix of one state script, since the
//! learner's plan depends on the whole script.

use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{expected_external_regret, principal_regret, run, Trajectory};
use crate::error::EngineError;
use crate::game::Prior;
use crate::learner::{LearnerKind, LearnerSpec, Script};
use crate::mechanism::MechanismSpec;
use crate::scenario::{judge_policy, judge_prosecutor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// The superefficient learner: plays the per-round optimum off the trigger diagonal.
    Prop1,
    /// The superinefficient learner, mixed so that its expected external regret is zero.
    Prop2,
}

/// Fixed ingredients of the construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImpossibilitySetup {
    /// Frequency of the guilty state in the script.
    pub guilty: f64,
    pub policy_step: f64,
    /// The trigger policy `q ∈ P`.
    pub inside: f64,
    /// The policy `q̃ ∉ P`.
    pub outside: f64,
    pub forecast_delta: f64,
}

impl Default for ImpossibilitySetup {
    fn default() -> Self {
        Self { guilty: 0.45, policy_step: 0.05, inside: 0.5, outside: 0.55, forecast_delta: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MechanismOutcome {
    pub policy: usize,
    pub principal_regret: f64,
    /// External regret averaged over the learner's response distributions.
    pub expected_er: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub horizon: usize,
    pub outcomes: Vec<MechanismOutcome>,
}

impl Checkpoint {
    pub fn min_principal_regret(&self) -> f64 {
        self.outcomes.iter().map(|o| o.principal_regret).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_expected_er(&self) -> f64 {
        self.outcomes.iter().map(|o| o.expected_er.abs()).fold(0.0, f64::max)
    }
}

/// Default checkpoints: a quarter, half and all of the horizon.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [horizon / 4, horizon / 2, horizon].into_iter().filter(|&t| t > 0).collect();
    out.dedup();
    out
}

pub fn run_construction(
    construction: Construction,
    setup: &ImpossibilitySetup,
    horizon: usize,
    checkpoints: &[usize],
    seed: u64,
) -> Result<Vec<Checkpoint>, EngineError> {
    let scenario = judge_prosecutor(setup.guilty, setup.policy_step)?;
    let game = &scenario.game;
    let lookup = |q: f64| judge_policy(q, setup.policy_step).ok_or(EngineError::MissingParameter("policy on grid"));
    let (inside, outside) = (lookup(setup.inside)?, lookup(setup.outside)?);
    let script = crate::engine::iid_states(&Prior::new(vec![1.0 - setup.guilty, setup.guilty])?, horizon, seed);
    let mut out = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        if t == 0 || t > horizon {
            return Err(EngineError::Checkpoint(t));
        }
        let states = &script[..t];
        let first = states[0];
        let mut outcomes = Vec::with_capacity(2);
        for policy in [inside, outside] {
            // inside: keep y₁ out of the state trigger; outside: put it in
            let trigger_state = if policy == inside { 1 - first } else { first };
            let script = Script { states: states.to_vec(), trigger_policies: vec![inside], trigger_states: vec![trigger_state] };
            let kind = match construction {
                Construction::Prop1 => LearnerKind::SelectiveSuperefficiency { script, fallback: false },
                Construction::Prop2 => LearnerKind::SelectiveSuperinefficiency { script, mix: None },
            };
            let mut mech = MechanismSpec::constant(policy, setup.forecast_delta, seed);
            mech.alternatives = vec![inside, outside];
            let tr = run(game, &mech, &LearnerSpec::new(kind, seed), states, seed)?;
            outcomes.push(MechanismOutcome {
                policy,
                principal_regret: principal_regret(&tr, &tr.alternatives)?,
                expected_er: expected_external_regret(game, &tr, Trajectory::Realized)?,
            });
        }
        out.push(Checkpoint { horizon: t, outcomes });
    }
    Ok(out)
}
