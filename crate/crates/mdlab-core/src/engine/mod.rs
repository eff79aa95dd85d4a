//! Repeated-game executor.
//!
//! Each run plays the mechanism against the learner and, alongside, one
//! seeded clone of the learner per alternative policy held fixed. Clones see
//! the same states and published forecasts and share the learner's seed.

mod bounds;
mod regret;
mod states;

pub use bounds::{bound_terms, cfl_bound_params, theorem_bound, BoundParams, BoundReport, Theorem};
pub use regret::{
    agent_regret, calibration, empirical_structures, expected_external_regret, principal_regret, AgentRegret, BinRegret, EmpiricalBin,
    EmpiricalStructures, Notion, PolicyCell, Trajectory,
};
pub use states::{iid_states, markov_states};

use alloc::vec::Vec;

use crate::error::EngineError;
use crate::forecast::ForecastGrid;
use crate::game::{Game, Prior};
use crate::learner::{AgentLearner, Learner, LearnerInput, LearnerSpec};
use crate::mechanism::{information_oracle, Mechanism, MechanismInput, MechanismKind, MechanismSpec};
use crate::rng::mix_seed;

/// What one alternative-policy clone did in a round.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterfactualRound {
    pub response: usize,
    pub response_dist: Vec<f64>,
    /// `E_{r∼μ^p_t} V(r, p, y_t)`
    pub expected_v: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    pub state: usize,
    pub forecast_cell: usize,
    /// M1's oracle context; empty for other mechanisms.
    pub context: Vec<usize>,
    pub policy: usize,
    pub response_dist: Vec<f64>,
    pub response: usize,
    pub u: f64,
    pub v: f64,
    pub expected_u: f64,
    pub expected_v: f64,
    /// Aligned with [`Transcript::alternatives`].
    pub counterfactual: Vec<CounterfactualRound>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub rounds: Vec<Round>,
    pub alternatives: Vec<usize>,
    pub grid: ForecastGrid,
    pub mechanism: MechanismSpec,
    pub learner: LearnerSpec,
    pub master_seed: u64,
    /// Horizon the learners and forecaster were tuned for.
    pub horizon: usize,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn forecast(&self, t: usize) -> &Prior {
        &self.grid.points[self.rounds[t].forecast_cell]
    }

    /// The first `t` rounds.
    pub fn prefix(&self, t: usize) -> Result<Transcript, EngineError> {
        if t == 0 || t > self.len() {
            return Err(EngineError::Checkpoint(t));
        }
        let mut out = self.clone();
        out.rounds.truncate(t);
        Ok(out)
    }

    /// Position of policy `p` among the alternatives.
    pub fn alternative_index(&self, p: usize) -> Option<usize> {
        self.alternatives.iter().position(|&q| q == p)
    }
}

/// Effective seeds derived from the master seed.
pub fn derived_seeds(master_seed: u64, mechanism: &MechanismSpec, learner: &LearnerSpec) -> (u64, u64) {
    (mix_seed(mix_seed(master_seed, 1), mechanism.seed), mix_seed(mix_seed(master_seed, 2), learner.seed))
}

pub fn run(game: &Game, mechanism: &MechanismSpec, learner: &LearnerSpec, states: &[usize], master_seed: u64) -> Result<Transcript, EngineError> {
    run_with_oracle(game, mechanism, learner, None, states, master_seed)
}

/// As [`run`], but M1's oracle replays `oracle_learner` (fed the realized
/// states and policies) instead of the realized learner.
pub fn run_with_oracle(
    game: &Game,
    mechanism: &MechanismSpec,
    learner: &LearnerSpec,
    oracle_learner: Option<&LearnerSpec>,
    states: &[usize],
    master_seed: u64,
) -> Result<Transcript, EngineError> {
    let horizon = states.len();
    if horizon == 0 {
        return Err(EngineError::EmptyHorizon);
    }
    if let Some(&y) = states.iter().find(|&&y| y >= game.n_states()) {
        return Err(EngineError::StateIndex(y));
    }
    let (mech_seed, learner_seed) = derived_seeds(master_seed, mechanism, learner);
    let mut mech = Mechanism::new(game, MechanismSpec { seed: mech_seed, ..mechanism.clone() }, horizon)?;
    let agent_spec = LearnerSpec { seed: learner_seed, ..learner.clone() };
    let mut agent = Learner::new(game, agent_spec, horizon)?;
    let mut shadow = match oracle_learner {
        Some(spec) => {
            let seed = mix_seed(mix_seed(master_seed, 3), spec.seed);
            Some(Learner::new(game, LearnerSpec { seed, ..spec.clone() }, horizon)?)
        }
        None => None,
    };
    let alternatives = mechanism.alternatives(game);
    let mut clones: Vec<Learner> = alternatives.iter().map(|_| agent.clone()).collect();
    let fixed: Vec<Vec<usize>> = alternatives.iter().map(|&q| alloc::vec![q; horizon]).collect();

    let mut ys = Vec::with_capacity(horizon);
    let mut ps = Vec::with_capacity(horizon);
    let mut rs = Vec::with_capacity(horizon);
    let mut shadow_rs = Vec::with_capacity(horizon);
    let mut cf_rs: Vec<Vec<usize>> = alternatives.iter().map(|_| Vec::with_capacity(horizon)).collect();
    let mut rounds = Vec::with_capacity(horizon);
    let mut previous = Prior::uniform(game.n_states());

    for &y in states {
        let context = if mechanism.kind == MechanismKind::M1 {
            let (who, own) = match shadow.as_ref() {
                Some(s) => (s, &shadow_rs),
                None => (&agent, &rs),
            };
            let input = LearnerInput { states: &ys, responses: own, policies: &ps, current_policy: 0, forecast: Some(&previous) };
            information_oracle(game, who, &input, &alternatives)?
        } else {
            Vec::new()
        };
        let oracle = (mechanism.kind == MechanismKind::M1).then_some(context.as_slice());
        let decision = mech.choose_policy(game, &MechanismInput { state_history: &ys, policy_history: &ps }, oracle)?;
        let p = decision.policy;
        let forecast = &decision.forecast;

        let input = LearnerInput { states: &ys, responses: &rs, policies: &ps, current_policy: p, forecast: Some(forecast) };
        let response_dist = agent.respond(game, &input)?;
        let response = agent.sample(&response_dist);
        if let Some(s) = shadow.as_mut() {
            let input = LearnerInput { states: &ys, responses: &shadow_rs, policies: &ps, current_policy: p, forecast: Some(forecast) };
            let d = s.respond(game, &input)?;
            shadow_rs.push(s.sample(&d));
            s.observe(game, y)?;
        }

        let mut counterfactual = Vec::with_capacity(alternatives.len());
        for (k, &q) in alternatives.iter().enumerate() {
            let input = LearnerInput { states: &ys, responses: &cf_rs[k], policies: &fixed[k][..ys.len()], current_policy: q, forecast: Some(forecast) };
            let dist = clones[k].respond(game, &input)?;
            let r = clones[k].sample(&dist);
            clones[k].observe(game, y)?;
            cf_rs[k].push(r);
            counterfactual.push(CounterfactualRound { response: r, expected_v: expect(&dist, |r| game.v(r, q, y)), response_dist: dist });
        }

        agent.observe(game, y)?;
        mech.observe(y)?;
        rounds.push(Round {
            state: y,
            forecast_cell: decision.forecast_cell,
            context,
            policy: p,
            u: game.u(response, p, y),
            v: game.v(response, p, y),
            expected_u: expect(&response_dist, |r| game.u(r, p, y)),
            expected_v: expect(&response_dist, |r| game.v(r, p, y)),
            response_dist,
            response,
            counterfactual,
        });
        previous = decision.forecast;
        ys.push(y);
        ps.push(p);
        rs.push(response);
    }

    Ok(Transcript {
        rounds,
        alternatives,
        grid: mech.grid().clone(),
        mechanism: mechanism.clone(),
        learner: learner.clone(),
        master_seed,
        horizon,
    })
}

fn expect(dist: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    dist.iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(r, &m)| m * f(r)).sum()
}
