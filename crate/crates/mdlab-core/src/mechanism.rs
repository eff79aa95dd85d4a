//! Principal-side mechanisms.
//!
//! [`MechanismInput`] carries states and policies only, so no mechanism can
//! condition on the agent's past responses.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{LearnerError, MechanismError};
use crate::forecast::{ContextualForecaster, ForecastGrid};
use crate::game::{robust_policy, Game, Prior};
use crate::info::info_robust_policy;
use crate::learner::{AgentLearner, LearnerInput};
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MechanismKind {
    /// Always the same policy.
    Constant,
    /// Robust policy under a forecaster keyed by the information oracle's context.
    M1,
    /// Robust policy under a single forecaster.
    M2,
    /// Informationally robust policy under a single forecaster.
    M3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    pub epsilon_bar: f64,
    pub fixed_policy: usize,
    /// Forecast grid step `δ_𝓕`.
    pub grid_delta: f64,
    /// Alternatives `𝒫₀`; empty means every policy.
    pub alternatives: Vec<usize>,
    pub seed: u64,
}

impl MechanismSpec {
    pub fn constant(policy: usize, grid_delta: f64, seed: u64) -> Self {
        Self { kind: MechanismKind::Constant, epsilon_bar: 0.0, fixed_policy: policy, grid_delta, alternatives: Vec::new(), seed }
    }

    pub fn robust(kind: MechanismKind, epsilon_bar: f64, grid_delta: f64, seed: u64) -> Self {
        Self { kind, epsilon_bar, fixed_policy: 0, grid_delta, alternatives: Vec::new(), seed }
    }

    /// The alternatives, with the empty list expanded to every policy.
    pub fn alternatives(&self, game: &Game) -> Vec<usize> {
        if self.alternatives.is_empty() {
            (0..game.n_policies()).collect()
        } else {
            self.alternatives.clone()
        }
    }

    pub fn validate(&self, game: &Game) -> Result<(), MechanismError> {
        if self.kind != MechanismKind::Constant && !(self.epsilon_bar > 0.0 && self.epsilon_bar.is_finite()) {
            return Err(MechanismError::EpsilonBar);
        }
        if self.kind == MechanismKind::Constant && self.fixed_policy >= game.n_policies() {
            return Err(MechanismError::PolicyIndex(self.fixed_policy));
        }
        if let Some(&p) = self.alternatives.iter().find(|&&p| p >= game.n_policies()) {
            return Err(MechanismError::PolicyIndex(p));
        }
        Ok(())
    }
}

/// History visible to the principal before round `t`.
#[derive(Clone, Copy, Debug)]
pub struct MechanismInput<'a> {
    pub state_history: &'a [usize],
    pub policy_history: &'a [usize],
}

/// A round's choice: policy plus the published forecast.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub policy: usize,
    pub forecast: Prior,
    pub forecast_cell: usize,
}

#[derive(Clone, Debug)]
pub struct Mechanism {
    spec: MechanismSpec,
    forecasters: ContextualForecaster,
    rng: Rng,
    /// Grid index → policy, filled lazily.
    cache: BTreeMap<usize, usize>,
    pending: Option<Vec<usize>>,
}

impl Mechanism {
    pub fn new(game: &Game, spec: MechanismSpec, horizon: usize) -> Result<Self, MechanismError> {
        spec.validate(game)?;
        let grid = ForecastGrid::new(game.n_states(), spec.grid_delta)?;
        Ok(Self {
            forecasters: ContextualForecaster::new(grid, horizon, spec.seed),
            rng: rng::seeded(spec.seed),
            spec,
            cache: BTreeMap::new(),
            pending: None,
        })
    }

    pub fn spec(&self) -> &MechanismSpec {
        &self.spec
    }

    pub fn grid(&self) -> &ForecastGrid {
        self.forecasters.grid()
    }

    /// Number of forecaster contexts seen so far.
    pub fn contexts(&self) -> usize {
        self.forecasters.contexts()
    }

    /// Forecast and policy for the coming round. `oracle` is the M1 context.
    /// States reach the forecaster through [`observe`](Self::observe).
    pub fn choose_policy(&mut self, game: &Game, _input: &MechanismInput<'_>, oracle: Option<&[usize]>) -> Result<Decision, MechanismError> {
        let key: Vec<usize> = match (self.spec.kind, oracle) {
            (MechanismKind::M1, Some(ctx)) => ctx.to_vec(),
            (MechanismKind::M1, None) => return Err(MechanismError::MissingOracle),
            (_, Some(_)) => return Err(MechanismError::UnexpectedOracle),
            (_, None) => Vec::new(),
        };
        let prediction = self.forecasters.get(&key).predict_with(&mut self.rng);
        let cell = prediction.index;
        let forecast = self.forecasters.grid().points[cell].clone();
        self.pending = Some(key);
        let policy = match self.spec.kind {
            MechanismKind::Constant => self.spec.fixed_policy,
            kind => match self.cache.get(&cell) {
                Some(&p) => p,
                None => {
                    let p = if kind == MechanismKind::M3 {
                        info_robust_policy(game, &forecast, self.spec.epsilon_bar)?.0
                    } else {
                        robust_policy(game, &forecast, self.spec.epsilon_bar)?.policy
                    };
                    self.cache.insert(cell, p);
                    p
                }
            },
        };
        Ok(Decision { policy, forecast, forecast_cell: cell })
    }

    /// Reveal the state to the forecaster used this round.
    pub fn observe(&mut self, outcome: usize) -> Result<(), MechanismError> {
        let key = self.pending.take().ok_or(crate::error::ForecastError::UpdateWithoutPredict)?;
        self.forecasters.get(&key).update(outcome)?;
        Ok(())
    }
}

/// M1's context: the response each seeded clone of `learner` would sample
/// under each alternative policy, given the realized history.
pub fn information_oracle<L: AgentLearner>(game: &Game, learner: &L, input: &LearnerInput<'_>, alternatives: &[usize]) -> Result<Vec<usize>, LearnerError> {
    alternatives
        .iter()
        .map(|&p| {
            let mut clone = learner.clone();
            let dist = clone.respond(game, &LearnerInput { current_policy: p, ..*input })?;
            Ok(clone.sample(&dist))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{CoverRadii, GameParts, Lipschitz, Metric};
    use crate::learner::{Learner, LearnerKind, LearnerSpec};
    use alloc::format;
    use alloc::string::String;
    use alloc::vec;

    fn toy() -> Game {
        let names = |p: &str, n: usize| -> Vec<String> { (0..n).map(|i| format!("{p}{i}")).collect() };
        // response 0 pays the agent in state 0; policy 1 shifts the principal's value
        let mut u = vec![0.0; 8];
        let mut v = vec![0.0; 8];
        for r in 0..2 {
            for p in 0..2 {
                for y in 0..2 {
                    u[(r * 2 + p) * 2 + y] = if r == y { 1.0 } else { 0.0 };
                    v[(r * 2 + p) * 2 + y] = if r == 0 { 0.8 } else { 0.2 + 0.1 * p as f64 };
                }
            }
        }
        Game::new(GameParts {
            states: names("y", 2),
            responses: names("r", 2),
            policies: names("p", 2),
            u,
            v,
            response_metric: Metric::Discrete,
            policy_metric: Metric::Discrete,
            lipschitz: Lipschitz::UNIT,
            cover_radii: CoverRadii::default(),
        })
        .unwrap()
    }

    #[test]
    fn constant_ignores_history() {
        let g = toy();
        let mut m = Mechanism::new(&g, MechanismSpec::constant(1, 0.5, 3), 10).unwrap();
        for t in 0..5 {
            let ys = vec![t % 2; t];
            let d = m.choose_policy(&g, &MechanismInput { state_history: &ys, policy_history: &ys }, None).unwrap();
            assert_eq!(d.policy, 1);
            m.observe(t % 2).unwrap();
        }
    }

    #[test]
    fn oracle_contract() {
        let g = toy();
        let mut m1 = Mechanism::new(&g, MechanismSpec::robust(MechanismKind::M1, 0.1, 0.5, 1), 10).unwrap();
        let input = MechanismInput { state_history: &[], policy_history: &[] };
        assert_eq!(m1.choose_policy(&g, &input, None), Err(MechanismError::MissingOracle));
        let mut m2 = Mechanism::new(&g, MechanismSpec::robust(MechanismKind::M2, 0.1, 0.5, 1), 10).unwrap();
        assert_eq!(m2.choose_policy(&g, &input, Some(&[0])), Err(MechanismError::UnexpectedOracle));
        assert_eq!(Mechanism::new(&g, MechanismSpec::robust(MechanismKind::M3, 0.0, 0.5, 1), 10).unwrap_err(), MechanismError::EpsilonBar);
        assert!(m2.observe(0).is_err());
    }

    #[test]
    fn policy_blind_learner_gives_constant_context() {
        let g = toy();
        let prior = Prior::new(vec![0.3, 0.7]).unwrap();
        let l = Learner::new(&g, LearnerSpec::new(LearnerKind::FixedPriorBayes { prior }, 5), 10).unwrap();
        let input = LearnerInput { states: &[], responses: &[], policies: &[], current_policy: 0, forecast: None };
        assert_eq!(information_oracle(&g, &l, &input, &[0, 1]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn m1_with_constant_context_matches_m2() {
        let g = toy();
        let mut m1 = Mechanism::new(&g, MechanismSpec::robust(MechanismKind::M1, 0.1, 0.25, 9), 50).unwrap();
        let mut m2 = Mechanism::new(&g, MechanismSpec::robust(MechanismKind::M2, 0.1, 0.25, 9), 50).unwrap();
        let input = MechanismInput { state_history: &[], policy_history: &[] };
        for t in 0..50 {
            let a = m1.choose_policy(&g, &input, Some(&[1, 1])).unwrap();
            let b = m2.choose_policy(&g, &input, None).unwrap();
            assert_eq!(a, b);
            m1.observe((t * 7) % 3 % 2).unwrap();
            m2.observe((t * 7) % 3 % 2).unwrap();
        }
    }
}
