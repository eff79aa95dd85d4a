//! Agent-side learners.
//!
//! Every learner exposes its response *distribution*; the engine samples from
//! it with the learner's own seeded stream, so clones replay identically
//! (common random numbers across counterfactual trajectories).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::LearnerError;
use crate::game::{Game, Prior};
use crate::rng::{self, Rng};

/// What the agent sees before responding in round `t`.
#[derive(Clone, Copy, Debug)]
pub struct LearnerInput<'a> {
    pub states: &'a [usize],
    pub responses: &'a [usize],
    pub policies: &'a [usize],
    pub current_policy: usize,
    pub forecast: Option<&'a Prior>,
}

impl LearnerInput<'_> {
    pub fn round(&self) -> usize {
        self.states.len()
    }

    fn check(&self, game: &Game) -> Result<(), LearnerError> {
        if self.responses.len() != self.states.len() || self.policies.len() != self.states.len() {
            return Err(LearnerError::Input(format!(
                "history lengths {}/{}/{}",
                self.states.len(),
                self.responses.len(),
                self.policies.len()
            )));
        }
        if self.current_policy >= game.n_policies() {
            return Err(LearnerError::Input(format!("policy {} out of range", self.current_policy)));
        }
        Ok(())
    }
}

/// The interface the engine drives.
pub trait AgentLearner: Clone {
    /// Response distribution for this round.
    fn respond(&mut self, game: &Game, input: &LearnerInput<'_>) -> Result<Vec<f64>, LearnerError>;
    /// Draw a response from `dist` with the learner's own stream.
    fn sample(&mut self, dist: &[f64]) -> usize;
    /// Reveal the state.
    fn observe(&mut self, game: &Game, outcome: usize) -> Result<(), LearnerError>;
}

/// The scripted adversaries' trigger sets and state sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub states: Vec<usize>,
    pub trigger_policies: Vec<usize>,
    pub trigger_states: Vec<usize>,
}

impl Script {
    /// Whether the first-round pair `(y₁, p₁)` selects best-in-hindsight play
    /// (both inside the triggers or both outside).
    pub fn follows_hindsight(&self, first_policy: usize) -> bool {
        let in_y = self.trigger_states.contains(&self.states[0]);
        let in_p = self.trigger_policies.contains(&first_policy);
        in_y == in_p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LearnerKind {
    /// Best response to the published forecast.
    Cfl,
    /// Hedge over responses, one weight vector per policy; `η` defaults to `√(8 ln|R|/T)`.
    ExpWeights { eta: Option<f64> },
    /// Best response to a fixed prior.
    FixedPriorBayes { prior: Prior },
    /// Predicts the script and uses it only off the trigger diagonal.
    /// With `fallback`, switches to exponential weights once the states leave the script.
    SelectiveSuperefficiency { script: Script, fallback: bool },
    /// Off the trigger diagonal, plays the per-round optimum with probability
    /// `mix` and the pessimum otherwise; `mix` is calibrated per policy when absent.
    SelectiveSuperinefficiency { script: Script, mix: Option<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn validate(&self, game: &Game) -> Result<(), LearnerError> {
        match &self.kind {
            LearnerKind::SelectiveSuperefficiency { script, .. } | LearnerKind::SelectiveSuperinefficiency { script, .. } => {
                if script.states.is_empty() {
                    return Err(LearnerError::MissingScript);
                }
                if script.states.iter().chain(&script.trigger_states).any(|&y| y >= game.n_states())
                    || script.trigger_policies.iter().any(|&p| p >= game.n_policies())
                {
                    return Err(LearnerError::Input("script refers to unknown states or policies".into()));
                }
                if let LearnerKind::SelectiveSuperinefficiency { mix: Some(q), .. } = &self.kind {
                    if !(0.0..=1.0).contains(q) {
                        return Err(LearnerError::Input("mix must lie in [0, 1]".into()));
                    }
                }
            }
            LearnerKind::FixedPriorBayes { prior } => game.check_prior(prior)?,
            LearnerKind::ExpWeights { eta: Some(e) } if !(e.is_finite() && *e >= 0.0) => {
                return Err(LearnerError::Input("eta must be finite and non-negative".into()))
            }
            _ => {}
        }
        Ok(())
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 + 1e-12 {
            best = (i, v);
        }
    }
    best.0
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    argmax(values.map(|v| -v))
}

fn point_mass(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// `argmax_r E_π U(r, p, ·)`, lowest index on ties.
pub fn best_response(game: &Game, policy: usize, prior: &Prior) -> usize {
    argmax((0..game.n_responses()).map(|r| game.expected_u(r, policy, prior)))
}

/// Best-in-hindsight response to a state sequence under a fixed policy.
pub fn hindsight_response(game: &Game, policy: usize, states: &[usize]) -> usize {
    argmax((0..game.n_responses()).map(|r| states.iter().map(|&y| game.u(r, policy, y)).sum::<f64>()))
}

/// Ex-post optimal response to state `y` (lowest index on ties).
pub fn ex_post_optimum(game: &Game, policy: usize, y: usize) -> usize {
    argmax((0..game.n_responses()).map(|r| game.u(r, policy, y)))
}

/// Ex-post worst response to state `y` (lowest index on ties).
pub fn ex_post_pessimum(game: &Game, policy: usize, y: usize) -> usize {
    argmin((0..game.n_responses()).map(|r| game.u(r, policy, y)))
}

/// Mixing probability `q` that zeroes the Ex3 learner's expected external
/// regret on `states` under the constant policy `policy`.
pub fn calibrate_ex3_q(game: &Game, states: &[usize], policy: usize) -> Result<f64, LearnerError> {
    if states.is_empty() {
        return Err(LearnerError::MissingScript);
    }
    let t = states.len() as f64;
    let star = hindsight_response(game, policy, states);
    let best: f64 = states.iter().map(|&y| game.u(star, policy, y)).sum::<f64>() / t;
    let top: f64 = states.iter().map(|&y| game.u(ex_post_optimum(game, policy, y), policy, y)).sum::<f64>() / t;
    let bottom: f64 = states.iter().map(|&y| game.u(ex_post_pessimum(game, policy, y), policy, y)).sum::<f64>() / t;
    let regret = |q: f64| best - (q * top + (1.0 - q) * bottom);
    if regret(0.0) <= 1e-12 || regret(1.0) > 0.0 {
        return Err(LearnerError::NoRoot);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if regret(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Concrete learners built from a [`LearnerSpec`].
#[derive(Clone, Debug)]
pub struct Learner {
    spec: LearnerSpec,
    horizon: usize,
    rng: Rng,
    round: usize,
    pending: Option<usize>,
    /// Exponential-weights state per policy (own kind or Ex2 fallback).
    weights: BTreeMap<usize, Vec<f64>>,
    eta: f64,
    hindsight: BTreeMap<usize, usize>,
    mixes: BTreeMap<usize, f64>,
    off_script: bool,
}

impl Learner {
    pub fn new(game: &Game, spec: LearnerSpec, horizon: usize) -> Result<Self, LearnerError> {
        spec.validate(game)?;
        let default_eta = libm::sqrt(8.0 * libm::log(game.n_responses() as f64) / horizon.max(1) as f64);
        let eta = match &spec.kind {
            LearnerKind::ExpWeights { eta: Some(e) } => *e,
            _ => default_eta,
        };
        Ok(Self {
            rng: rng::seeded(spec.seed),
            spec,
            horizon,
            round: 0,
            pending: None,
            weights: BTreeMap::new(),
            eta,
            hindsight: BTreeMap::new(),
            mixes: BTreeMap::new(),
            off_script: false,
        })
    }

    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }
    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn round(&self) -> usize {
        self.round
    }

    fn exp_weights(&mut self, game: &Game, policy: usize) -> Vec<f64> {
        let w = self.weights.entry(policy).or_insert_with(|| vec![1.0; game.n_responses()]);
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    }

    fn scripted(&mut self, game: &Game, script: &Script, input: &LearnerInput<'_>, mix: Option<Option<f64>>) -> Result<Vec<f64>, LearnerError> {
        let t = input.round();
        let y = *script.states.get(t).ok_or_else(|| LearnerError::Input(format!("round {} beyond the script", t + 1)))?;
        let p = input.current_policy;
        let first_policy = input.policies.first().copied().unwrap_or(p);
        let nr = game.n_responses();
        if script.follows_hindsight(first_policy) {
            let star = *self.hindsight.entry(p).or_insert_with(|| hindsight_response(game, p, &script.states));
            return Ok(point_mass(nr, star));
        }
        let top = ex_post_optimum(game, p, y);
        match mix {
            None => Ok(point_mass(nr, top)),
            Some(fixed) => {
                let q = match fixed {
                    Some(q) => q,
                    None => match self.mixes.get(&p) {
                        Some(q) => *q,
                        None => {
                            let q = calibrate_ex3_q(game, &script.states, p)?;
                            self.mixes.insert(p, q);
                            q
                        }
                    },
                };
                let bottom = ex_post_pessimum(game, p, y);
                let mut d = vec![0.0; nr];
                d[top] += q;
                d[bottom] += 1.0 - q;
                Ok(d)
            }
        }
    }
}

impl AgentLearner for Learner {
    fn respond(&mut self, game: &Game, input: &LearnerInput<'_>) -> Result<Vec<f64>, LearnerError> {
        input.check(game)?;
        let p = input.current_policy;
        let kind = self.spec.kind.clone();
        let dist = match &kind {
            LearnerKind::Cfl => {
                let forecast = input.forecast.ok_or(LearnerError::MissingForecast)?;
                game.check_prior(forecast)?;
                point_mass(game.n_responses(), best_response(game, p, forecast))
            }
            LearnerKind::FixedPriorBayes { prior } => point_mass(game.n_responses(), best_response(game, p, prior)),
            LearnerKind::ExpWeights { .. } => self.exp_weights(game, p),
            LearnerKind::SelectiveSuperefficiency { script, fallback } => {
                let t = input.round();
                if *fallback && (self.off_script || input.states != &script.states[..t.min(script.states.len())] || t >= script.states.len()) {
                    self.off_script = true;
                    self.exp_weights(game, p)
                } else {
                    self.scripted(game, script, input, None)?
                }
            }
            LearnerKind::SelectiveSuperinefficiency { script, mix } => self.scripted(game, script, input, Some(*mix))?,
        };
        self.pending = Some(p);
        Ok(dist)
    }

    fn sample(&mut self, dist: &[f64]) -> usize {
        rng::sample(&mut self.rng, dist)
    }

    fn observe(&mut self, game: &Game, outcome: usize) -> Result<(), LearnerError> {
        let p = self.pending.take().ok_or(LearnerError::ObserveBeforeRespond)?;
        if outcome >= game.n_states() {
            return Err(LearnerError::Input(format!("state {outcome} out of range")));
        }
        let tracks_weights = matches!(
            self.spec.kind,
            LearnerKind::ExpWeights { .. } | LearnerKind::SelectiveSuperefficiency { fallback: true, .. }
        );
        if tracks_weights {
            let eta = self.eta;
            let w = self.weights.entry(p).or_insert_with(|| vec![1.0; game.n_responses()]);
            for (r, x) in w.iter_mut().enumerate() {
                *x *= libm::exp(eta * game.u(r, p, outcome));
            }
            let top = w.iter().cloned().fold(0.0, f64::max);
            w.iter_mut().for_each(|x| *x = (*x / top).max(f64::MIN_POSITIVE));
        }
        self.round += 1;
        Ok(())
    }
}
