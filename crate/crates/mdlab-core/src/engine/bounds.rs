//! Explicit-constant principal-regret bounds.
//!
//! Each theorem's right-hand side is a main term built from empirical
//! conditional priors plus additive penalties in `ε`, `ι` and the cover radii.

use alloc::vec::Vec;

use crate::error::EngineError;
use crate::forecast::apriori_iota_bound;
use crate::game::{cost_of_robustness, CoverRadii, Game, Lipschitz, Prior};
use crate::info::cost_of_info_robustness;

use super::regret::{agent_regret, calibration, Notion, Trajectory};
use super::Transcript;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    /// Informed principal (M1): Δ over information bins.
    T4,
    /// Uninformed agent (M2): Δ over forecast cells, with alignment terms.
    T5,
    /// Informed agent (M3): ∇ over forecast cells.
    T6,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::T4 => "t4",
            Theorem::T5 => "t5",
            Theorem::T6 => "t6",
        }
    }
}

/// Behavioural assumptions. `epsilon` bounds FCIR, `epsilon_tilde` bounds
/// −FER, `m1`/`m2` are alignment constants (T5 only).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundParams {
    pub epsilon: Option<f64>,
    pub epsilon_tilde: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub theorem: Theorem,
    /// `(1/T) Σ n Δ(π̂, ε̄)` or its ∇ analogue.
    pub main: f64,
    /// Bound with the measured miscalibration.
    pub value: f64,
    /// Bound with the a-priori miscalibration.
    pub value_apriori: f64,
    pub iota: f64,
    pub iota_apriori: f64,
    pub params: BoundParams,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64, EngineError> {
    v.ok_or(EngineError::MissingParameter(name))
}

/// Assemble the right-hand side from its ingredients.
pub fn bound_terms(
    theorem: Theorem,
    main: f64,
    iota: f64,
    params: &BoundParams,
    k: Lipschitz,
    radii: CoverRadii,
    epsilon_bar: f64,
) -> Result<f64, EngineError> {
    let eps = need(params.epsilon, "epsilon")?;
    let (dr, dp) = (radii.response, radii.policy);
    match theorem {
        Theorem::T4 | Theorem::T6 => Ok(main
            + 2.0 * (eps + 2.0 * iota + k.u_response * dr + k.u_policy * dp) / epsilon_bar
            + (2.0 * iota + 2.0 * k.v_response * dr + k.v_policy * dp)),
        Theorem::T5 => {
            let et = need(params.epsilon_tilde, "epsilon_tilde")?;
            let m1 = need(params.m1, "m1")?;
            let m2 = need(params.m2, "m2")?;
            Ok(main
                + (2.0 * eps + 6.0 * iota + 2.0 * k.u_response * dr + 2.0 * k.u_policy * dp) / epsilon_bar
                + m1 * (2.0 * eps + 2.0 * et + 2.0 * iota + 2.0 * k.u_policy * dp)
                + 2.0 * m2
                + 3.0 * iota
                + 2.0 * k.v_response * dr
                + k.v_policy * dp)
        }
    }
}

/// Parameters a common-forecast learner provably meets on this transcript:
/// measured FCIR and FER over the realized and every counterfactual
/// trajectory, with both alignment constants zero.
pub fn cfl_bound_params(game: &Game, tr: &Transcript) -> Result<BoundParams, EngineError> {
    let mut trajectories = Vec::with_capacity(1 + tr.alternatives.len());
    trajectories.push(Trajectory::Realized);
    trajectories.extend((0..tr.alternatives.len()).map(Trajectory::Counterfactual));
    let (mut fcir, mut fer) = (0.0f64, f64::INFINITY);
    for traj in trajectories {
        fcir = fcir.max(agent_regret(game, tr, Notion::Fcir, traj)?.value);
        fer = fer.min(agent_regret(game, tr, Notion::Fer, traj)?.value);
    }
    Ok(BoundParams { epsilon: Some(fcir), epsilon_tilde: Some((-fer).max(0.0)), m1: Some(0.0), m2: Some(0.0) })
}

/// Evaluate a theorem's bound on a transcript (or a prefix of one).
pub fn theorem_bound(game: &Game, tr: &Transcript, theorem: Theorem, params: &BoundParams) -> Result<BoundReport, EngineError> {
    let epsilon_bar = tr.mechanism.epsilon_bar;
    let notion = if theorem == Theorem::T4 { Notion::Fcir } else { Notion::Fer };
    let bins = agent_regret(game, tr, notion, Trajectory::Realized)?.per_bin;
    let mut main = 0.0;
    for bin in &bins {
        let prior = Prior::normalized(bin.empirical.clone())?;
        let cost = match theorem {
            Theorem::T6 => cost_of_info_robustness(game, &prior, epsilon_bar)?,
            _ => cost_of_robustness(game, &prior, epsilon_bar)?,
        };
        main += bin.count as f64 * cost;
    }
    main /= tr.len() as f64;

    let iota = calibration(tr)?.iota;
    let (ny, nf, t, delta) = (game.n_states(), tr.grid.len(), tr.len(), tr.grid.delta);
    let iota_apriori = if theorem == Theorem::T4 {
        // context space of the oracle: one response cell per alternative
        let contexts = libm::pow(game.n_responses() as f64, tr.alternatives.len() as f64);
        let (nyf, nff) = (ny as f64, nf as f64);
        libm::pow(contexts / t as f64, 0.25) * libm::sqrt(nyf * nff * libm::sqrt(2.0 * libm::log(nff))) + libm::sqrt(2.0 * nyf * delta)
    } else {
        apriori_iota_bound(ny, nf, t, delta)
    };
    let value = bound_terms(theorem, main, iota, params, game.lipschitz(), game.cover_radii(), epsilon_bar)?;
    let value_apriori = bound_terms(theorem, main, iota_apriori, params, game.lipschitz(), game.cover_radii(), epsilon_bar)?;
    Ok(BoundReport { theorem, main, value, value_apriori, iota, iota_apriori, params: *params })
}
