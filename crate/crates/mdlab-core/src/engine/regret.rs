//! Regret notions and empirical conditional distributions.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{EngineError, SolveError};
use crate::forecast::{calibration_report, CalibrationReport, XI};
use crate::game::Game;
use crate::info::InfoStructure;

use super::Transcript;

/// Context the agent's modification rule may condition on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Notion {
    /// Policy.
    Er,
    /// Policy and own response.
    Ir,
    /// Policy, realized response and every counterfactual response.
    Cir,
    /// Forecast cell.
    Fer,
    /// Forecast cell, realized response and every counterfactual response.
    Fcir,
}

impl Notion {
    pub const ALL: [Notion; 5] = [Notion::Er, Notion::Ir, Notion::Cir, Notion::Fer, Notion::Fcir];

    pub fn name(self) -> &'static str {
        match self {
            Notion::Er => "er",
            Notion::Ir => "ir",
            Notion::Cir => "cir",
            Notion::Fer => "fer",
            Notion::Fcir => "fcir",
        }
    }
}

/// Whose payoffs are scored: the realized agent, or the clone facing a fixed alternative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trajectory {
    Realized,
    /// Index into [`Transcript::alternatives`].
    Counterfactual(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinRegret {
    pub key: Vec<usize>,
    pub count: usize,
    /// Empirical state distribution within the bin.
    pub empirical: Vec<f64>,
    pub best_response: usize,
    /// Average regret `ε_I` within the bin.
    pub regret: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentRegret {
    pub notion: Notion,
    pub value: f64,
    /// Sorted by key; `value = Σ count·regret / T`.
    pub per_bin: Vec<BinRegret>,
}

fn check_trajectory(tr: &Transcript, traj: Trajectory) -> Result<(), EngineError> {
    match traj {
        Trajectory::Counterfactual(k) if k >= tr.alternatives.len() => Err(EngineError::MissingCounterfactual(k)),
        _ => Ok(()),
    }
}

fn played(tr: &Transcript, t: usize, traj: Trajectory) -> (usize, usize, &[f64]) {
    let round = &tr.rounds[t];
    match traj {
        Trajectory::Realized => (round.policy, round.response, &round.response_dist),
        Trajectory::Counterfactual(k) => (tr.alternatives[k], round.counterfactual[k].response, &round.counterfactual[k].response_dist),
    }
}

/// Bin of round `t` under `notion`. CIR and FCIR bins use the realized
/// information for every trajectory.
pub fn bin_key(tr: &Transcript, t: usize, notion: Notion, traj: Trajectory) -> Vec<usize> {
    let round = &tr.rounds[t];
    let (p, r, _) = played(tr, t, traj);
    let with_counterfactuals = |head: usize| {
        let mut key = Vec::with_capacity(2 + round.counterfactual.len());
        key.push(head);
        key.push(round.response);
        key.extend(round.counterfactual.iter().map(|c| c.response));
        key
    };
    match notion {
        Notion::Er => vec![p],
        Notion::Ir => vec![p, r],
        Notion::Cir => with_counterfactuals(round.policy),
        Notion::Fer => vec![round.forecast_cell],
        Notion::Fcir => with_counterfactuals(round.forecast_cell),
    }
}

fn regret_with(game: &Game, tr: &Transcript, notion: Notion, traj: Trajectory, own: impl Fn(usize) -> f64) -> Result<AgentRegret, EngineError> {
    check_trajectory(tr, traj)?;
    if tr.is_empty() {
        return Err(EngineError::EmptyHorizon);
    }
    let (nr, ny) = (game.n_responses(), game.n_states());
    // per bin: (utility of each fixed response, utility actually obtained, state counts)
    let mut bins: BTreeMap<Vec<usize>, (Vec<f64>, f64, Vec<usize>)> = BTreeMap::new();
    for t in 0..tr.len() {
        let (p, _, _) = played(tr, t, traj);
        let y = tr.rounds[t].state;
        let entry = bins.entry(bin_key(tr, t, notion, traj)).or_insert_with(|| (vec![0.0; nr], 0.0, vec![0; ny]));
        for (r, acc) in entry.0.iter_mut().enumerate() {
            *acc += game.u(r, p, y);
        }
        entry.1 += own(t);
        entry.2[y] += 1;
    }
    let mut total = 0.0;
    let per_bin = bins
        .into_iter()
        .map(|(key, (fixed, got, counts))| {
            let count: usize = counts.iter().sum();
            let mut best = 0;
            for r in 1..nr {
                if fixed[r] > fixed[best] + 1e-12 {
                    best = r;
                }
            }
            total += fixed[best] - got;
            BinRegret {
                key,
                count,
                empirical: counts.iter().map(|&c| c as f64 / count as f64).collect(),
                best_response: best,
                regret: (fixed[best] - got) / count as f64,
            }
        })
        .collect();
    Ok(AgentRegret { notion, value: total / tr.len() as f64, per_bin })
}

/// Regret of the sampled responses against the best rule mapping bins to responses.
pub fn agent_regret(game: &Game, tr: &Transcript, notion: Notion, traj: Trajectory) -> Result<AgentRegret, EngineError> {
    regret_with(game, tr, notion, traj, |t| {
        let (p, r, _) = played(tr, t, traj);
        game.u(r, p, tr.rounds[t].state)
    })
}

/// External regret with the agent's utility averaged over its response distribution.
pub fn expected_external_regret(game: &Game, tr: &Transcript, traj: Trajectory) -> Result<f64, EngineError> {
    let out = regret_with(game, tr, Notion::Er, traj, |t| {
        let (p, _, dist) = played(tr, t, traj);
        let y = tr.rounds[t].state;
        dist.iter().enumerate().map(|(r, m)| m * game.u(r, p, y)).sum()
    })?;
    Ok(out.value)
}

/// `max_{p∈𝒫₀} (1/T) Σ_t (E_{μ^p_t} V − E_{μ_t} V)` over the listed alternatives.
pub fn principal_regret(tr: &Transcript, alternatives: &[usize]) -> Result<f64, EngineError> {
    if tr.is_empty() {
        return Err(EngineError::EmptyHorizon);
    }
    let realized: f64 = tr.rounds.iter().map(|r| r.expected_v).sum();
    let mut best = f64::NEG_INFINITY;
    for &p in alternatives {
        let k = tr.alternative_index(p).ok_or(EngineError::MissingCounterfactual(p))?;
        let value: f64 = tr.rounds.iter().map(|r| r.counterfactual[k].expected_v).sum();
        best = best.max(value);
    }
    if best == f64::NEG_INFINITY {
        return Err(EngineError::MissingCounterfactual(0));
    }
    Ok((best - realized) / tr.len() as f64)
}

/// Forecast calibration, aggregated over M1's contexts when present.
///
/// `per_cell` concatenates the contexts' cells, so grid indices may repeat.
pub fn calibration(tr: &Transcript) -> Result<CalibrationReport, EngineError> {
    if tr.is_empty() {
        return Err(EngineError::EmptyHorizon);
    }
    let mut groups: BTreeMap<&[usize], Vec<(usize, usize)>> = BTreeMap::new();
    for r in &tr.rounds {
        groups.entry(&r.context).or_default().push((r.forecast_cell, r.state));
    }
    let t = tr.len() as f64;
    let (mut kappa, mut iota) = (0.0, 0.0);
    let mut per_cell = Vec::new();
    for rows in groups.values() {
        let rep = calibration_report(&tr.grid, rows)?;
        let w = rows.len() as f64 / t;
        kappa += w * rep.kappa;
        iota += w * rep.iota;
        per_cell.extend(rep.per_cell);
    }
    let ny = tr.grid.n_states() as f64;
    let l12_bound = if kappa < 0.0 { 0.0 } else { libm::sqrt(2.0 * ny * kappa / XI) };
    Ok(CalibrationReport { rounds: tr.len(), kappa, iota, l12_bound, per_cell })
}

/// One CIR bin.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalBin {
    pub key: Vec<usize>,
    pub policy: usize,
    pub counts: Vec<usize>,
    pub count: usize,
    pub empirical: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyCell {
    pub policy: usize,
    pub counts: Vec<usize>,
    pub count: usize,
    pub empirical: Vec<f64>,
    /// Indices into [`EmpiricalStructures::bins`].
    pub bins: Vec<usize>,
    /// `γ̂(I, y)` row-major over (bin, state); zero where the cell never saw `y`.
    pub gamma: Vec<f64>,
}

impl PolicyCell {
    /// As a kernel; states the cell never saw get a uniform column.
    pub fn to_info_structure(&self) -> Result<InfoStructure, SolveError> {
        let (ni, ny) = (self.bins.len(), self.counts.len());
        let mut kernel = self.gamma.clone();
        for y in 0..ny {
            if self.counts[y] == 0 {
                for i in 0..ni {
                    kernel[i * ny + y] = 1.0 / ni as f64;
                }
            }
        }
        InfoStructure::new(ni, ny, kernel)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalStructures {
    pub bins: Vec<EmpiricalBin>,
    pub cells: Vec<PolicyCell>,
}

/// Per-policy empirical priors and signal kernels induced by the CIR bins.
pub fn empirical_structures(game: &Game, tr: &Transcript) -> Result<EmpiricalStructures, EngineError> {
    if tr.is_empty() {
        return Err(EngineError::EmptyHorizon);
    }
    let ny = game.n_states();
    let mut counts: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for t in 0..tr.len() {
        counts.entry(bin_key(tr, t, Notion::Cir, Trajectory::Realized)).or_insert_with(|| vec![0; ny])[tr.rounds[t].state] += 1;
    }
    let bins: Vec<EmpiricalBin> = counts
        .into_iter()
        .map(|(key, counts)| {
            let count: usize = counts.iter().sum();
            EmpiricalBin { policy: key[0], empirical: counts.iter().map(|&c| c as f64 / count as f64).collect(), key, counts, count }
        })
        .collect();
    let mut by_policy: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, b) in bins.iter().enumerate() {
        by_policy.entry(b.policy).or_default().push(i);
    }
    let cells = by_policy
        .into_iter()
        .map(|(policy, idx)| {
            let mut counts = vec![0usize; ny];
            for &i in &idx {
                for y in 0..ny {
                    counts[y] += bins[i].counts[y];
                }
            }
            let count: usize = counts.iter().sum();
            let mut gamma = vec![0.0; idx.len() * ny];
            for (row, &i) in idx.iter().enumerate() {
                for y in 0..ny {
                    if counts[y] > 0 {
                        gamma[row * ny + y] = bins[i].counts[y] as f64 / counts[y] as f64;
                    }
                }
            }
            PolicyCell { policy, empirical: counts.iter().map(|&c| c as f64 / count as f64).collect(), counts, count, bins: idx, gamma }
        })
        .collect();
    Ok(EmpiricalStructures { bins, cells })
}
