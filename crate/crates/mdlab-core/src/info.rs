//! Private agent signals.
//!
//! Under a known kernel γ the agent picks one response distribution per
//! signal, with a single ε budget shared across signals. The worst and best
//! case over *unknown* kernels are solved in recommendation form: a joint
//! ψ(r, y) with `Σ_r ψ(r, y) = π(y)` and per-recommendation slacks
//! `z_r ≥ Σ_y ψ(r, y)[U(r′, p, y) − U(r, p, y)]`, `Σ z_r ≤ ε`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::SolveError;
use crate::game::{check_epsilon, clean_distribution, Game, Prior};
use crate::lp::{self, LinearProgram, LpStatus, Relation, Sense};

const COLUMN_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

/// Kernel `γ(I, y)` stored row-major over (signal, state).
#[derive(Clone, Debug, PartialEq)]
pub struct InfoStructure {
    n_signals: usize,
    n_states: usize,
    kernel: Vec<f64>,
}

impl InfoStructure {
    pub fn new(n_signals: usize, n_states: usize, kernel: Vec<f64>) -> Result<Self, SolveError> {
        if n_signals == 0 || kernel.len() != n_signals * n_states {
            return Err(SolveError::InfoStructure(format!("kernel needs {} entries", n_signals * n_states)));
        }
        for y in 0..n_states {
            let mut s = 0.0;
            for i in 0..n_signals {
                let g = kernel[i * n_states + y];
                if !(0.0..=1.0).contains(&g) {
                    return Err(SolveError::InfoStructure(format!("entry ({i},{y}) = {g}")));
                }
                s += g;
            }
            if (s - 1.0).abs() > COLUMN_TOL {
                return Err(SolveError::InfoStructure(format!("column {y} sums to {s}")));
            }
        }
        Ok(Self { n_signals, n_states, kernel })
    }

    /// One signal, sent in every state.
    pub fn uninformative(n_states: usize) -> Self {
        Self { n_signals: 1, n_states, kernel: vec![1.0; n_states] }
    }

    /// One signal per state.
    pub fn fully_revealing(n_states: usize) -> Self {
        let mut kernel = vec![0.0; n_states * n_states];
        for y in 0..n_states {
            kernel[y * n_states + y] = 1.0;
        }
        Self { n_signals: n_states, n_states, kernel }
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }
    pub fn n_states(&self) -> usize {
        self.n_states
    }
    pub fn gamma(&self, signal: usize, y: usize) -> f64 {
        self.kernel[signal * self.n_states + y]
    }
}

/// Joint mass ψ(r, y) of recommending `r` in state `y`, row-major over (response, state).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectInfoStructure {
    n_responses: usize,
    n_states: usize,
    joint: Vec<f64>,
}

impl DirectInfoStructure {
    pub fn new(n_responses: usize, joint: Vec<f64>, prior: &Prior) -> Result<Self, SolveError> {
        let n_states = prior.len();
        if joint.len() != n_responses * n_states || joint.iter().any(|x| !x.is_finite() || *x < -COLUMN_TOL) {
            return Err(SolveError::InfoStructure(format!("joint needs {} non-negative entries", n_responses * n_states)));
        }
        for y in 0..n_states {
            let s: f64 = (0..n_responses).map(|r| joint[r * n_states + y]).sum();
            if (s - prior[y]).abs() > 1e-9 {
                return Err(SolveError::InfoStructure(format!("state {y} carries {s}, prior says {}", prior[y])));
            }
        }
        Ok(Self { n_responses, n_states, joint })
    }

    pub fn psi(&self, r: usize, y: usize) -> f64 {
        self.joint[r * self.n_states + y]
    }
    pub fn n_responses(&self) -> usize {
        self.n_responses
    }
    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    /// Total obedience slack `Σ_r max_{r′} Σ_y ψ(r,y)[U(r′,p,y) − U(r,p,y)]`.
    pub fn obedience_slack(&self, game: &Game, policy: usize) -> f64 {
        (0..self.n_responses)
            .map(|r| {
                (0..self.n_responses)
                    .map(|r2| (0..self.n_states).map(|y| self.psi(r, y) * (game.u(r2, policy, y) - game.u(r, policy, y))).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    /// As a kernel with one signal per recommendation (zero-mass states get a uniform column).
    pub fn to_info_structure(&self) -> InfoStructure {
        let mut kernel = vec![0.0; self.n_responses * self.n_states];
        for y in 0..self.n_states {
            let mass: f64 = (0..self.n_responses).map(|r| self.psi(r, y)).sum();
            for r in 0..self.n_responses {
                kernel[r * self.n_states + y] =
                    if mass > 0.0 { self.psi(r, y).max(0.0) / mass } else { 1.0 / self.n_responses as f64 };
            }
        }
        InfoStructure { n_signals: self.n_responses, n_states: self.n_states, kernel }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfoValue {
    pub value: f64,
    /// Response distribution per signal.
    pub witness: Vec<Vec<f64>>,
}

fn known_kernel(game: &Game, policy: usize, prior: &Prior, gamma: &InfoStructure, epsilon: f64, sense: Sense) -> Result<InfoValue, SolveError> {
    check_epsilon(epsilon)?;
    game.check_prior(prior)?;
    game.check_policy(policy)?;
    if gamma.n_states() != game.n_states() {
        return Err(SolveError::InfoStructure(format!("kernel covers {} states, game has {}", gamma.n_states(), game.n_states())));
    }
    let (ni, nr, ny) = (gamma.n_signals(), game.n_responses(), game.n_states());
    let mut wu = vec![0.0; ni * nr];
    let mut wv = vec![0.0; ni * nr];
    for i in 0..ni {
        for r in 0..nr {
            for y in 0..ny {
                let m = prior[y] * gamma.gamma(i, y);
                wu[i * nr + r] += m * game.u(r, policy, y);
                wv[i * nr + r] += m * game.v(r, policy, y);
            }
        }
    }
    let best: f64 = (0..ni).map(|i| wu[i * nr..(i + 1) * nr].iter().cloned().fold(f64::NEG_INFINITY, f64::max)).sum();
    let mut program = LinearProgram::new(sense, wv.clone());
    for i in 0..ni {
        let mut row = vec![0.0; ni * nr];
        row[i * nr..(i + 1) * nr].iter_mut().for_each(|x| *x = 1.0);
        program.constrain(row, Relation::Eq, 1.0);
    }
    program.constrain(wu, Relation::Ge, best - epsilon);
    let sol = lp::solve(&program)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolveError::Internal(sol.status));
    }
    let witness: Vec<Vec<f64>> = (0..ni).map(|i| clean_distribution(sol.witness[i * nr..(i + 1) * nr].to_vec())).collect();
    let value = (0..ni).map(|i| (0..nr).map(|r| witness[i][r] * wv[i * nr + r]).sum::<f64>()).sum();
    Ok(InfoValue { value, witness })
}

/// `α_p(π, γ, ε)` under a known kernel.
pub fn alpha_info(game: &Game, policy: usize, prior: &Prior, gamma: &InfoStructure, epsilon: f64) -> Result<InfoValue, SolveError> {
    known_kernel(game, policy, prior, gamma, epsilon, Sense::Minimize)
}

/// `β_p(π, γ, ε)` under a known kernel.
pub fn beta_info(game: &Game, policy: usize, prior: &Prior, gamma: &InfoStructure, epsilon: f64) -> Result<InfoValue, SolveError> {
    known_kernel(game, policy, prior, gamma, epsilon, Sense::Maximize)
}

fn direct_form(game: &Game, policy: usize, prior: &Prior, epsilon: f64, sense: Sense) -> Result<(f64, DirectInfoStructure), SolveError> {
    check_epsilon(epsilon)?;
    game.check_prior(prior)?;
    game.check_policy(policy)?;
    let (nr, ny) = (game.n_responses(), game.n_states());
    let n_psi = nr * ny;
    let width = n_psi + nr;
    let mut objective = vec![0.0; width];
    for r in 0..nr {
        for y in 0..ny {
            objective[r * ny + y] = game.v(r, policy, y);
        }
    }
    let mut program = LinearProgram::new(sense, objective.clone());
    for y in 0..ny {
        let mut row = vec![0.0; width];
        for r in 0..nr {
            row[r * ny + y] = 1.0;
        }
        program.constrain(row, Relation::Eq, prior[y]);
    }
    for r in 0..nr {
        for r2 in 0..nr {
            if r2 == r {
                continue;
            }
            let mut row = vec![0.0; width];
            for y in 0..ny {
                row[r * ny + y] = game.u(r2, policy, y) - game.u(r, policy, y);
            }
            row[n_psi + r] = -1.0;
            program.constrain(row, Relation::Le, 0.0);
        }
    }
    let mut budget = vec![0.0; width];
    budget[n_psi..].iter_mut().for_each(|x| *x = 1.0);
    program.constrain(budget, Relation::Le, epsilon);
    let sol = lp::solve(&program)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolveError::Internal(sol.status));
    }
    let joint: Vec<f64> = sol.witness[..n_psi].iter().map(|x| x.max(0.0)).collect();
    let value = joint.iter().zip(objective.iter()).map(|(a, b)| a * b).sum();
    Ok((value, DirectInfoStructure { n_responses: nr, n_states: ny, joint }))
}

/// `inf_γ α_p(π, γ, ε)` with the minimizing recommendation structure.
pub fn worst_case_alpha(game: &Game, policy: usize, prior: &Prior, epsilon: f64) -> Result<(f64, DirectInfoStructure), SolveError> {
    direct_form(game, policy, prior, epsilon, Sense::Minimize)
}

/// `sup_γ β_p(π, γ, ε)` with the maximizing recommendation structure.
pub fn best_case_beta(game: &Game, policy: usize, prior: &Prior, epsilon: f64) -> Result<(f64, DirectInfoStructure), SolveError> {
    direct_form(game, policy, prior, epsilon, Sense::Maximize)
}

/// `p†(π, ε)`: maximize the worst case over kernels, lowest index on ties.
pub fn info_robust_policy(game: &Game, prior: &Prior, epsilon: f64) -> Result<(usize, f64), SolveError> {
    let mut best: Option<(usize, f64)> = None;
    for p in 0..game.n_policies() {
        let (v, _) = worst_case_alpha(game, p, prior, epsilon)?;
        if best.map_or(true, |(_, b)| v > b + TIE_TOL) {
            best = Some((p, v));
        }
    }
    Ok(best.expect("games have at least one policy"))
}

/// `∇(π, ε) = max_p sup_γ β_p − max_p inf_γ α_p`.
pub fn cost_of_info_robustness(game: &Game, prior: &Prior, epsilon: f64) -> Result<f64, SolveError> {
    let (_, floor) = info_robust_policy(game, prior, epsilon)?;
    let mut top = f64::NEG_INFINITY;
    for p in 0..game.n_policies() {
        top = top.max(best_case_beta(game, p, prior, epsilon)?.0);
    }
    Ok(top - floor)
}
