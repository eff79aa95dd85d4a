//! Finite stage games and the ε-robust programs.
//!
//! A [`Game`] stores `U` and `V` row-major over (response, policy, state).
//! Continuous response or policy spaces enter only through their finite
//! covers; the metrics, Lipschitz constants and cover radii ride along so the
//! regret bounds can charge discretization error.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GameError, SolveError};
use crate::lp::{self, LinearProgram, LpStatus, Relation, Sense};

const LIPSCHITZ_SLACK: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// 1 between distinct elements.
    Discrete,
    /// Dense `n × n` distance matrix, row-major.
    Matrix(Vec<f64>),
}

impl Metric {
    pub fn distance(&self, n: usize, a: usize, b: usize) -> f64 {
        match self {
            Metric::Discrete => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            Metric::Matrix(m) => m[a * n + b],
        }
    }

    fn validate(&self, n: usize, name: &'static str) -> Result<(), GameError> {
        if let Metric::Matrix(m) = self {
            if m.len() != n * n {
                return Err(GameError::BadMetric(name));
            }
            for a in 0..n {
                if m[a * n + a] != 0.0 {
                    return Err(GameError::BadMetric(name));
                }
                for b in 0..n {
                    let d = m[a * n + b];
                    if !d.is_finite() || d < 0.0 || d != m[b * n + a] {
                        return Err(GameError::BadMetric(name));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lipschitz {
    pub u_response: f64,
    pub u_policy: f64,
    pub v_response: f64,
    pub v_policy: f64,
}

impl Lipschitz {
    pub const UNIT: Lipschitz = Lipschitz { u_response: 1.0, u_policy: 1.0, v_response: 1.0, v_policy: 1.0 };
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoverRadii {
    pub response: f64,
    pub policy: f64,
}

/// Everything needed to build a [`Game`]; tables are indexed `(r * |P| + p) * |Y| + y`.
#[derive(Clone, Debug, PartialEq)]
pub struct GameParts {
    pub states: Vec<String>,
    pub responses: Vec<String>,
    pub policies: Vec<String>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub response_metric: Metric,
    pub policy_metric: Metric,
    pub lipschitz: Lipschitz,
    pub cover_radii: CoverRadii,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    parts: GameParts,
}

impl Game {
    /// Validate shapes, ranges, metrics and the declared Lipschitz constants
    /// (exhaustively, over every pair of responses and policies).
    pub fn new(parts: GameParts) -> Result<Self, GameError> {
        let (ny, nr, np) = (parts.states.len(), parts.responses.len(), parts.policies.len());
        if ny == 0 || nr == 0 || np == 0 {
            return Err(GameError::Empty);
        }
        let len = nr * np * ny;
        for (name, t) in [("U", &parts.u), ("V", &parts.v)] {
            if t.len() != len {
                return Err(GameError::TableShape { table: name, expected: len, found: t.len() });
            }
            for r in 0..nr {
                for p in 0..np {
                    for y in 0..ny {
                        let value = t[(r * np + p) * ny + y];
                        if !(0.0..=1.0).contains(&value) {
                            return Err(GameError::OutOfRange { table: name, r, p, y, value });
                        }
                    }
                }
            }
        }
        parts.response_metric.validate(nr, "response")?;
        parts.policy_metric.validate(np, "policy")?;
        let k = parts.lipschitz;
        if [k.u_response, k.u_policy, k.v_response, k.v_policy].iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(GameError::Invalid("Lipschitz constants must be finite and non-negative".to_string()));
        }
        let game = Game { parts };
        game.check_lipschitz()?;
        Ok(game)
    }

    fn check_lipschitz(&self) -> Result<(), GameError> {
        let (ny, nr, np) = (self.n_states(), self.n_responses(), self.n_policies());
        let k = self.parts.lipschitz;
        for r in 0..nr {
            for r2 in r..nr {
                let dr = self.response_distance(r, r2);
                for p in 0..np {
                    for p2 in 0..np {
                        let dp = self.policy_distance(p, p2);
                        let bu = k.u_response * dr + k.u_policy * dp + LIPSCHITZ_SLACK;
                        let bv = k.v_response * dr + k.v_policy * dp + LIPSCHITZ_SLACK;
                        for y in 0..ny {
                            if (self.u(r, p, y) - self.u(r2, p2, y)).abs() > bu {
                                return Err(GameError::Lipschitz { table: "U", r, r2, p, p2, y });
                            }
                            if (self.v(r, p, y) - self.v(r2, p2, y)).abs() > bv {
                                return Err(GameError::Lipschitz { table: "V", r, r2, p, p2, y });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn parts(&self) -> &GameParts {
        &self.parts
    }
    pub fn states(&self) -> &[String] {
        &self.parts.states
    }
    pub fn responses(&self) -> &[String] {
        &self.parts.responses
    }
    pub fn policies(&self) -> &[String] {
        &self.parts.policies
    }
    pub fn n_states(&self) -> usize {
        self.parts.states.len()
    }
    pub fn n_responses(&self) -> usize {
        self.parts.responses.len()
    }
    pub fn n_policies(&self) -> usize {
        self.parts.policies.len()
    }
    pub fn lipschitz(&self) -> Lipschitz {
        self.parts.lipschitz
    }
    pub fn cover_radii(&self) -> CoverRadii {
        self.parts.cover_radii
    }

    #[inline]
    fn idx(&self, r: usize, p: usize, y: usize) -> usize {
        (r * self.n_policies() + p) * self.n_states() + y
    }
    #[inline]
    pub fn u(&self, r: usize, p: usize, y: usize) -> f64 {
        self.parts.u[self.idx(r, p, y)]
    }
    #[inline]
    pub fn v(&self, r: usize, p: usize, y: usize) -> f64 {
        self.parts.v[self.idx(r, p, y)]
    }

    pub fn response_distance(&self, a: usize, b: usize) -> f64 {
        self.parts.response_metric.distance(self.n_responses(), a, b)
    }
    pub fn policy_distance(&self, a: usize, b: usize) -> f64 {
        self.parts.policy_metric.distance(self.n_policies(), a, b)
    }

    /// `E_{y∼π} U(r, p, y)`
    pub fn expected_u(&self, r: usize, p: usize, prior: &Prior) -> f64 {
        prior.0.iter().enumerate().map(|(y, w)| w * self.u(r, p, y)).sum()
    }
    /// `E_{y∼π} V(r, p, y)`
    pub fn expected_v(&self, r: usize, p: usize, prior: &Prior) -> f64 {
        prior.0.iter().enumerate().map(|(y, w)| w * self.v(r, p, y)).sum()
    }

    pub fn check_prior(&self, prior: &Prior) -> Result<(), GameError> {
        if prior.len() != self.n_states() {
            return Err(GameError::PriorLength { expected: self.n_states(), found: prior.len() });
        }
        Ok(())
    }

    pub fn check_policy(&self, p: usize) -> Result<(), GameError> {
        if p >= self.n_policies() {
            return Err(GameError::Invalid(alloc::format!("policy index {p} out of range")));
        }
        Ok(())
    }
}

/// A distribution over states.
#[derive(Clone, Debug, PartialEq)]
pub struct Prior(Vec<f64>);

impl Prior {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, GameError> {
        let sum: f64 = probabilities.iter().sum();
        if probabilities.is_empty()
            || probabilities.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0)
            || (sum - 1.0).abs() > 1e-12
        {
            return Err(GameError::BadPrior);
        }
        Ok(Prior(probabilities))
    }

    /// Rescale non-negative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self, GameError> {
        let sum: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) || sum <= 0.0 {
            return Err(GameError::BadPrior);
        }
        Ok(Prior(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Prior(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, y: usize) -> Self {
        let mut v = vec![0.0; n];
        v[y] = 1.0;
        Prior(v)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn l1(&self, other: &Prior) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl core::ops::Index<usize> for Prior {
    type Output = f64;
    fn index(&self, y: usize) -> &f64 {
        &self.0[y]
    }
}

/// Points of the simplex over `n_states` coordinates whose entries are multiples of `1/n`.
pub fn simplex_lattice(n_states: usize, n: usize) -> Vec<Prior> {
    let mut out = Vec::new();
    let mut parts = vec![0usize; n_states];
    fn rec(out: &mut Vec<Prior>, parts: &mut [usize], i: usize, left: usize, n: usize) {
        if i + 1 == parts.len() {
            parts[i] = left;
            out.push(Prior(parts.iter().map(|&k| k as f64 / n as f64).collect()));
            return;
        }
        for k in (0..=left).rev() {
            parts[i] = k;
            rec(out, parts, i + 1, left - k, n);
        }
    }
    if n_states > 0 {
        rec(&mut out, &mut parts, 0, n, n);
    }
    out
}

/// A finite cover of the simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorGrid {
    pub grid_step: f64,
    pub points: Vec<Prior>,
}

impl PriorGrid {
    /// Lattice fine enough that every prior lies within l1 distance `step` of a point.
    pub fn covering(n_states: usize, step: f64) -> Result<Self, GameError> {
        if !(step > 0.0 && step <= 2.0) || n_states == 0 {
            return Err(GameError::Invalid("grid step must lie in (0, 2]".to_string()));
        }
        let n = libm::ceil(n_states as f64 / step - 1e-9).max(1.0) as usize;
        Ok(PriorGrid { grid_step: step, points: simplex_lattice(n_states, n) })
    }

    /// Nearest point by l1; ties go to the lowest index.
    pub fn discretize(&self, prior: &Prior) -> &Prior {
        &self.points[self.nearest_index(prior)]
    }

    pub fn nearest_index(&self, prior: &Prior) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, pt) in self.points.iter().enumerate() {
            let d = pt.l1(prior);
            if d < best.1 - TIE_TOL {
                best = (i, d);
            }
        }
        best.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustValue {
    pub value: f64,
    /// The extremal response distribution.
    pub witness: Vec<f64>,
}

/// `max_r E_π U(r, p, ·)` together with every response attaining it (within 1e-12).
pub fn best_response_value(game: &Game, policy: usize, prior: &Prior) -> (f64, Vec<usize>) {
    let eu: Vec<f64> = (0..game.n_responses()).map(|r| game.expected_u(r, policy, prior)).collect();
    let best = eu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let set = (0..eu.len()).filter(|&r| eu[r] >= best - TIE_TOL).collect();
    (best, set)
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<(), SolveError> {
    if epsilon.is_finite() && epsilon >= 0.0 {
        Ok(())
    } else {
        Err(SolveError::Epsilon)
    }
}

fn robust_program(game: &Game, policy: usize, prior: &Prior, epsilon: f64, sense: Sense) -> Result<RobustValue, SolveError> {
    check_epsilon(epsilon)?;
    game.check_prior(prior)?;
    game.check_policy(policy)?;
    let nr = game.n_responses();
    let eu: Vec<f64> = (0..nr).map(|r| game.expected_u(r, policy, prior)).collect();
    let ev: Vec<f64> = (0..nr).map(|r| game.expected_v(r, policy, prior)).collect();
    let best = eu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut program = LinearProgram::new(sense, ev.clone());
    program.constrain(vec![1.0; nr], Relation::Eq, 1.0);
    program.constrain(eu, Relation::Ge, best - epsilon);
    let sol = lp::solve(&program)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolveError::Internal(sol.status));
    }
    let witness = clean_distribution(sol.witness);
    let value = witness.iter().zip(ev.iter()).map(|(m, v)| m * v).sum();
    Ok(RobustValue { value, witness })
}

pub(crate) fn clean_distribution(mut w: Vec<f64>) -> Vec<f64> {
    for x in w.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        for x in w.iter_mut() {
            *x /= s;
        }
    }
    w
}

/// `α_p(π, ε)`: the principal's worst case over ε-optimal agent behaviour.
pub fn alpha(game: &Game, policy: usize, prior: &Prior, epsilon: f64) -> Result<RobustValue, SolveError> {
    robust_program(game, policy, prior, epsilon, Sense::Minimize)
}

/// `β_p(π, ε)`: the principal's best case over ε-optimal agent behaviour.
pub fn beta(game: &Game, policy: usize, prior: &Prior, epsilon: f64) -> Result<RobustValue, SolveError> {
    robust_program(game, policy, prior, epsilon, Sense::Maximize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyChoice {
    pub policy: usize,
    pub value: RobustValue,
}

/// `p*(π, ε)`: the policy maximizing α, lowest index on ties.
pub fn robust_policy(game: &Game, prior: &Prior, epsilon: f64) -> Result<PolicyChoice, SolveError> {
    let mut best: Option<PolicyChoice> = None;
    for p in 0..game.n_policies() {
        let a = alpha(game, p, prior, epsilon)?;
        if best.as_ref().map_or(true, |b| a.value > b.value.value + TIE_TOL) {
            best = Some(PolicyChoice { policy: p, value: a });
        }
    }
    Ok(best.expect("games have at least one policy"))
}

/// `Δ(π, ε) = max_p β_p(π, ε) − α_{p*}(π, ε)`.
pub fn cost_of_robustness(game: &Game, prior: &Prior, epsilon: f64) -> Result<f64, SolveError> {
    let star = robust_policy(game, prior, epsilon)?;
    let mut top = f64::NEG_INFINITY;
    for p in 0..game.n_policies() {
        top = top.max(beta(game, p, prior, epsilon)?.value);
    }
    Ok(top - star.value.value)
}

/// One row of [`robustness_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub delta: f64,
    pub policy: usize,
}

/// Δ and p* across ε; used to eyeball the `Δ = O(ε)` premise rather than enforce it.
pub fn robustness_sweep(game: &Game, prior: &Prior, epsilons: &[f64]) -> Result<Vec<SweepPoint>, SolveError> {
    epsilons
        .iter()
        .map(|&epsilon| {
            Ok(SweepPoint {
                epsilon,
                delta: cost_of_robustness(game, prior, epsilon)?,
                policy: robust_policy(game, prior, epsilon)?.policy,
            })
        })
        .collect()
}

/// Pairs `(ε, 2ε)` in a sweep where `Δ(2ε) > factor · Δ(ε)`.
pub fn linear_trend_violations(points: &[SweepPoint], factor: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for a in points {
        for b in points {
            if (b.epsilon - 2.0 * a.epsilon).abs() < 1e-12 && b.delta > factor * a.delta + 1e-9 {
                out.push((a.epsilon, b.epsilon));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("{prefix}{i}")).collect()
    }

    fn constant_game(c: f64) -> Game {
        Game::new(GameParts {
            states: names("y", 2),
            responses: names("r", 3),
            policies: names("p", 1),
            u: vec![c; 6],
            v: vec![0.5; 6],
            response_metric: Metric::Discrete,
            policy_metric: Metric::Discrete,
            lipschitz: Lipschitz::UNIT,
            cover_radii: CoverRadii::default(),
        })
        .unwrap()
    }

    #[test]
    fn constant_utility_best_response() {
        let g = constant_game(0.3);
        let (v, set) = best_response_value(&g, 0, &Prior::uniform(2));
        assert_eq!(v, 0.3);
        assert_eq!(set, vec![0, 1, 2]);
    }

    #[test]
    fn rejects_out_of_range_and_bad_lipschitz() {
        let mut parts = constant_game(0.3).parts().clone();
        parts.u[0] = 1.5;
        assert!(matches!(Game::new(parts.clone()), Err(GameError::OutOfRange { .. })));
        parts.u[0] = 1.0;
        parts.lipschitz.u_response = 0.1;
        assert!(matches!(Game::new(parts), Err(GameError::Lipschitz { table: "U", .. })));
    }

    #[test]
    fn discretize_prefers_lowest_index() {
        let grid = PriorGrid {
            grid_step: 1.0,
            points: vec![
                Prior::new(vec![0.0, 1.0]).unwrap(),
                Prior::new(vec![0.5, 0.5]).unwrap(),
                Prior::new(vec![1.0, 0.0]).unwrap(),
            ],
        };
        assert_eq!(grid.discretize(&Prior::uniform(2)), &grid.points[1]);
        assert_eq!(grid.discretize(&Prior::new(vec![0.6, 0.4]).unwrap()), &grid.points[1]);
        assert_eq!(grid.discretize(&Prior::new(vec![0.75, 0.25]).unwrap()), &grid.points[1]);
    }

    #[test]
    fn covering_grid_is_within_step() {
        let grid = PriorGrid::covering(3, 0.3).unwrap();
        for p in simplex_lattice(3, 37) {
            assert!(grid.discretize(&p).l1(&p) <= 0.3 + 1e-12);
        }
    }

    #[test]
    fn priors_are_validated() {
        assert_eq!(Prior::new(vec![0.5, 0.4]), Err(GameError::BadPrior));
        assert!(Prior::normalized(vec![2.0, 1.0]).is_ok());
        assert_eq!(Prior::new(vec![]).unwrap_err().to_string(), "probabilities must be finite, non-negative and sum to 1");
    }

    #[test]
    fn vacuous_epsilon_reaches_extremes() {
        let mut parts = constant_game(0.0).parts().clone();
        parts.u = vec![1.0, 1.0, 0.0, 0.0, 0.5, 0.5];
        parts.v = vec![0.2, 0.2, 0.9, 0.9, 0.4, 0.4];
        let g = Game::new(parts).unwrap();
        let pi = Prior::uniform(2);
        assert!((alpha(&g, 0, &pi, 1.0).unwrap().value - 0.2).abs() < 1e-12);
        assert!((beta(&g, 0, &pi, 1.0).unwrap().value - 0.9).abs() < 1e-12);
        // ε = 0 pins the unique best response
        assert!((alpha(&g, 0, &pi, 0.0).unwrap().value - 0.2).abs() < 1e-12);
        assert!((beta(&g, 0, &pi, 0.0).unwrap().value - 0.2).abs() < 1e-12);
        // ε = 0.25 buys a quarter of weight on the zero-utility response
        assert!((beta(&g, 0, &pi, 0.25).unwrap().value - 0.375).abs() < 1e-12);
        assert_eq!(alpha(&g, 0, &pi, -1.0), Err(SolveError::Epsilon));
    }

    #[test]
    fn aligned_game_has_no_robustness_cost() {
        let mut parts = constant_game(0.0).parts().clone();
        parts.u = vec![0.1, 0.7, 0.6, 0.2, 0.4, 0.4];
        parts.v = parts.u.clone();
        let g = Game::new(parts).unwrap();
        assert!(cost_of_robustness(&g, &Prior::new(vec![0.3, 0.7]).unwrap(), 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_response_has_no_robustness_cost() {
        let g = Game::new(GameParts {
            states: names("y", 2),
            responses: names("r", 1),
            policies: names("p", 2),
            u: vec![0.1, 0.9, 0.3, 0.3],
            v: vec![0.5, 0.2, 0.6, 0.6],
            response_metric: Metric::Discrete,
            policy_metric: Metric::Discrete,
            lipschitz: Lipschitz::UNIT,
            cover_radii: CoverRadii::default(),
        })
        .unwrap();
        assert!(cost_of_robustness(&g, &Prior::uniform(2), 0.3).unwrap().abs() < 1e-12);
        assert_eq!(robust_policy(&g, &Prior::uniform(2), 0.3).unwrap().policy, 1);
        assert_eq!(g.states()[1], "y1".to_string());
    }
}
