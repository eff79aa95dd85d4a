//! Calibrated forecasting.
//!
//! The forecaster is internal-regret exponential weights over a simplex
//! lattice: one Hedge subalgorithm per grid point `i`, each proposing a row
//! `q_i`; the played distribution is the stationary distribution of `Q`, and
//! subalgorithm `i` is charged the negated quadratic score scaled by the
//! probability it was played with.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::ForecastError;
use crate::game::{simplex_lattice, Prior};
use crate::rng::{self, Rng};

/// Strong-convexity modulus of the quadratic score's entropy `‖π‖²`.
pub const XI: f64 = 2.0;

/// `S_y(π) = 2π(y) − Σ π²`.
pub fn quadratic_score(forecast: &Prior, outcome: usize) -> Result<f64, ForecastError> {
    let p = forecast.probabilities();
    if outcome >= p.len() {
        return Err(ForecastError::UnknownState(outcome));
    }
    Ok(score(p, outcome))
}

fn score(p: &[f64], y: usize) -> f64 {
    2.0 * p[y] - p.iter().map(|x| x * x).sum::<f64>()
}

/// `Σ_y a(y) S_y(b)`
pub fn expected_score(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = b.iter().map(|x| x * x).sum();
    a.iter().zip(b).map(|(w, x)| w * (2.0 * x - sq)).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForecastGrid {
    pub delta: f64,
    pub points: Vec<Prior>,
}

impl ForecastGrid {
    /// Lattice with coordinate step `1/round(1/δ)`.
    pub fn new(n_states: usize, delta: f64) -> Result<Self, ForecastError> {
        if !(delta > 0.0 && delta <= 1.0) || n_states == 0 {
            return Err(ForecastError::BadStep);
        }
        let n = libm::round(1.0 / delta).max(1.0) as usize;
        Ok(Self { delta: 1.0 / n as f64, points: simplex_lattice(n_states, n) })
    }

    /// A grid with the given points (used for degenerate single-point grids).
    pub fn from_points(delta: f64, points: Vec<Prior>) -> Self {
        Self { delta, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn n_states(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// Cell of a forecast: nearest point in sup-norm, lowest index on ties.
    pub fn cell(&self, forecast: &Prior) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, pt) in self.points.iter().enumerate() {
            let d = pt.probabilities().iter().zip(forecast.probabilities()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if d < best.1 - 1e-12 {
                best = (i, d);
            }
        }
        best.0
    }
}

/// Stationary distribution of a row-stochastic matrix (row-major, `n × n`).
pub fn stationary_distribution(q: &[f64], n: usize) -> Result<Vec<f64>, ForecastError> {
    if q.len() != n * n || n == 0 {
        return Err(ForecastError::NotStochastic);
    }
    for i in 0..n {
        let row = &q[i * n..(i + 1) * n];
        if row.iter().any(|x| !x.is_finite() || *x < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(ForecastError::NotStochastic);
        }
    }
    let mut p = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..100_000 {
        left_multiply(&p, q, n, &mut next);
        let residual: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        if residual <= 1e-10 {
            return Ok(p);
        }
        core::mem::swap(&mut p, &mut next);
    }
    let exact = solve_stationary(q, n).ok_or(ForecastError::NotStochastic)?;
    Ok(exact)
}

fn left_multiply(p: &[f64], q: &[f64], n: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..n {
        let pi = p[i];
        if pi == 0.0 {
            continue;
        }
        for j in 0..n {
            out[j] += pi * q[i * n + j];
        }
    }
}

/// Solve `p (Q − I) = 0, Σ p = 1` by Gaussian elimination (last equation replaced by normalization).
pub fn solve_stationary(q: &[f64], n: usize) -> Option<Vec<f64>> {
    // rows j: Σ_i p_i (Q_ij − δ_ij) = 0
    let mut a = vec![vec![0.0; n + 1]; n];
    for j in 0..n {
        for i in 0..n {
            a[j][i] = q[i * n + j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for x in a[n - 1].iter_mut() {
        *x = 1.0;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut p: Vec<f64> = (0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    Some(p)
}

/// One played forecast.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub distribution: Vec<f64>,
    pub index: usize,
}

/// Internal-regret forecaster over a fixed grid.
#[derive(Clone, Debug)]
pub struct Forecaster {
    eta: f64,
    n: usize,
    /// Row `i` holds subalgorithm `i`'s weights over grid points.
    weights: Vec<f64>,
    /// `scores[j * |Y| + y] = S_y(π_j)`
    scores: Vec<f64>,
    n_states: usize,
    round: u64,
    seed: u64,
    rng: Rng,
    pending: Option<Vec<f64>>,
}

impl Forecaster {
    /// Learning rate `η = √(8 ln|F| / T)` for horizon `T`.
    pub fn new(grid: &ForecastGrid, horizon: usize, seed: u64) -> Self {
        let n = grid.len().max(1);
        let eta = libm::sqrt(8.0 * libm::log(n as f64) / horizon.max(1) as f64);
        Self::with_learning_rate(grid, eta, seed)
    }

    pub fn with_learning_rate(grid: &ForecastGrid, eta: f64, seed: u64) -> Self {
        let n = grid.len();
        let n_states = grid.n_states();
        let mut scores = vec![0.0; n * n_states];
        for (j, pt) in grid.points.iter().enumerate() {
            for y in 0..n_states {
                scores[j * n_states + y] = score(pt.probabilities(), y);
            }
        }
        Self { eta, n, weights: vec![1.0; n * n], scores, n_states, round: 0, seed, rng: rng::seeded(seed), pending: None }
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
    }
    pub fn round(&self) -> u64 {
        self.round
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn proposal_matrix(&self) -> Vec<f64> {
        let mut q = self.weights.clone();
        for i in 0..self.n {
            let row = &mut q[i * self.n..(i + 1) * self.n];
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        q
    }

    /// Stationary distribution of the current proposals (read-only).
    pub fn distribution(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![1.0];
        }
        stationary_distribution(&self.proposal_matrix(), self.n).expect("normalized weight rows are stochastic")
    }

    /// Play: compute the distribution and sample a grid index.
    pub fn predict(&mut self) -> Prediction {
        let mut rng = self.rng.clone();
        let out = self.predict_with(&mut rng);
        self.rng = rng;
        out
    }

    /// As [`predict`](Self::predict), but sampling from a caller-owned stream.
    pub fn predict_with(&mut self, rng: &mut Rng) -> Prediction {
        let distribution = self.distribution();
        let index = rng::sample(rng, &distribution);
        self.pending = Some(distribution.clone());
        Prediction { distribution, index }
    }

    /// Charge every subalgorithm for the revealed state.
    pub fn update(&mut self, outcome: usize) -> Result<(), ForecastError> {
        if outcome >= self.n_states {
            return Err(ForecastError::UnknownState(outcome));
        }
        let played = self.pending.take().ok_or(ForecastError::UpdateWithoutPredict)?;
        for (i, &pi) in played.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let row = &mut self.weights[i * self.n..(i + 1) * self.n];
            for (j, w) in row.iter_mut().enumerate() {
                // loss −S_y(π_j), scaled by p_i
                *w *= libm::exp(self.eta * pi * self.scores[j * self.n_states + outcome]);
            }
            let top = row.iter().cloned().fold(0.0, f64::max);
            row.iter_mut().for_each(|w| *w = (*w / top).max(f64::MIN_POSITIVE));
        }
        self.round += 1;
        Ok(())
    }
}

/// Forecasters keyed by context, created on first use.
#[derive(Clone, Debug)]
pub struct ContextualForecaster {
    grid: ForecastGrid,
    horizon: usize,
    seed: u64,
    states: BTreeMap<Vec<usize>, Forecaster>,
}

impl ContextualForecaster {
    pub fn new(grid: ForecastGrid, horizon: usize, seed: u64) -> Self {
        Self { grid, horizon, seed, states: BTreeMap::new() }
    }

    pub fn grid(&self) -> &ForecastGrid {
        &self.grid
    }

    pub fn contexts(&self) -> usize {
        self.states.len()
    }

    pub fn get(&mut self, key: &[usize]) -> &mut Forecaster {
        let (grid, horizon, seed) = (&self.grid, self.horizon, self.seed);
        self.states.entry(key.to_vec()).or_insert_with(|| Forecaster::new(grid, horizon, rng::hash_words(seed, key)))
    }

    pub fn peek(&self, key: &[usize]) -> Option<&Forecaster> {
        self.states.get(key)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellCalibration {
    pub grid_index: usize,
    pub count: usize,
    pub empirical: Vec<f64>,
    pub l1_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationReport {
    pub rounds: usize,
    /// `(1/T) Σ_F n_F π̂_F·(S(π̂_F) − S(π_F))`
    pub kappa: f64,
    /// `(1/T) Σ_F n_F d₁(π_F, π̂_F)`
    pub iota: f64,
    /// `√(2|Y|κ/ξ)`, reported as 0 when κ < 0.
    pub l12_bound: f64,
    pub per_cell: Vec<CellCalibration>,
}

/// Bin `(grid index, outcome)` rows by forecast cell.
pub fn calibration_report(grid: &ForecastGrid, rows: &[(usize, usize)]) -> Result<CalibrationReport, ForecastError> {
    if rows.is_empty() {
        return Err(ForecastError::Empty);
    }
    let ny = grid.n_states();
    let mut counts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(f, y) in rows {
        if y >= ny {
            return Err(ForecastError::UnknownState(y));
        }
        counts.entry(f).or_insert_with(|| vec![0; ny])[y] += 1;
    }
    let t = rows.len() as f64;
    let (mut kappa, mut iota) = (0.0, 0.0);
    let mut per_cell = Vec::with_capacity(counts.len());
    for (f, c) in counts {
        let n: usize = c.iter().sum();
        let empirical: Vec<f64> = c.iter().map(|&k| k as f64 / n as f64).collect();
        let pf = grid.points[f].probabilities();
        let l1: f64 = empirical.iter().zip(pf).map(|(a, b)| (a - b).abs()).sum();
        kappa += n as f64 * (expected_score(&empirical, &empirical) - expected_score(&empirical, pf));
        iota += n as f64 * l1;
        per_cell.push(CellCalibration { grid_index: f, count: n, empirical, l1_distance: l1 });
    }
    kappa /= t;
    iota /= t;
    let l12_bound = if kappa < 0.0 { 0.0 } else { libm::sqrt(2.0 * ny as f64 * kappa / XI) };
    Ok(CalibrationReport { rounds: rows.len(), kappa, iota, l12_bound, per_cell })
}

/// A-priori miscalibration bound `√(|Y||F|√(2 ln|F|/T) + 2|Y|δ)`.
pub fn apriori_iota_bound(n_states: usize, n_cells: usize, horizon: usize, delta: f64) -> f64 {
    let (ny, nf, t) = (n_states as f64, n_cells as f64, horizon as f64);
    libm::sqrt(ny * nf * libm::sqrt(2.0 * libm::log(nf) / t) + 2.0 * ny * delta)
}

/// Per-round scoring-regret bound `|F|√(2T ln|F|)/T + 2δ`.
pub fn scoring_regret_bound(n_cells: usize, horizon: usize, delta: f64) -> f64 {
    let (nf, t) = (n_cells as f64, horizon as f64);
    nf * libm::sqrt(2.0 * t * libm::log(nf)) / t + 2.0 * delta
}

/// Grid swap regret `(1/T) Σ_F n_F max_j π̂_F·(S(π_j) − S(π_F))`.
pub fn swap_regret(grid: &ForecastGrid, rows: &[(usize, usize)]) -> Result<f64, ForecastError> {
    let report = calibration_report(grid, rows)?;
    let mut total = 0.0;
    for cell in &report.per_cell {
        let own = expected_score(&cell.empirical, grid.points[cell.grid_index].probabilities());
        let best = grid.points.iter().map(|p| expected_score(&cell.empirical, p.probabilities())).fold(f64::NEG_INFINITY, f64::max);
        total += cell.count as f64 * (best - own);
    }
    Ok(total / rows.len() as f64)
}
