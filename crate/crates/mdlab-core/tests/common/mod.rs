#![allow(dead_code)]

use mdlab_core::game::{CoverRadii, Game, GameParts, Lipschitz, Metric, Prior};
use mdlab_core::info::InfoStructure;
use mdlab_core::rng::{seeded, unit, Rng};

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Payoffs uniform on [0, 1] with discrete metrics, so unit Lipschitz constants hold.
pub fn random_game(rng: &mut Rng, ny: usize, nr: usize, np: usize) -> Game {
    let len = nr * np * ny;
    let u = (0..len).map(|_| unit(rng)).collect();
    let v = (0..len).map(|_| unit(rng)).collect();
    Game::new(GameParts {
        states: names("y", ny),
        responses: names("r", nr),
        policies: names("p", np),
        u,
        v,
        response_metric: Metric::Discrete,
        policy_metric: Metric::Discrete,
        lipschitz: Lipschitz::UNIT,
        cover_radii: CoverRadii::default(),
    })
    .expect("random game is valid")
}

/// Game with dimensions drawn from `1..=max` each (at least two states).
pub fn game_from_seed(seed: u64, max: usize) -> (Game, Rng) {
    let mut rng = seeded(seed);
    let mut dim = |lo: usize| lo + (unit(&mut rng) * (max - lo + 1) as f64) as usize;
    let (ny, nr, np) = (dim(2), dim(1), dim(1));
    let game = random_game(&mut rng, ny, nr, np);
    (game, rng)
}

/// Flat-Dirichlet draw via normalized exponentials.
pub fn random_prior(rng: &mut Rng, n: usize) -> Prior {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - unit(rng)).ln() + 1e-12).collect();
    Prior::normalized(w).expect("positive weights")
}

pub fn random_kernel(rng: &mut Rng, n_signals: usize, n_states: usize) -> InfoStructure {
    let mut kernel = vec![0.0; n_signals * n_states];
    for y in 0..n_states {
        let col = random_prior(rng, n_signals);
        for i in 0..n_signals {
            kernel[i * n_states + y] = col[i];
        }
    }
    InfoStructure::new(n_signals, n_states, kernel).expect("columns are distributions")
}
