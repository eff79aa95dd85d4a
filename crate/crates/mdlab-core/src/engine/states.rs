//! Seeded state sequences.

use alloc::format;
use alloc::vec::Vec;

use crate::error::GameError;
use crate::game::Prior;
use crate::rng::{self, seeded};

/// `horizon` independent draws from `prior`.
pub fn iid_states(prior: &Prior, horizon: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    (0..horizon).map(|_| rng::sample(&mut rng, prior.probabilities())).collect()
}

/// A Markov chain started from `initial`; `transition` is row-major and row-stochastic.
pub fn markov_states(initial: &Prior, transition: &[f64], horizon: usize, seed: u64) -> Result<Vec<usize>, GameError> {
    let n = initial.len();
    if transition.len() != n * n {
        return Err(GameError::TableShape { table: "transition", expected: n * n, found: transition.len() });
    }
    for row in transition.chunks(n) {
        Prior::new(row.to_vec()).map_err(|_| GameError::Invalid(format!("transition row {row:?} is not a distribution")))?;
    }
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(horizon);
    let mut y = rng::sample(&mut rng, initial.probabilities());
    for _ in 0..horizon {
        out.push(y);
        y = rng::sample(&mut rng, &transition[y * n..(y + 1) * n]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_frequencies() {
        let ys = iid_states(&Prior::new(alloc::vec![0.3, 0.7]).unwrap(), 10_000, 4);
        let ones = ys.iter().filter(|&&y| y == 1).count() as f64 / 10_000.0;
        assert!((ones - 0.7).abs() < 0.02);
        assert_eq!(ys, iid_states(&Prior::new(alloc::vec![0.3, 0.7]).unwrap(), 10_000, 4));
    }

    #[test]
    fn absorbing_chain_stays() {
        let ys = markov_states(&Prior::point(2, 1), &[0.5, 0.5, 0.0, 1.0], 50, 1).unwrap();
        assert!(ys.iter().all(|&y| y == 1));
        assert!(markov_states(&Prior::point(2, 1), &[0.5, 0.6, 0.0, 1.0], 5, 1).is_err());
    }
}
