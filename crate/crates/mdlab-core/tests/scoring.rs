mod common;

use common::random_prior;
use mdlab_core::forecast::{calibration_report, expected_score, quadratic_score, ForecastGrid, Forecaster, XI};
use mdlab_core::rng::{sample, seeded};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn quadratic_score_is_strongly_proper(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = seeded(seed);
        let (pi, other) = (random_prior(&mut rng, n), random_prior(&mut rng, n));
        let (a, b) = (pi.probabilities(), other.probabilities());
        let gain = expected_score(a, a) - expected_score(a, b);
        let d = pi.l1(&other);
        prop_assert!(gain >= XI / (2.0 * n as f64) * d * d - 1e-12, "{gain} vs {d}");
    }
}

proptest! {
    #[test]
    fn snapping_to_the_grid_loses_at_most_twice_the_step(seed in any::<u64>(), n in 2usize..=4, k in 1usize..=10) {
        let mut rng = seeded(seed);
        let grid = ForecastGrid::new(n, 1.0 / k as f64).unwrap();
        let empirical = random_prior(&mut rng, n);
        let snapped = &grid.points[grid.cell(&empirical)];
        for y in 0..n {
            let loss = quadratic_score(&empirical, y).unwrap() - quadratic_score(snapped, y).unwrap();
            prop_assert!(loss <= 2.0 * grid.delta + 1e-12, "y={y}: {loss} > 2·{}", grid.delta);
        }
    }

    #[test]
    fn miscalibration_never_exceeds_the_scoring_bound(seed in any::<u64>(), k in 2usize..=10, t in 1usize..=400) {
        let mut rng = seeded(seed);
        let grid = ForecastGrid::new(2, 1.0 / k as f64).unwrap();
        let truth = random_prior(&mut rng, 2);
        let mut f = Forecaster::new(&grid, t, seed);
        let mut rows = Vec::with_capacity(t);
        for _ in 0..t {
            let cell = f.predict().index;
            let y = sample(&mut rng, truth.probabilities());
            f.update(y).unwrap();
            rows.push((cell, y));
        }
        let rep = calibration_report(&grid, &rows).unwrap();
        prop_assert!(rep.kappa >= -1e-12);
        prop_assert!(rep.iota <= rep.l12_bound + 1e-9, "iota {} bound {}", rep.iota, rep.l12_bound);
    }

    #[test]
    fn forecasts_replay_identically(seed in any::<u64>(), t in 1usize..=100) {
        let grid = ForecastGrid::new(3, 0.25).unwrap();
        let outcomes: Vec<usize> = (0..t).map(|i| (i * 7 + seed as usize) % 3).collect();
        let play = || {
            let mut f = Forecaster::new(&grid, t, seed);
            outcomes.iter().map(|&y| {
                let p = f.predict();
                f.update(y).unwrap();
                p
            }).collect::<Vec<_>>()
        };
        prop_assert_eq!(play(), play());
    }
}
