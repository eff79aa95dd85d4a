mod common;

use common::game_from_seed;
use mdlab_core::engine::{
    agent_regret, bound_terms, calibration, empirical_structures, iid_states, principal_regret, run, BoundParams, Notion,
    Theorem, Trajectory,
};
use mdlab_core::forecast::calibration_report;
use mdlab_core::game::{CoverRadii, Lipschitz, Prior};
use mdlab_core::impossibility::ImpossibilitySetup;
use mdlab_core::learner::{LearnerKind, LearnerSpec, Script};
use mdlab_core::mechanism::{MechanismKind, MechanismSpec};
use mdlab_core::scenario::{judge_policy, judge_prosecutor};
use proptest::prelude::*;

fn kind_from(i: u8) -> MechanismKind {
    [MechanismKind::Constant, MechanismKind::M1, MechanismKind::M2, MechanismKind::M3][i as usize % 4]
}

fn spec_for(kind: MechanismKind, policy: usize) -> MechanismSpec {
    match kind {
        MechanismKind::Constant => MechanismSpec::constant(policy, 0.25, 5),
        k => MechanismSpec::robust(k, 0.1, 0.25, 5),
    }
}

fn learner_from(i: u8) -> LearnerSpec {
    let kind = match i % 3 {
        0 => LearnerKind::Cfl,
        1 => LearnerKind::ExpWeights { eta: None },
        _ => LearnerKind::FixedPriorBayes { prior: Prior::new(vec![0.5, 0.5]).unwrap() },
    };
    LearnerSpec::new(kind, 11)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_seed_same_transcript(seed in any::<u64>(), kind in 0u8..4, learner in 0u8..3, t in 1usize..=60) {
        let s = judge_prosecutor(0.4, 0.25).unwrap();
        let ys = iid_states(&s.prior, t, seed);
        let (m, l) = (spec_for(kind_from(kind), 1), learner_from(learner));
        prop_assert_eq!(run(&s.game, &m, &l, &ys, seed).unwrap(), run(&s.game, &m, &l, &ys, seed).unwrap());
    }

    #[test]
    fn constant_mechanism_matches_its_own_counterfactual(seed in any::<u64>(), learner in 0u8..3, p in 0usize..5, t in 1usize..=60) {
        let s = judge_prosecutor(0.3, 0.25).unwrap();
        let ys = iid_states(&s.prior, t, seed);
        let tr = run(&s.game, &spec_for(MechanismKind::Constant, p), &learner_from(learner), &ys, seed).unwrap();
        let k = tr.alternative_index(p).unwrap();
        for r in &tr.rounds {
            let cf = &r.counterfactual[k];
            prop_assert_eq!(r.response, cf.response);
            prop_assert_eq!(&r.response_dist, &cf.response_dist);
            prop_assert_eq!(r.expected_v.to_bits(), cf.expected_v.to_bits());
        }
        prop_assert_eq!(principal_regret(&tr, &[p]).unwrap(), 0.0);
    }

    #[test]
    fn regret_is_the_count_weighted_sum_of_bins(seed in any::<u64>(), kind in 0u8..4, learner in 0u8..3, t in 1usize..=80) {
        let (game, _) = game_from_seed(seed, 3);
        let ys: Vec<usize> = (0..t).map(|i| (i * 31 + seed as usize) % game.n_states()).collect();
        let l = match learner % 3 {
            2 => LearnerSpec::new(LearnerKind::FixedPriorBayes { prior: Prior::uniform(game.n_states()) }, 3),
            _ => learner_from(learner),
        };
        let tr = run(&game, &spec_for(kind_from(kind), 0), &l, &ys, seed).unwrap();
        for notion in Notion::ALL {
            let reg = agent_regret(&game, &tr, notion, Trajectory::Realized).unwrap();
            let total: f64 = reg.per_bin.iter().map(|b| b.count as f64 * b.regret).sum::<f64>() / t as f64;
            prop_assert!((total - reg.value).abs() <= 1e-9);
            prop_assert_eq!(reg.per_bin.iter().map(|b| b.count).sum::<usize>(), t);
            prop_assert!(reg.value.is_finite());
        }
    }

    #[test]
    fn common_forecast_learner_never_beats_forecastwise_benchmark(seed in any::<u64>(), kind in 0u8..4, g in 0.05f64..0.95, t in 1usize..=200) {
        let kind = match kind_from(kind) {
            // M1 contexts split a forecast cell across policies; FER compares one response per cell
            MechanismKind::M1 => MechanismKind::M2,
            k => k,
        };
        let s = judge_prosecutor(g, 0.1).unwrap();
        let ys = iid_states(&s.prior, t, seed);
        let tr = run(&s.game, &spec_for(kind, 3), &learner_from(0), &ys, seed).unwrap();
        prop_assert!(agent_regret(&s.game, &tr, Notion::Fer, Trajectory::Realized).unwrap().value >= -1e-9);
        for k in 0..tr.alternatives.len() {
            prop_assert!(agent_regret(&s.game, &tr, Notion::Fer, Trajectory::Counterfactual(k)).unwrap().value >= -1e-9);
        }
    }

    #[test]
    fn empirical_kernels_are_bayes_consistent(seed in any::<u64>(), kind in 0u8..4, learner in 0u8..3, t in 1usize..=120) {
        let s = judge_prosecutor(0.35, 0.25).unwrap();
        let ys = iid_states(&s.prior, t, seed);
        let tr = run(&s.game, &spec_for(kind_from(kind), 2), &learner_from(learner), &ys, seed).unwrap();
        let st = empirical_structures(&s.game, &tr).unwrap();
        let ny = s.game.n_states();
        prop_assert_eq!(st.cells.iter().map(|c| c.count).sum::<usize>(), t);
        for cell in &st.cells {
            for y in 0..ny {
                let mut column = 0.0;
                for (j, &b) in cell.bins.iter().enumerate() {
                    let g = cell.gamma[j * ny + y];
                    column += g;
                    let lhs = g * cell.empirical[y] * cell.count as f64;
                    let bin = &st.bins[b];
                    prop_assert_eq!(bin.policy, cell.policy);
                    prop_assert!((lhs - bin.count as f64 * bin.empirical[y]).abs() <= 1e-9);
                }
                if cell.counts[y] > 0 {
                    prop_assert!((column - 1.0).abs() <= 1e-9);
                }
            }
            prop_assert!(cell.to_info_structure().is_ok());
        }
    }

    #[test]
    fn splitting_forecast_cells_by_context_never_reduces_miscalibration(seed in any::<u64>(), t in 1usize..=150) {
        let s = judge_prosecutor(0.4, 0.25).unwrap();
        let ys = iid_states(&s.prior, t, seed);
        let tr = run(&s.game, &spec_for(MechanismKind::M1, 0), &learner_from(1), &ys, seed).unwrap();
        let split = calibration(&tr).unwrap();
        let rows: Vec<(usize, usize)> = tr.rounds.iter().map(|r| (r.forecast_cell, r.state)).collect();
        let merged = calibration_report(&tr.grid, &rows).unwrap();
        prop_assert!(split.iota >= merged.iota - 1e-12);
        prop_assert!(split.iota <= split.l12_bound + 1e-9);
    }
}

#[test]
fn one_round_constant_mechanism_plays_the_forecast_best_response() {
    let s = judge_prosecutor(0.9, 0.25).unwrap();
    let tr = run(&s.game, &MechanismSpec::constant(4, 0.5, 0), &LearnerSpec::new(LearnerKind::Cfl, 0), &[1], 9).unwrap();
    assert_eq!(tr.len(), 1);
    let r = &tr.rounds[0];
    let forecast = tr.forecast(0);
    let eu = |resp: usize| (0..2).map(|y| forecast[y] * s.game.u(resp, 4, y)).sum::<f64>();
    let best = (0..s.game.n_responses()).map(eu).fold(f64::NEG_INFINITY, f64::max);
    assert!((eu(r.response) - best).abs() < 1e-12);
    assert_eq!(r.response_dist[r.response], 1.0);
}

/// Under the trigger-straddling pair the learner that predicts the script
/// has no contextual regret where it uses its foresight, and positive
/// contextual regret where its counterfactual twin leaks the state.
#[test]
fn scripted_learner_contextual_regret_depends_on_the_mechanism() {
    let setup = ImpossibilitySetup::default();
    let s = judge_prosecutor(setup.guilty, setup.policy_step).unwrap();
    let inside = judge_policy(setup.inside, setup.policy_step).unwrap();
    let outside = judge_policy(setup.outside, setup.policy_step).unwrap();
    let states = iid_states(&s.prior, 300, 4);
    let script = Script { states: states.clone(), trigger_policies: vec![inside], trigger_states: vec![1 - states[0]] };
    let learner = LearnerSpec::new(LearnerKind::SelectiveSuperefficiency { script, fallback: false }, 0);
    let cir = |policy| {
        let mut m = MechanismSpec::constant(policy, setup.forecast_delta, 0);
        m.alternatives = vec![inside, outside];
        let tr = run(&s.game, &m, &learner, &states, 1).unwrap();
        agent_regret(&s.game, &tr, Notion::Cir, Trajectory::Realized).unwrap().value
    };
    let (fires, holds_back) = (cir(inside), cir(outside));
    assert!(fires <= 1e-9, "{fires}");
    assert!(holds_back > 0.05, "{holds_back}");
}

#[test]
fn ex_post_optimal_agent_has_no_regret_under_any_notion() {
    let s = judge_prosecutor(0.5, 0.25).unwrap();
    let states = iid_states(&s.prior, 200, 8);
    // off the trigger diagonal at round one: every round plays the ex-post optimum
    let script = Script { states: states.clone(), trigger_policies: vec![], trigger_states: vec![states[0]] };
    let learner = LearnerSpec::new(LearnerKind::SelectiveSuperefficiency { script, fallback: false }, 0);
    let tr = run(&s.game, &MechanismSpec::robust(MechanismKind::M2, 0.1, 0.25, 0), &learner, &states, 2).unwrap();
    for notion in Notion::ALL {
        assert!(agent_regret(&s.game, &tr, notion, Trajectory::Realized).unwrap().value <= 1e-12, "{}", notion.name());
    }
}

#[test]
fn bound_without_penalties_is_its_main_term() {
    let params = BoundParams { epsilon: Some(0.0), epsilon_tilde: Some(0.0), m1: Some(0.0), m2: Some(0.0) };
    for theorem in [Theorem::T4, Theorem::T5, Theorem::T6] {
        let b = bound_terms(theorem, 0.37, 0.0, &params, Lipschitz::UNIT, CoverRadii::default(), 0.1).unwrap();
        assert_eq!(b, 0.37);
    }
}

#[test]
fn informational_bound_assembles_by_hand() {
    let params = BoundParams { epsilon: Some(0.05), ..Default::default() };
    let k = Lipschitz { u_response: 1.0, u_policy: 2.0, v_response: 3.0, v_policy: 4.0 };
    let radii = CoverRadii { response: 0.1, policy: 0.2 };
    // 0.3 + 2(0.05 + 0.2 + 0.1 + 0.4)/0.2 + (0.2 + 0.6 + 0.8)
    let b = bound_terms(Theorem::T6, 0.3, 0.1, &params, k, radii, 0.2).unwrap();
    assert!((b - 9.4).abs() < 1e-12, "{b}");
    assert!(bound_terms(Theorem::T5, 0.3, 0.1, &params, k, radii, 0.2).is_err());
}
