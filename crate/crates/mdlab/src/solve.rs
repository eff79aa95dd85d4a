//! Direct access to the stage-game solvers.

use std::fmt::Write;

use mdlab_core::error::SolveError;
use mdlab_core::game::{alpha, beta, cost_of_robustness, robust_policy, Game, Prior};
use mdlab_core::info::{cost_of_info_robustness, info_robust_policy, worst_case_alpha};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Robust,
    InfoRobust,
    Alpha,
    Beta,
    Nabla,
    Delta,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Robust => "robust",
            Mode::InfoRobust => "info-robust",
            Mode::Alpha => "alpha",
            Mode::Beta => "beta",
            Mode::Nabla => "nabla",
            Mode::Delta => "delta",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub mode: Mode,
    pub value: f64,
    pub policy: usize,
    /// Response distribution, or the joint ψ(r, y) row-major for informational modes.
    pub witness: Vec<f64>,
}

impl Solution {
    pub fn render(&self, game: &Game) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode: {}", self.mode.name());
        let _ = writeln!(s, "value: {:.6}", self.value);
        let _ = writeln!(s, "policy: {} ({})", self.policy, game.policies()[self.policy]);
        let w: Vec<String> = self.witness.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(s, "witness: {}", w.join(","));
        s
    }
}

/// `policy` pins α/β to one policy; otherwise the extremal policy is chosen.
pub fn solve(game: &Game, prior: &Prior, epsilon: f64, mode: Mode, policy: Option<usize>) -> Result<Solution, SolveError> {
    if let Some(p) = policy {
        game.check_policy(p)?;
    }
    let out = |value, policy, witness| Solution { mode, value, policy, witness };
    Ok(match mode {
        Mode::Robust => {
            let c = robust_policy(game, prior, epsilon)?;
            out(c.value.value, c.policy, c.value.witness)
        }
        Mode::Alpha => {
            let p = match policy {
                Some(p) => p,
                None => robust_policy(game, prior, epsilon)?.policy,
            };
            let a = alpha(game, p, prior, epsilon)?;
            out(a.value, p, a.witness)
        }
        Mode::Beta => {
            let mut best: Option<(usize, mdlab_core::game::RobustValue)> = None;
            let candidates: Vec<usize> = policy.map_or_else(|| (0..game.n_policies()).collect(), |p| vec![p]);
            for p in candidates {
                let b = beta(game, p, prior, epsilon)?;
                if best.as_ref().map_or(true, |(_, v)| b.value > v.value + 1e-12) {
                    best = Some((p, b));
                }
            }
            let (p, b) = best.expect("at least one policy");
            out(b.value, p, b.witness)
        }
        Mode::InfoRobust => {
            let (p, _) = info_robust_policy(game, prior, epsilon)?;
            let (v, psi) = worst_case_alpha(game, p, prior, epsilon)?;
            out(v, p, psi.joint().to_vec())
        }
        Mode::Nabla => {
            let (p, _) = info_robust_policy(game, prior, epsilon)?;
            out(cost_of_info_robustness(game, prior, epsilon)?, p, Vec::new())
        }
        Mode::Delta => {
            let c = robust_policy(game, prior, epsilon)?;
            out(cost_of_robustness(game, prior, epsilon)?, c.policy, c.value.witness)
        }
    })
}
