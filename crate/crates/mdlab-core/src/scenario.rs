//! Built-in games.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::GameError;
use crate::game::{CoverRadii, Game, GameParts, Lipschitz, Metric, Prior};

/// A game together with the prior it is usually studied under.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub game: Game,
    pub prior: Prior,
}

/// Judge-prosecutor responses, as (action on a "convict" message, action on an "acquit" message).
pub const ALWAYS_CONVICT: usize = 0;
pub const FOLLOW: usize = 1;
pub const CONTRARIAN: usize = 2;
pub const ALWAYS_ACQUIT: usize = 3;

/// State indices: innocent, guilty.
pub const INNOCENT: usize = 0;
pub const GUILTY: usize = 1;

fn check_step(step: f64, upper: f64) -> Result<usize, GameError> {
    if !(step > 0.0 && step <= upper && step.is_finite()) {
        return Err(GameError::Invalid(format!("grid step {step} must lie in (0, {upper}]")));
    }
    let n = libm::round(upper / step);
    if (n * step - upper).abs() > 1e-9 {
        return Err(GameError::Invalid(format!("grid step {step} must divide {upper}")));
    }
    Ok(n as usize)
}

/// The prosecutor always sends "convict" for the guilty and sends it with
/// probability `q` for the innocent; policies are `q = 0, step, …, 1`.
/// Prior `[1 − g, g]` over (innocent, guilty).
pub fn judge_prosecutor(guilty: f64, step: f64) -> Result<Scenario, GameError> {
    persuasion(guilty, step, ["innocent", "guilty"], ["convict", "acquit"])
}

/// The judge-prosecutor game relabelled as a regulator facing a drug trial.
pub fn drug_approval(effective: f64, step: f64) -> Result<Scenario, GameError> {
    persuasion(effective, step, ["ineffective", "effective"], ["approve", "reject"])
}

fn persuasion(bad: f64, step: f64, states: [&str; 2], actions: [&str; 2]) -> Result<Scenario, GameError> {
    let n = check_step(step, 1.0)?;
    let qs: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let [yes, no] = actions;
    // (action after a "yes" message, action after a "no" message); true = yes
    let responses = [(true, true), (true, false), (false, true), (false, false)];
    let names = responses
        .iter()
        .map(|&(a, b)| format!("{}/{}", if a { yes } else { no }, if b { yes } else { no }))
        .collect();
    let np = qs.len();
    let mut u = vec![0.0; 4 * np * 2];
    let mut v = vec![0.0; 4 * np * 2];
    for (r, &(on_yes, on_no)) in responses.iter().enumerate() {
        for (p, &q) in qs.iter().enumerate() {
            let at = |y: usize| (r * np + p) * 2 + y;
            // the second state always gets the "yes" message
            u[at(1)] = f64::from(u8::from(on_yes));
            v[at(1)] = f64::from(u8::from(on_yes));
            let yes_share = q * f64::from(u8::from(on_yes)) + (1.0 - q) * f64::from(u8::from(on_no));
            u[at(0)] = 1.0 - yes_share;
            v[at(0)] = yes_share;
        }
    }
    let mut metric = vec![0.0; np * np];
    for i in 0..np {
        for j in 0..np {
            metric[i * np + j] = 2.0 * (qs[i] - qs[j]).abs();
        }
    }
    let game = Game::new(GameParts {
        states: states.iter().map(|s| s.to_string()).collect(),
        responses: names,
        policies: qs.iter().map(|q| format!("q={q:.4}")).collect(),
        u,
        v,
        response_metric: Metric::Discrete,
        policy_metric: Metric::Matrix(metric),
        lipschitz: Lipschitz::UNIT,
        cover_radii: CoverRadii { response: 0.0, policy: 1.0 / n as f64 },
    })?;
    let prior = Prior::new(vec![1.0 - bad, bad])?;
    Ok(Scenario { game, prior })
}

/// Parameters of the work/shirk contract game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractParams {
    /// Cost of (work, shirk).
    pub costs: [f64; 2],
    /// Principal's benefit from (success, failure).
    pub benefits: [f64; 2],
    pub max_pay: f64,
    pub step: f64,
}

impl Default for ContractParams {
    fn default() -> Self {
        Self { costs: [1.0, 0.0], benefits: [10.0, 0.0], max_pay: 4.0, step: 0.5 }
    }
}

/// State indices: trivial, moderate, impossible. Responses: work, shirk.
pub const WORK: usize = 0;
pub const SHIRK: usize = 1;
pub const MODERATE: usize = 1;

/// Whether action `r` succeeds in state `y`.
fn succeeds(r: usize, y: usize) -> bool {
    y == 0 || (y == MODERATE && r == WORK)
}

/// Contract design with payments `(success, failure)` on a grid over `[0, p̄]²`.
/// Both payoffs are affinely normalized into `[0, 1]`; the policy metric is
/// the sup norm in raw payment units.
pub fn contract_task(params: ContractParams) -> Result<Scenario, GameError> {
    let ContractParams { costs, benefits, max_pay, step } = params;
    if !(max_pay > 0.0 && max_pay.is_finite()) || costs.iter().chain(&benefits).any(|x| !x.is_finite()) {
        return Err(GameError::Invalid("contract parameters must be finite with p̄ > 0".into()));
    }
    let n = check_step(step, max_pay)?;
    let pays: Vec<f64> = (0..=n).map(|k| k as f64 * max_pay / n as f64).collect();
    let policies: Vec<(f64, f64)> = pays.iter().flat_map(|&s| pays.iter().map(move |&f| (s, f))).collect();
    let (c_lo, c_hi) = (costs[0].min(costs[1]), costs[0].max(costs[1]));
    let (b_lo, b_hi) = (benefits[0].min(benefits[1]), benefits[0].max(benefits[1]));
    let u_span = max_pay + c_hi - c_lo;
    let v_span = b_hi - b_lo + max_pay;
    let np = policies.len();
    let mut u = vec![0.0; 2 * np * 3];
    let mut v = vec![0.0; 2 * np * 3];
    for r in 0..2 {
        for (p, &(s, f)) in policies.iter().enumerate() {
            for y in 0..3 {
                let (pay, benefit) = if succeeds(r, y) { (s, benefits[0]) } else { (f, benefits[1]) };
                u[(r * np + p) * 3 + y] = ((pay - costs[r] + c_hi) / u_span).clamp(0.0, 1.0);
                v[(r * np + p) * 3 + y] = ((benefit - pay - b_lo + max_pay) / v_span).clamp(0.0, 1.0);
            }
        }
    }
    let mut metric = vec![0.0; np * np];
    for i in 0..np {
        for j in 0..np {
            metric[i * np + j] = (policies[i].0 - policies[j].0).abs().max((policies[i].1 - policies[j].1).abs());
        }
    }
    let game = Game::new(GameParts {
        states: ["trivial", "moderate", "impossible"].iter().map(|s| s.to_string()).collect(),
        responses: vec![String::from("work"), String::from("shirk")],
        policies: policies.iter().map(|(s, f)| format!("s={s:.3},f={f:.3}")).collect(),
        u,
        v,
        response_metric: Metric::Discrete,
        policy_metric: Metric::Matrix(metric),
        lipschitz: Lipschitz { u_response: 1.0, u_policy: 1.0 / u_span, v_response: 1.0, v_policy: 1.0 / v_span },
        cover_radii: CoverRadii { response: 0.0, policy: step / 2.0 },
    })?;
    Ok(Scenario { game, prior: Prior::uniform(3) })
}

/// Index of the contract paying `(success, failure)`, if it is on the grid.
pub fn contract_policy(params: &ContractParams, success: f64, failure: f64) -> Option<usize> {
    let n = libm::round(params.max_pay / params.step) as usize;
    let idx = |x: f64| {
        let k = libm::round(x / params.step);
        ((k * params.step - x).abs() < 1e-9 && k >= 0.0 && k as usize <= n).then_some(k as usize)
    };
    Some(idx(success)? * (n + 1) + idx(failure)?)
}

/// `(success, failure)` payments of a contract policy index.
pub fn contract_payments(params: &ContractParams, policy: usize) -> (f64, f64) {
    let n = libm::round(params.max_pay / params.step) as usize;
    let at = |k: usize| k as f64 * params.max_pay / n as f64;
    (at(policy / (n + 1)), at(policy % (n + 1)))
}

/// Index of judge-prosecutor policy `q` on a grid with the given step.
pub fn judge_policy(q: f64, step: f64) -> Option<usize> {
    let k = libm::round(q / step);
    ((k * step - q).abs() < 1e-9 && (0.0..=libm::round(1.0 / step)).contains(&k)).then_some(k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{alpha, beta};

    #[test]
    fn persuasion_payoffs() {
        let s = judge_prosecutor(1.0 / 3.0, 0.5).unwrap();
        let g = &s.game;
        assert_eq!(g.n_policies(), 3);
        // q = 0.5, follow: innocent acquitted half the time
        assert_eq!(g.u(FOLLOW, 1, INNOCENT), 0.5);
        assert_eq!(g.v(FOLLOW, 1, INNOCENT), 0.5);
        assert_eq!(g.v(FOLLOW, 1, GUILTY), 1.0);
        assert_eq!(g.u(CONTRARIAN, 0, GUILTY), 0.0);
        assert_eq!(g.u(ALWAYS_ACQUIT, 2, INNOCENT), 1.0);
        let b = beta(g, 1, &s.prior, 0.0).unwrap().value;
        assert!((b - 2.0 / 3.0).abs() < 1e-9);
        assert!((alpha(g, 0, &s.prior, 0.0).unwrap().value - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn drug_alias_shares_tables() {
        let a = judge_prosecutor(0.4, 0.25).unwrap();
        let b = drug_approval(0.4, 0.25).unwrap();
        assert_eq!(a.game.parts().u, b.game.parts().u);
        assert_eq!(a.game.parts().v, b.game.parts().v);
        assert_ne!(a.game.states(), b.game.states());
    }

    #[test]
    fn contract_indices_round_trip() {
        let params = ContractParams::default();
        let s = contract_task(params).unwrap();
        assert_eq!(s.game.n_policies(), 81);
        let p = contract_policy(&params, 2.5, 0.5).unwrap();
        assert_eq!(contract_payments(&params, p), (2.5, 0.5));
        assert_eq!(contract_policy(&params, 0.3, 0.0), None);
        assert_eq!(judge_policy(0.35, 0.05), Some(7));
        assert!(judge_prosecutor(0.3, 0.3).is_err());
    }
}
