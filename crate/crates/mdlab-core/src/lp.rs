//! Dense two-phase simplex with Bland's rule.
//!
//! Every program in this crate is small (a few dozen variables), so the
//! solver favours determinism over speed: pivots follow Bland's lowest-index
//! rule and nothing is perturbed, which keeps degenerate `ε = 0` programs
//! exact.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::LpError;

/// Absolute feasibility tolerance for constraints and phase-one residuals.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Per-variable `(lower, upper)`; infinities mean unbounded.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// New program with every variable restricted to `[0, ∞)`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn dimension(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coefficients, relation, rhs });
        self
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch { expected: n, found: self.bounds.len(), row: None });
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(LpError::DimensionMismatch { expected: n, found: c.coefficients.len(), row: Some(i) });
            }
            if !c.rhs.is_finite() || c.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(LpError::NonFinite);
            }
        }
        if self.objective.iter().any(|a| !a.is_finite()) {
            return Err(LpError::NonFinite);
        }
        if self.bounds.iter().any(|&(l, u)| l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY) {
            return Err(LpError::NonFinite);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; `NaN` unless optimal.
    pub value: f64,
    /// Primal point; empty unless optimal.
    pub witness: Vec<f64>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        Self { status, value: f64::NAN, witness: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable maps onto non-negative standard columns.
#[derive(Clone, Copy)]
enum Substitution {
    /// x = offset + s
    Shift { col: usize, offset: f64 },
    /// x = offset - s
    Mirror { col: usize, offset: f64 },
    /// x = s⁺ - s⁻
    Free { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let f = self.rows[i][col];
            if f == 0.0 {
                continue;
            }
            for (a, b) in self.rows[i].iter_mut().zip(pivot_row.iter()) {
                *a -= f * b;
            }
            self.rows[i][col] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Minimize `cost · x` from the current basic feasible solution using
    /// only columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.width {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for (i, &b) in self.basis.iter().enumerate() {
                    d -= cost[b] * self.rows[i][j];
                }
                if d < -COST_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return true };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else { return false };
            self.pivot(row, col);
            for v in self.rhs.iter_mut() {
                if *v < 0.0 && *v > -FEASIBILITY_TOL {
                    *v = 0.0;
                }
            }
        }
    }
}

/// Solve a linear program. Deterministic: identical input gives a bit-identical result.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.dimension();

    let mut subs = Vec::with_capacity(n);
    let mut n_std = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo > hi {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        if lo.is_finite() {
            subs.push(Substitution::Shift { col: n_std, offset: lo });
            if hi.is_finite() {
                extra_rows.push((n_std, hi - lo));
            }
            n_std += 1;
        } else if hi.is_finite() {
            subs.push(Substitution::Mirror { col: n_std, offset: hi });
            n_std += 1;
        } else {
            subs.push(Substitution::Free { pos: n_std, neg: n_std + 1 });
            n_std += 2;
        }
    }

    // Rows over the standard columns, rhs adjusted for offsets.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(lp.constraints.len() + extra_rows.len());
    for c in &lp.constraints {
        let mut row = vec![0.0; n_std];
        let mut rhs = c.rhs;
        for (j, &a) in c.coefficients.iter().enumerate() {
            match subs[j] {
                Substitution::Shift { col, offset } => {
                    row[col] += a;
                    rhs -= a * offset;
                }
                Substitution::Mirror { col, offset } => {
                    row[col] -= a;
                    rhs -= a * offset;
                }
                Substitution::Free { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        rows.push((row, c.relation, rhs));
    }
    for &(col, width) in &extra_rows {
        let mut row = vec![0.0; n_std];
        row[col] = 1.0;
        rows.push((row, Relation::Le, width));
    }
    for r in rows.iter_mut() {
        if r.2 < 0.0 {
            for v in r.0.iter_mut() {
                *v = -*v;
            }
            r.2 = -r.2;
            r.1 = match r.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n_std + n_slack + n_art;
    let art_start = n_std + n_slack;

    let mut tab = Tableau { rows: Vec::with_capacity(m), rhs: Vec::with_capacity(m), basis: Vec::with_capacity(m), width };
    let (mut s, mut a) = (n_std, art_start);
    for (coef, rel, rhs) in rows {
        let mut row = vec![0.0; width];
        row[..n_std].copy_from_slice(&coef);
        match rel {
            Relation::Le => {
                row[s] = 1.0;
                tab.basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                tab.basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = 1.0;
                tab.basis.push(a);
                a += 1;
            }
        }
        tab.rows.push(row);
        tab.rhs.push(rhs);
    }

    if n_art > 0 {
        let mut cost = vec![0.0; width];
        for c in cost.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        let allowed = vec![true; width];
        tab.optimize(&cost, &allowed);
        let residual: f64 = tab.basis.iter().zip(tab.rhs.iter()).filter(|(&b, _)| b >= art_start).map(|(_, &v)| v).sum();
        if residual > FEASIBILITY_TOL {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL && !tab.basis.contains(&j)) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut cost = vec![0.0; width];
    for (j, &c) in lp.objective.iter().enumerate() {
        match subs[j] {
            Substitution::Shift { col, .. } => cost[col] += sign * c,
            Substitution::Mirror { col, .. } => cost[col] -= sign * c,
            Substitution::Free { pos, neg } => {
                cost[pos] += sign * c;
                cost[neg] -= sign * c;
            }
        }
    }
    let mut allowed = vec![true; width];
    for v in allowed.iter_mut().skip(art_start) {
        *v = false;
    }
    if !tab.optimize(&cost, &allowed) {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
    }

    let mut std_x = vec![0.0; width];
    for (i, &b) in tab.basis.iter().enumerate() {
        std_x[b] = tab.rhs[i].max(0.0);
    }
    let witness: Vec<f64> = subs
        .iter()
        .map(|s| match *s {
            Substitution::Shift { col, offset } => offset + std_x[col],
            Substitution::Mirror { col, offset } => offset - std_x[col],
            Substitution::Free { pos, neg } => std_x[pos] - std_x[neg],
        })
        .collect();
    let value = lp.objective.iter().zip(witness.iter()).map(|(c, x)| c * x).sum();
    Ok(LpSolution { status: LpStatus::Optimal, value, witness })
}

/// Largest violation of any constraint or bound by `x`.
pub fn max_violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for c in &lp.constraints {
        let lhs: f64 = c.coefficients.iter().zip(x).map(|(a, b)| a * b).sum();
        let v = match c.relation {
            Relation::Le => lhs - c.rhs,
            Relation::Ge => c.rhs - lhs,
            Relation::Eq => (lhs - c.rhs).abs(),
        };
        worst = worst.max(v);
    }
    for (&(lo, hi), &xi) in lp.bounds.iter().zip(x) {
        worst = worst.max(lo - xi).max(xi - hi);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_maximum() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!((s.witness[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tight_covering_row() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Ge, 2.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.constrain(vec![1.0], Relation::Ge, 2.0).constrain(vec![1.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);

        let lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min x - y, x free with x >= -3 via row, y <= 2
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, -1.0]);
        lp.bound(0, f64::NEG_INFINITY, f64::INFINITY).bound(1, f64::NEG_INFINITY, 2.0);
        lp.constrain(vec![1.0, 0.0], Relation::Ge, -3.0);
        let s = solve(&lp).unwrap();
        assert!((s.value + 5.0).abs() < 1e-12);
        assert!((s.witness[0] + 3.0).abs() < 1e-12 && (s.witness[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boxed_variable_with_offset() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 2.0]);
        lp.bound(0, 1.0, 4.0).bound(1, -1.0, 0.5);
        lp.constrain(vec![1.0, 1.0], Relation::Le, 3.0);
        let s = solve(&lp).unwrap();
        // y at 0.5, x at 2.5
        assert!((s.value - 3.5).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0).constrain(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ragged_rows_rejected() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve(&lp), Err(LpError::DimensionMismatch { row: Some(0), .. })));
        let mut lp = LinearProgram::new(Sense::Minimize, vec![f64::NAN]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp), Err(LpError::NonFinite));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![-0.75, 150.0, -0.02, 6.0]);
        lp.constrain(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .constrain(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .constrain(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert!((s.value + 0.05).abs() < 1e-9);
    }
}
