//! Brute-force validators for the LP solver.
//!
//! [`grid_oracle`] enumerates a lattice over a product of (scaled) simplices;
//! [`vertex_enumeration`] visits every basic solution of a small polytope.
//! Neither shares code with the simplex method.

use alloc::vec;
use alloc::vec::Vec;

use crate::lp::Sense;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexBlock {
    pub dim: usize,
    /// The block's coordinates sum to this mass.
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridOutcome {
    Best { value: f64, point: Vec<f64> },
    Infeasible,
}

impl GridOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            GridOutcome::Best { value, .. } => Some(*value),
            GridOutcome::Infeasible => None,
        }
    }
}

/// Maximize `objective` over lattice points of the unit simplex in `dimension`
/// coordinates that satisfy `feasible`. The step is snapped to `1/round(1/step)`.
pub fn grid_oracle<F, G>(objective: F, feasible: G, dimension: usize, step: f64) -> GridOutcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    grid_oracle_blocks(objective, feasible, &[SimplexBlock { dim: dimension, mass: 1.0 }], step)
}

/// [`grid_oracle`] over a product of simplices; the point concatenates blocks.
pub fn grid_oracle_blocks<F, G>(objective: F, feasible: G, blocks: &[SimplexBlock], step: f64) -> GridOutcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    let n = libm::round(1.0 / step).max(1.0) as usize;
    let lattices: Vec<Vec<Vec<f64>>> = blocks.iter().map(|b| lattice(n, b.dim, b.mass)).collect();
    let total: usize = blocks.iter().map(|b| b.dim).sum();
    let mut point = vec![0.0; total];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; blocks.len()];
    if lattices.iter().any(|l| l.is_empty()) {
        return GridOutcome::Infeasible;
    }
    loop {
        let mut off = 0;
        for (b, l) in lattices.iter().enumerate() {
            let p = &l[idx[b]];
            point[off..off + p.len()].copy_from_slice(p);
            off += p.len();
        }
        if feasible(&point) {
            let v = objective(&point);
            if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                best = Some((v, point.clone()));
            }
        }
        // odometer over blocks
        let mut b = blocks.len();
        loop {
            if b == 0 {
                return match best {
                    Some((value, point)) => GridOutcome::Best { value, point },
                    None => GridOutcome::Infeasible,
                };
            }
            b -= 1;
            idx[b] += 1;
            if idx[b] < lattices[b].len() {
                break;
            }
            idx[b] = 0;
        }
    }
}

fn lattice(n: usize, dim: usize, mass: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    let mut parts = vec![0usize; dim];
    parts[dim - 1] = n;
    loop {
        out.push(parts.iter().map(|&k| mass * k as f64 / n as f64).collect());
        // next composition of n into dim parts (lexicographic on the leading parts)
        let mut i = dim - 1;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let used: usize = parts[..=i].iter().sum();
            if used < n {
                parts[i] += 1;
                for p in parts.iter_mut().take(dim - 1).skip(i + 1) {
                    *p = 0;
                }
                let lead: usize = parts[..dim - 1].iter().sum();
                parts[dim - 1] = n - lead;
                break;
            }
        }
    }
}

/// Optimize `objective · x` over `{x : A_eq x = b_eq, A x ≤ b}` by solving every
/// square subsystem of active constraints. Returns `None` if no vertex is
/// feasible. Only meant for polytopes with a handful of dimensions.
pub fn vertex_enumeration(
    sense: Sense,
    objective: &[f64],
    equalities: &[(Vec<f64>, f64)],
    inequalities: &[(Vec<f64>, f64)],
    tol: f64,
) -> Option<(f64, Vec<f64>)> {
    let d = objective.len();
    if equalities.len() > d {
        return None;
    }
    let k = d - equalities.len();
    let m = inequalities.len();
    if k > m {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut choice: Vec<usize> = (0..k).collect();
    let mut a = vec![vec![0.0; d + 1]; d];
    loop {
        for (r, (row, rhs)) in equalities.iter().enumerate() {
            a[r][..d].copy_from_slice(row);
            a[r][d] = *rhs;
        }
        for (r, &c) in choice.iter().enumerate() {
            let (row, rhs) = &inequalities[c];
            a[equalities.len() + r][..d].copy_from_slice(row);
            a[equalities.len() + r][d] = *rhs;
        }
        if let Some(x) = gauss_solve(&mut a) {
            let ok = equalities.iter().all(|(row, rhs)| (dot(row, &x) - rhs).abs() <= tol)
                && inequalities.iter().all(|(row, rhs)| dot(row, &x) <= rhs + tol);
            if ok {
                let v = dot(objective, &x);
                let better = match &best {
                    None => true,
                    Some((bv, _)) => match sense {
                        Sense::Maximize => v > *bv,
                        Sense::Minimize => v < *bv,
                    },
                };
                if better {
                    best = Some((v, x));
                }
            }
        }
        // next k-combination of 0..m
        if k == 0 {
            return best;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if choice[i] < m - k + i {
                choice[i] += 1;
                for j in i + 1..k {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting on an augmented `d × (d+1)` system.
fn gauss_solve(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let d = a.len();
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..d {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=d {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let mut s = a[r][d];
        for c in r + 1..d {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_coordinate_on_coarse_grid() {
        match grid_oracle(|x| x[0], |_| true, 2, 0.5) {
            GridOutcome::Best { value, point } => {
                assert_eq!(value, 1.0);
                assert_eq!(point, vec![1.0, 0.0]);
            }
            GridOutcome::Infeasible => panic!(),
        }
    }

    #[test]
    fn empty_feasible_set() {
        assert_eq!(grid_oracle(|x| x[0], |_| false, 3, 0.25), GridOutcome::Infeasible);
    }

    #[test]
    fn linear_objective_hits_vertex() {
        let out = grid_oracle(|x| x[0] + 2.0 * x[1] + 3.0 * x[2], |_| true, 3, 0.25);
        assert_eq!(out, GridOutcome::Best { value: 3.0, point: vec![0.0, 0.0, 1.0] });
    }

    #[test]
    fn lattice_size_is_binomial() {
        // C(n + d - 1, d - 1) points
        assert_eq!(lattice(4, 3, 1.0).len(), 15);
        assert_eq!(lattice(10, 2, 1.0).len(), 11);
        assert!(lattice(4, 3, 0.5).iter().all(|p| (p.iter().sum::<f64>() - 0.5).abs() < 1e-12));
    }

    #[test]
    fn vertex_enumeration_on_square() {
        // max x + y on the unit square
        let ineq = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
            (vec![-1.0, 0.0], 0.0),
            (vec![0.0, -1.0], 0.0),
        ];
        let (v, x) = vertex_enumeration(Sense::Maximize, &[1.0, 1.0], &[], &ineq, 1e-12).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(x, vec![1.0, 1.0]);
        let (v, _) = vertex_enumeration(Sense::Minimize, &[1.0, 1.0], &[(vec![1.0, -1.0], 0.5)], &ineq, 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }
}
