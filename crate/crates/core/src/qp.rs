//! Dense box-constrained convex quadratic programs:
//! minimize ½ xᵀHx + gᵀx subject to lo ≤ x ≤ hi.

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

/// KKT tolerance on the projected gradient.
pub const KKT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub x: Vector,
    /// Active-set changes performed.
    pub iterations: usize,
    /// Largest violation of the KKT conditions at `x`.
    pub kkt_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// Unconstrained minimizer `-H⁻¹ g`.
pub fn solve_unconstrained(h: &Mat, g: &Vector) -> Result<Vector> {
    let chol = crate::linalg::cholesky(h.clone(), "QP Hessian")?;
    Ok(-chol.solve(g))
}

/// Projected-gradient KKT residual, scaled by the gradient magnitude.
pub fn kkt_residual(h: &Mat, g: &Vector, x: &Vector, lo: &Vector, hi: &Vector) -> f64 {
    let grad = h * x + g;
    let scale = 1.0 + g.amax() + (h * x).amax();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let r = if x[i] <= lo[i] {
            (-grad[i]).max(0.0)
        } else if x[i] >= hi[i] {
            grad[i].max(0.0)
        } else {
            grad[i].abs()
        };
        worst = worst.max(r);
    }
    worst / scale
}

/// Primal active-set method. `h` must be symmetric positive definite.
pub fn solve_box_qp(h: &Mat, g: &Vector, lo: &Vector, hi: &Vector) -> Result<QpSolution> {
    let n = g.len();
    if h.shape() != (n, n) || lo.len() != n || hi.len() != n {
        return Err(Error::Dimension("box QP dimensions".into()));
    }
    if lo.iter().zip(hi.iter()).any(|(l, u)| l > u) {
        return Err(Error::InvalidConfig("box QP lower bound above upper bound".into()));
    }
    let x_unc = solve_unconstrained(h, g)?;
    if (0..n).all(|i| x_unc[i] >= lo[i] && x_unc[i] <= hi[i]) {
        let kkt_residual = kkt_residual(h, g, &x_unc, lo, hi);
        return Ok(QpSolution { x: x_unc, iterations: 0, kkt_residual });
    }

    let mut x = Vector::from_fn(n, |i, _| x_unc[i].clamp(lo[i], hi[i]));
    let mut state: Vec<Bound> = (0..n)
        .map(|i| {
            if x[i] <= lo[i] {
                Bound::Lower
            } else if x[i] >= hi[i] {
                Bound::Upper
            } else {
                Bound::Free
            }
        })
        .collect();
    let max_iter = 10 * n + 50;
    for iter in 1..=max_iter {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == Bound::Free).collect();
        // Minimize over the free variables with the others pinned.
        let mut target = x.clone();
        if !free.is_empty() {
            let hff = Mat::from_fn(free.len(), free.len(), |r, c| h[(free[r], free[c])]);
            let rhs = Vector::from_fn(free.len(), |r, _| {
                let i = free[r];
                let mut s = g[i];
                for j in 0..n {
                    if state[j] != Bound::Free {
                        s += h[(i, j)] * x[j];
                    }
                }
                -s
            });
            let xf = crate::linalg::cholesky(hff, "QP reduced Hessian")?.solve(&rhs);
            for (r, &i) in free.iter().enumerate() {
                target[i] = xf[r];
            }
        }
        // Longest feasible step towards the target.
        let mut step = 1.0f64;
        let mut blocking = None;
        for &i in &free {
            let d = target[i] - x[i];
            if d < 0.0 && target[i] < lo[i] {
                let s = (lo[i] - x[i]) / d;
                if s < step {
                    step = s;
                    blocking = Some((i, Bound::Lower));
                }
            } else if d > 0.0 && target[i] > hi[i] {
                let s = (hi[i] - x[i]) / d;
                if s < step {
                    step = s;
                    blocking = Some((i, Bound::Upper));
                }
            }
        }
        let step = step.max(0.0);
        for &i in &free {
            x[i] += step * (target[i] - x[i]);
        }
        if let Some((i, b)) = blocking {
            x[i] = if b == Bound::Lower { lo[i] } else { hi[i] };
            state[i] = b;
            continue;
        }
        // At the subspace minimizer: release the bound with the worst multiplier.
        let grad = h * &x + g;
        let mut release = None;
        let mut worst = 0.0;
        for i in 0..n {
            let v = match state[i] {
                Bound::Lower => -grad[i],
                Bound::Upper => grad[i],
                Bound::Free => 0.0,
            };
            if v > worst {
                worst = v;
                release = Some(i);
            }
        }
        let scale = 1.0 + g.amax() + (h * &x).amax();
        match release {
            Some(i) if worst / scale > KKT_TOL * 1e-3 => state[i] = Bound::Free,
            _ => {
                let kkt_residual = kkt_residual(h, g, &x, lo, hi);
                return Ok(QpSolution { x, iterations: iter, kkt_residual });
            }
        }
    }
    Err(Error::SolverFailure {
        step: 0,
        reason: format!("box QP active set did not settle in {max_iter} iterations"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spd(vals: &[f64], n: usize) -> Mat {
        let m = Mat::from_row_slice(n, n, &vals[..n * n]);
        &m * m.transpose() + Mat::identity(n, n) * 0.1
    }

    #[test]
    fn unconstrained_interior_solution() {
        let h = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let g = Vector::from_row_slice(&[-2.0, -4.0]);
        let s = solve_box_qp(&h, &g, &Vector::from_element(2, -10.0), &Vector::from_element(2, 10.0)).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn clipped_scalar() {
        let h = Mat::from_element(1, 1, 1.0);
        let g = Vector::from_element(1, -5.0);
        let s = solve_box_qp(&h, &g, &Vector::from_element(1, 0.0), &Vector::from_element(1, 2.0)).unwrap();
        assert_eq!(s.x[0], 2.0);
    }

    #[test]
    fn coupled_bound_changes_free_variable() {
        // min (x0 - 3)² + (x1 - x0)² with x0 <= 1 gives x1 = 1
        let h = Mat::from_row_slice(2, 2, &[4.0, -2.0, -2.0, 2.0]);
        let g = Vector::from_row_slice(&[-6.0, 0.0]);
        let s = solve_box_qp(&h, &g, &Vector::from_element(2, -9.0), &Vector::from_row_slice(&[1.0, 9.0])).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_hessian_is_ill_posed() {
        let h = Mat::zeros(2, 2);
        let g = Vector::zeros(2);
        let err = solve_box_qp(&h, &g, &Vector::from_element(2, -1.0), &Vector::from_element(2, 1.0));
        assert!(matches!(err, Err(Error::IllPosedWeights(_))));
    }

    proptest! {
        #[test]
        fn satisfies_kkt(vals in prop::collection::vec(-1.0..1.0f64, 16 + 4), width in 0.05..2.0f64) {
            let h = spd(&vals, 4);
            let g = Vector::from_row_slice(&vals[16..20]) * 5.0;
            let lo = Vector::from_element(4, -width);
            let hi = Vector::from_element(4, width);
            let s = solve_box_qp(&h, &g, &lo, &hi).unwrap();
            prop_assert!(s.kkt_residual < KKT_TOL);
            for i in 0..4 {
                prop_assert!(s.x[i] >= lo[i] && s.x[i] <= hi[i]);
            }
        }
    }
}
