//! Local controller of one subsystem: stacked prediction matrices, the
//! closed-form local law and the augmented local problem used during
//! coordination.

use nalgebra::{Cholesky, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{block_diag_repeat, cholesky, powers, set_block, Mat, Vector};
use crate::linear::SubsystemDecomposition;
use crate::qp::solve_box_qp;

/// Weights of one subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalWeights {
    /// Output tracking weight.
    pub q: Mat,
    /// Input weight (increments for the dual scheme, absolute inputs for goal coordination).
    pub r: Mat,
    /// Interaction weight.
    pub s: Mat,
    /// Terminal state weight.
    pub terminal: Mat,
    /// Reference smoothing factor in [0, 1].
    pub alpha: f64,
}

/// Plan and predictions exchanged with neighbours: `u_plan` holds
/// u(k−1..k+M−2) and `x_pred` holds x(k..k+P−1) as computed at k−1.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinationMessage {
    pub sender: usize,
    pub u_plan: Vector,
    pub x_pred: Vector,
}

/// Stacked interaction forecasts over the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionEstimate {
    /// w(k..k+P−1)
    pub w: Vector,
    /// v(k+1..k+P)
    pub v: Vector,
}

/// Result of one local solve.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPlan {
    pub delta_u: Vector,
    /// Absolute inputs u(k..k+M−1).
    pub u_plan: Vector,
    /// Predicted states x(k+1..k+P).
    pub x_pred: Vector,
    /// Own copies of the incoming interactions, one per in-neighbour.
    pub z_in: Vec<Vector>,
    /// Contributions sent to each out-neighbour.
    pub h_out: Vec<Vector>,
}

/// Hold-extension Γ̃: M input blocks to P, repeating the last.
pub fn gamma_tilde(nu: usize, p: usize, m: usize) -> Mat {
    let mut g = Mat::zeros(p * nu, m * nu);
    for l in 0..p {
        set_block(&mut g, l * nu, l.min(m - 1) * nu, &Mat::identity(nu, nu));
    }
    g
}

/// Γ̄: increments to absolute moves (block lower-triangular identities).
pub fn gamma_bar(nu: usize, m: usize) -> Mat {
    let mut g = Mat::zeros(m * nu, m * nu);
    for r in 0..m {
        for c in 0..=r {
            set_block(&mut g, r * nu, c * nu, &Mat::identity(nu, nu));
        }
    }
    g
}

/// Γ′: stacked identities.
pub fn gamma_prime(nu: usize, m: usize) -> Mat {
    let mut g = Mat::zeros(m * nu, nu);
    for r in 0..m {
        set_block(&mut g, r * nu, 0, &Mat::identity(nu, nu));
    }
    g
}

/// T: advance a P-block sequence by one sample, repeating the last block.
pub fn shift_forward(ny: usize, p: usize) -> Mat {
    let mut t = Mat::zeros(p * ny, p * ny);
    for l in 0..p {
        set_block(&mut t, l * ny, (l + 1).min(p - 1) * ny, &Mat::identity(ny, ny));
    }
    t
}

/// S̄: lower-triangular convolution with powers of `a`.
pub fn convolution(a: &Mat, p: usize) -> Mat {
    let n = a.nrows();
    let pw = powers(a, p);
    let mut s = Mat::zeros(p * n, p * n);
    for r in 0..p {
        for c in 0..=r {
            set_block(&mut s, r * n, c * n, &pw[r - c]);
        }
    }
    s
}

pub struct LocalController {
    pub id: usize,
    pub nx: usize,
    pub nu: usize,
    pub ny: usize,
    pub nd: usize,
    pub horizon_p: usize,
    pub horizon_m: usize,
    /// Subsystems whose states or inputs enter this one.
    pub in_neighbors: Vec<usize>,
    /// Subsystems this one enters.
    pub out_neighbors: Vec<usize>,
    pub weights: LocalWeights,
    pub rho: f64,

    pub a_ii: Mat,
    pub b_ii: Mat,
    pub c_ii: Mat,
    pub e_i: Mat,
    /// `diag_P{A_ij}`, `diag_P{B_ij}`, `diag_P{C_ij}` for each in-neighbour.
    pub a_tilde: Vec<Mat>,
    pub b_tilde: Vec<Mat>,
    pub c_tilde: Vec<Mat>,
    /// `diag_P{A_li}`, `diag_P{B_li}` for each out-neighbour.
    a_out: Vec<Mat>,
    b_out: Vec<Mat>,
    /// Input dimensions of the in-neighbours.
    in_nu: Vec<usize>,
    out_nx: Vec<usize>,

    pub s_bar: Mat,
    pub a_bar: Mat,
    /// `diag_P{B_ii}` acting on the held input sequence.
    pub b_bar: Mat,
    pub e_bar: Mat,
    pub c_bar: Mat,
    pub t_shift: Mat,
    pub gamma_tilde: Mat,
    pub gamma_bar: Mat,
    pub gamma_prime: Mat,
    /// `S_i = C̄ S̄`.
    pub s_i: Mat,
    /// `N_i = S_i B̄ Γ̃ Γ̄`.
    pub n_i: Mat,
    /// `H_i = N_iᵀ Q̄ N_i + R̄`.
    pub h_i: Mat,
    /// `K̄_i = H_i⁻¹ N_iᵀ Q̄`.
    pub k_bar: Mat,
    q_bar: Mat,

    // augmented local problem in θ = [ΔU; w_j for j ∈ in-neighbours]
    theta_dim: usize,
    y_theta: Mat,
    x_theta: Mat,
    h_theta: Vec<Mat>,
    hess: Mat,
    hess_chol: Cholesky<f64, Dyn>,
}

impl LocalController {
    pub fn new(
        dec: &SubsystemDecomposition,
        id: usize,
        weights: LocalWeights,
        horizon_p: usize,
        horizon_m: usize,
        rho: f64,
    ) -> Result<Self> {
        let (p, m) = (horizon_p, horizon_m);
        if m == 0 || m > p {
            return Err(Error::InvalidConfig(format!("horizons need 1 <= M <= P, got P={p}, M={m}")));
        }
        if !(0.0..=1.0).contains(&weights.alpha) {
            return Err(Error::InvalidConfig(format!("smoothing factor {} outside [0, 1]", weights.alpha)));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidConfig(format!("penalty rho must be > 0, got {rho}")));
        }
        let (nx, nu, ny, nd) = (dec.nx(id), dec.nu(id), dec.ny(id), dec.nd());
        if weights.q.shape() != (ny, ny) || weights.r.shape() != (nu, nu) {
            return Err(Error::Dimension(format!("subsystem {}: weight shapes", id + 1)));
        }
        let in_neighbors = dec.neighbors[id].clone();
        let out_neighbors: Vec<usize> = (0..dec.len()).filter(|&l| dec.neighbors[l].contains(&id)).collect();
        for &j in &in_neighbors {
            if dec.c[id][j].iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "output coupling between subsystems {} and {} is not supported",
                    id + 1,
                    j + 1
                )));
            }
        }

        let a_ii = dec.a[id][id].clone();
        let b_ii = dec.b[id][id].clone();
        let c_ii = dec.c[id][id].clone();
        let e_i = dec.e[id].clone();
        let a_tilde: Vec<Mat> = in_neighbors.iter().map(|&j| block_diag_repeat(&dec.a[id][j], p)).collect();
        let b_tilde: Vec<Mat> = in_neighbors.iter().map(|&j| block_diag_repeat(&dec.b[id][j], p)).collect();
        let c_tilde: Vec<Mat> = in_neighbors.iter().map(|&j| block_diag_repeat(&dec.c[id][j], p)).collect();
        let a_out: Vec<Mat> = out_neighbors.iter().map(|&l| block_diag_repeat(&dec.a[l][id], p)).collect();
        let b_out: Vec<Mat> = out_neighbors.iter().map(|&l| block_diag_repeat(&dec.b[l][id], p)).collect();
        let in_nu = in_neighbors.iter().map(|&j| dec.nu(j)).collect();
        let out_nx: Vec<usize> = out_neighbors.iter().map(|&l| dec.nx(l)).collect();

        let s_bar = convolution(&a_ii, p);
        let mut a_bar = Mat::zeros(p * nx, nx);
        set_block(&mut a_bar, 0, 0, &a_ii);
        let b_bar = block_diag_repeat(&b_ii, p);
        let e_bar = block_diag_repeat(&e_i, p);
        let c_bar = block_diag_repeat(&c_ii, p);
        let t_shift = shift_forward(ny, p);
        let g_tilde = gamma_tilde(nu, p, m);
        let g_bar = gamma_bar(nu, m);
        let g_prime = gamma_prime(nu, m);
        let s_i = &c_bar * &s_bar;
        let ju = &g_tilde * &g_bar;
        let n_i = &s_i * &b_bar * &ju;
        let q_bar = block_diag_repeat(&weights.q, p);
        let r_bar = block_diag_repeat(&weights.r, m);
        let h_i = n_i.transpose() * &q_bar * &n_i + &r_bar;
        let h_chol = cholesky(h_i.clone(), &format!("local Hessian of subsystem {}", id + 1))?;
        let k_bar = h_chol.solve(&(n_i.transpose() * &q_bar));

        // Augmented problem.
        let nz = p * nx;
        let theta_dim = m * nu + in_neighbors.len() * nz;
        let mut x_theta = Mat::zeros(p * nx, theta_dim);
        set_block(&mut x_theta, 0, 0, &(&s_bar * &b_bar * &ju));
        for e in 0..in_neighbors.len() {
            set_block(&mut x_theta, 0, m * nu + e * nz, &s_bar);
        }
        let y_theta = &c_bar * &x_theta;
        let mut u_theta = Mat::zeros(p * nu, theta_dim);
        set_block(&mut u_theta, 0, 0, &ju);
        let mut shift = Mat::zeros(p * nx, p * nx);
        for l in 1..p {
            set_block(&mut shift, l * nx, (l - 1) * nx, &Mat::identity(nx, nx));
        }
        let xprev_theta = &shift * &x_theta;
        let h_theta: Vec<Mat> = (0..out_neighbors.len())
            .map(|o| &a_out[o] * &xprev_theta + &b_out[o] * &u_theta)
            .collect();
        let mut hess = (y_theta.transpose() * &q_bar * &y_theta) * 2.0;
        for r in 0..m * nu {
            for c in 0..m * nu {
                hess[(r, c)] += 2.0 * r_bar[(r, c)];
            }
        }
        for i in m * nu..theta_dim {
            hess[(i, i)] += rho;
        }
        for ht in &h_theta {
            hess += ht.transpose() * ht * rho;
        }
        let hess = 0.5 * (&hess + hess.transpose());
        let hess_chol = cholesky(hess.clone(), &format!("augmented Hessian of subsystem {}", id + 1))?;

        Ok(LocalController {
            id,
            nx,
            nu,
            ny,
            nd,
            horizon_p: p,
            horizon_m: m,
            in_neighbors,
            out_neighbors,
            weights,
            rho,
            a_ii,
            b_ii,
            c_ii,
            e_i,
            a_tilde,
            b_tilde,
            c_tilde,
            a_out,
            b_out,
            in_nu,
            out_nx,
            s_bar,
            a_bar,
            b_bar,
            e_bar,
            c_bar,
            t_shift,
            gamma_tilde: g_tilde,
            gamma_bar: g_bar,
            gamma_prime: g_prime,
            s_i,
            n_i,
            h_i,
            k_bar,
            q_bar,
            theta_dim,
            y_theta,
            x_theta,
            h_theta,
            hess,
            hess_chol,
        })
    }

    /// Interaction forecasts from neighbours' previous plans.
    pub fn predict_interactions(&self, msgs: &[CoordinationMessage]) -> Result<InteractionEstimate> {
        let p = self.horizon_p;
        let mut w = Vector::zeros(p * self.nx);
        let mut v = Vector::zeros(p * self.ny);
        for (e, &j) in self.in_neighbors.iter().enumerate() {
            let msg = msgs.iter().find(|m| m.sender == j).ok_or(Error::CoordinationIncomplete(j + 1))?;
            w += self.predict_interactions_from(j, msg)?;
            v += &self.t_shift * (&self.c_tilde[e] * &msg.x_pred);
        }
        Ok(InteractionEstimate { w, v })
    }

    /// State interaction forecast contributed by in-neighbour `j` alone.
    pub fn predict_interactions_from(&self, j: usize, msg: &CoordinationMessage) -> Result<Vector> {
        let p = self.horizon_p;
        let e = self
            .in_neighbors
            .iter()
            .position(|&n| n == j)
            .ok_or_else(|| Error::InvalidPartition(format!("subsystem {} is not a neighbour of {}", j + 1, self.id + 1)))?;
        let nu_j = self.in_nu[e];
        if msg.x_pred.len() != self.a_tilde[e].ncols() || (nu_j > 0 && msg.u_plan.len() % nu_j != 0) {
            return Err(Error::Dimension(format!("message from subsystem {}", j + 1)));
        }
        // U_j(k−1, M|k−1) advanced one sample, last move held.
        let held = if nu_j == 0 || msg.u_plan.is_empty() {
            Vector::zeros(p * nu_j)
        } else {
            let m_j = msg.u_plan.len() / nu_j;
            let mut out = Vector::zeros(p * nu_j);
            for l in 0..p {
                let src = (l + 1).min(m_j - 1) * nu_j;
                out.rows_mut(l * nu_j, nu_j).copy_from(&msg.u_plan.rows(src, nu_j));
            }
            out
        };
        Ok(&self.a_tilde[e] * &msg.x_pred + &self.b_tilde[e] * held)
    }

    /// `X̂ = S̄[Ā x + B̄ Γ̃ U + Ē D + Ŵ]`, `Ŷ = C̄ X̂ + V̂`.
    pub fn predict_local_state_output(
        &self,
        x: &Vector,
        u_plan: &Vector,
        d: &Vector,
        est: &InteractionEstimate,
    ) -> (Vector, Vector) {
        let xs = &self.s_bar * (&self.a_bar * x + &self.b_bar * (&self.gamma_tilde * u_plan) + &self.e_bar * d + &est.w);
        let ys = &self.c_bar * &xs + &est.v;
        (xs, ys)
    }

    /// Free response `Ẑ = S_i[B̄ Γ′ u_prev + Ā x + Ē D + Ŵ] + V̂`.
    pub fn free_response(&self, x: &Vector, u_prev: &Vector, d: &Vector, est: &InteractionEstimate) -> Vector {
        let held = crate::linalg::repeat_vec(u_prev, self.horizon_p);
        &self.s_i * (&self.b_bar * held + &self.a_bar * x + &self.e_bar * d + &est.w) + &est.v
    }

    /// `U = Γ′ u_prev + Γ̄ K̄ (Y^d − Ẑ)`.
    pub fn local_control_law(&self, u_prev: &Vector, y_d: &Vector, z_hat: &Vector) -> Vector {
        &self.gamma_prime * u_prev + &self.gamma_bar * (&self.k_bar * (y_d - z_hat))
    }

    /// Predicted states x(k+1..k+P) for a move sequence and interaction forecast.
    pub fn predict_states(&self, x: &Vector, u_plan: &Vector, d: &Vector, w: &Vector) -> Vector {
        &self.s_bar * (&self.a_bar * x + &self.b_bar * (&self.gamma_tilde * u_plan) + &self.e_bar * d + w)
    }

    /// Contribution `A_li x(k..k+P−1) + B_li u(k..k+P−1)` to out-neighbour `o`.
    pub fn contribution(&self, o: usize, x0: &Vector, x_pred: &Vector, u_plan: &Vector) -> Vector {
        let mut xprev = Vector::zeros(self.horizon_p * self.nx);
        xprev.rows_mut(0, self.nx).copy_from(x0);
        for l in 1..self.horizon_p {
            xprev
                .rows_mut(l * self.nx, self.nx)
                .copy_from(&x_pred.rows((l - 1) * self.nx, self.nx));
        }
        &self.a_out[o] * xprev + &self.b_out[o] * (&self.gamma_tilde * u_plan)
    }

    pub fn out_dim(&self, o: usize) -> usize {
        self.horizon_p * self.out_nx[o]
    }

    pub fn in_dim(&self) -> usize {
        self.horizon_p * self.nx
    }

    /// Minimizes the local cost plus the augmented consensus terms
    /// for the given multipliers and consensus values.
    #[allow(clippy::too_many_arguments)]
    pub fn solve_augmented(
        &self,
        x0: &Vector,
        u_prev: &Vector,
        d: &Vector,
        y_d: &Vector,
        lam_in: &[Vector],
        c_in: &[Vector],
        lam_out: &[Vector],
        c_out: &[Vector],
        bounds: Option<(f64, f64)>,
    ) -> Result<LocalPlan> {
        let (p, m, nu, nx) = (self.horizon_p, self.horizon_m, self.nu, self.nx);
        let mnu = m * nu;
        let nz = p * nx;
        let u_held = crate::linalg::repeat_vec(u_prev, p);
        // Affine parts that do not depend on θ.
        let x_c = &self.s_bar * (&self.a_bar * x0 + &self.b_bar * &u_held + &self.e_bar * d);
        let y_c = &self.c_bar * &x_c;
        let mut xprev_c = Vector::zeros(p * nx);
        xprev_c.rows_mut(0, nx).copy_from(x0);
        for l in 1..p {
            xprev_c.rows_mut(l * nx, nx).copy_from(&x_c.rows((l - 1) * nx, nx));
        }
        let mut g = (self.y_theta.transpose() * (&self.q_bar * (&y_c - y_d))) * 2.0;
        for e in 0..self.in_neighbors.len() {
            let off = mnu + e * nz;
            let t = &lam_in[e] - &c_in[e] * self.rho;
            let mut seg = g.rows_mut(off, nz);
            seg += t;
        }
        for o in 0..self.out_neighbors.len() {
            let h_c = &self.a_out[o] * &xprev_c + &self.b_out[o] * &u_held;
            let t = (h_c - &c_out[o]) * self.rho - &lam_out[o];
            g += self.h_theta[o].transpose() * t;
        }
        let mut theta = -self.hess_chol.solve(&g);
        if let Some((lo, hi)) = bounds {
            let u_abs = &self.gamma_prime * u_prev + &self.gamma_bar * theta.rows(0, mnu);
            if u_abs.iter().any(|&u| u < lo || u > hi) {
                theta = self.solve_bounded(&g, u_prev, lo, hi)?;
            }
        }
        let delta_u = theta.rows(0, mnu).into_owned();
        let u_plan = &self.gamma_prime * u_prev + &self.gamma_bar * &delta_u;
        let x_pred = &x_c + &self.x_theta * &theta;
        let z_in = (0..self.in_neighbors.len())
            .map(|e| theta.rows(mnu + e * nz, nz).into_owned())
            .collect();
        let h_out = (0..self.out_neighbors.len())
            .map(|o| self.contribution(o, x0, &x_pred, &u_plan))
            .collect();
        Ok(LocalPlan {
            delta_u,
            u_plan,
            x_pred,
            z_in,
            h_out,
        })
    }

    fn solve_bounded(&self, g: &Vector, u_prev: &Vector, lo: f64, hi: f64) -> Result<Vector> {
        let (m, nu) = (self.horizon_m, self.nu);
        let mnu = m * nu;
        let n = self.theta_dim;
        // θ = D θ' − s with θ' = [U; w]
        let mut dmat = Mat::identity(n, n);
        for i in 1..m {
            set_block(&mut dmat, i * nu, (i - 1) * nu, &(-Mat::identity(nu, nu)));
        }
        let mut s = Vector::zeros(n);
        s.rows_mut(0, nu).copy_from(u_prev);
        let h2 = dmat.transpose() * &self.hess * &dmat;
        let g2 = dmat.transpose() * (g - &self.hess * &s);
        let lov = Vector::from_fn(n, |i, _| if i < mnu { lo } else { f64::NEG_INFINITY });
        let hiv = Vector::from_fn(n, |i, _| if i < mnu { hi } else { f64::INFINITY });
        let sol = solve_box_qp(&h2, &g2, &lov, &hiv)?;
        Ok(dmat * sol.x - s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{decompose, Partition, StateSpaceModel};
    use approx::assert_relative_eq;

    fn weights(q: f64, r: f64) -> LocalWeights {
        LocalWeights {
            q: Mat::from_element(1, 1, q),
            r: Mat::from_element(1, 1, r),
            s: Mat::from_element(1, 1, 1.0),
            terminal: Mat::from_element(1, 1, q),
            alpha: 0.0,
        }
    }

    fn two_scalar(a12: f64) -> SubsystemDecomposition {
        let ss = StateSpaceModel::new(
            Mat::from_row_slice(2, 2, &[0.6, a12, a12, 0.5]),
            Mat::identity(2, 2),
            Mat::zeros(2, 1),
            Mat::identity(2, 2),
            1.0,
        )
        .unwrap();
        decompose(&ss, &Partition::singletons(2)).unwrap()
    }

    #[test]
    fn structural_matrices() {
        assert_eq!(gamma_tilde(1, 4, 2), Mat::from_row_slice(4, 2, &[1., 0., 0., 1., 0., 1., 0., 1.]));
        assert_eq!(gamma_bar(1, 3), Mat::from_row_slice(3, 3, &[1., 0., 0., 1., 1., 0., 1., 1., 1.]));
        assert_eq!(shift_forward(1, 3), Mat::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 1.]));
        let s = convolution(&Mat::from_element(1, 1, 0.5), 3);
        assert_eq!(s, Mat::from_row_slice(3, 3, &[1., 0., 0., 0.5, 1., 0., 0.25, 0.5, 1.]));
    }

    #[test]
    fn uncoupled_interactions_are_zero() {
        let dec = two_scalar(0.0);
        let lc = LocalController::new(&dec, 0, weights(1.0, 0.1), 4, 2, 1.0).unwrap();
        let est = lc.predict_interactions(&[]).unwrap();
        assert!(est.w.iter().all(|&v| v == 0.0) && est.v.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_neighbor_state_gives_constant_interaction() {
        let dec = two_scalar(0.3);
        let lc = LocalController::new(&dec, 0, weights(1.0, 0.1), 4, 2, 1.0).unwrap();
        let msg = CoordinationMessage {
            sender: 1,
            u_plan: Vector::zeros(2),
            x_pred: Vector::from_element(4, 10.0),
        };
        let est = lc.predict_interactions(&[msg]).unwrap();
        for v in est.w.iter() {
            assert_relative_eq!(*v, 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn missing_message_names_neighbor() {
        let dec = two_scalar(0.3);
        let lc = LocalController::new(&dec, 0, weights(1.0, 0.1), 4, 2, 1.0).unwrap();
        assert!(matches!(lc.predict_interactions(&[]), Err(Error::CoordinationIncomplete(2))));
    }

    #[test]
    fn local_prediction_matches_loop() {
        let dec = two_scalar(0.0);
        let lc = LocalController::new(&dec, 0, weights(1.0, 0.1), 5, 3, 1.0).unwrap();
        let u = Vector::from_row_slice(&[1.0, -2.0, 0.5]);
        let est = InteractionEstimate { w: Vector::zeros(5), v: Vector::zeros(5) };
        let (xs, ys) = lc.predict_local_state_output(&Vector::from_element(1, 2.0), &u, &Vector::zeros(5), &est);
        let mut x = 2.0;
        for l in 0..5 {
            x = 0.6 * x + u[l.min(2)];
            assert_relative_eq!(xs[l], x, epsilon = 1e-12);
            assert_relative_eq!(ys[l], x, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_step_collapse() {
        let dec = two_scalar(0.2);
        let lc = LocalController::new(&dec, 0, weights(1.0, 0.1), 1, 1, 1.0).unwrap();
        let est = InteractionEstimate { w: Vector::from_element(1, 0.7), v: Vector::zeros(1) };
        let (xs, _) = lc.predict_local_state_output(
            &Vector::from_element(1, 2.0),
            &Vector::from_element(1, 3.0),
            &Vector::zeros(1),
            &est,
        );
        assert_relative_eq!(xs[0], 0.6 * 2.0 + 3.0 + 0.7, epsilon = 1e-15);
    }

    #[test]
    fn zero_correction_holds_previous_input() {
        let dec = two_scalar(0.0);
        let lc = LocalController::new(&dec, 0, weights(1.0, 0.1), 4, 2, 1.0).unwrap();
        let z = Vector::from_element(4, 5.0);
        let u = lc.local_control_law(&Vector::from_element(1, 1.25), &z, &z);
        assert_eq!(u, Vector::from_element(2, 1.25));
    }

    #[test]
    fn gain_reconstruction() {
        let dec = two_scalar(0.1);
        let lc = LocalController::new(&dec, 1, weights(2.0, 0.3), 6, 3, 1.0).unwrap();
        let direct = (lc.n_i.transpose() * &lc.q_bar * &lc.n_i + block_diag_repeat(&lc.weights.r, 3))
            .try_inverse()
            .unwrap()
            * lc.n_i.transpose()
            * &lc.q_bar;
        assert!((direct - &lc.k_bar).amax() < 1e-10);
    }

    #[test]
    fn local_law_matches_centralized_solver_on_decoupled_subsystem() {
        use crate::cmpc::{build_prediction_matrices, solve_centralized_step, MpcConfig};
        let dec = two_scalar(0.0);
        let lc = LocalController::new(&dec, 0, weights(1.5, 0.02), 6, 2, 1.0).unwrap();
        let x = Vector::from_element(1, 3.0);
        let u_prev = Vector::from_element(1, 0.5);
        let yd = Vector::from_row_slice(&[4.0, 5.0, 6.0, 6.0, 6.0, 6.0]);
        let est = InteractionEstimate { w: Vector::zeros(6), v: Vector::zeros(6) };
        let zhat = lc.free_response(&x, &u_prev, &Vector::zeros(6), &est);
        let u = lc.local_control_law(&u_prev, &yd, &zhat);

        let sub = StateSpaceModel::new(lc.a_ii.clone(), lc.b_ii.clone(), lc.e_i.clone(), lc.c_ii.clone(), 1.0).unwrap();
        let pm = build_prediction_matrices(&sub, 6, 2).unwrap();
        let cfg = MpcConfig {
            horizon_p: 6,
            horizon_m: 2,
            q: Mat::from_element(1, 1, 1.5),
            r: Mat::from_element(1, 1, 0.02),
            bounds: None,
        };
        let sol = solve_centralized_step(&pm, &cfg, &x, &u_prev, &Vector::zeros(6), &yd).unwrap();
        assert!((u[0] - sol.u[0]).abs() < 1e-8);
    }

    #[test]
    fn augmented_solve_without_neighbors_equals_local_law() {
        let dec = two_scalar(0.0);
        let lc = LocalController::new(&dec, 0, weights(1.5, 0.02), 6, 2, 1.0).unwrap();
        let x = Vector::from_element(1, 3.0);
        let u_prev = Vector::from_element(1, 0.5);
        let yd = Vector::from_element(6, 8.0);
        let plan = lc
            .solve_augmented(&x, &u_prev, &Vector::zeros(6), &yd, &[], &[], &[], &[], None)
            .unwrap();
        let est = InteractionEstimate { w: Vector::zeros(6), v: Vector::zeros(6) };
        let u = lc.local_control_law(&u_prev, &yd, &lc.free_response(&x, &u_prev, &Vector::zeros(6), &est));
        assert!((plan.u_plan - u).amax() < 1e-9);
    }
}
