//! Goal coordination: each subsystem solves its horizon problem with the
//! interaction variable z_i free and priced by λ_i; the coordinator moves
//! λ_i until z_i matches the interaction computed from the neighbours.

use nalgebra::{Dyn, LU};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, set_block, Mat, Vector};

/// Arguments of the stage Hamiltonian.
#[derive(Clone, Copy, Debug)]
pub struct HamiltonianArgs<'a> {
    pub x: &'a Vector,
    pub x_ref: &'a Vector,
    pub u: &'a Vector,
    pub z: &'a Vector,
    /// x(k+1)
    pub x_next: &'a Vector,
    pub costate: &'a Vector,
    pub lambda: &'a Vector,
    /// Σ_j L_ij x_j(k)
    pub coupling: &'a Vector,
}

/// Stage matrices and weights of one subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct StageModel {
    pub a: Mat,
    pub b: Mat,
    /// Interaction input matrix (identity for the building).
    pub c: Mat,
    pub q: Mat,
    pub r: Mat,
    pub s: Mat,
}

fn quad(m: &Mat, v: &Vector) -> f64 {
    v.dot(&(m * v))
}

/// H = ‖x−x^d‖²_Q + ‖z‖²_S + ‖u‖²_R + pᵀ(Ax + Bu + Cz − x⁺) + λᵀ(z − Σ L x).
pub fn hamiltonian(m: &StageModel, h: &HamiltonianArgs<'_>) -> f64 {
    let e = h.x - h.x_ref;
    quad(&m.q, &e)
        + quad(&m.s, h.z)
        + quad(&m.r, h.u)
        + h.costate.dot(&(&m.a * h.x + &m.b * h.u + &m.c * h.z - h.x_next))
        + h.lambda.dot(&(h.z - h.coupling))
}

/// Prices and data for one horizon solve.
#[derive(Clone, Debug)]
pub struct GoalInputs<'a> {
    pub x0: &'a Vector,
    /// E d(k), k = 0..K−1, stacked.
    pub ed: &'a Vector,
    /// x^d(1..K)
    pub x_ref: &'a Vector,
    /// λ_i(0..K−1)
    pub lambda: &'a Vector,
    /// Price on own input from out-neighbours, k = 0..K−1.
    pub q_u: &'a Vector,
    /// Price on own state from out-neighbours, k = 0..K−1 (k = 0 unused).
    pub q_x: &'a Vector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoalSolution {
    /// x(0..K)
    pub x: Vec<Vector>,
    /// u(0..K−1)
    pub u: Vec<Vector>,
    /// z(0..K−1)
    pub z: Vec<Vector>,
    /// Costates p(0..K−1)
    pub p: Vec<Vector>,
}

/// Horizon problem of one subsystem with its stationarity system factorized once.
#[derive(Clone, Debug)]
pub struct GoalSubproblem {
    pub model: StageModel,
    pub terminal: Mat,
    pub horizon: usize,
    nx: usize,
    nu: usize,
    r_inv: Mat,
    s_inv: Mat,
    lu: LU<f64, Dyn, Dyn>,
}

impl GoalSubproblem {
    pub fn new(model: StageModel, terminal: Mat, horizon: usize) -> Result<Self> {
        let nx = model.a.nrows();
        let nu = model.b.ncols();
        if horizon == 0 {
            return Err(Error::InvalidConfig("goal coordination horizon must be >= 1".into()));
        }
        if model.a.shape() != (nx, nx)
            || model.b.nrows() != nx
            || model.c.shape() != (nx, nx)
            || model.q.shape() != (nx, nx)
            || model.r.shape() != (nu, nu)
            || model.s.shape() != (nx, nx)
            || terminal.shape() != (nx, nx)
        {
            return Err(Error::Dimension("goal subproblem matrix shapes".into()));
        }
        let r_inv = cholesky(model.r.clone(), "input weight R")?.inverse();
        let s_chol = cholesky(model.s.clone(), "interaction weight S")?;
        let s_inv = s_chol.inverse();
        crate::linalg::check_psd(&model.q, "tracking weight Q")?;
        crate::linalg::check_psd(&terminal, "terminal weight")?;
        let k = horizon;
        let n = 2 * k * nx;
        let g = (&model.b * &r_inv * model.b.transpose() + &model.c * &s_inv * model.c.transpose()) * 0.5;
        let mut m = Mat::zeros(n, n);
        let xi = |t: usize| (t - 1) * nx; // x(t), t = 1..K
        let pi = |t: usize| (k + t) * nx; // p(t), t = 0..K−1
        // dynamics rows, one per k = 0..K−1
        for t in 0..k {
            let row = t * nx;
            set_block(&mut m, row, xi(t + 1), &Mat::identity(nx, nx));
            if t >= 1 {
                set_block(&mut m, row, xi(t), &(-&model.a));
            }
            set_block(&mut m, row, pi(t), &g);
        }
        // costate rows, one per x(1..K)
        for t in 1..=k {
            let row = (k + t - 1) * nx;
            let w = if t == k { &terminal } else { &model.q };
            set_block(&mut m, row, xi(t), &(w * 2.0));
            if t < k {
                set_block(&mut m, row, pi(t), &model.a.transpose());
            }
            set_block(&mut m, row, pi(t - 1), &(-Mat::identity(nx, nx)));
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::IllPosedWeights("goal coordination stationarity system is singular".into()));
        }
        Ok(GoalSubproblem {
            model,
            terminal,
            horizon,
            nx,
            nu,
            r_inv,
            s_inv,
            lu,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Solves all levels k = 0..K at once: the stationarity conditions of each
    /// level are linear and coupled only through x and the costates.
    pub fn three_level_solve(&self, inp: &GoalInputs<'_>) -> Result<GoalSolution> {
        let (nx, nu, k) = (self.nx, self.nu, self.horizon);
        let m = &self.model;
        if inp.x0.len() != nx
            || inp.ed.len() != k * nx
            || inp.x_ref.len() != k * nx
            || inp.lambda.len() != k * nx
            || inp.q_u.len() != k * nu
            || inp.q_x.len() != k * nx
        {
            return Err(Error::Dimension("goal subproblem inputs".into()));
        }
        let br = &m.b * &self.r_inv;
        let cs = &m.c * &self.s_inv;
        let mut rhs = Vector::zeros(2 * k * nx);
        for t in 0..k {
            let mut v = inp.ed.rows(t * nx, nx).into_owned()
                - (&br * inp.q_u.rows(t * nu, nu)) * 0.5
                - (&cs * inp.lambda.rows(t * nx, nx)) * 0.5;
            if t == 0 {
                v += &m.a * inp.x0;
            }
            rhs.rows_mut(t * nx, nx).copy_from(&v);
        }
        for t in 1..=k {
            let row = (k + t - 1) * nx;
            let xr = inp.x_ref.rows((t - 1) * nx, nx);
            let v = if t == k {
                (&self.terminal * xr) * 2.0
            } else {
                (&m.q * xr) * 2.0 - inp.q_x.rows(t * nx, nx)
            };
            rhs.rows_mut(row, nx).copy_from(&v);
        }
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::IllPosedWeights("goal coordination stationarity system is singular".into()))?;
        let mut x = vec![inp.x0.clone()];
        for t in 1..=k {
            x.push(sol.rows((t - 1) * nx, nx).into_owned());
        }
        let p: Vec<Vector> = (0..k).map(|t| sol.rows((k + t) * nx, nx).into_owned()).collect();
        let u = (0..k)
            .map(|t| -(&self.r_inv * (m.b.transpose() * &p[t] + inp.q_u.rows(t * nu, nu))) * 0.5)
            .collect();
        let z = (0..k)
            .map(|t| -(&self.s_inv * (m.c.transpose() * &p[t] + inp.lambda.rows(t * nx, nx))) * 0.5)
            .collect();
        Ok(GoalSolution { x, u, z, p })
    }

    /// Objective with the prices applied:
    /// Σ_k [‖x−x^d‖²_Q + ‖z‖²_S + ‖u‖²_R + λᵀz + q_uᵀu + q_xᵀx] + ‖x(K)−x^d(K)‖²_Pf.
    pub fn priced_cost(&self, inp: &GoalInputs<'_>, x: &[Vector], u: &[Vector], z: &[Vector]) -> f64 {
        let (nx, nu, k) = (self.nx, self.nu, self.horizon);
        let m = &self.model;
        let mut j = 0.0;
        for t in 0..k {
            if t > 0 {
                let xr = inp.x_ref.rows((t - 1) * nx, nx).into_owned();
                j += quad(&m.q, &(&x[t] - xr)) + inp.q_x.rows(t * nx, nx).dot(&x[t]);
            }
            j += quad(&m.s, &z[t]) + quad(&m.r, &u[t]);
            j += inp.lambda.rows(t * nx, nx).dot(&z[t]) + inp.q_u.rows(t * nu, nu).dot(&u[t]);
        }
        let xr = inp.x_ref.rows((k - 1) * nx, nx).into_owned();
        j + quad(&self.terminal, &(&x[k] - xr))
    }

    /// Largest violation of the stationarity conditions and dynamics.
    pub fn stationarity_residual(&self, inp: &GoalInputs<'_>, s: &GoalSolution) -> f64 {
        let (nx, nu, k) = (self.nx, self.nu, self.horizon);
        let m = &self.model;
        let mut worst = 0.0f64;
        for t in 0..k {
            let du = &m.r * &s.u[t] * 2.0 + m.b.transpose() * &s.p[t] + inp.q_u.rows(t * nu, nu);
            let dz = &m.s * &s.z[t] * 2.0 + m.c.transpose() * &s.p[t] + inp.lambda.rows(t * nx, nx);
            let dyn_res = &m.a * &s.x[t] + &m.b * &s.u[t] + &m.c * &s.z[t] + inp.ed.rows(t * nx, nx) - &s.x[t + 1];
            worst = worst.max(du.amax()).max(dz.amax()).max(dyn_res.amax());
        }
        for t in 1..=k {
            let xr = inp.x_ref.rows((t - 1) * nx, nx).into_owned();
            let dx = if t == k {
                &self.terminal * (&s.x[t] - xr) * 2.0 - &s.p[t - 1]
            } else {
                &m.q * (&s.x[t] - xr) * 2.0 + m.a.transpose() * &s.p[t] - &s.p[t - 1] + inp.q_x.rows(t * nx, nx)
            };
            worst = worst.max(dx.amax());
        }
        worst
    }
}
