//! Centralized MPC over the full model.

use std::time::Instant;

use crate::control::{Controller, StepContext, StepOutput};
use crate::error::{Error, Result};
use crate::linalg::{block_diag_repeat, check_psd, powers, set_block, Mat, Vector};
use crate::linear::StateSpaceModel;
use crate::qp::{solve_box_qp, solve_unconstrained};

/// Prediction maps over P steps: `Y = T(H x + G ΔU + F u_prev + V W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMatrices {
    pub g: Mat,
    pub f: Mat,
    pub h: Mat,
    pub v: Mat,
    pub t: Mat,
    pub horizon_p: usize,
    pub horizon_m: usize,
}

pub fn build_prediction_matrices(ss: &StateSpaceModel, p: usize, m: usize) -> Result<PredictionMatrices> {
    if m == 0 || m > p {
        return Err(Error::InvalidConfig(format!("horizons need 1 <= M <= P, got P={p}, M={m}")));
    }
    let (n, nu, nd) = (ss.n(), ss.m(), ss.q());
    let pw = powers(&ss.a, p);
    // sums[r] = Σ_{i=1}^{r} A^{i-1} B
    let mut sums = vec![Mat::zeros(n, nu)];
    for r in 1..=p {
        let next = &sums[r - 1] + &pw[r - 1] * &ss.b;
        sums.push(next);
    }
    let mut g = Mat::zeros(p * n, m * nu);
    let mut f = Mat::zeros(p * n, nu);
    let mut h = Mat::zeros(p * n, n);
    let mut v = Mat::zeros(p * n, p * nd);
    for r in 0..p {
        for c in 0..m.min(r + 1) {
            set_block(&mut g, r * n, c * nu, &sums[r - c + 1]);
        }
        set_block(&mut f, r * n, 0, &sums[r + 1]);
        set_block(&mut h, r * n, 0, &pw[r + 1]);
        for c in 0..=r {
            set_block(&mut v, r * n, c * nd, &(&pw[r - c] * &ss.e));
        }
    }
    Ok(PredictionMatrices {
        g,
        f,
        h,
        v,
        t: block_diag_repeat(&ss.c, p),
        horizon_p: p,
        horizon_m: m,
    })
}

impl PredictionMatrices {
    /// Stacked predicted outputs y(k+1..k+P).
    pub fn predict(&self, x: &Vector, u_prev: &Vector, du: &Vector, w: &Vector) -> Vector {
        &self.t * (&self.h * x + &self.g * du + &self.f * u_prev + &self.v * w)
    }
}

/// Weights, horizons and input bounds of a centralized MPC.
#[derive(Clone, Debug, PartialEq)]
pub struct MpcConfig {
    pub horizon_p: usize,
    pub horizon_m: usize,
    /// Output weight, one block per predicted sample.
    pub q: Mat,
    /// Input-increment weight.
    pub r: Mat,
    /// Box on the absolute input.
    pub bounds: Option<(f64, f64)>,
}

pub const DEFAULT_HORIZON_P: usize = 10;
pub const DEFAULT_HORIZON_M: usize = 3;
pub const DEFAULT_Q: f64 = 1.5;
pub const DEFAULT_R: f64 = 1.0 / 1600.0;
pub const DEFAULT_BOUNDS: (f64, f64) = (0.0, 60.0);

impl MpcConfig {
    /// Default weights `Q = 1.5 I`, `R = I/1600`, supply temperature in [0, 60] °C.
    pub fn with_defaults(outputs: usize, inputs: usize) -> Self {
        MpcConfig {
            horizon_p: DEFAULT_HORIZON_P,
            horizon_m: DEFAULT_HORIZON_M,
            q: Mat::identity(outputs, outputs) * DEFAULT_Q,
            r: Mat::identity(inputs, inputs) * DEFAULT_R,
            bounds: Some(DEFAULT_BOUNDS),
        }
    }

    pub fn validate(&self, ss: &StateSpaceModel) -> Result<()> {
        if self.horizon_m == 0 || self.horizon_m > self.horizon_p {
            return Err(Error::InvalidConfig(format!(
                "horizons need 1 <= M <= P, got P={}, M={}",
                self.horizon_p, self.horizon_m
            )));
        }
        if self.q.shape() != (ss.p(), ss.p()) || self.r.shape() != (ss.m(), ss.m()) {
            return Err(Error::Dimension(format!(
                "Q must be {0}x{0} and R {1}x{1}",
                ss.p(),
                ss.m()
            )));
        }
        check_psd(&self.q, "Q")?;
        check_psd(&self.r, "R")?;
        if let Some((lo, hi)) = self.bounds {
            if !(lo <= hi) {
                return Err(Error::InvalidConfig(format!("input bounds [{lo}, {hi}] are empty")));
            }
        }
        Ok(())
    }
}

/// `x̂ = A x̂_prev + B u_prev + E d_prev + L (y − C(A x̂_prev + B u_prev + E d_prev))`.
pub fn observer_update(
    ss: &StateSpaceModel,
    x_prev: &Vector,
    u_prev: &Vector,
    d_prev: &Vector,
    y: &Vector,
    l: &Mat,
) -> Vector {
    let pred = ss.step(x_prev, u_prev, d_prev);
    let innovation = y - &ss.c * &pred;
    pred + l * innovation
}

/// How the state estimate is formed from measurements.
#[derive(Clone, Debug, PartialEq)]
pub enum Observer {
    /// `x̂ = C⁻¹ y`; requires a square invertible C.
    Measured,
    /// Static gain L.
    Gain(Mat),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CmpcSolution {
    pub delta_u: Vector,
    pub u: Vector,
    pub qp_iterations: usize,
}

/// The condensed problem `min ½ ΔUᵀ H ΔU + cᵀ ΔU` for one sample.
pub struct CondensedQp {
    pub hessian: Mat,
    pub linear: Vector,
}

pub fn condense(
    pm: &PredictionMatrices,
    cfg: &MpcConfig,
    x: &Vector,
    u_prev: &Vector,
    w: &Vector,
    y_r: &Vector,
) -> CondensedQp {
    let qbar = block_diag_repeat(&cfg.q, pm.horizon_p);
    let rbar = block_diag_repeat(&cfg.r, pm.horizon_m);
    let tg = &pm.t * &pm.g;
    let free = &pm.t * (&pm.h * x + &pm.f * u_prev + &pm.v * w);
    let e = y_r - free;
    let tgq = tg.transpose() * &qbar;
    CondensedQp {
        hessian: (&tgq * &tg + rbar) * 2.0,
        linear: -(tgq * e) * 2.0,
    }
}

/// Cost `Σ‖ŷ − y_r‖²_Q + Σ‖Δu‖²_R` of a candidate move sequence.
pub fn centralized_cost(
    pm: &PredictionMatrices,
    cfg: &MpcConfig,
    x: &Vector,
    u_prev: &Vector,
    w: &Vector,
    y_r: &Vector,
    du: &Vector,
) -> f64 {
    let y = pm.predict(x, u_prev, du, w);
    let (ny, nu) = (cfg.q.nrows(), cfg.r.nrows());
    let mut j = 0.0;
    for i in 0..pm.horizon_p {
        let e = y.rows(i * ny, ny) - y_r.rows(i * ny, ny);
        j += (e.transpose() * &cfg.q * &e)[(0, 0)];
    }
    for i in 0..pm.horizon_m {
        let d = du.rows(i * nu, nu);
        j += (d.transpose() * &cfg.r * d)[(0, 0)];
    }
    j
}

/// One receding-horizon solve. The QP is assembled from the prediction
/// matrices on every call.
pub fn solve_centralized_step(
    pm: &PredictionMatrices,
    cfg: &MpcConfig,
    x: &Vector,
    u_prev: &Vector,
    w: &Vector,
    y_r: &Vector,
) -> Result<CmpcSolution> {
    let nu = u_prev.len();
    let mh = pm.horizon_m;
    if w.len() != pm.v.ncols() || y_r.len() != pm.t.nrows() || x.len() != pm.h.ncols() || nu != pm.f.ncols() {
        return Err(Error::Dimension("centralized step inputs do not match the prediction matrices".into()));
    }
    let qp = condense(pm, cfg, x, u_prev, w, y_r);
    let (delta_u, qp_iterations) = match cfg.bounds {
        None => (solve_unconstrained(&qp.hessian, &qp.linear)?, 0),
        Some((lo, hi)) => {
            // Change of variables to absolute inputs U = D⁻¹(ΔU + s), s = [u_prev; 0; …].
            let dim = mh * nu;
            let mut d = Mat::identity(dim, dim);
            for i in 1..mh {
                set_block(&mut d, i * nu, (i - 1) * nu, &(-Mat::identity(nu, nu)));
            }
            let mut s = Vector::zeros(dim);
            s.rows_mut(0, nu).copy_from(u_prev);
            let hu = d.transpose() * &qp.hessian * &d;
            let gu = d.transpose() * (&qp.linear - &qp.hessian * &s);
            let sol = solve_box_qp(&hu, &gu, &Vector::from_element(dim, lo), &Vector::from_element(dim, hi))?;
            (&d * sol.x - s, sol.iterations)
        }
    };
    let u = u_prev + delta_u.rows(0, nu);
    Ok(CmpcSolution { delta_u, u, qp_iterations })
}

/// Receding-horizon centralized controller.
pub struct CentralizedController {
    ss: StateSpaceModel,
    pm: PredictionMatrices,
    cfg: MpcConfig,
    observer: Observer,
    x_hat: Option<Vector>,
    u_prev: Vector,
    name: String,
}

impl CentralizedController {
    pub fn new(ss: StateSpaceModel, cfg: MpcConfig, observer: Observer) -> Result<Self> {
        if !ss.is_discrete() {
            return Err(Error::InvalidConfig("centralized MPC needs a discrete model".into()));
        }
        cfg.validate(&ss)?;
        if let Observer::Gain(l) = &observer {
            if l.shape() != (ss.n(), ss.p()) {
                return Err(Error::Dimension("observer gain must be n x p".into()));
            }
        } else if ss.c.nrows() != ss.c.ncols() || ss.c.clone().try_inverse().is_none() {
            return Err(Error::InvalidConfig("measured-state observer needs an invertible C".into()));
        }
        let pm = build_prediction_matrices(&ss, cfg.horizon_p, cfg.horizon_m)?;
        let u_prev = Vector::zeros(ss.m());
        Ok(CentralizedController {
            ss,
            pm,
            cfg,
            observer,
            x_hat: None,
            u_prev,
            name: "cmpc".into(),
        })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn model(&self) -> &StateSpaceModel {
        &self.ss
    }

    pub fn config(&self) -> &MpcConfig {
        &self.cfg
    }

    pub fn prediction(&self) -> &PredictionMatrices {
        &self.pm
    }

    fn estimate(&self, y: &Vector, d_prev: &Vector) -> Vector {
        let measured = || {
            self.ss
                .c
                .clone()
                .try_inverse()
                .map(|ci| ci * y)
                .unwrap_or_else(|| Vector::zeros(self.ss.n()))
        };
        match (&self.observer, &self.x_hat) {
            (Observer::Measured, _) | (Observer::Gain(_), None) => measured(),
            (Observer::Gain(l), Some(prev)) => observer_update(&self.ss, prev, &self.u_prev, d_prev, y, l),
        }
    }
}

/// Stacks `count` vectors starting at `from`.
pub(crate) fn stack(vs: &[Vector], from: usize, count: usize) -> Result<Vector> {
    let slice = vs
        .get(from..from + count)
        .ok_or_else(|| Error::Dimension(format!("need {count} samples from index {from}, have {}", vs.len())))?;
    let len: usize = slice.iter().map(|v| v.len()).sum();
    Ok(Vector::from_iterator(len, slice.iter().flat_map(|v| v.iter().copied())))
}

impl Controller for CentralizedController {
    fn name(&self) -> &str {
        &self.name
    }

    fn horizon(&self) -> usize {
        self.cfg.horizon_p
    }

    fn reset(&mut self, u0: &Vector) {
        self.u_prev = u0.clone();
        self.x_hat = None;
    }

    fn step(&mut self, ctx: &StepContext<'_>) -> Result<StepOutput> {
        let p = self.cfg.horizon_p;
        let x = self.estimate(ctx.y, ctx.d_prev);
        let w = stack(ctx.forecast, 0, p)?;
        let y_r = stack(ctx.reference, 1, p)?;
        let start = Instant::now();
        let sol = solve_centralized_step(&self.pm, &self.cfg, &x, &self.u_prev, &w, &y_r)
            .map_err(|e| match e {
                Error::SolverFailure { reason, .. } => Error::SolverFailure { step: ctx.k, reason },
                other => other,
            })?;
        let solve_time = start.elapsed();
        self.x_hat = Some(x);
        self.u_prev = sol.u.clone();
        Ok(StepOutput {
            u: sol.u,
            solve_time,
            iterations: 1,
            converged: true,
        })
    }
}
