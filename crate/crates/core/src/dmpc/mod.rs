//! Distributed MPC: one local controller per subsystem, coordinated either by
//! consensus on per-edge interaction copies (`Dual`) or by goal coordination
//! on interaction prices (`GoalCoordination`).

pub mod goal;
pub mod local;
pub mod transcript;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmpc::stack;
use crate::control::{Controller, StepContext, StepOutput};
use crate::error::{Error, Result};
use crate::linalg::{inf_norm, Mat, Vector};
use crate::linear::SubsystemDecomposition;

use goal::{GoalInputs, GoalSolution, GoalSubproblem, StageModel};
pub use local::{CoordinationMessage, InteractionEstimate, LocalController, LocalPlan, LocalWeights};
pub use transcript::{MessageRecord, Transcript};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordination {
    Dual,
    GoalCoordination,
}

/// Multiplier step size as a function of the round index s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    Constant { alpha: f64 },
    /// α₀ / (1 + s)
    Diminishing { alpha0: f64 },
    /// ρ/2 with the penalty in force during the round.
    HalfPenalty,
}

impl StepRule {
    pub fn size(&self, s: usize, rho: f64) -> f64 {
        match *self {
            StepRule::Constant { alpha } => alpha,
            StepRule::Diminishing { alpha0 } => alpha0 / (1.0 + s as f64),
            StepRule::HalfPenalty => rho / 2.0,
        }
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;
pub const DEFAULT_RHO: f64 = 5.0;
pub const DEFAULT_RELAXATION: f64 = 1.6;
pub const DEFAULT_S: f64 = 1.0;
pub const DEFAULT_GOAL_STEP: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmpcConfig {
    pub horizon_p: usize,
    pub horizon_m: usize,
    /// Output / state tracking weight (times identity).
    pub q: f64,
    /// Input weight (times identity).
    pub r: f64,
    /// Interaction weight (times identity).
    pub s: f64,
    /// Terminal weight; `None` uses `q`.
    pub terminal: Option<f64>,
    /// Reference smoothing factor.
    pub alpha: f64,
    pub rho: f64,
    pub step: StepRule,
    /// Over-relaxation factor in (0, 2) for the consensus update.
    pub relaxation: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub coordination: Coordination,
    pub bounds: Option<(f64, f64)>,
    /// Run the local solves of a round on the rayon pool.
    pub parallel: bool,
    pub record_transcript: bool,
}

impl Default for DmpcConfig {
    fn default() -> Self {
        Self::goal_coordination()
    }
}

impl DmpcConfig {
    /// Dual decomposition with consensus on interaction copies.
    pub fn dual() -> Self {
        DmpcConfig {
            horizon_p: crate::cmpc::DEFAULT_HORIZON_P,
            horizon_m: crate::cmpc::DEFAULT_HORIZON_M,
            q: crate::cmpc::DEFAULT_Q,
            r: crate::cmpc::DEFAULT_R,
            s: DEFAULT_S,
            terminal: None,
            alpha: 0.0,
            rho: DEFAULT_RHO,
            step: StepRule::HalfPenalty,
            relaxation: DEFAULT_RELAXATION,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            coordination: Coordination::Dual,
            bounds: Some(crate::cmpc::DEFAULT_BOUNDS),
            parallel: false,
            record_transcript: false,
        }
    }

    pub fn goal_coordination() -> Self {
        DmpcConfig {
            step: StepRule::Constant { alpha: DEFAULT_GOAL_STEP },
            coordination: Coordination::GoalCoordination,
            ..Self::dual()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon_m == 0 || self.horizon_m > self.horizon_p {
            return Err(Error::InvalidConfig(format!(
                "horizons need 1 <= M <= P, got P={}, M={}",
                self.horizon_p, self.horizon_m
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("smoothing factor {} outside [0, 1]", self.alpha)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidConfig(format!("penalty rho must be > 0, got {}", self.rho)));
        }
        let a = match self.step {
            StepRule::Constant { alpha } => alpha,
            StepRule::Diminishing { alpha0 } => alpha0,
            StepRule::HalfPenalty => self.rho,
        };
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidConfig(format!("multiplier step must be > 0, got {a}")));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidConfig(format!("relaxation {} outside (0, 2)", self.relaxation)));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidConfig("tolerance must be > 0 and max_iterations >= 1".into()));
        }
        for (name, w) in [("q", self.q), ("r", self.r), ("s", self.s), ("terminal", self.terminal.unwrap_or(self.q))] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::IllPosedWeights(format!("weight {name} = {w}")));
            }
        }
        if let Some((lo, hi)) = self.bounds {
            if !(lo <= hi) {
                return Err(Error::InvalidConfig(format!("input bounds [{lo}, {hi}] are empty")));
            }
        }
        Ok(())
    }
}

/// `y^d(k) = y(k)`, `y^d(k+l) = α w(k+l−1) + (1−α) r(k+l)` for l = 1..P.
/// `w` holds w(k..k+P−1), `r` holds r(k+1..k+P). Returns y^d(k..k+P).
pub fn smooth_reference(y: &Vector, r: &[Vector], alpha: f64, w: &[Vector]) -> Vec<Vector> {
    let mut out = Vec::with_capacity(r.len() + 1);
    out.push(y.clone());
    for (l, rl) in r.iter().enumerate() {
        out.push(&w[l] * alpha + rl * (1.0 - alpha));
    }
    out
}

/// Smoothing with w taken as the smoothed trajectory itself, starting from y(k).
pub fn smooth_reference_recursive(y: &Vector, r: &[Vector], alpha: f64) -> Vec<Vector> {
    let mut out = Vec::with_capacity(r.len() + 1);
    out.push(y.clone());
    for rl in r {
        let prev = out.last().unwrap();
        let next = prev * alpha + rl * (1.0 - alpha);
        out.push(next);
    }
    out
}

/// `λ + α (z − ẑ)`
pub fn update_multipliers(lambda: &Vector, step: f64, z: &Vector, z_hat: &Vector) -> Vector {
    lambda + (z - z_hat) * step
}

/// `J + Σ [λᵀ(z − ẑ) + (ρ/2)‖z − ẑ‖²]` over `(z, ẑ, λ)` triples.
pub fn augmented_cost(j: f64, terms: &[(&Vector, &Vector, &Vector)], rho: f64) -> f64 {
    terms.iter().fold(j, |acc, (z, zh, l)| {
        let d = *z - *zh;
        acc + l.dot(&d) + 0.5 * rho * d.norm_squared()
    })
}

/// Drops the first block of `v` and repeats the last.
fn shift_blocks(v: &Vector, block: usize) -> Vector {
    let n = v.len();
    if block == 0 || n <= block {
        return v.clone();
    }
    let mut out = Vector::zeros(n);
    out.rows_mut(0, n - block).copy_from(&v.rows(block, n - block));
    out.rows_mut(n - block, block).copy_from(&v.rows(n - block, block));
    out
}

/// Directed coupling: `to` uses the states or inputs of `from`.
#[derive(Clone, Copy, Debug)]
struct Edge {
    to: usize,
    from: usize,
    /// Position of `from` in `to`'s in-neighbour list.
    in_pos: usize,
    /// Position of `to` in `from`'s out-neighbour list.
    out_pos: usize,
}

/// Distributed controller over a decomposed model.
pub struct DistributedController {
    dec: SubsystemDecomposition,
    cfg: DmpcConfig,
    locals: Vec<LocalController>,
    goals: Vec<GoalSubproblem>,
    edges: Vec<Edge>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    c_inv: Vec<Mat>,
    // warm-start state
    u_prev: Vec<Vector>,
    plans: Vec<Option<(Vector, Vector)>>,
    lambda: Vec<Vector>,
    consensus: Vec<Vector>,
    goal_lambda: Vec<Vector>,
    rho: f64,
    transcript: Transcript,
    residuals: Vec<f64>,
    name: String,
}

impl DistributedController {
    pub fn new(dec: SubsystemDecomposition, cfg: DmpcConfig) -> Result<Self> {
        cfg.validate()?;
        if !dec.ts.is_finite() || dec.ts <= 0.0 {
            return Err(Error::InvalidConfig("distributed MPC needs a discrete model".into()));
        }
        let k = dec.len();
        let mut locals = Vec::with_capacity(k);
        let mut c_inv = Vec::with_capacity(k);
        for i in 0..k {
            let (nx, nu, ny) = (dec.nx(i), dec.nu(i), dec.ny(i));
            let weights = LocalWeights {
                q: Mat::identity(ny, ny) * cfg.q,
                r: Mat::identity(nu, nu) * cfg.r,
                s: Mat::identity(nx, nx) * cfg.s,
                terminal: Mat::identity(nx, nx) * cfg.terminal.unwrap_or(cfg.q),
                alpha: cfg.alpha,
            };
            locals.push(LocalController::new(&dec, i, weights, cfg.horizon_p, cfg.horizon_m, cfg.rho)?);
            let cii = &dec.c[i][i];
            let inv = if cii.is_square() { cii.clone().try_inverse() } else { None };
            c_inv.push(inv.ok_or_else(|| {
                Error::InvalidConfig(format!("subsystem {} needs an invertible output matrix", i + 1))
            })?);
        }
        let mut goals = Vec::new();
        if cfg.coordination == Coordination::GoalCoordination {
            for (i, lc) in locals.iter().enumerate() {
                if lc.c_ii != Mat::identity(lc.nx, lc.nx) {
                    return Err(Error::InvalidConfig(format!(
                        "goal coordination needs measured states (C_ii = I) in subsystem {}",
                        i + 1
                    )));
                }
                let model = StageModel {
                    a: lc.a_ii.clone(),
                    b: lc.b_ii.clone(),
                    c: Mat::identity(lc.nx, lc.nx),
                    q: lc.weights.q.clone(),
                    r: lc.weights.r.clone(),
                    s: lc.weights.s.clone(),
                };
                goals.push(GoalSubproblem::new(model, lc.weights.terminal.clone(), cfg.horizon_p)?);
            }
        }
        let mut edges = Vec::new();
        let mut in_edges = vec![Vec::new(); k];
        let mut out_edges = vec![Vec::new(); k];
        for (to, lc) in locals.iter().enumerate() {
            for (in_pos, &from) in lc.in_neighbors.iter().enumerate() {
                let out_pos = locals[from].out_neighbors.iter().position(|&l| l == to).unwrap();
                in_edges[to].push(edges.len());
                edges.push(Edge { to, from, in_pos, out_pos });
            }
        }
        for (e, edge) in edges.iter().enumerate() {
            out_edges[edge.from].push(e);
        }
        for (j, oe) in out_edges.iter_mut().enumerate() {
            oe.sort_by_key(|&e| edges[e].out_pos);
            debug_assert!(oe.iter().enumerate().all(|(p, &e)| edges[e].out_pos == p && edges[e].from == j));
        }
        let p = cfg.horizon_p;
        let lambda = edges.iter().map(|e| Vector::zeros(p * dec.nx(e.to))).collect();
        let consensus = edges.iter().map(|e| Vector::zeros(p * dec.nx(e.to))).collect();
        let goal_lambda = (0..k).map(|i| Vector::zeros(p * dec.nx(i))).collect();
        let u_prev = (0..k).map(|i| Vector::zeros(dec.nu(i))).collect();
        let name = match cfg.coordination {
            Coordination::Dual => "dmpc-dual",
            Coordination::GoalCoordination => "dmpc",
        };
        let rho = cfg.rho;
        Ok(DistributedController {
            dec,
            cfg,
            locals,
            goals,
            edges,
            in_edges,
            out_edges,
            c_inv,
            u_prev,
            plans: vec![None; k],
            lambda,
            consensus,
            goal_lambda,
            rho,
            transcript: Transcript::default(),
            residuals: Vec::new(),
            name: name.into(),
        })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn config(&self) -> &DmpcConfig {
        &self.cfg
    }

    pub fn locals(&self) -> &[LocalController] {
        &self.locals
    }

    pub fn decomposition(&self) -> &SubsystemDecomposition {
        &self.dec
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn take_transcript(&mut self) -> Transcript {
        std::mem::take(&mut self.transcript)
    }

    /// Interconnection residual after each round of the last step.
    pub fn last_residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Runs `f` on every subsystem, returning results in subsystem order and
    /// the slowest evaluation time.
    fn each<T, F>(&self, f: F) -> (Vec<Result<T>>, Duration)
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        let timed = |i: usize| {
            let t0 = Instant::now();
            let r = f(i);
            (r, t0.elapsed())
        };
        let out: Vec<(Result<T>, Duration)> = if self.cfg.parallel {
            (0..self.locals.len()).into_par_iter().map(timed).collect()
        } else {
            (0..self.locals.len()).map(timed).collect()
        };
        let slowest = out.iter().map(|(_, d)| *d).max().unwrap_or_default();
        (out.into_iter().map(|(r, _)| r).collect(), slowest)
    }

    fn log(&mut self, step: usize, round: usize, sender: usize, receiver: usize, kind: &'static str, payload: &[&Vector]) {
        if self.cfg.record_transcript {
            self.transcript.push(step, round, sender, receiver, kind, payload);
        }
    }

    fn local_data(&self, ctx: &StepContext<'_>) -> Result<LocalData> {
        let p = self.cfg.horizon_p;
        let k = self.locals.len();
        let d = stack(ctx.forecast, 0, p)?;
        let r_full: Vec<Vector> = ctx
            .reference
            .get(1..=p)
            .ok_or_else(|| Error::Dimension(format!("need {} reference samples", p + 1)))?
            .to_vec();
        let mut x = Vec::with_capacity(k);
        let mut yd = Vec::with_capacity(k);
        for i in 0..k {
            let yi = self.dec.local_output(i, ctx.y);
            x.push(&self.c_inv[i] * &yi);
            let ri: Vec<Vector> = r_full.iter().map(|r| self.dec.local_output(i, r)).collect();
            let sm = smooth_reference_recursive(&yi, &ri, self.cfg.alpha);
            yd.push(stack(&sm, 1, p)?);
        }
        Ok(LocalData { x, yd, d })
    }

    fn step_dual(&mut self, ctx: &StepContext<'_>, data: &LocalData) -> Result<(Vec<Vector>, Duration, usize, bool)> {
        let p = self.cfg.horizon_p;
        let k = self.locals.len();
        // Step 1: previous plans to neighbours; initial consensus from them.
        let msgs: Vec<CoordinationMessage> = (0..k)
            .map(|j| {
                let (u_plan, x_pred) = match &self.plans[j] {
                    Some((u, xp)) => (u.clone(), xp.clone()),
                    None => (
                        crate::linalg::repeat_vec(&self.u_prev[j], self.cfg.horizon_m),
                        crate::linalg::repeat_vec(&data.x[j], p),
                    ),
                };
                CoordinationMessage { sender: j, u_plan, x_pred }
            })
            .collect();
        for e in 0..self.edges.len() {
            let Edge { to, from, .. } = self.edges[e];
            let m = &msgs[from];
            self.log(ctx.k, 0, from, to, "plan", &[&m.u_plan, &m.x_pred]);
            let lc = &self.locals[to];
            let est = lc.predict_interactions_from(from, m)?;
            self.consensus[e] = est;
            self.lambda[e] = shift_blocks(&self.lambda[e], self.dec.nx(to));
        }

        let mut critical = Duration::ZERO;
        self.residuals.clear();
        let mut converged = false;
        let mut rounds = 0;
        let mut plans: Vec<LocalPlan> = Vec::new();
        for s in 0..self.cfg.max_iterations {
            rounds = s + 1;
            let (res, slowest) = {
                let this = &*self;
                this.each(|i| {
                    let lam_in: Vec<Vector> = this.in_edges[i].iter().map(|&e| this.lambda[e].clone()).collect();
                    let c_in: Vec<Vector> = this.in_edges[i].iter().map(|&e| this.consensus[e].clone()).collect();
                    let lam_out: Vec<Vector> = this.out_edges[i].iter().map(|&e| this.lambda[e].clone()).collect();
                    let c_out: Vec<Vector> = this.out_edges[i].iter().map(|&e| this.consensus[e].clone()).collect();
                    this.locals[i].solve_augmented(
                        &data.x[i],
                        &this.u_prev[i],
                        &data.d,
                        &data.yd[i],
                        &lam_in,
                        &c_in,
                        &lam_out,
                        &c_out,
                        this.cfg.bounds,
                    )
                })
            };
            critical += slowest;
            plans = res.into_iter().collect::<Result<Vec<_>>>().map_err(|e| match e {
                Error::SolverFailure { reason, .. } => Error::SolverFailure { step: ctx.k, reason },
                other => other,
            })?;
            if self.edges.is_empty() {
                self.residuals.push(0.0);
                converged = true;
                break;
            }
            let step = self.cfg.step.size(s, self.rho);
            let mut primal = 0.0f64;
            let mut dual = 0.0f64;
            for e in 0..self.edges.len() {
                let Edge { to, from, in_pos, out_pos } = self.edges[e];
                let z = &plans[to].z_in[in_pos];
                let h = &plans[from].h_out[out_pos];
                self.log(ctx.k, rounds, from, to, "contribution", &[h]);
                self.log(ctx.k, rounds, to, from, "copy", &[z]);
                primal = primal.max(inf_norm(&(z - h)));
                let a = self.cfg.relaxation;
                let c = (z + h) * (0.5 * a) + &self.consensus[e] * (1.0 - a);
                dual = dual.max(inf_norm(&(&c - &self.consensus[e])));
                self.lambda[e] = update_multipliers(&self.lambda[e], step * a, z, h);
                self.consensus[e] = c;
            }
            self.residuals.push(primal);
            if primal.max(dual) < self.cfg.tolerance {
                converged = true;
                break;
            }
        }
        let mut u = Vec::with_capacity(k);
        for (i, plan) in plans.into_iter().enumerate() {
            let nu = self.dec.nu(i);
            u.push(plan.u_plan.rows(0, nu).into_owned());
            self.plans[i] = Some((plan.u_plan, plan.x_pred));
        }
        Ok((u, critical, rounds, converged))
    }

    fn step_goal(&mut self, ctx: &StepContext<'_>, data: &LocalData) -> Result<(Vec<Vector>, Duration, usize, bool)> {
        let p = self.cfg.horizon_p;
        let k = self.locals.len();
        for i in 0..k {
            self.goal_lambda[i] = shift_blocks(&self.goal_lambda[i], self.dec.nx(i));
        }
        let ed: Vec<Vector> = (0..k)
            .map(|i| crate::linalg::block_diag_repeat(&self.dec.e[i], p) * &data.d)
            .collect();
        let mut critical = Duration::ZERO;
        self.residuals.clear();
        let mut converged = false;
        let mut rounds = 0;
        let mut sols: Vec<GoalSolution> = Vec::new();
        for s in 0..self.cfg.max_iterations {
            rounds = s + 1;
            // Prices from out-neighbours' multipliers.
            for i in 0..k {
                for l in self.locals[i].out_neighbors.clone() {
                    let lam = self.goal_lambda[l].clone();
                    self.log(ctx.k, rounds, l, i, "price", &[&lam]);
                }
            }
            let (res, slowest) = {
                let this = &*self;
                this.each(|i| {
                    let (nx, nu) = (this.dec.nx(i), this.dec.nu(i));
                    let mut q_u = Vector::zeros(p * nu);
                    let mut q_x = Vector::zeros(p * nx);
                    for &l in &this.locals[i].out_neighbors {
                        let nxl = this.dec.nx(l);
                        let (a_li, b_li) = (&this.dec.a[l][i], &this.dec.b[l][i]);
                        for t in 0..p {
                            let lam = this.goal_lambda[l].rows(t * nxl, nxl);
                            let mut qu = q_u.rows_mut(t * nu, nu);
                            qu -= b_li.transpose() * lam;
                            if t > 0 {
                                let mut qx = q_x.rows_mut(t * nx, nx);
                                qx -= a_li.transpose() * lam;
                            }
                        }
                    }
                    this.goals[i].three_level_solve(&GoalInputs {
                        x0: &data.x[i],
                        ed: &ed[i],
                        x_ref: &data.yd[i],
                        lambda: &this.goal_lambda[i],
                        q_u: &q_u,
                        q_x: &q_x,
                    })
                })
            };
            critical += slowest;
            sols = res.into_iter().collect::<Result<Vec<_>>>()?;
            let step = self.cfg.step.size(s, self.rho);
            let mut worst = 0.0f64;
            for l in 0..k {
                let nx = self.dec.nx(l);
                let mut z_hat = Vector::zeros(p * nx);
                for j in self.locals[l].in_neighbors.clone() {
                    self.log(ctx.k, rounds, j, l, "trajectory", &[&stack(&sols[j].x, 0, p)?, &stack(&sols[j].u, 0, p)?]);
                    for t in 0..p {
                        let w = &self.dec.a[l][j] * &sols[j].x[t] + &self.dec.b[l][j] * &sols[j].u[t];
                        let mut zh = z_hat.rows_mut(t * nx, nx);
                        zh += w;
                    }
                }
                let z = stack(&sols[l].z, 0, p)?;
                worst = worst.max(inf_norm(&(&z - &z_hat)));
                self.goal_lambda[l] = update_multipliers(&self.goal_lambda[l], step, &z, &z_hat);
            }
            self.residuals.push(worst);
            if worst < self.cfg.tolerance {
                converged = true;
                break;
            }
        }
        let u = sols
            .iter()
            .map(|s| match self.cfg.bounds {
                Some((lo, hi)) => s.u[0].map(|v| v.clamp(lo, hi)),
                None => s.u[0].clone(),
            })
            .collect();
        Ok((u, critical, rounds, converged))
    }
}

struct LocalData {
    x: Vec<Vector>,
    yd: Vec<Vector>,
    d: Vector,
}

impl Controller for DistributedController {
    fn name(&self) -> &str {
        &self.name
    }

    fn horizon(&self) -> usize {
        self.cfg.horizon_p
    }

    fn reset(&mut self, u0: &Vector) {
        let k = self.locals.len();
        self.u_prev = (0..k).map(|i| self.dec.local_input(i, u0)).collect();
        self.plans = vec![None; k];
        for l in self.lambda.iter_mut().chain(self.consensus.iter_mut()).chain(self.goal_lambda.iter_mut()) {
            l.fill(0.0);
        }
        self.residuals.clear();
        self.transcript = Transcript::default();
    }

    fn step(&mut self, ctx: &StepContext<'_>) -> Result<StepOutput> {
        let data = self.local_data(ctx)?;
        let (u_local, solve_time, iterations, converged) = match self.cfg.coordination {
            Coordination::Dual => self.step_dual(ctx, &data)?,
            Coordination::GoalCoordination => self.step_goal(ctx, &data)?,
        };
        let mut u = Vector::zeros(self.dec.dims().1);
        for (i, ui) in u_local.iter().enumerate() {
            self.dec.scatter_input(i, ui, &mut u);
        }
        self.u_prev = u_local;
        Ok(StepOutput {
            u,
            solve_time,
            iterations,
            converged,
        })
    }
}
