//! Discrete Lyapunov certificates for linear closed loops and the resulting
//! trajectory bound ‖x(k)‖ ≤ √(λmax(P)/λmin(F)) ‖x(0)‖.

use crate::control::{Controller, StepContext};
use crate::error::{Error, Result};
use crate::linalg::{block_diag, spectral_radius, symmetric_eig_range, Mat, Vector};
use crate::linear::StateSpaceModel;
use crate::matrix_text::MatrixDoc;

/// Target residual of the series solution.
pub const SERIES_TOL: f64 = 1e-12;
/// Acceptance threshold on ‖AᵀPA − P + F‖.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Largest dimension for the vectorized cross-check.
const KRON_MAX_DIM: usize = 40;

/// max |AᵀPA − P + F|
pub fn lyapunov_residual(a: &Mat, p: &Mat, f: &Mat) -> f64 {
    (a.transpose() * p * a - p + f).amax()
}

fn check_inputs(a: &Mat, f: &Mat) -> Result<f64> {
    if !a.is_square() || f.shape() != a.shape() {
        return Err(Error::Dimension("Lyapunov equation needs square A and F of equal size".into()));
    }
    let rho = spectral_radius(a);
    if !(rho < 1.0) {
        return Err(Error::UnstableMatrix(rho));
    }
    Ok(rho)
}

/// Σ (Aᵀ)ᵏ F Aᵏ by doubling: P ← P + A_sᵀ P A_s, A_s ← A_s².
pub fn lyapunov_series(a: &Mat, f: &Mat) -> Result<Mat> {
    check_inputs(a, f)?;
    let mut p = f.clone();
    let mut ak = a.clone();
    for _ in 0..64 {
        p = &p + ak.transpose() * &p * &ak;
        p = 0.5 * (&p + p.transpose());
        if lyapunov_residual(a, &p, f) < SERIES_TOL * (1.0 + p.amax()) {
            return Ok(p);
        }
        ak = &ak * &ak;
    }
    Err(Error::SolverFailure {
        step: 0,
        reason: "Lyapunov series did not reach its residual target".into(),
    })
}

/// Vectorized solve (I − Aᵀ⊗Aᵀ) vec(P) = vec(F).
pub fn lyapunov_kron(a: &Mat, f: &Mat) -> Result<Mat> {
    check_inputs(a, f)?;
    let n = a.nrows();
    let at = a.transpose();
    let m = Mat::identity(n * n, n * n) - at.kronecker(&at);
    let vf = Vector::from_column_slice(f.as_slice());
    let vp = m
        .lu()
        .solve(&vf)
        .ok_or_else(|| Error::SolverFailure { step: 0, reason: "singular Lyapunov operator".into() })?;
    let p = Mat::from_column_slice(n, n, vp.as_slice());
    Ok(0.5 * (&p + p.transpose()))
}

/// Solves AᵀPA − P = −F; the series result is cross-checked against the
/// vectorized solve for small systems.
pub fn solve_discrete_lyapunov(a: &Mat, f: &Mat) -> Result<Mat> {
    let p = lyapunov_series(a, f)?;
    if a.nrows() <= KRON_MAX_DIM {
        let pk = lyapunov_kron(a, f)?;
        let gap = (&p - &pk).amax();
        if gap > 1e-8 * (1.0 + p.amax()) {
            return Err(Error::SolverFailure {
                step: 0,
                reason: format!("Lyapunov series and vectorized solutions differ by {gap:e}"),
            });
        }
    }
    Ok(p)
}

/// √(λmax(P) / λmin(F))
pub fn stability_bound(p: &Mat, f: &Mat) -> f64 {
    let (_, pmax) = symmetric_eig_range(p);
    let (fmin, _) = symmetric_eig_range(f);
    (pmax / fmin).sqrt()
}

/// Identity weight partitioned into per-subsystem blocks.
pub fn default_f(block_sizes: &[usize]) -> Mat {
    block_diag(&block_sizes.iter().map(|&n| Mat::identity(n, n)).collect::<Vec<_>>())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovCertificate {
    pub a_cl: Mat,
    pub p: Mat,
    pub f: Mat,
    pub bound: f64,
    pub residual: f64,
    pub spectral_radius: f64,
}

impl LyapunovCertificate {
    /// Residual below tolerance and a contracting closed loop.
    pub fn is_valid(&self) -> bool {
        self.residual < RESIDUAL_TOL && self.spectral_radius < 1.0
    }

    pub fn to_doc(&self) -> MatrixDoc {
        let mut doc = MatrixDoc::new();
        doc.push_matrix("A_cl", &self.a_cl);
        doc.push_matrix("P", &self.p);
        doc.push_matrix("F", &self.f);
        doc.push_scalar("bound", self.bound);
        doc.push_scalar("residual", self.residual);
        doc.push_scalar("spectral_radius", self.spectral_radius);
        doc
    }

    pub fn from_doc(doc: &MatrixDoc) -> Result<Self> {
        Ok(LyapunovCertificate {
            a_cl: doc.matrix("A_cl")?.clone(),
            p: doc.matrix("P")?.clone(),
            f: doc.matrix("F")?.clone(),
            bound: doc.scalar("bound")?,
            residual: doc.scalar("residual")?,
            spectral_radius: doc.scalar("spectral_radius")?,
        })
    }

    /// Recomputes residual, spectral radius and bound from the stored matrices.
    pub fn recheck(&self) -> Result<LyapunovCertificate> {
        if self.p.shape() != self.a_cl.shape() || self.f.shape() != self.a_cl.shape() {
            return Err(Error::Dimension("certificate matrices differ in size".into()));
        }
        Ok(LyapunovCertificate {
            a_cl: self.a_cl.clone(),
            p: self.p.clone(),
            f: self.f.clone(),
            bound: stability_bound(&self.p, &self.f),
            residual: lyapunov_residual(&self.a_cl, &self.p, &self.f),
            spectral_radius: spectral_radius(&self.a_cl),
        })
    }
}

/// Certifies `a_cl` with weight `f`.
pub fn certify(a_cl: &Mat, f: &Mat) -> Result<LyapunovCertificate> {
    let (fmin, _) = symmetric_eig_range(f);
    if !(fmin > 0.0) {
        return Err(Error::IllPosedWeights("F must be positive definite".into()));
    }
    let p = solve_discrete_lyapunov(a_cl, f)?;
    Ok(LyapunovCertificate {
        a_cl: a_cl.clone(),
        bound: stability_bound(&p, f),
        residual: lyapunov_residual(a_cl, &p, f),
        spectral_radius: spectral_radius(a_cl),
        p,
        f: f.clone(),
    })
}

/// Linear closed loop `s⁺ = A_cl s`. When the control law uses the previous
/// input, `s = [x; u_prev]`, otherwise `s = x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoop {
    pub a_cl: Mat,
    pub k_x: Mat,
    pub k_u: Mat,
    pub input_memory: bool,
}

/// Reads the feedback `u = K_x x + K_u u_prev` off an unconstrained
/// controller by probing it with unit states and unit previous inputs at zero
/// reference and disturbance. Requires `C` invertible.
pub fn extract_closed_loop(ss: &StateSpaceModel, ctrl: &mut dyn Controller) -> Result<ClosedLoop> {
    let (n, m, q) = (ss.n(), ss.m(), ss.q());
    if ss.c.clone().try_inverse().is_none() {
        return Err(Error::InvalidConfig("closed-loop extraction needs an invertible C".into()));
    }
    let p = ctrl.horizon();
    let reference = vec![Vector::zeros(ss.p()); p + 1];
    let forecast = vec![Vector::zeros(q); p];
    let d_prev = Vector::zeros(q);
    let mut probe = |x: &Vector, u0: &Vector| -> Result<Vector> {
        ctrl.reset(u0);
        let y = &ss.c * x;
        let ctx = StepContext { k: 0, y: &y, reference: &reference, forecast: &forecast, d_prev: &d_prev };
        Ok(ctrl.step(&ctx)?.u)
    };
    let zero_u = Vector::zeros(m);
    let zero_x = Vector::zeros(n);
    let offset = probe(&zero_x, &zero_u)?;
    if offset.amax() > 1e-9 {
        return Err(Error::InvalidConfig("controller is not linear at the origin (are input bounds active?)".into()));
    }
    let mut k_x = Mat::zeros(m, n);
    for j in 0..n {
        let mut x = Vector::zeros(n);
        x[j] = 1.0;
        k_x.set_column(j, &probe(&x, &zero_u)?);
    }
    let mut k_u = Mat::zeros(m, m);
    for j in 0..m {
        let mut u0 = Vector::zeros(m);
        u0[j] = 1.0;
        k_u.set_column(j, &probe(&zero_x, &u0)?);
    }
    let input_memory = k_u.amax() > 1e-12;
    let a_cl = if input_memory {
        let mut a = Mat::zeros(n + m, n + m);
        a.view_mut((0, 0), (n, n)).copy_from(&(&ss.a + &ss.b * &k_x));
        a.view_mut((0, n), (n, m)).copy_from(&(&ss.b * &k_u));
        a.view_mut((n, 0), (m, n)).copy_from(&k_x);
        a.view_mut((n, n), (m, m)).copy_from(&k_u);
        a
    } else {
        &ss.a + &ss.b * &k_x
    };
    Ok(ClosedLoop { a_cl, k_x, k_u, input_memory })
}

/// Iterates `s⁺ = A_cl s` for `steps` samples, returning s(0..=steps).
pub fn regulation_run(a_cl: &Mat, s0: &Vector, steps: usize) -> Vec<Vector> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s0.clone());
    for _ in 0..steps {
        let next = a_cl * out.last().unwrap();
        out.push(next);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryReport {
    /// max_k ‖x(k) − x_eq‖ / ‖x(0) − x_eq‖ (0 when x(0) = x_eq).
    pub max_ratio: f64,
    pub bound: f64,
    /// Samples where the bound is exceeded.
    pub violations: Vec<usize>,
    /// ‖x(end) − x_eq‖ / ‖x(0) − x_eq‖
    pub final_ratio: f64,
}

impl TrajectoryReport {
    pub fn satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks ‖x(k) − x_eq‖ ≤ bound ‖x(0) − x_eq‖ along a trajectory.
pub fn verify_trajectory_bound(states: &[Vector], x_eq: &Vector, cert: &LyapunovCertificate) -> TrajectoryReport {
    let bound = cert.bound;
    let Some(first) = states.first() else {
        return TrajectoryReport { max_ratio: 0.0, bound, violations: Vec::new(), final_ratio: 0.0 };
    };
    let n0 = (first - x_eq).norm();
    let mut max_ratio = 0.0f64;
    let mut violations = Vec::new();
    let mut last = 0.0;
    for (k, x) in states.iter().enumerate() {
        let nk = (x - x_eq).norm();
        if nk > bound * n0 * (1.0 + 1e-12) {
            violations.push(k);
        }
        let ratio = if n0 > 0.0 { nk / n0 } else if nk > 0.0 { f64::INFINITY } else { 0.0 };
        max_ratio = max_ratio.max(ratio);
        last = ratio;
    }
    TrajectoryReport { max_ratio, bound, violations, final_ratio: last }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn s(v: f64) -> Mat {
        Mat::from_element(1, 1, v)
    }

    #[test]
    fn scalar_geometric_series() {
        let p = solve_discrete_lyapunov(&s(0.5), &s(1.0)).unwrap();
        assert_relative_eq!(p[(0, 0)], 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(stability_bound(&p, &s(1.0)), 1.1547005383792515, epsilon = 1e-12);
    }

    #[test]
    fn nilpotent_gives_f() {
        let f = Mat::identity(3, 3);
        let p = solve_discrete_lyapunov(&Mat::zeros(3, 3), &f).unwrap();
        assert!((p - f).amax() < 1e-15);
    }

    #[test]
    fn identity_bound_is_one() {
        assert_relative_eq!(stability_bound(&Mat::identity(2, 2), &Mat::identity(2, 2)), 1.0);
    }

    #[test]
    fn unstable_rejected() {
        assert!(matches!(solve_discrete_lyapunov(&Mat::identity(2, 2), &Mat::identity(2, 2)), Err(Error::UnstableMatrix(r)) if (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn scalar_closed_loop_trajectory() {
        let cert = certify(&s(0.5), &s(1.0)).unwrap();
        let traj: Vec<Vector> = regulation_run(&s(0.5), &Vector::from_element(1, 3.0), 30);
        let rep = verify_trajectory_bound(&traj, &Vector::zeros(1), &cert);
        assert_relative_eq!(rep.max_ratio, 1.0);
        assert!(rep.satisfied());
        assert!(rep.final_ratio < 1e-3);
    }

    #[test]
    fn equilibrium_start_trivially_satisfied() {
        let cert = certify(&s(0.5), &s(1.0)).unwrap();
        let traj = vec![Vector::from_element(1, 2.0); 5];
        let rep = verify_trajectory_bound(&traj, &Vector::from_element(1, 2.0), &cert);
        assert!(rep.satisfied());
        assert_eq!(rep.max_ratio, 0.0);
    }

    #[test]
    fn certificate_text_round_trip() {
        let a = Mat::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.3]);
        let cert = certify(&a, &default_f(&[1, 1])).unwrap();
        let back = LyapunovCertificate::from_doc(&MatrixDoc::parse(&cert.to_doc().to_text()).unwrap()).unwrap();
        assert_eq!(back, cert);
        let re = back.recheck().unwrap();
        assert!(re.is_valid());
    }

    fn random_stable(vals: &[f64], n: usize, radius: f64) -> Mat {
        let a = Mat::from_row_slice(n, n, &vals[..n * n]);
        let r = spectral_radius(&a).max(1e-9);
        a * (radius / r)
    }

    proptest! {
        #[test]
        fn series_and_vectorized_agree(vals in prop::collection::vec(-1.0..1.0f64, 36), radius in 0.05..0.95f64) {
            let a = random_stable(&vals, 6, radius);
            let f = Mat::identity(6, 6);
            let p1 = lyapunov_series(&a, &f).unwrap();
            let p2 = lyapunov_kron(&a, &f).unwrap();
            prop_assert!((&p1 - &p2).amax() < 1e-8 * (1.0 + p1.amax()));
            prop_assert!(lyapunov_residual(&a, &p1, &f) < RESIDUAL_TOL);
            let (pmin, _) = symmetric_eig_range(&(&p1 - &f));
            prop_assert!(pmin > -1e-9);
            prop_assert!(stability_bound(&p1, &f) >= 1.0);
        }

        #[test]
        fn lyapunov_decrease(vals in prop::collection::vec(-1.0..1.0f64, 16 + 4), radius in 0.05..0.95f64) {
            let a = random_stable(&vals, 4, radius);
            let f = Mat::identity(4, 4);
            let p = solve_discrete_lyapunov(&a, &f).unwrap();
            let mut x = Vector::from_row_slice(&vals[16..20]);
            for _ in 0..20 {
                let next = &a * &x;
                let dv = next.dot(&(&p * &next)) - x.dot(&(&p * &x));
                let expected = -x.dot(&(&f * &x));
                prop_assert!((dv - expected).abs() < 1e-8 * (1.0 + p.amax()));
                x = next;
            }
        }
    }
}
