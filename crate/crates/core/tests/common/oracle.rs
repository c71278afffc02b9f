//! Brute-force minimizer for single centralized steps.

use building_dmpc::cmpc::{build_prediction_matrices, solve_centralized_step, MpcConfig};
use building_dmpc::linalg::{spectral_radius, Mat, Vector};
use building_dmpc::linear::StateSpaceModel;
use rand::Rng;

pub struct Instance {
    pub ss: StateSpaceModel,
    pub cfg: MpcConfig,
    x: Vector,
    u_prev: Vector,
    w: Vec<Vector>,
    y_r: Vec<Vector>,
}

pub fn instance(seed: u64, bounded: bool) -> Instance {
    let mut rng = super::rng(seed);
    let (n, m, q) = (3, rng.gen_range(1..=2), 1);
    let mut a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a *= rng.gen_range(0.3..1.1) / spectral_radius(&a);
    let b = Mat::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    let e = Mat::from_fn(n, q, |_, _| rng.gen_range(-0.5..0.5));
    let c = Mat::identity(n, n);
    let ss = StateSpaceModel::new(a, b, e, c, 1.0).unwrap();
    let p = rng.gen_range(1..=6);
    let mh = rng.gen_range(1..=p.min(3));
    let cfg = MpcConfig {
        horizon_p: p,
        horizon_m: mh,
        q: Mat::from_diagonal(&super::random_vec(&mut rng, n, 0.5, 2.0)),
        r: Mat::from_diagonal(&super::random_vec(&mut rng, m, 0.01, 0.5)),
        bounds: if bounded { Some((-0.5, 0.5)) } else { None },
    };
    Instance {
        x: super::random_vec(&mut rng, n, -2.0, 2.0),
        u_prev: super::random_vec(&mut rng, m, -0.4, 0.4),
        w: (0..p).map(|_| super::random_vec(&mut rng, q, -1.0, 1.0)).collect(),
        y_r: (0..p).map(|_| super::random_vec(&mut rng, n, -1.0, 1.0)).collect(),
        ss,
        cfg,
    }
}

/// Cost by simulating the model step by step with the moves applied and the
/// input held after the control horizon.
fn simulated_cost(inst: &Instance, du: &Vector) -> f64 {
    let ss = &inst.ss;
    let m = ss.m();
    let mut x = inst.x.clone();
    let mut u = inst.u_prev.clone();
    let mut j = 0.0;
    for t in 0..inst.cfg.horizon_p {
        if t < inst.cfg.horizon_m {
            let d = du.rows(t * m, m).into_owned();
            j += d.dot(&(&inst.cfg.r * &d));
            u += d;
        }
        x = ss.step(&x, &u, &inst.w[t]);
        let e = ss.output(&x) - &inst.y_r[t];
        j += e.dot(&(&inst.cfg.q * &e));
    }
    j
}

/// Gradient and Hessian of a quadratic by finite differences (exact for
/// quadratics up to rounding), then the stationary point.
fn numeric_quadratic(inst: &Instance) -> (Mat, Vector) {
    let dim = inst.cfg.horizon_m * inst.ss.m();
    let f = |v: &Vector| simulated_cost(inst, v);
    let unit = |i: usize| {
        let mut v = Vector::zeros(dim);
        v[i] = 1.0;
        v
    };
    let zero = Vector::zeros(dim);
    let f0 = f(&zero);
    let mut h = Mat::zeros(dim, dim);
    let mut g = Vector::zeros(dim);
    for i in 0..dim {
        g[i] = (f(&unit(i)) - f(&-unit(i))) / 2.0;
        for j in 0..dim {
            h[(i, j)] = f(&(unit(i) + unit(j))) - f(&unit(i)) - f(&unit(j)) + f0;
        }
    }
    (h, g)
}

/// Cyclic exact coordinate minimization with the absolute-input box
/// enforced, run until the moves stop changing.
fn coordinate_descent(inst: &Instance, h: &Mat, g: &Vector, lo: f64, hi: f64) -> Vector {
    let (m, mh) = (inst.ss.m(), inst.cfg.horizon_m);
    let dim = mh * m;
    // absolute inputs U; ΔU = D U − s
    let to_du = |u: &Vector| {
        let mut du = u.clone();
        for t in (1..mh).rev() {
            for i in 0..m {
                du[t * m + i] -= u[(t - 1) * m + i];
            }
        }
        for i in 0..m {
            du[i] -= inst.u_prev[i];
        }
        du
    };
    let mut u = Vector::from_fn(dim, |k, _| inst.u_prev[k % m]);
    let cost = |u: &Vector| {
        let du = to_du(u);
        0.5 * du.dot(&(h * &du)) + g.dot(&du)
    };
    for _sweep in 0..200_000 {
        let mut change: f64 = 0.0;
        for k in 0..dim {
            // cost along coordinate k is quadratic: fit it from three points
            let mut probe = u.clone();
            let c0 = cost(&probe);
            probe[k] = u[k] + 1.0;
            let cp = cost(&probe);
            probe[k] = u[k] - 1.0;
            let cm = cost(&probe);
            let curv = cp + cm - 2.0 * c0;
            let slope = (cp - cm) / 2.0;
            let target = (u[k] - slope / curv).clamp(lo, hi);
            change = change.max((target - u[k]).abs());
            u[k] = target;
        }
        if change < 1e-13 {
            break;
        }
    }
    to_du(&u)
}

/// Scaled error of `solve_centralized_step` against the numeric minimizer, and
/// whether the first input sits on the upper bound.
pub fn check(seed: u64, bounded: bool) -> (f64, bool) {
    let inst = instance(seed, bounded);
    let pm = build_prediction_matrices(&inst.ss, inst.cfg.horizon_p, inst.cfg.horizon_m).unwrap();
    let stack = |v: &[Vector]| Vector::from_iterator(v.iter().map(|x| x.len()).sum(), v.iter().flat_map(|x| x.iter().copied()));
    let sol = solve_centralized_step(&pm, &inst.cfg, &inst.x, &inst.u_prev, &stack(&inst.w), &stack(&inst.y_r)).unwrap();
    let (h, g) = numeric_quadratic(&inst);
    let oracle = match inst.cfg.bounds {
        None => -h.clone().lu().solve(&g).unwrap(),
        Some((lo, hi)) => coordinate_descent(&inst, &h, &g, lo, hi),
    };
    let active = inst.cfg.bounds.is_some() && (sol.u.amax() - 0.5).abs() < 1e-12;
    ((&sol.delta_u - &oracle).amax() / oracle.amax().max(1.0), active)
}

