#![allow(dead_code)]

use building_dmpc::linalg::{spectral_radius, Mat, Vector};
use building_dmpc::linear::{decompose, Partition, StateSpaceModel, SubsystemDecomposition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod oracle;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random stable discrete model split into subsystems of the given state
/// counts, one input per subsystem, measured states.
pub fn random_instance(rng: &mut ChaCha8Rng, sizes: &[usize], radius: f64) -> (StateSpaceModel, SubsystemDecomposition) {
    let n: usize = sizes.iter().sum();
    let k = sizes.len();
    let mut a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let rho = spectral_radius(&a);
    a *= radius / rho;
    let mut b = Mat::zeros(n, k);
    let mut states = Vec::new();
    let mut start = 0;
    for (i, &s) in sizes.iter().enumerate() {
        for r in start..start + s {
            b[(r, i)] = rng.gen_range(0.2..1.0);
        }
        // cross-input coupling into the other subsystems
        for r in 0..n {
            if r < start || r >= start + s {
                b[(r, i)] = rng.gen_range(-0.2..0.2);
            }
        }
        states.push((start..start + s).collect::<Vec<_>>());
        start += s;
    }
    let e = Mat::from_fn(n, 1, |_, _| rng.gen_range(-0.5..0.5));
    let ss = StateSpaceModel::new(a, b, e, Mat::identity(n, n), 1.0).unwrap();
    let part = Partition {
        states: states.clone(),
        inputs: (0..k).map(|i| vec![i]).collect(),
        outputs: states,
    };
    let dec = decompose(&ss, &part).unwrap();
    (ss, dec)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(lo..hi))
}

/// Runs `ctrl` in closed loop on the linear model itself. `refs` needs
/// `steps + P + 1` samples and `dist` `steps + P`. Returns u(0..steps).
pub fn linear_loop(
    ss: &StateSpaceModel,
    ctrl: &mut dyn building_dmpc::control::Controller,
    x0: &Vector,
    u0: &Vector,
    refs: &[Vector],
    dist: &[Vector],
    steps: usize,
) -> Vec<Vector> {
    use building_dmpc::control::StepContext;
    let p = ctrl.horizon();
    ctrl.reset(u0);
    let mut x = x0.clone();
    let mut d_prev = dist[0].clone();
    let mut us = Vec::with_capacity(steps);
    for k in 0..steps {
        let y = ss.output(&x);
        let ctx = StepContext { k, y: &y, reference: &refs[k..=k + p], forecast: &dist[k..k + p], d_prev: &d_prev };
        let u = ctrl.step(&ctx).unwrap().u;
        x = ss.step(&x, &u, &dist[k]);
        d_prev = dist[k].clone();
        us.push(u);
    }
    us
}
