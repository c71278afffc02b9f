//! Overshoot, peak, control area, RMSE and timing of a closed-loop run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SimulationRecord;
use crate::error::{Error, Result};

/// Steps smaller than this are not setpoint changes.
const STEP_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub controller: String,
    /// Per zone, % of step size.
    pub overshoot: Vec<f64>,
    /// Per zone, °C.
    pub peak: Vec<f64>,
    /// Per input channel, % of the segment-to-segment move.
    pub control_overshoot: Vec<f64>,
    /// ∫ Σ|u_i| dt, °C·s for supply-temperature inputs.
    pub control_area: f64,
    pub rmse: f64,
    /// Seconds.
    pub solve_time: f64,
    pub iterations_total: Option<usize>,
    pub iterations_max: Option<usize>,
}

/// Constant-setpoint segments of one channel: `(start, end_exclusive, value)`.
fn segments(r: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=r.len() {
        if k == r.len() || (r[k] - r[start]).abs() > STEP_EPS {
            out.push((start, k, r[start]));
            start = k;
        }
    }
    out
}

/// Largest overshoot past the post-step value, in % of the step, over all
/// segments of `r`. The first segment counts as a step from `y[0]`.
pub fn step_overshoot(y: &[f64], r: &[f64]) -> f64 {
    let segs = segments(r);
    let mut worst: f64 = 0.0;
    let mut before = y.first().copied().unwrap_or(0.0);
    for (a, b, target) in segs {
        let step = target - before;
        if step.abs() > STEP_EPS {
            let seg = &y[a..b];
            let excess = if step > 0.0 {
                seg.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - target
            } else {
                target - seg.iter().cloned().fold(f64::INFINITY, f64::min)
            };
            worst = worst.max(100.0 * excess.max(0.0) / step.abs());
        }
        before = target;
    }
    worst
}

/// Trapezoidal integral of Σ_i |u_i − baseline_i| at spacing `ts`.
pub fn control_area(u: &[Vec<f64>], ts: f64, baseline: Option<&[f64]>) -> f64 {
    let mag = |row: &Vec<f64>| -> f64 {
        row.iter()
            .enumerate()
            .map(|(i, v)| (v - baseline.map_or(0.0, |b| b[i])).abs())
            .sum()
    };
    u.windows(2).map(|w| 0.5 * ts * (mag(&w[0]) + mag(&w[1]))).sum()
}

fn column(rows: &[Vec<f64>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i]).collect()
}

/// Overshoot of an input around each reference change after the first. The
/// move runs from the input at the middle of the previous segment to the
/// input at the end of the new one; the extreme is taken over that window, so
/// moves made ahead of the reference change are included.
pub fn control_overshoot(u: &[f64], r: &[f64]) -> f64 {
    let segs = segments(r);
    let mut worst: f64 = 0.0;
    for w in segs.windows(2) {
        let (a0, b0, _) = w[0];
        let (_, b1, _) = w[1];
        let mid = (a0 + b0) / 2;
        let (before, after) = (u[mid], u[b1 - 1]);
        let step = after - before;
        if step.abs() <= 1e-6 {
            continue;
        }
        let win = &u[mid..b1];
        let excess = if step > 0.0 {
            win.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - after
        } else {
            after - win.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        worst = worst.max(100.0 * excess.max(0.0) / step.abs());
    }
    worst
}

pub fn compute_metrics(record: &SimulationRecord) -> Result<Metrics> {
    let n = record.x.len();
    if n == 0 {
        return Err(Error::InvalidRecord("record has no samples".into()));
    }
    if record.u.len() != n || record.reference.len() != n || record.solve_ms.len() != n {
        return Err(Error::InvalidRecord("record columns have different lengths".into()));
    }
    let nx = record.x[0].len();
    let nu = record.u[0].len();
    if record.x.iter().any(|r| r.len() != nx)
        || record.reference.iter().any(|r| r.len() != nx)
        || record.u.iter().any(|r| r.len() != nu)
    {
        return Err(Error::InvalidRecord("ragged record rows".into()));
    }

    let mut overshoot = Vec::with_capacity(nx);
    let mut peak = Vec::with_capacity(nx);
    let mut sq = 0.0;
    for i in 0..nx {
        let y = column(&record.x, i);
        let r = column(&record.reference, i);
        overshoot.push(step_overshoot(&y, &r));
        peak.push(y.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        sq += y.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    let rmse = (sq / (n * nx) as f64).sqrt();

    // Inputs are matched to zones by index when the counts agree; otherwise
    // every input is split on the first zone's schedule.
    let control_overshoot = (0..nu)
        .map(|j| {
            let u = column(&record.u, j);
            let r = column(&record.reference, if nu == nx { j } else { 0 });
            control_overshoot(&u, &r)
        })
        .collect();

    let (iterations_total, iterations_max) = match &record.iterations {
        Some(it) => (Some(it.iter().sum()), it.iter().copied().max()),
        None => (None, None),
    };

    Ok(Metrics {
        controller: record.controller.clone(),
        overshoot,
        peak,
        control_overshoot,
        control_area: control_area(&record.u, record.ts, None),
        rmse,
        solve_time: record.solve_ms.iter().sum::<f64>() / 1000.0,
        iterations_total,
        iterations_max,
    })
}

/// `controller,metric,zone,value` rows; zone is empty for scalar metrics.
pub fn metrics_csv(all: &[&Metrics]) -> String {
    let mut s = String::from("controller,metric,zone,value\n");
    for m in all {
        let c = &m.controller;
        for (name, v) in [("overshoot_pct", &m.overshoot), ("peak_c", &m.peak), ("control_overshoot_pct", &m.control_overshoot)] {
            for (i, x) in v.iter().enumerate() {
                let _ = writeln!(s, "{c},{name},{},{x}", i + 1);
            }
        }
        let _ = writeln!(s, "{c},control_area,,{}", m.control_area);
        let _ = writeln!(s, "{c},rmse_c,,{}", m.rmse);
        let _ = writeln!(s, "{c},solve_time_s,,{}", m.solve_time);
        if let Some(t) = m.iterations_total {
            let _ = writeln!(s, "{c},iterations_total,,{t}");
        }
        if let Some(t) = m.iterations_max {
            let _ = writeln!(s, "{c},iterations_max,,{t}");
        }
    }
    s
}
