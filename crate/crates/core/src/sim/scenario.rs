//! Reference schedules, outdoor temperature profiles and component events.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DAY: f64 = 86_400.0;
const HOUR: f64 = 3_600.0;

/// Period boundaries of the daily schedule, hours.
pub const PERIOD_BOUNDARIES: [f64; 6] = [0.0, 6.0, 12.0, 18.0, 21.0, 24.0];
pub const SETPOINT_RANGE: (f64, f64) = (5.0, 25.0);
pub const OUTDOOR_RANGE: (f64, f64) = (-6.0, 4.0);

/// Daily piecewise-constant setpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    /// Period starts and the final end, hours; first 0, last 24.
    pub boundaries: Vec<f64>,
    /// One row per period, one setpoint per zone, °C.
    pub setpoints: Vec<Vec<f64>>,
}

impl Schedule {
    /// Same level in every zone for each period.
    pub fn uniform(boundaries: &[f64], levels: &[f64], zones: usize) -> Self {
        Schedule {
            boundaries: boundaries.to_vec(),
            setpoints: levels.iter().map(|&l| vec![l; zones]).collect(),
        }
    }

    pub fn zones(&self) -> usize {
        self.setpoints.first().map_or(0, |r| r.len())
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.boundaries;
        if b.len() < 2 || b[0] != 0.0 || b[b.len() - 1] != 24.0 {
            return Err(Error::InvalidConfig("schedule boundaries must run from 0 to 24 h".into()));
        }
        if b.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("schedule boundaries must increase".into()));
        }
        if self.setpoints.len() != b.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} periods but {} setpoint rows",
                b.len() - 1,
                self.setpoints.len()
            )));
        }
        let n = self.zones();
        if n == 0 || self.setpoints.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig("every period needs one setpoint per zone".into()));
        }
        let (lo, hi) = SETPOINT_RANGE;
        if let Some(v) = self.setpoints.iter().flatten().find(|v| !(**v >= lo && **v <= hi)) {
            return Err(Error::InvalidConfig(format!("setpoint {v} outside [{lo}, {hi}] °C")));
        }
        Ok(())
    }

    /// Setpoints at time `t` seconds; repeats every day.
    pub fn at(&self, t: f64) -> &[f64] {
        let h = t.rem_euclid(DAY) / HOUR;
        let idx = self.boundaries[1..].iter().position(|&b| h < b).unwrap_or(self.setpoints.len() - 1);
        &self.setpoints[idx]
    }
}

/// Outdoor temperature T_o(t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Disturbance {
    Constant { value: f64 },
    /// `offset − amplitude·cos(2π(t − t_min)/period)`; coldest at `t_min`.
    Sinusoid { offset: f64, amplitude: f64, period: f64, t_min: f64 },
    /// `initial` until the first step, then each `(t, value)` in order.
    Steps { initial: f64, steps: Vec<(f64, f64)> },
}

impl Disturbance {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Disturbance::Constant { value } => *value,
            Disturbance::Sinusoid { offset, amplitude, period, t_min } => {
                offset - amplitude * (2.0 * PI * (t - t_min) / period).cos()
            }
            Disturbance::Steps { initial, steps } => {
                steps.iter().take_while(|(ts, _)| *ts <= t).last().map_or(*initial, |(_, v)| *v)
            }
        }
    }

    /// Interval guaranteed to contain every value.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Disturbance::Constant { value } => (*value, *value),
            Disturbance::Sinusoid { offset, amplitude, .. } => (offset - amplitude.abs(), offset + amplitude.abs()),
            Disturbance::Steps { initial, steps } => steps
                .iter()
                .fold((*initial, *initial), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v))),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Disturbance::Constant { value } => value.is_finite(),
            Disturbance::Sinusoid { offset, amplitude, period, t_min } => {
                offset.is_finite() && amplitude.is_finite() && period.is_finite() && *period > 0.0 && t_min.is_finite()
            }
            Disturbance::Steps { initial, steps } => {
                initial.is_finite()
                    && steps.iter().all(|(t, v)| t.is_finite() && v.is_finite())
                    && steps.windows(2).all(|w| w[1].0 >= w[0].0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad disturbance profile {self:?}")))
        }
    }
}

/// Door, window or heater switched at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentEvent {
    pub t: f64,
    pub component: String,
    pub open: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Seconds.
    pub duration: f64,
    /// Sampling period, s.
    pub ts: f64,
    /// Plant integration step, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Zone temperatures at t = 0; the model's defaults when absent.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    pub schedule: Schedule,
    pub disturbance: Disturbance,
    #[serde(default)]
    pub events: Vec<ComponentEvent>,
    #[serde(default)]
    pub seed: u64,
    /// Half-width of uniform per-sample noise on T_o, °C.
    #[serde(default)]
    pub noise: f64,
}

fn default_dt() -> f64 {
    0.1
}

impl Scenario {
    pub fn steps(&self) -> usize {
        (self.duration / self.ts).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ts.is_finite() && self.ts > 0.0) {
            return Err(Error::InvalidConfig(format!("sampling period must be > 0, got {}", self.ts)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.ts) {
            return Err(Error::InvalidConfig(format!("integration step {} not in (0, Ts]", self.dt)));
        }
        let sub = self.ts / self.dt;
        if (sub - sub.round()).abs() > 1e-9 {
            return Err(Error::InvalidConfig("Ts must be a whole number of integration steps".into()));
        }
        if !(self.duration.is_finite() && self.duration >= self.ts) {
            return Err(Error::InvalidConfig(format!("duration {} shorter than one sample", self.duration)));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidConfig("noise must be >= 0".into()));
        }
        self.schedule.validate()?;
        self.disturbance.validate()?;
        if let Some(x0) = &self.initial {
            if x0.len() != self.schedule.zones() || x0.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("initial temperatures must cover every zone".into()));
            }
        }
        Ok(())
    }

    /// Sampled reference r(0..count).
    pub fn reference(&self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|k| self.schedule.at(k as f64 * self.ts).to_vec()).collect()
    }

    /// Sampled outdoor temperature d(0..count), noise included.
    pub fn outdoor(&self, count: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|k| {
                let base = self.disturbance.at(k as f64 * self.ts);
                if self.noise > 0.0 {
                    base + rng.gen_range(-self.noise..=self.noise)
                } else {
                    base
                }
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let s: Scenario = serde_json::from_str(&text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Default daily setpoints: occupied 22 °C, vacant 16 °C, evening 20 °C.
pub const DAY_LEVELS: [f64; 5] = [22.0, 16.0, 16.0, 20.0, 22.0];

/// 24 h at 1 s sampling, six zones, outdoor temperature between −6 and 4 °C
/// (coldest at 04:00).
pub fn build_paper_scenario() -> Scenario {
    day_scenario_with(&DAY_LEVELS, 6)
}

pub fn day_scenario_with(levels: &[f64], zones: usize) -> Scenario {
    let (lo, hi) = OUTDOOR_RANGE;
    Scenario {
        name: "day-24h".into(),
        duration: DAY,
        ts: 1.0,
        dt: default_dt(),
        initial: None,
        schedule: Schedule::uniform(&PERIOD_BOUNDARIES, levels, zones),
        disturbance: Disturbance::Sinusoid {
            offset: 0.5 * (lo + hi),
            amplitude: 0.5 * (hi - lo),
            period: DAY,
            t_min: 4.0 * HOUR,
        },
        events: Vec::new(),
        seed: 0,
        noise: 0.0,
    }
}

/// Constant 20 °C setpoint with a 10 °C outdoor step at `t_step`.
pub fn outdoor_step_scenario(zones: usize, duration: f64, t_step: f64) -> Scenario {
    Scenario {
        name: "outdoor-step".into(),
        duration,
        ts: 1.0,
        dt: default_dt(),
        initial: Some(vec![20.0; zones]),
        schedule: Schedule::uniform(&[0.0, 24.0], &[20.0], zones),
        disturbance: Disturbance::Steps {
            initial: -6.0,
            steps: vec![(t_step, 4.0)],
        },
        events: Vec::new(),
        seed: 0,
        noise: 0.0,
    }
}

/// Default day with setpoints and outdoor phase drawn from `seed`.
pub fn random_scenario(seed: u64, zones: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = SETPOINT_RANGE;
    let mut s = build_paper_scenario();
    s.name = format!("random-{seed}");
    s.schedule.setpoints = (0..PERIOD_BOUNDARIES.len() - 1)
        .map(|_| (0..zones).map(|_| rng.gen_range(lo..=hi).round()).collect())
        .collect();
    if let Disturbance::Sinusoid { t_min, .. } = &mut s.disturbance {
        *t_min = rng.gen_range(0.0..DAY).round();
    }
    s.seed = seed;
    s
}
