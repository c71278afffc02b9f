//! Closed-loop runs of the controllers against the building plant.

pub mod metrics;
pub mod scenario;

use std::fmt::Write as _;
use std::path::Path;

use crate::cmpc::{CentralizedController, MpcConfig, Observer};
use crate::control::{Controller, StepContext};
use crate::dmpc::{DistributedController, DmpcConfig};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::linear::{building_model, decompose, InputChannel, Partition, StateSpaceModel};
use crate::plant::{rk4, BuildingModel, HeaterCommand, PlantState};

pub use metrics::{compute_metrics, control_area, control_overshoot, metrics_csv, step_overshoot, Metrics};
pub use scenario::{build_paper_scenario, outdoor_step_scenario, random_scenario, Disturbance, Scenario, Schedule};

/// How the plant input is interpreted and what the controller knows about T_o.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub channel: InputChannel,
    /// Exact outdoor forecast over the horizon; otherwise the last value the
    /// plant has been exposed to, d(k−1), is held.
    pub preview: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            channel: InputChannel::SupplyTemperature,
            preview: true,
        }
    }
}

/// One row per sample `k = 0..N−1`: state and reference at `t_k`, input and
/// outdoor temperature held over `[t_k, t_k + Ts)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRecord {
    pub controller: String,
    pub ts: f64,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    pub reference: Vec<Vec<f64>>,
    pub solve_ms: Vec<f64>,
    /// Coordination rounds per sample; absent when read back from a trace.
    pub iterations: Option<Vec<usize>>,
    pub preview: bool,
}

impl SimulationRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let nx = self.x.first().map_or(0, |r| r.len());
        let nu = self.u.first().map_or(0, |r| r.len());
        let mut s = String::from("k,t");
        for i in 1..=nx {
            let _ = write!(s, ",x{i}");
        }
        for i in 1..=nu {
            let _ = write!(s, ",u{i}");
        }
        s.push_str(",d");
        for i in 1..=nx {
            let _ = write!(s, ",ref{i}");
        }
        s.push_str(",solve_ms\n");
        for k in 0..self.len() {
            let _ = write!(s, "{k},{}", self.t[k]);
            for v in self.x[k].iter().chain(&self.u[k]) {
                let _ = write!(s, ",{v}");
            }
            let _ = write!(s, ",{}", self.d[k]);
            for v in &self.reference[k] {
                let _ = write!(s, ",{v}");
            }
            let _ = writeln!(s, ",{}", self.solve_ms[k]);
        }
        s
    }

    /// Parses a trace written by [`SimulationRecord::to_csv`].
    pub fn from_csv(text: &str, controller: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        let count = |prefix: &str| {
            headers
                .iter()
                .filter(|h| h.strip_prefix(prefix).is_some_and(|r| r.parse::<usize>().is_ok()))
                .count()
        };
        let (nx, nu) = (count("x"), count("u"));
        let width = 2 + nx + nu + 1 + nx + 1;
        if nx == 0 || nu == 0 || headers.len() != width || &headers[0] != "k" || &headers[width - 1] != "solve_ms" {
            return Err(Error::Parse { line: 1, msg: "header does not match the trace schema".into() });
        }
        let mut rec = SimulationRecord {
            controller: controller.to_string(),
            ts: 0.0,
            t: Vec::new(),
            x: Vec::new(),
            u: Vec::new(),
            d: Vec::new(),
            reference: Vec::new(),
            solve_ms: Vec::new(),
            iterations: None,
            preview: true,
        };
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            if row.len() != width {
                return Err(Error::Parse { line, msg: format!("expected {width} fields, got {}", row.len()) });
            }
            let vals = row
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            rec.t.push(vals[1]);
            rec.x.push(vals[2..2 + nx].to_vec());
            rec.u.push(vals[2 + nx..2 + nx + nu].to_vec());
            rec.d.push(vals[2 + nx + nu]);
            rec.reference.push(vals[3 + nx + nu..3 + 2 * nx + nu].to_vec());
            rec.solve_ms.push(vals[width - 1]);
        }
        if rec.t.len() >= 2 {
            rec.ts = rec.t[1] - rec.t[0];
        }
        Ok(rec)
    }
}

/// Integrates the plant over one sample with `u` and `t_out` held.
fn advance(
    model: &BuildingModel,
    state: PlantState,
    u: &[f64],
    t_out: f64,
    channel: InputChannel,
    ts: f64,
    dt: f64,
) -> Result<PlantState> {
    let sub = (ts / dt).round() as usize;
    let mut state = state;
    match channel {
        InputChannel::SupplyTemperature => {
            let cmd = HeaterCommand::supply(model, u);
            for _ in 0..sub {
                state = model.step_plant(&state, t_out, &cmd, dt)?;
            }
        }
        InputChannel::HeatPower => {
            let off = HeaterCommand::off(model.zone_count());
            let gain: Vec<f64> = (0..model.zone_count())
                .map(|i| {
                    if model.heater_available(i) {
                        1.0 / model.zones()[i].capacitance()
                    } else {
                        0.0
                    }
                })
                .collect();
            for _ in 0..sub {
                let t = state.t;
                let next = rk4(&state.x, dt, |x| {
                    let mut f = model.plant_derivative(&PlantState::new(x.to_vec(), t), t_out, &off)?;
                    for (i, fi) in f.iter_mut().enumerate() {
                        *fi += gain[i] * u[i];
                    }
                    Ok(f)
                })?;
                if let Some(zone) = next.iter().position(|v| !v.is_finite()) {
                    return Err(Error::IntegrationDivergence { zone: zone + 1, t: t + dt });
                }
                state = PlantState::new(next, t + dt);
            }
        }
    }
    Ok(state)
}

/// Runs `controller` on `scenario` against the plant `model`.
pub fn simulate(
    model: &BuildingModel,
    controller: &mut dyn Controller,
    scenario: &Scenario,
    opts: &SimOptions,
) -> Result<SimulationRecord> {
    scenario.validate()?;
    let n = model.zone_count();
    if scenario.schedule.zones() != n {
        return Err(Error::InvalidConfig(format!(
            "scenario has {} zones, model {n}",
            scenario.schedule.zones()
        )));
    }
    let steps = scenario.steps();
    let p = controller.horizon();
    if steps < p {
        return Err(Error::InvalidConfig(format!("scenario has {steps} samples, horizon needs {p}")));
    }
    let ts = scenario.ts;
    let refs: Vec<Vector> = scenario
        .reference(steps + p + 1)
        .into_iter()
        .map(Vector::from_vec)
        .collect();
    let outdoor = scenario.outdoor(steps + p);

    let mut plant = model.clone();
    let mut events: Vec<_> = scenario.events.iter().collect();
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut next_event = 0;

    let x0 = scenario.initial.clone().unwrap_or_else(|| model.initial_temperatures().to_vec());
    let u0 = match opts.channel {
        InputChannel::SupplyTemperature => Vector::from_vec(x0.clone()),
        InputChannel::HeatPower => Vector::zeros(n),
    };
    controller.reset(&u0);
    let mut state = PlantState::new(x0, 0.0);

    let mut rec = SimulationRecord {
        controller: controller.name().to_string(),
        ts,
        t: Vec::with_capacity(steps),
        x: Vec::with_capacity(steps),
        u: Vec::with_capacity(steps),
        d: Vec::with_capacity(steps),
        reference: Vec::with_capacity(steps),
        solve_ms: Vec::with_capacity(steps),
        iterations: Some(Vec::with_capacity(steps)),
        preview: opts.preview,
    };
    let mut d_prev = Vector::from_element(1, outdoor[0]);
    for k in 0..steps {
        let t = k as f64 * ts;
        while next_event < events.len() && events[next_event].t <= t {
            let e = events[next_event];
            plant.set_component_status(&e.component, e.open)?;
            next_event += 1;
        }
        let y = Vector::from_row_slice(&state.x);
        let forecast: Vec<Vector> = if opts.preview {
            outdoor[k..k + p].iter().map(|&v| Vector::from_element(1, v)).collect()
        } else {
            vec![d_prev.clone(); p]
        };
        let ctx = StepContext {
            k,
            y: &y,
            reference: &refs[k..=k + p],
            forecast: &forecast,
            d_prev: &d_prev,
        };
        let out = controller.step(&ctx)?;
        if out.u.len() != n || out.u.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure { step: k, reason: "controller returned an invalid input".into() });
        }
        let u: Vec<f64> = out.u.iter().copied().collect();
        rec.t.push(t);
        rec.x.push(state.x.clone());
        rec.u.push(u.clone());
        rec.d.push(outdoor[k]);
        rec.reference.push(refs[k].iter().copied().collect());
        rec.solve_ms.push(out.solve_time.as_secs_f64() * 1000.0);
        if let Some(it) = rec.iterations.as_mut() {
            it.push(out.iterations);
        }
        state = advance(&plant, state, &u, outdoor[k], opts.channel, ts, scenario.dt)?;
        state.t = (k + 1) as f64 * ts;
        d_prev = Vector::from_element(1, outdoor[k]);
    }
    Ok(rec)
}

/// Centralized MPC on the building's linear model.
pub fn run_centralized(
    plant: &BuildingModel,
    ss: &StateSpaceModel,
    cfg: &MpcConfig,
    scenario: &Scenario,
    opts: &SimOptions,
) -> Result<SimulationRecord> {
    let mut c = CentralizedController::new(ss.clone(), cfg.clone(), Observer::Measured)?;
    simulate(plant, &mut c, scenario, opts)
}

/// Distributed MPC with one subsystem per zone.
pub fn run_distributed(
    plant: &BuildingModel,
    ss: &StateSpaceModel,
    cfg: &DmpcConfig,
    scenario: &Scenario,
    opts: &SimOptions,
) -> Result<SimulationRecord> {
    let dec = decompose(ss, &Partition::singletons(ss.n()))?;
    let mut c = DistributedController::new(dec, cfg.clone())?;
    simulate(plant, &mut c, scenario, opts)
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub scenario: String,
    pub preview: bool,
    pub cmpc: SimulationRecord,
    pub dmpc: SimulationRecord,
    pub cmpc_metrics: Metrics,
    pub dmpc_metrics: Metrics,
}

impl Comparison {
    /// `100·(A_cmpc − A_dmpc)/A_cmpc`; positive when DMPC uses less.
    pub fn energy_saving(&self) -> f64 {
        energy_saving(&self.cmpc_metrics, &self.dmpc_metrics)
    }

    pub fn report(&self) -> String {
        report(&self.scenario, self.preview, &[&self.cmpc_metrics, &self.dmpc_metrics])
    }

    /// Writes `trace_<name>.csv` per controller, `metrics.csv` and `report.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for r in [&self.cmpc, &self.dmpc] {
            std::fs::write(dir.join(format!("trace_{}.csv", r.controller)), r.to_csv())?;
        }
        std::fs::write(dir.join("metrics.csv"), metrics_csv(&[&self.cmpc_metrics, &self.dmpc_metrics]))?;
        std::fs::write(dir.join("report.txt"), self.report())?;
        Ok(())
    }
}

pub fn energy_saving(base: &Metrics, other: &Metrics) -> f64 {
    100.0 * (base.control_area - other.control_area) / base.control_area
}

/// Plain-text table of one or more runs; with two runs the control-area
/// change of the second relative to the first is appended.
pub fn report(scenario: &str, preview: bool, runs: &[&Metrics]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {scenario}");
    let _ = writeln!(s, "forecast: {}", if preview { "preview" } else { "persistence" });
    let _ = writeln!(s);
    let row = |s: &mut String, label: &str, cells: Vec<String>| {
        let _ = write!(s, "{label:<26}");
        for c in cells {
            let _ = write!(s, "{c:>16}");
        }
        s.push('\n');
    };
    row(&mut s, "metric", runs.iter().map(|m| m.controller.clone()).collect());
    let zones = runs.iter().map(|m| m.overshoot.len()).min().unwrap_or(0);
    for i in 0..zones {
        row(&mut s, &format!("overshoot zone {} (%)", i + 1), runs.iter().map(|m| format!("{:.4}", m.overshoot[i])).collect());
    }
    for i in 0..zones {
        row(&mut s, &format!("peak zone {} (C)", i + 1), runs.iter().map(|m| format!("{:.4}", m.peak[i])).collect());
    }
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    row(&mut s, "control overshoot (%)", runs.iter().map(|m| format!("{:.4}", max(&m.control_overshoot))).collect());
    row(&mut s, "control area", runs.iter().map(|m| format!("{:.6e}", m.control_area)).collect());
    row(&mut s, "tracking rmse (C)", runs.iter().map(|m| format!("{:.6}", m.rmse)).collect());
    row(&mut s, "solve time (s)", runs.iter().map(|m| format!("{:.6}", m.solve_time)).collect());
    row(
        &mut s,
        "iterations",
        runs.iter().map(|m| m.iterations_total.map_or("-".to_string(), |v| v.to_string())).collect(),
    );
    if let [a, b] = runs {
        let _ = writeln!(s);
        let _ = writeln!(s, "control area change: {:+.2}%", -energy_saving(a, b));
    }
    s
}

/// Runs both controllers on the same plant and scenario. Errors carry the
/// controller's name.
pub fn run_comparison(
    model: &BuildingModel,
    scenario: &Scenario,
    cmpc_cfg: &MpcConfig,
    dmpc_cfg: &DmpcConfig,
    opts: &SimOptions,
) -> Result<Comparison> {
    let ss = building_model(model, opts.channel, scenario.ts)?;
    let cmpc = run_centralized(model, &ss, cmpc_cfg, scenario, opts).map_err(|e| e.with_controller("centralized"))?;
    let dmpc = run_distributed(model, &ss, dmpc_cfg, scenario, opts).map_err(|e| e.with_controller("distributed"))?;
    let cmpc_metrics = compute_metrics(&cmpc)?;
    let dmpc_metrics = compute_metrics(&dmpc)?;
    Ok(Comparison {
        scenario: scenario.name.clone(),
        preview: opts.preview,
        cmpc,
        dmpc,
        cmpc_metrics,
        dmpc_metrics,
    })
}
