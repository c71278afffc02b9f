//! Nonlinear lumped-capacitance thermal model of a multi-zone building.
//!
//! Every zone is a single well-mixed air volume. Heat reaches it through
//! walls (always conducting), doors and windows (conducting when closed,
//! exchanging air when open) and a heater that blows air at a supply
//! temperature. Interior doors and walls connect a zone to the shared
//! interface temperature of each adjacent pair.
//!
//! Flow rates are stored in kg/s; building files use kg/h and are converted
//! on load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod file;

pub use file::{load_building, save_building, BuildingFile};

/// Seconds per hour, used to convert kg/h flows to kg/s.
pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Heat capacity of air, J/(kg·°C).
pub const AIR_HEAT_CAPACITY: f64 = 1005.4;

/// Heater airflow used by the default building when the supply temperature
/// is the control input, kg/h.
pub const DEFAULT_HEATER_FLOW_KG_H: f64 = 180_000.0;

/// Heat rate carried by an airflow `flow` between two regions.
///
/// Unit-agnostic: kg/h in gives J/h out, kg/s in gives W out.
pub fn convection_rate(flow: f64, heat_capacity: f64, t_adjacent: f64, t_room: f64) -> Result<f64> {
    if !(flow.is_finite() && heat_capacity.is_finite() && t_adjacent.is_finite() && t_room.is_finite()) {
        return Err(Error::InvalidParameter("non-finite convection input".into()));
    }
    if flow < 0.0 || heat_capacity <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "convection needs flow >= 0 and heat capacity > 0 (got {flow}, {heat_capacity})"
        )));
    }
    Ok(flow * heat_capacity * (t_adjacent - t_room))
}

/// Heat rate in W conducted through a resistance `r` in °C/W.
pub fn conduction_rate(r: f64, t_adjacent: f64, t_room: f64) -> Result<f64> {
    if !(r.is_finite() && t_adjacent.is_finite() && t_room.is_finite()) {
        return Err(Error::InvalidParameter("non-finite conduction input".into()));
    }
    if r <= 0.0 {
        return Err(Error::InvalidParameter(format!("thermal resistance must be > 0, got {r}")));
    }
    Ok((t_adjacent - t_room) / r)
}

/// Thermal parameters of one zone, SI units (flows in kg/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneThermalParams {
    pub zone_id: usize,
    /// kg
    pub air_mass: f64,
    /// J/(kg·°C)
    pub heat_capacity: f64,
    /// °C/W
    pub r_walls_out: f64,
    pub r_walls_in: f64,
    pub r_outdoor: f64,
    pub r_indoor: f64,
    pub r_window: f64,
    /// kg/s
    pub m_outdoor: f64,
    pub m_indoor: f64,
    pub m_window: f64,
    pub m_ac: f64,
}

impl ZoneThermalParams {
    /// Zone of the six-room reference building.
    pub fn reference(zone_id: usize) -> Self {
        ZoneThermalParams {
            zone_id,
            air_mass: 102.0425,
            heat_capacity: AIR_HEAT_CAPACITY,
            r_walls_out: 0.0000321,
            r_walls_in: 0.0000696,
            r_outdoor: 0.000208,
            r_indoor: 0.000208,
            r_window: 0.0000593542,
            m_outdoor: 35.0 / SECONDS_PER_HOUR,
            m_indoor: 20.0 / SECONDS_PER_HOUR,
            m_window: 35.0 / SECONDS_PER_HOUR,
            m_ac: DEFAULT_HEATER_FLOW_KG_H / SECONDS_PER_HOUR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let resistances = [
            ("r_walls_out", self.r_walls_out),
            ("r_walls_in", self.r_walls_in),
            ("r_outdoor", self.r_outdoor),
            ("r_indoor", self.r_indoor),
            ("r_window", self.r_window),
        ];
        for (name, r) in resistances {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "zone {}: {name} must be > 0, got {r}",
                    self.zone_id
                )));
            }
        }
        let non_negative = [
            ("air_mass", self.air_mass),
            ("m_outdoor", self.m_outdoor),
            ("m_indoor", self.m_indoor),
            ("m_window", self.m_window),
            ("m_ac", self.m_ac),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "zone {}: {name} must be >= 0, got {v}",
                    self.zone_id
                )));
            }
        }
        if !(self.heat_capacity.is_finite() && self.heat_capacity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "zone {}: heat capacity must be > 0",
                self.zone_id
            )));
        }
        Ok(())
    }

    /// Thermal capacitance m·C, J/°C.
    pub fn capacitance(&self) -> f64 {
        self.air_mass * self.heat_capacity
    }
}

/// Binary weights of one component: `wf` selects the airflow path, `wc` the
/// conduction path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentWeights {
    pub wf: bool,
    pub wc: bool,
}

impl ComponentWeights {
    /// Door or window: open exchanges air, closed conducts.
    pub fn opening(open: bool) -> Self {
        ComponentWeights { wf: open, wc: !open }
    }

    /// Heater: only the airflow weight is meaningful.
    pub fn heater(on: bool) -> Self {
        ComponentWeights { wf: on, wc: false }
    }

    pub fn wf(&self) -> f64 {
        if self.wf {
            1.0
        } else {
            0.0
        }
    }

    pub fn wc(&self) -> f64 {
        if self.wc {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Door between two adjacent zones.
    IndoorDoor,
    /// Exit door to the outside.
    OutdoorDoor,
    Window,
    Heater,
}

/// A switchable building component attached to one zone or one zone pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: String,
    pub kind: ComponentKind,
    /// Zero-based zone index.
    pub zone: usize,
    /// Second zone for indoor doors.
    pub other: Option<usize>,
    pub weights: ComponentWeights,
}

impl Component {
    pub fn is_open(&self) -> bool {
        self.weights.wf
    }
}

/// How the shared temperature between two adjacent zones is closed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceClosure {
    /// Arithmetic mean of the two zone temperatures.
    #[default]
    Mean,
    /// Held at the configured initial value.
    Fixed,
}

/// Heater settings for every zone.
#[derive(Clone, Debug, PartialEq)]
pub struct HeaterCommand {
    /// Supply air temperature, °C.
    pub supply_temperature: Vec<f64>,
    /// Heater airflow, kg/s.
    pub flow: Vec<f64>,
    pub enabled: Vec<bool>,
}

impl HeaterCommand {
    /// All heaters off.
    pub fn off(n: usize) -> Self {
        HeaterCommand {
            supply_temperature: vec![0.0; n],
            flow: vec![0.0; n],
            enabled: vec![false; n],
        }
    }

    /// Heaters on at the model's nominal flow with the given supply temperatures.
    pub fn supply(model: &BuildingModel, supply_temperature: &[f64]) -> Self {
        HeaterCommand {
            supply_temperature: supply_temperature.to_vec(),
            flow: model.zones().iter().map(|z| z.m_ac).collect(),
            enabled: vec![true; model.zone_count()],
        }
    }

    pub fn validate(&self, n: usize, bounds: Option<(f64, f64)>) -> Result<()> {
        if self.supply_temperature.len() != n || self.flow.len() != n || self.enabled.len() != n {
            return Err(Error::Dimension(format!("heater command must cover {n} zones")));
        }
        for (i, (&t, &m)) in self.supply_temperature.iter().zip(&self.flow).enumerate() {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidParameter(format!("zone {}: heater flow {m} < 0", i + 1)));
            }
            if !t.is_finite() {
                return Err(Error::InvalidParameter(format!("zone {}: non-finite supply temperature", i + 1)));
            }
            if let Some((lo, hi)) = bounds {
                if t < lo || t > hi {
                    return Err(Error::InvalidParameter(format!(
                        "zone {}: supply temperature {t} outside [{lo}, {hi}]",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Zone temperatures at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantState {
    /// °C per zone.
    pub x: Vec<f64>,
    /// Seconds.
    pub t: f64,
}

impl PlantState {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        PlantState { x, t }
    }
}

/// Zones, adjacency and switchable components of a building.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildingModel {
    zones: Vec<ZoneThermalParams>,
    /// Zero-based pairs with `a < b`.
    adjacency: Vec<(usize, usize)>,
    components: Vec<Component>,
    closure: InterfaceClosure,
    /// Interface temperature per adjacency pair; used by `InterfaceClosure::Fixed`.
    interface_initial: Vec<f64>,
    initial_temperatures: Vec<f64>,
}

impl BuildingModel {
    /// Builds and validates a model. Pairs are zero-based and normalized to `a < b`.
    pub fn new(
        zones: Vec<ZoneThermalParams>,
        adjacency: Vec<(usize, usize)>,
        components: Vec<Component>,
        closure: InterfaceClosure,
        interface_initial: Vec<f64>,
        initial_temperatures: Vec<f64>,
    ) -> Result<Self> {
        let n = zones.len();
        if n == 0 {
            return Err(Error::ModelConfiguration("building has no zones".into()));
        }
        for z in &zones {
            z.validate()?;
        }
        let mut pairs = Vec::with_capacity(adjacency.len());
        for (a, b) in adjacency {
            if a == b {
                return Err(Error::ModelConfiguration(format!("zone {} adjacent to itself", a + 1)));
            }
            if a >= n || b >= n {
                return Err(Error::ModelConfiguration(format!("adjacency ({}, {}) out of range", a + 1, b + 1)));
            }
            let p = (a.min(b), a.max(b));
            if pairs.contains(&p) {
                return Err(Error::ModelConfiguration(format!("duplicate adjacency ({}, {})", p.0 + 1, p.1 + 1)));
            }
            pairs.push(p);
        }
        if interface_initial.len() != pairs.len() {
            return Err(Error::ModelConfiguration(format!(
                "{} interface temperatures for {} adjacent pairs",
                interface_initial.len(),
                pairs.len()
            )));
        }
        if initial_temperatures.len() != n {
            return Err(Error::ModelConfiguration(format!(
                "{} initial temperatures for {n} zones",
                initial_temperatures.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &components {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::ModelConfiguration(format!("duplicate component {}", c.name)));
            }
            if c.zone >= n {
                return Err(Error::ModelConfiguration(format!("component {} refers to a missing zone", c.name)));
            }
            match c.kind {
                ComponentKind::IndoorDoor => {
                    let other = c.other.ok_or_else(|| {
                        Error::ModelConfiguration(format!("indoor door {} needs two zones", c.name))
                    })?;
                    let p = (c.zone.min(other), c.zone.max(other));
                    if !pairs.contains(&p) {
                        return Err(Error::ModelConfiguration(format!(
                            "door {} joins non-adjacent zones {} and {}",
                            c.name,
                            p.0 + 1,
                            p.1 + 1
                        )));
                    }
                }
                ComponentKind::OutdoorDoor | ComponentKind::Window => {
                    if c.weights.wf == c.weights.wc {
                        return Err(Error::ModelConfiguration(format!(
                            "{}: door/window weights must satisfy wf + wc = 1",
                            c.name
                        )));
                    }
                }
                ComponentKind::Heater => {}
            }
            if c.kind == ComponentKind::IndoorDoor && c.weights.wf == c.weights.wc {
                return Err(Error::ModelConfiguration(format!(
                    "{}: door/window weights must satisfy wf + wc = 1",
                    c.name
                )));
            }
        }
        Ok(BuildingModel {
            zones,
            adjacency: pairs,
            components,
            closure,
            interface_initial,
            initial_temperatures,
        })
    }

    /// The six-room reference building: zones 1..6, interior pairs
    /// (2,3), (1,5), (4,5), (4,6), exit doors on 1, 2, 5, 6 and windows on 3, 4, 6.
    /// Windows and exit doors start closed, interior doors open, heaters on.
    pub fn six_room() -> Self {
        let zones: Vec<_> = (1..=6).map(ZoneThermalParams::reference).collect();
        let adjacency = vec![(1, 2), (0, 4), (3, 4), (3, 5)];
        let mut components = Vec::new();
        for &(a, b) in &adjacency {
            components.push(Component {
                name: format!("door_{}_{}", a + 1, b + 1),
                kind: ComponentKind::IndoorDoor,
                zone: a,
                other: Some(b),
                weights: ComponentWeights::opening(true),
            });
        }
        for z in [1usize, 2, 5, 6] {
            components.push(Component {
                name: format!("outdoor_door_{z}"),
                kind: ComponentKind::OutdoorDoor,
                zone: z - 1,
                other: None,
                weights: ComponentWeights::opening(false),
            });
        }
        for z in [3usize, 4, 6] {
            components.push(Component {
                name: format!("window_{z}"),
                kind: ComponentKind::Window,
                zone: z - 1,
                other: None,
                weights: ComponentWeights::opening(false),
            });
        }
        for z in 1..=6usize {
            components.push(Component {
                name: format!("heater_{z}"),
                kind: ComponentKind::Heater,
                zone: z - 1,
                other: None,
                weights: ComponentWeights::heater(true),
            });
        }
        BuildingModel::new(
            zones,
            adjacency,
            components,
            InterfaceClosure::Mean,
            vec![10.0; 4],
            vec![10.0; 6],
        )
        .expect("reference building is valid")
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn zones(&self) -> &[ZoneThermalParams] {
        &self.zones
    }

    pub fn zones_mut(&mut self) -> &mut [ZoneThermalParams] {
        &mut self.zones
    }

    /// Zero-based adjacent pairs, each with `a < b`.
    pub fn adjacency(&self) -> &[(usize, usize)] {
        &self.adjacency
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn closure(&self) -> InterfaceClosure {
        self.closure
    }

    pub fn interface_initial(&self) -> &[f64] {
        &self.interface_initial
    }

    pub fn initial_temperatures(&self) -> &[f64] {
        &self.initial_temperatures
    }

    pub fn initial_state(&self) -> PlantState {
        PlantState::new(self.initial_temperatures.clone(), 0.0)
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Zones sharing a wall with `zone`, with the index of the adjacency pair.
    pub fn neighbors(&self, zone: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().filter_map(move |(p, &(a, b))| {
            if a == zone {
                Some((b, p))
            } else if b == zone {
                Some((a, p))
            } else {
                None
            }
        })
    }

    /// Opens or closes a door/window, or switches a heater on/off.
    pub fn set_component_status(&mut self, name: &str, open: bool) -> Result<()> {
        let c = self
            .components
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::ComponentNotFound(name.to_string()))?;
        c.weights = match c.kind {
            ComponentKind::Heater => ComponentWeights::heater(open),
            _ => ComponentWeights::opening(open),
        };
        Ok(())
    }

    /// Copy of the model with one component switched.
    pub fn with_component_status(&self, name: &str, open: bool) -> Result<Self> {
        let mut m = self.clone();
        m.set_component_status(name, open)?;
        Ok(m)
    }

    fn interface_temperature(&self, pair: usize, x: &[f64]) -> f64 {
        match self.closure {
            InterfaceClosure::Mean => {
                let (a, b) = self.adjacency[pair];
                0.5 * (x[a] + x[b])
            }
            InterfaceClosure::Fixed => self.interface_initial[pair],
        }
    }

    fn door_between(&self, a: usize, b: usize) -> Option<&Component> {
        self.components.iter().find(|c| {
            c.kind == ComponentKind::IndoorDoor
                && c.other.is_some_and(|o| (c.zone == a && o == b) || (c.zone == b && o == a))
        })
    }

    fn zone_components(&self, zone: usize, kind: ComponentKind) -> impl Iterator<Item = &Component> {
        self.components
            .iter()
            .filter(move |c| c.kind == kind && c.zone == zone)
    }

    /// Total heat rate into `zone`, W.
    pub fn zone_heat_rate(&self, zone: usize, x: &[f64], t_out: f64, u: &HeaterCommand) -> Result<f64> {
        let n = self.zone_count();
        if zone >= n {
            return Err(Error::ModelConfiguration(format!("zone index {zone} not in building")));
        }
        if x.len() != n {
            return Err(Error::Dimension(format!("state has {} entries, building has {n} zones", x.len())));
        }
        if u.supply_temperature.len() != n || u.flow.len() != n || u.enabled.len() != n {
            return Err(Error::Dimension(format!("heater command must cover {n} zones")));
        }
        let p = &self.zones[zone];
        let c = p.heat_capacity;
        let xi = x[zone];

        let mut q = conduction_rate(p.r_walls_out, t_out, xi)?;
        for (other, pair) in self.neighbors(zone) {
            let t_ij = self.interface_temperature(pair, x);
            q += conduction_rate(p.r_walls_in, t_ij, xi)?;
            let door = self.door_between(zone, other).ok_or_else(|| {
                Error::ModelConfiguration(format!("no door data for zones {} and {}", zone + 1, other + 1))
            })?;
            let w = door.weights;
            q += w.wc() * conduction_rate(p.r_indoor, t_ij, xi)?;
            q += w.wf() * convection_rate(p.m_indoor, c, t_ij, xi)?;
        }
        for d in self.zone_components(zone, ComponentKind::OutdoorDoor) {
            q += d.weights.wc() * conduction_rate(p.r_outdoor, t_out, xi)?;
            q += d.weights.wf() * convection_rate(p.m_outdoor, c, t_out, xi)?;
        }
        for wdw in self.zone_components(zone, ComponentKind::Window) {
            q += wdw.weights.wc() * conduction_rate(p.r_window, t_out, xi)?;
            q += wdw.weights.wf() * convection_rate(p.m_window, c, t_out, xi)?;
        }
        if self.heater_available(zone) && u.enabled[zone] {
            q += convection_rate(u.flow[zone], c, u.supply_temperature[zone], xi)?;
        }
        Ok(q)
    }

    /// Whether the heater hardware of `zone` is switched on. Zones without a
    /// heater component are treated as always available.
    pub fn heater_available(&self, zone: usize) -> bool {
        let mut heaters = self.zone_components(zone, ComponentKind::Heater).peekable();
        if heaters.peek().is_none() {
            return true;
        }
        heaters.any(|h| h.weights.wf)
    }

    /// Temperature rates, °C/s.
    pub fn plant_derivative(&self, state: &PlantState, t_out: f64, u: &HeaterCommand) -> Result<Vec<f64>> {
        (0..self.zone_count())
            .map(|i| Ok(self.zone_heat_rate(i, &state.x, t_out, u)? / self.zones[i].capacitance()))
            .collect()
    }

    /// One classical RK4 step of length `dt` with `t_out` and `u` held.
    pub fn step_plant(&self, state: &PlantState, t_out: f64, u: &HeaterCommand, dt: f64) -> Result<PlantState> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("integration step must be > 0, got {dt}")));
        }
        let f = |x: &[f64]| {
            if let Some(zone) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::IntegrationDivergence { zone: zone + 1, t: state.t + dt });
            }
            self.plant_derivative(&PlantState::new(x.to_vec(), state.t), t_out, u)
        };
        let next = rk4(&state.x, dt, f)?;
        if let Some(zone) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::IntegrationDivergence { zone: zone + 1, t: state.t + dt });
        }
        Ok(PlantState::new(next, state.t + dt))
    }
}

/// Classical fourth-order Runge-Kutta step for an autonomous field.
pub fn rk4<F>(x: &[f64], dt: f64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: &[f64], h: f64, k: &[f64]| a.iter().zip(k).map(|(a, k)| a + h * k).collect::<Vec<_>>();
    let k1 = f(x)?;
    let k2 = f(&axpy(x, 0.5 * dt, &k1))?;
    let k3 = f(&axpy(x, 0.5 * dt, &k2))?;
    let k4 = f(&axpy(x, dt, &k3))?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, xi)| xi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn isolated_zone() -> BuildingModel {
        BuildingModel::new(
            vec![ZoneThermalParams::reference(1)],
            vec![],
            vec![],
            InterfaceClosure::Mean,
            vec![],
            vec![10.0],
        )
        .unwrap()
    }

    #[test]
    fn convection_examples() {
        assert_relative_eq!(convection_rate(20.0, 1005.4, 20.0, 10.0).unwrap(), 201_080.0, epsilon = 1e-6);
        assert_eq!(convection_rate(20.0, 1005.4, 17.5, 17.5).unwrap(), 0.0);
        assert_eq!(convection_rate(0.0, 1005.4, 30.0, 10.0).unwrap(), 0.0);
        assert!(matches!(
            convection_rate(f64::NAN, 1005.4, 1.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn conduction_examples() {
        assert_relative_eq!(conduction_rate(0.000208, 20.0, 10.0).unwrap(), 48_076.92, epsilon = 0.01);
        assert_eq!(conduction_rate(0.000208, 3.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(conduction_rate(0.0000321, 11.0, 10.0).unwrap(), 31_152.65, epsilon = 0.01);
        assert!(matches!(conduction_rate(0.0, 1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(conduction_rate(-1e-3, 1.0, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn single_outdoor_wall_heat_rate() {
        let m = isolated_zone();
        let q = m.zone_heat_rate(0, &[10.0], 0.0, &HeaterCommand::off(1)).unwrap();
        assert_relative_eq!(q, -311_526.5, epsilon = 0.05);
    }

    #[test]
    fn isolated_zone_with_heater() {
        let m = isolated_zone();
        let u = HeaterCommand::supply(&m, &[40.0]);
        let p = &m.zones()[0];
        let q = m.zone_heat_rate(0, &[10.0], 0.0, &u).unwrap();
        let expected = (0.0 - 10.0) / p.r_walls_out + p.m_ac * p.heat_capacity * (40.0 - 10.0);
        assert_relative_eq!(q, expected, max_relative = 1e-12);
    }

    #[test]
    fn derivative_scales_with_capacitance() {
        let m = isolated_zone();
        let p = &m.zones()[0];
        // heat rate 102548 W through the heater alone
        let flow = 102_548.0 / (p.heat_capacity * 10.0);
        let u = HeaterCommand {
            supply_temperature: vec![10.0 + 10.0],
            flow: vec![flow],
            enabled: vec![true],
        };
        let q =convection_rate(flow, p.heat_capacity, 20.0, 10.0).unwrap();
        assert_relative_eq!(q / p.capacitance(), 0.9995, epsilon = 1e-4);

        let d1 = m.plant_derivative(&PlantState::new(vec![0.0], 0.0), 0.0, &u).unwrap()[0];
        let mut heavy = m.clone();
        heavy.zones_mut()[0].air_mass *= 2.0;
        let d2 = heavy.plant_derivative(&PlantState::new(vec![0.0], 0.0), 0.0, &u).unwrap()[0];
        assert_relative_eq!(d2, 0.5 * d1, max_relative = 1e-12);
    }

    #[test]
    fn isothermal_fixed_point_is_exact() {
        let m = BuildingModel::six_room();
        let u = HeaterCommand::supply(&m, &[13.25; 6]);
        let d = m
            .plant_derivative(&PlantState::new(vec![13.25; 6], 0.0), 13.25, &u)
            .unwrap();
        assert!(d.iter().all(|&v| v == 0.0), "{d:?}");
    }

    #[test]
    fn all_weights_off_leaves_wall_terms() {
        let mut m = BuildingModel::six_room();
        // wf = wc = 0 is unreachable through the public API
        for c in &mut m.components {
            c.weights = ComponentWeights { wf: false, wc: false };
        }
        let x = [12.0, 14.0, 16.0, 18.0, 20.0, 22.0];
        let t_out = 3.0;
        let d = m
            .plant_derivative(&PlantState::new(x.to_vec(), 0.0), t_out, &HeaterCommand::off(6))
            .unwrap();
        for i in 0..6 {
            let p = &m.zones()[i];
            let mut q = (t_out - x[i]) / p.r_walls_out;
            for (j, _) in m.neighbors(i) {
                q += (0.5 * (x[i] + x[j]) - x[i]) / p.r_walls_in;
            }
            assert_relative_eq!(d[i], q / p.capacitance(), max_relative = 1e-12);
        }
    }

    #[test]
    fn component_toggles() {
        let m = BuildingModel::six_room();
        let opened = m.with_component_status("door_1_5", false).unwrap();
        let restored = opened.with_component_status("door_1_5", true).unwrap();
        assert_eq!(restored, m);

        let closed = m.with_component_status("window_3", false).unwrap();
        let w = closed.component("window_3").unwrap().weights;
        assert!(w.wc && !w.wf);

        let again = m.with_component_status("door_2_3", true).unwrap();
        assert_eq!(again, m);

        assert!(matches!(
            m.with_component_status("skylight_9", true),
            Err(Error::ComponentNotFound(_))
        ));
    }

    #[test]
    fn energy_flow_antisymmetry_for_isolated_pair() {
        let mut zones = vec![ZoneThermalParams::reference(1), ZoneThermalParams::reference(2)];
        for z in &mut zones {
            // outdoor wall nearly adiabatic so only the pair exchange is left
            z.r_walls_out = 1e30;
        }
        let comps = vec![Component {
            name: "door_1_2".into(),
            kind: ComponentKind::IndoorDoor,
            zone: 0,
            other: Some(1),
            weights: ComponentWeights::opening(true),
        }];
        let m = BuildingModel::new(zones, vec![(0, 1)], comps, InterfaceClosure::Mean, vec![10.0], vec![10.0; 2])
            .unwrap();
        let x = [14.0, 19.0];
        let u = HeaterCommand::off(2);
        let q0 = m.zone_heat_rate(0, &x, 0.0, &u).unwrap();
        let q1 = m.zone_heat_rate(1, &x, 0.0, &u).unwrap();
        let wall0 = (0.0 - x[0]) / 1e30;
        let wall1 = (0.0 - x[1]) / 1e30;
        assert_relative_eq!(q0 - wall0, -(q1 - wall1), max_relative = 1e-12);
    }

    #[test]
    fn rk4_scalar_decay() {
        let x = rk4(&[1.0], 0.1, |x| Ok(vec![-x[0]])).unwrap();
        assert!((x[0] - (-0.1f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn zero_field_only_advances_time() {
        let m = BuildingModel::six_room();
        let s = PlantState::new(vec![7.5; 6], 42.0);
        let u = HeaterCommand::supply(&m, &[7.5; 6]);
        let next = m.step_plant(&s, 7.5, &u, 0.1).unwrap();
        assert_eq!(next.x, s.x);
        assert_relative_eq!(next.t, 42.1);
    }

    #[test]
    fn divergence_reports_zone() {
        let m = BuildingModel::six_room();
        let s = PlantState::new(vec![10.0; 6], 0.0);
        let u = HeaterCommand::supply(&m, &[10.0; 6]);
        let mut hot = u.clone();
        hot.supply_temperature[3] = 1e308;
        match m.step_plant(&s, 0.0, &hot, 1.0) {
            Err(Error::IntegrationDivergence { zone, .. }) => assert!(zone >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
        assert!(m.step_plant(&s, 0.0, &u, 0.0).is_err());
    }

    #[test]
    fn door_between_non_adjacent_zones_rejected() {
        let zones = vec![ZoneThermalParams::reference(1), ZoneThermalParams::reference(2)];
        let comps = vec![Component {
            name: "door".into(),
            kind: ComponentKind::IndoorDoor,
            zone: 0,
            other: Some(1),
            weights: ComponentWeights::opening(true),
        }];
        let err = BuildingModel::new(zones, vec![], comps, InterfaceClosure::Mean, vec![], vec![0.0; 2]);
        assert!(matches!(err, Err(Error::ModelConfiguration(_))));
    }

    #[test]
    fn missing_door_data_is_configuration_error() {
        let zones = vec![ZoneThermalParams::reference(1), ZoneThermalParams::reference(2)];
        let m = BuildingModel::new(zones, vec![(0, 1)], vec![], InterfaceClosure::Mean, vec![10.0], vec![0.0; 2])
            .unwrap();
        let err = m.zone_heat_rate(0, &[0.0, 1.0], 0.0, &HeaterCommand::off(2));
        assert!(matches!(err, Err(Error::ModelConfiguration(_))));
    }
}
