//! JSON building description.
//!
//! Zone ids are 1-based in the file. Airflows are given in kg/h and
//! converted to kg/s when the model is built. See `docs/file-formats.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    BuildingModel, Component, ComponentKind, ComponentWeights, InterfaceClosure, ZoneThermalParams,
    AIR_HEAT_CAPACITY, SECONDS_PER_HOUR,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneRecord {
    pub id: usize,
    pub air_mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_capacity: Option<f64>,
    pub r_walls_out: f64,
    pub r_walls_in: f64,
    pub r_outdoor: f64,
    pub r_indoor: f64,
    pub r_window: f64,
    pub m_outdoor_kg_h: f64,
    pub m_indoor_kg_h: f64,
    pub m_window_kg_h: f64,
    pub m_ac_kg_h: f64,
    pub initial_temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRecord {
    pub name: String,
    pub kind: ComponentKind,
    /// One zone id, or two for an indoor door.
    pub zones: Vec<usize>,
    /// Open door/window, or heater switched on.
    pub open: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingFile {
    #[serde(default = "default_heat_capacity")]
    pub heat_capacity: f64,
    pub zones: Vec<ZoneRecord>,
    pub adjacency: Vec<[usize; 2]>,
    #[serde(default)]
    pub interface_closure: InterfaceClosure,
    /// Initial interface temperature per adjacency pair, same order.
    pub interface_initial: Vec<f64>,
    pub components: Vec<ComponentRecord>,
}

fn default_heat_capacity() -> f64 {
    AIR_HEAT_CAPACITY
}

impl BuildingFile {
    pub fn from_model(model: &BuildingModel) -> Self {
        let heat_capacity = model.zones().first().map_or(AIR_HEAT_CAPACITY, |z| z.heat_capacity);
        let zones = model
            .zones()
            .iter()
            .zip(model.initial_temperatures())
            .map(|(z, &t0)| ZoneRecord {
                id: z.zone_id,
                air_mass: z.air_mass,
                heat_capacity: (z.heat_capacity != heat_capacity).then_some(z.heat_capacity),
                r_walls_out: z.r_walls_out,
                r_walls_in: z.r_walls_in,
                r_outdoor: z.r_outdoor,
                r_indoor: z.r_indoor,
                r_window: z.r_window,
                m_outdoor_kg_h: z.m_outdoor * SECONDS_PER_HOUR,
                m_indoor_kg_h: z.m_indoor * SECONDS_PER_HOUR,
                m_window_kg_h: z.m_window * SECONDS_PER_HOUR,
                m_ac_kg_h: z.m_ac * SECONDS_PER_HOUR,
                initial_temperature: t0,
            })
            .collect();
        let ids: Vec<usize> = model.zones().iter().map(|z| z.zone_id).collect();
        let adjacency = model.adjacency().iter().map(|&(a, b)| [ids[a], ids[b]]).collect();
        let components = model
            .components()
            .iter()
            .map(|c| {
                let mut zones = vec![ids[c.zone]];
                zones.extend(c.other.map(|o| ids[o]));
                ComponentRecord {
                    name: c.name.clone(),
                    kind: c.kind,
                    zones,
                    open: c.is_open(),
                }
            })
            .collect();
        BuildingFile {
            heat_capacity,
            zones,
            adjacency,
            interface_closure: model.closure(),
            interface_initial: model.interface_initial().to_vec(),
            components,
        }
    }

    pub fn into_model(self) -> Result<BuildingModel> {
        let index_of = |id: usize| -> Result<usize> {
            self.zones
                .iter()
                .position(|z| z.id == id)
                .ok_or_else(|| Error::ModelConfiguration(format!("unknown zone id {id}")))
        };
        let zones = self
            .zones
            .iter()
            .map(|z| ZoneThermalParams {
                zone_id: z.id,
                air_mass: z.air_mass,
                heat_capacity: z.heat_capacity.unwrap_or(self.heat_capacity),
                r_walls_out: z.r_walls_out,
                r_walls_in: z.r_walls_in,
                r_outdoor: z.r_outdoor,
                r_indoor: z.r_indoor,
                r_window: z.r_window,
                m_outdoor: z.m_outdoor_kg_h / SECONDS_PER_HOUR,
                m_indoor: z.m_indoor_kg_h / SECONDS_PER_HOUR,
                m_window: z.m_window_kg_h / SECONDS_PER_HOUR,
                m_ac: z.m_ac_kg_h / SECONDS_PER_HOUR,
            })
            .collect();
        let adjacency = self
            .adjacency
            .iter()
            .map(|&[a, b]| Ok((index_of(a)?, index_of(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let components = self
            .components
            .iter()
            .map(|c| {
                let (zone, other) = match (c.kind, c.zones.as_slice()) {
                    (ComponentKind::IndoorDoor, &[a, b]) => (index_of(a)?, Some(index_of(b)?)),
                    (ComponentKind::IndoorDoor, _) => {
                        return Err(Error::ModelConfiguration(format!("{}: indoor door needs two zones", c.name)))
                    }
                    (_, &[a]) => (index_of(a)?, None),
                    _ => return Err(Error::ModelConfiguration(format!("{}: expected one zone", c.name))),
                };
                let weights = match c.kind {
                    ComponentKind::Heater => ComponentWeights::heater(c.open),
                    _ => ComponentWeights::opening(c.open),
                };
                Ok(Component {
                    name: c.name.clone(),
                    kind: c.kind,
                    zone,
                    other,
                    weights,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let initial = self.zones.iter().map(|z| z.initial_temperature).collect();
        BuildingModel::new(
            zones,
            adjacency,
            components,
            self.interface_closure,
            self.interface_initial,
            initial,
        )
    }
}

/// Reads a building description.
pub fn load_building(path: impl AsRef<Path>) -> Result<BuildingModel> {
    let text = std::fs::read_to_string(path)?;
    let file: BuildingFile = serde_json::from_str(&text)?;
    file.into_model()
}

/// Writes a building description.
pub fn save_building(model: &BuildingModel, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&BuildingFile::from_model(model))?;
    std::fs::write(path, text)?;
    Ok(())
}
