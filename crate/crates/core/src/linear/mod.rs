//! Linear state-space models of the building and their block partition.

mod decompose;

pub use decompose::{decompose, Partition, SubsystemDecomposition, NEIGHBOR_THRESHOLD};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{set_block, Mat, Vector};
use crate::matrix_text::MatrixDoc;
use crate::plant::{BuildingModel, HeaterCommand, InterfaceClosure, PlantState};

/// `x⁺ = A x + B u + E d`, `y = C x`. `ts == 0` marks a continuous model.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel {
    pub a: Mat,
    pub b: Mat,
    pub e: Mat,
    pub c: Mat,
    pub ts: f64,
}

/// What the controller manipulates in each zone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputChannel {
    /// Heater supply temperature °C at the nominal heater flow.
    #[default]
    SupplyTemperature,
    /// Heat delivered to the zone air, W.
    HeatPower,
}

impl StateSpaceModel {
    pub fn new(a: Mat, b: Mat, e: Mat, c: Mat, ts: f64) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::Dimension("A must be square".into()));
        }
        if b.nrows() != n || e.nrows() != n || c.ncols() != n {
            return Err(Error::Dimension(format!(
                "A {n}x{n}, B {:?}, E {:?}, C {:?}",
                b.shape(),
                e.shape(),
                c.shape()
            )));
        }
        if !(ts.is_finite() && ts >= 0.0) {
            return Err(Error::InvalidParameter(format!("sampling period {ts}")));
        }
        Ok(StateSpaceModel { a, b, e, c, ts })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn q(&self) -> usize {
        self.e.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_discrete(&self) -> bool {
        self.ts > 0.0
    }

    /// One discrete step, or the state derivative for a continuous model.
    pub fn step(&self, x: &Vector, u: &Vector, d: &Vector) -> Vector {
        &self.a * x + &self.b * u + &self.e * d
    }

    pub fn output(&self, x: &Vector) -> Vector {
        &self.c * x
    }

    pub fn to_doc(&self) -> MatrixDoc {
        let mut doc = MatrixDoc::new();
        doc.push_matrix("A", &self.a);
        doc.push_matrix("B", &self.b);
        doc.push_matrix("E", &self.e);
        doc.push_matrix("C", &self.c);
        doc.push_scalar("ts", self.ts);
        doc
    }

    pub fn from_doc(doc: &MatrixDoc) -> Result<Self> {
        StateSpaceModel::new(
            doc.matrix("A")?.clone(),
            doc.matrix("B")?.clone(),
            doc.matrix("E")?.clone(),
            doc.matrix("C")?.clone(),
            doc.scalar("ts")?,
        )
    }
}

/// Continuous linear model of the building with one input per zone, the
/// outdoor temperature as the single disturbance and `C = I`.
///
/// With the mean interface closure and heater flow frozen at each zone's
/// `m_ac`, the zone heat balance is linear in (x, u, T_o), so the matrices
/// are read off by evaluating the plant on unit vectors.
pub fn linearize(model: &BuildingModel, channel: InputChannel) -> Result<StateSpaceModel> {
    if model.closure() != InterfaceClosure::Mean {
        return Err(Error::ModelConfiguration(
            "fixed interface temperatures make the model affine; use the mean closure".into(),
        ));
    }
    let n = model.zone_count();
    for z in model.zones() {
        if z.air_mass <= 0.0 {
            return Err(Error::InvalidParameter(format!("zone {}: air mass must be > 0", z.zone_id)));
        }
        if channel == InputChannel::SupplyTemperature && z.m_ac <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "zone {}: nominal heater flow must be > 0",
                z.zone_id
            )));
        }
    }
    let heater = match channel {
        InputChannel::SupplyTemperature => HeaterCommand::supply(model, &vec![0.0; n]),
        InputChannel::HeatPower => HeaterCommand::off(n),
    };
    let eval = |x: Vec<f64>, t_out: f64, u: &HeaterCommand| -> Result<Vector> {
        Ok(Vector::from_vec(model.plant_derivative(&PlantState::new(x, 0.0), t_out, u)?))
    };
    let mut a = Mat::zeros(n, n);
    for j in 0..n {
        let mut x = vec![0.0; n];
        x[j] = 1.0;
        a.set_column(j, &eval(x, 0.0, &heater)?);
    }
    let e = Mat::from_column_slice(n, 1, eval(vec![0.0; n], 1.0, &heater)?.as_slice());
    let mut b = Mat::zeros(n, n);
    for j in 0..n {
        match channel {
            InputChannel::SupplyTemperature => {
                let mut u = heater.clone();
                u.supply_temperature[j] = 1.0;
                b.set_column(j, &eval(vec![0.0; n], 0.0, &u)?);
            }
            InputChannel::HeatPower => {
                if model.heater_available(j) {
                    b[(j, j)] = 1.0 / model.zones()[j].capacitance();
                }
            }
        }
    }
    StateSpaceModel::new(a, b, e, Mat::identity(n, n), 0.0)
}

/// Zero-order-hold discretization of a continuous model.
pub fn discretize(ss: &StateSpaceModel, ts: f64) -> Result<StateSpaceModel> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(Error::InvalidParameter(format!("sampling period must be > 0, got {ts}")));
    }
    if ss.is_discrete() {
        return Err(Error::InvalidParameter("model is already discrete".into()));
    }
    let (n, m, q) = (ss.n(), ss.m(), ss.q());
    let mut aug = Mat::zeros(n + m + q, n + m + q);
    set_block(&mut aug, 0, 0, &ss.a);
    set_block(&mut aug, 0, n, &ss.b);
    set_block(&mut aug, 0, n + m, &ss.e);
    let phi = (aug * ts).exp();
    StateSpaceModel::new(
        phi.view((0, 0), (n, n)).into_owned(),
        phi.view((0, n), (n, m)).into_owned(),
        phi.view((0, n + m), (n, q)).into_owned(),
        ss.c.clone(),
        ts,
    )
}

/// Linearized and discretized building model.
pub fn building_model(model: &BuildingModel, channel: InputChannel, ts: f64) -> Result<StateSpaceModel> {
    discretize(&linearize(model, channel)?, ts)
}
