use serde::{Deserialize, Serialize};

use super::StateSpaceModel;
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

/// Coupling blocks with every entry at or below this are ignored.
pub const NEIGHBOR_THRESHOLD: f64 = 1e-12;

/// Index sets of states, inputs and outputs owned by each subsystem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub states: Vec<Vec<usize>>,
    pub inputs: Vec<Vec<usize>>,
    pub outputs: Vec<Vec<usize>>,
}

impl Partition {
    /// Same index sets for states, inputs and outputs.
    pub fn uniform(sets: Vec<Vec<usize>>) -> Self {
        Partition {
            states: sets.clone(),
            inputs: sets.clone(),
            outputs: sets,
        }
    }

    /// One subsystem per index.
    pub fn singletons(n: usize) -> Self {
        Self::uniform((0..n).map(|i| vec![i]).collect())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn validate(&self, n: usize, m: usize, p: usize) -> Result<()> {
        let k = self.states.len();
        if self.inputs.len() != k || self.outputs.len() != k {
            return Err(Error::InvalidPartition("state, input and output partitions differ in size".into()));
        }
        check_cover(&self.states, n, "state")?;
        check_cover(&self.inputs, m, "input")?;
        check_cover(&self.outputs, p, "output")
    }
}

fn check_cover(sets: &[Vec<usize>], n: usize, what: &str) -> Result<()> {
    let mut owner = vec![None; n];
    for (s, set) in sets.iter().enumerate() {
        for &i in set {
            if i >= n {
                return Err(Error::InvalidPartition(format!("{what} index {i} out of range 0..{n}")));
            }
            if let Some(o) = owner[i] {
                return Err(Error::InvalidPartition(format!(
                    "{what} index {i} in subsystems {o} and {s}"
                )));
            }
            owner[i] = Some(s);
        }
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(Error::InvalidPartition(format!("{what} index {i} not covered")));
    }
    Ok(())
}

/// Block view of a state-space model: `a[i][j]`, `b[i][j]`, `c[i][j]`
/// couple subsystem `j` into subsystem `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsystemDecomposition {
    pub partition: Partition,
    pub a: Vec<Vec<Mat>>,
    pub b: Vec<Vec<Mat>>,
    pub c: Vec<Vec<Mat>>,
    pub e: Vec<Mat>,
    /// Sorted neighbours of each subsystem.
    pub neighbors: Vec<Vec<usize>>,
    pub ts: f64,
    dims: (usize, usize, usize),
}

fn extract(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

fn significant(m: &Mat) -> bool {
    m.iter().any(|v| v.abs() > NEIGHBOR_THRESHOLD)
}

/// Splits `ss` into subsystem blocks.
pub fn decompose(ss: &StateSpaceModel, partition: &Partition) -> Result<SubsystemDecomposition> {
    partition.validate(ss.n(), ss.m(), ss.p())?;
    let k = partition.len();
    let (xs, us, ys) = (&partition.states, &partition.inputs, &partition.outputs);
    let a: Vec<Vec<Mat>> = (0..k).map(|i| (0..k).map(|j| extract(&ss.a, &xs[i], &xs[j])).collect()).collect();
    let b: Vec<Vec<Mat>> = (0..k).map(|i| (0..k).map(|j| extract(&ss.b, &xs[i], &us[j])).collect()).collect();
    let c: Vec<Vec<Mat>> = (0..k).map(|i| (0..k).map(|j| extract(&ss.c, &ys[i], &xs[j])).collect()).collect();
    let all_d: Vec<usize> = (0..ss.q()).collect();
    let e = (0..k).map(|i| extract(&ss.e, &xs[i], &all_d)).collect();
    let mut neighbors = vec![Vec::new(); k];
    for i in 0..k {
        for j in 0..k {
            if i != j && (significant(&a[i][j]) || significant(&b[i][j]) || significant(&c[i][j])) {
                neighbors[i].push(j);
            }
        }
    }
    Ok(SubsystemDecomposition {
        partition: partition.clone(),
        a,
        b,
        c,
        e,
        neighbors,
        ts: ss.ts,
        dims: (ss.n(), ss.m(), ss.p()),
    })
}

impl SubsystemDecomposition {
    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partition.is_empty()
    }

    /// Total (states, inputs, outputs).
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn nx(&self, i: usize) -> usize {
        self.partition.states[i].len()
    }

    pub fn nu(&self, i: usize) -> usize {
        self.partition.inputs[i].len()
    }

    pub fn ny(&self, i: usize) -> usize {
        self.partition.outputs[i].len()
    }

    pub fn nd(&self) -> usize {
        self.e.first().map_or(0, |e| e.ncols())
    }

    /// Rebuilds the full model from the blocks.
    pub fn reassemble(&self) -> StateSpaceModel {
        let (n, m, p) = self.dims;
        let k = self.len();
        let (xs, us, ys) = (&self.partition.states, &self.partition.inputs, &self.partition.outputs);
        let mut a = Mat::zeros(n, n);
        let mut b = Mat::zeros(n, m);
        let mut c = Mat::zeros(p, n);
        let mut e = Mat::zeros(n, self.nd());
        for i in 0..k {
            for j in 0..k {
                scatter(&mut a, &xs[i], &xs[j], &self.a[i][j]);
                scatter(&mut b, &xs[i], &us[j], &self.b[i][j]);
                scatter(&mut c, &ys[i], &xs[j], &self.c[i][j]);
            }
            let all: Vec<usize> = (0..self.nd()).collect();
            scatter(&mut e, &xs[i], &all, &self.e[i]);
        }
        StateSpaceModel { a, b, e, c, ts: self.ts }
    }

    /// Same partition with every coupling block set to zero.
    pub fn decoupled(&self) -> Self {
        let mut out = self.clone();
        let k = self.len();
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    out.a[i][j].fill(0.0);
                    out.b[i][j].fill(0.0);
                    out.c[i][j].fill(0.0);
                }
            }
            out.neighbors[i].clear();
        }
        out
    }

    /// Local part of a full state vector.
    pub fn local_state(&self, i: usize, x: &Vector) -> Vector {
        gather(x, &self.partition.states[i])
    }

    pub fn local_input(&self, i: usize, u: &Vector) -> Vector {
        gather(u, &self.partition.inputs[i])
    }

    pub fn local_output(&self, i: usize, y: &Vector) -> Vector {
        gather(y, &self.partition.outputs[i])
    }

    /// Writes subsystem `i`'s inputs into a full input vector.
    pub fn scatter_input(&self, i: usize, local: &Vector, u: &mut Vector) {
        for (r, &idx) in self.partition.inputs[i].iter().enumerate() {
            u[idx] = local[r];
        }
    }

    pub fn scatter_state(&self, i: usize, local: &Vector, x: &mut Vector) {
        for (r, &idx) in self.partition.states[i].iter().enumerate() {
            x[idx] = local[r];
        }
    }

    /// State interaction `w_i = Σ_{j≠i} A_ij x_j + B_ij u_j`.
    pub fn state_interaction(&self, i: usize, x: &Vector, u: &Vector) -> Vector {
        let mut w = Vector::zeros(self.nx(i));
        for &j in &self.neighbors[i] {
            w += &self.a[i][j] * self.local_state(j, x) + &self.b[i][j] * self.local_input(j, u);
        }
        w
    }

    /// Output interaction `v_i = Σ_{j≠i} C_ij x_j`.
    pub fn output_interaction(&self, i: usize, x: &Vector) -> Vector {
        let mut v = Vector::zeros(self.ny(i));
        for &j in &self.neighbors[i] {
            v += &self.c[i][j] * self.local_state(j, x);
        }
        v
    }
}

fn gather(v: &Vector, idx: &[usize]) -> Vector {
    Vector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

fn scatter(m: &mut Mat, rows: &[usize], cols: &[usize], block: &Mat) {
    for (r, &ri) in rows.iter().enumerate() {
        for (c, &ci) in cols.iter().enumerate() {
            m[(ri, ci)] = block[(r, c)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{building_model, linearize, InputChannel};
    use crate::plant::BuildingModel;
    use proptest::prelude::*;

    #[test]
    fn block_diagonal_has_no_neighbors() {
        let a = Mat::from_diagonal(&Vector::from_row_slice(&[0.5, 0.2, 0.1]));
        let ss = StateSpaceModel::new(a, Mat::identity(3, 3), Mat::zeros(3, 1), Mat::identity(3, 3), 1.0).unwrap();
        let d = decompose(&ss, &Partition::singletons(3)).unwrap();
        assert!(d.neighbors.iter().all(Vec::is_empty));
    }

    #[test]
    fn building_neighborhoods_follow_adjacency() {
        let ss = linearize(&BuildingModel::six_room(), InputChannel::SupplyTemperature).unwrap();
        let d = decompose(&ss, &Partition::singletons(6)).unwrap();
        let expected: Vec<Vec<usize>> = vec![vec![4], vec![2], vec![1], vec![4, 5], vec![0, 3], vec![3]];
        assert_eq!(d.neighbors, expected);
    }

    #[test]
    fn discrete_neighborhoods_stay_within_connected_components() {
        let ss = building_model(&BuildingModel::six_room(), InputChannel::SupplyTemperature, 1.0).unwrap();
        let d = decompose(&ss, &Partition::singletons(6)).unwrap();
        assert_eq!(d.neighbors[1], vec![2]);
        assert_eq!(d.neighbors[0], vec![3, 4, 5]);
        for i in 0..6 {
            for &j in &d.neighbors[i] {
                assert!(d.neighbors[j].contains(&i));
            }
        }
    }

    #[test]
    fn overlapping_partition_rejected() {
        let ss = linearize(&BuildingModel::six_room(), InputChannel::SupplyTemperature).unwrap();
        let p = Partition::uniform(vec![vec![0, 1, 2], vec![2, 3, 4, 5]]);
        assert!(matches!(decompose(&ss, &p), Err(Error::InvalidPartition(_))));
        let p = Partition::uniform(vec![vec![0, 1, 2], vec![3, 4]]);
        assert!(matches!(decompose(&ss, &p), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn reassembly_is_bit_exact() {
        let ss = building_model(&BuildingModel::six_room(), InputChannel::SupplyTemperature, 1.0).unwrap();
        let p = Partition::uniform(vec![vec![4, 0], vec![2, 1], vec![3, 5]]);
        assert_eq!(decompose(&ss, &p).unwrap().reassemble(), ss);
    }

    fn arb_model() -> impl Strategy<Value = (StateSpaceModel, Vec<f64>, Vec<f64>)> {
        (prop::collection::vec(-1.0..1.0f64, 5 * 5 + 5 * 3 + 5), prop::collection::vec(-5.0..5.0f64, 8)).prop_map(
            |(vals, xu)| {
                let a = Mat::from_row_slice(5, 5, &vals[..25]);
                let b = Mat::from_row_slice(5, 3, &vals[25..40]);
                let e = Mat::from_row_slice(5, 1, &vals[40..45]);
                let ss = StateSpaceModel::new(a, b, e, Mat::identity(5, 5), 1.0).unwrap();
                (ss, xu[..5].to_vec(), xu[5..].to_vec())
            },
        )
    }

    proptest! {
        #[test]
        fn interactions_are_lossless((ss, x, u) in arb_model()) {
            let p = Partition {
                states: vec![vec![0, 3], vec![1], vec![2, 4]],
                inputs: vec![vec![2], vec![0], vec![1]],
                outputs: vec![vec![0, 3], vec![1], vec![2, 4]],
            };
            let d = decompose(&ss, &p).unwrap();
            let x = Vector::from_vec(x);
            let u = Vector::from_vec(u);
            let full = &ss.a * &x + &ss.b * &u;
            for i in 0..3 {
                let own = &d.a[i][i] * d.local_state(i, &x) + &d.b[i][i] * d.local_input(i, &u);
                let w = d.state_interaction(i, &x, &u);
                let diff = (d.local_state(i, &full) - own - w).amax();
                prop_assert!(diff < 1e-12);
            }
        }
    }
}
