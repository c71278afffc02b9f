//! Continuous and sampled linear models of the building, plus the
//! per-zone decomposition.

use building_dmpc::linear::{building_model, decompose, linearize, InputChannel, Partition};
use building_dmpc::plant::BuildingModel;

fn main() -> building_dmpc::Result<()> {
    let model = BuildingModel::six_room();
    let cont = linearize(&model, InputChannel::SupplyTemperature)?;
    println!("A (continuous) =\n{:.4}", cont.a);

    let disc = building_model(&model, InputChannel::SupplyTemperature, 1.0)?;
    println!("A (Ts = 1 s) =\n{:.4}", disc.a);

    let dec = decompose(&disc, &Partition::singletons(6))?;
    for i in 0..dec.len() {
        let nb: Vec<usize> = dec.neighbors[i].iter().map(|j| j + 1).collect();
        println!("zone {} neighbours {:?}", i + 1, nb);
    }
    Ok(())
}
