//! Free response of the six-room building: heaters off, 0 °C outside.

use building_dmpc::plant::{BuildingModel, HeaterCommand};

fn main() -> building_dmpc::Result<()> {
    let model = BuildingModel::six_room();
    let mut state = model.initial_state();
    let off = HeaterCommand::off(model.zone_count());
    for _ in 0..100 {
        state = model.step_plant(&state, 0.0, &off, 0.1)?;
    }
    println!("after {:.1} s:", state.t);
    for (i, x) in state.x.iter().enumerate() {
        println!("  zone {} {:.3} °C", i + 1, x);
    }
    Ok(())
}
