//! Centralized MPC on the first two hours of the daily schedule.

use building_dmpc::cmpc::MpcConfig;
use building_dmpc::linear::{building_model, InputChannel};
use building_dmpc::plant::BuildingModel;
use building_dmpc::sim::{build_paper_scenario, compute_metrics, run_centralized, SimOptions};

fn main() -> building_dmpc::Result<()> {
    let model = BuildingModel::six_room();
    let ss = building_model(&model, InputChannel::SupplyTemperature, 1.0)?;
    let mut scenario = build_paper_scenario();
    scenario.duration = 7200.0;

    let rec = run_centralized(&model, &ss, &MpcConfig::with_defaults(6, 6), &scenario, &SimOptions::default())?;
    let m = compute_metrics(&rec)?;
    let last = rec.len() - 1;
    println!("final temperatures {:?}", rec.x[last]);
    println!("rmse {:.4} °C, control area {:.4e}, solve {:.3} s", m.rmse, m.control_area, m.solve_time);
    Ok(())
}
