//! CMPC vs DMPC on the daily schedule. Pass a duration in seconds to shorten
//! the run; outputs go to `out/comparison`.

use building_dmpc::cmpc::MpcConfig;
use building_dmpc::dmpc::DmpcConfig;
use building_dmpc::plant::BuildingModel;
use building_dmpc::sim::{build_paper_scenario, run_comparison, SimOptions};

fn main() -> building_dmpc::Result<()> {
    let mut scenario = build_paper_scenario();
    if let Some(d) = std::env::args().nth(1) {
        scenario.duration = d.parse().expect("duration in seconds");
    }
    let c = run_comparison(
        &BuildingModel::six_room(),
        &scenario,
        &MpcConfig::with_defaults(6, 6),
        &DmpcConfig::default(),
        &SimOptions::default(),
    )?;
    print!("{}", c.report());
    c.write(std::path::Path::new("out/comparison"))?;
    Ok(())
}
