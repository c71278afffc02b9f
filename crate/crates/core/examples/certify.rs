//! Lyapunov certificate for the unconstrained closed loops.

use building_dmpc::cli::{certification_controller, certify_closed_loop, ControllerChoice, RunConfig};
use building_dmpc::linear::{building_model, InputChannel};
use building_dmpc::plant::BuildingModel;

fn main() -> building_dmpc::Result<()> {
    let ss = building_model(&BuildingModel::six_room(), InputChannel::SupplyTemperature, 1.0)?;
    let cfg = RunConfig::default();
    for which in [ControllerChoice::Centralized, ControllerChoice::Distributed] {
        let mut ctrl = certification_controller(which, &cfg, &ss)?;
        let cert = certify_closed_loop(&ss, ctrl.as_mut())?;
        println!(
            "{which:?}: spectral radius {:.4}, bound {:.6}, residual {:.1e}",
            cert.spectral_radius, cert.bound, cert.residual
        );
    }
    Ok(())
}
