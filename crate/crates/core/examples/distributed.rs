//! Both coordination schemes on a short run, with iteration counts and the
//! first messages of the exchange log.

use building_dmpc::control::{Controller, StepContext};
use building_dmpc::dmpc::{DistributedController, DmpcConfig};
use building_dmpc::linalg::Vector;
use building_dmpc::linear::{building_model, decompose, InputChannel, Partition};
use building_dmpc::plant::BuildingModel;

fn main() -> building_dmpc::Result<()> {
    let ss = building_model(&BuildingModel::six_room(), InputChannel::SupplyTemperature, 1.0)?;
    let dec = decompose(&ss, &Partition::singletons(6))?;

    for mut cfg in [DmpcConfig::goal_coordination(), DmpcConfig::dual()] {
        cfg.record_transcript = true;
        let p = cfg.horizon_p;
        let mut ctrl = DistributedController::new(dec.clone(), cfg.clone())?;
        let mut x = Vector::from_element(6, 10.0);
        ctrl.reset(&x);
        let refs = vec![Vector::from_element(6, 22.0); p + 1];
        let outdoor = vec![Vector::from_element(1, -3.0); p];
        for k in 0..20 {
            let y = ss.output(&x);
            let out = ctrl.step(&StepContext { k, y: &y, reference: &refs, forecast: &outdoor, d_prev: &outdoor[0] })?;
            if k % 5 == 0 {
                println!("{:?} k={k:2} rounds={:3} u1={:.3}", cfg.coordination, out.iterations, out.u[0]);
            }
            x = ss.step(&x, &out.u, &outdoor[0]);
        }
        println!("{:?} zone temperatures {:.3?}", cfg.coordination, x.as_slice());
        let log = ctrl.transcript().to_text();
        println!("{} messages, first ones:", ctrl.transcript().records.len());
        for line in log.lines().take(4) {
            println!("  {line}");
        }
    }
    Ok(())
}
