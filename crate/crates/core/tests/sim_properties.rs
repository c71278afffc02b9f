use building_dmpc::cmpc::MpcConfig;
use building_dmpc::dmpc::DmpcConfig;
use building_dmpc::plant::BuildingModel;
use building_dmpc::sim::{self, build_paper_scenario, compute_metrics, control_area, SimOptions, SimulationRecord};
use proptest::prelude::*;

/// Trace text without the wall-clock column.
fn deterministic_part(r: &SimulationRecord) -> String {
    r.to_csv()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn repeated_runs_are_bit_identical() {
    let model = BuildingModel::six_room();
    let mut s = build_paper_scenario();
    s.duration = 120.0;
    s.noise = 0.3;
    s.seed = 11;
    let run = |s: &sim::Scenario| {
        sim::run_comparison(&model, s, &MpcConfig::with_defaults(6, 6), &DmpcConfig::default(), &SimOptions::default())
            .unwrap()
    };
    let (a, b) = (run(&s), run(&s));
    assert_eq!(deterministic_part(&a.cmpc), deterministic_part(&b.cmpc));
    assert_eq!(deterministic_part(&a.dmpc), deterministic_part(&b.dmpc));
    s.seed = 12;
    let c = run(&s);
    assert_ne!(deterministic_part(&a.dmpc), deterministic_part(&c.dmpc));
}

#[test]
fn comparison_writes_outputs() {
    let model = BuildingModel::six_room();
    let mut s = build_paper_scenario();
    s.duration = 30.0;
    let c = sim::run_comparison(&model, &s, &MpcConfig::with_defaults(6, 6), &DmpcConfig::default(), &SimOptions::default())
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    c.write(dir.path()).unwrap();
    for f in ["trace_cmpc.csv", "trace_dmpc.csv", "metrics.csv", "report.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let back = SimulationRecord::from_csv(&std::fs::read_to_string(dir.path().join("trace_dmpc.csv")).unwrap(), "dmpc").unwrap();
    let m = compute_metrics(&back).unwrap();
    assert_eq!(m.control_area, c.dmpc_metrics.control_area);
    assert_eq!(m.overshoot, c.dmpc_metrics.overshoot);
}

fn sampled(f: &dyn Fn(f64) -> f64, duration: f64, ts: f64) -> Vec<Vec<f64>> {
    let n = (duration / ts).round() as usize;
    (0..=n).map(|k| vec![f(k as f64 * ts)]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn area_converges_at_second_order(a in 0.5..3.0f64, w in 0.05..0.5f64, c in 4.0..10.0f64) {
        // smooth, positive input: the trapezoid error scales with Ts²
        let f = move |t: f64| c + a * (w * t).sin();
        let exact = c * 20.0 + a / w * (1.0 - (w * 20.0).cos());
        let e1 = (control_area(&sampled(&f, 20.0, 0.4), 0.4, None) - exact).abs();
        let e2 = (control_area(&sampled(&f, 20.0, 0.2), 0.2, None) - exact).abs();
        prop_assert!(e1 <= 20.0 * a * w * w * 0.4 * 0.4 / 12.0 + 1e-9);
        prop_assert!(e2 <= e1 / 4.0 * 1.01 + 1e-9);
    }

    #[test]
    fn metrics_are_non_negative(
        xs in prop::collection::vec(5.0..30.0f64, 20),
        us in prop::collection::vec(-10.0..60.0f64, 20),
        lvl in 5.0..25.0f64,
    ) {
        let rec = SimulationRecord {
            controller: "p".into(),
            ts: 1.0,
            t: (0..20).map(|k| k as f64).collect(),
            x: xs.iter().map(|&v| vec![v]).collect(),
            u: us.iter().map(|&v| vec![v]).collect(),
            d: vec![0.0; 20],
            reference: (0..20).map(|k| vec![if k < 10 { lvl } else { 16.0 }]).collect(),
            solve_ms: vec![0.1; 20],
            iterations: Some(vec![1; 20]),
            preview: true,
        };
        let m = compute_metrics(&rec).unwrap();
        prop_assert!(m.overshoot.iter().chain(&m.control_overshoot).all(|v| *v >= 0.0));
        prop_assert!(m.control_area >= 0.0 && m.rmse >= 0.0 && m.solve_time >= 0.0);
    }
}
