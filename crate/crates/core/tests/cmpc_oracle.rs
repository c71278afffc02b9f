mod common;

use common::oracle::check;

#[test]
fn centralized_step_matches_numeric_minimizer() {
    let mut worst: f64 = 0.0;
    let mut active = 0;
    for seed in 0..50 {
        let (err, hit) = check(seed, seed % 2 == 1);
        active += hit as usize;
        assert!(err <= 1e-6, "instance {seed}: error {err:e}");
        worst = worst.max(err);
    }
    println!("worst scaled error over 50 instances: {worst:e}; first input on a bound in {active}");
    assert!(active >= 5, "bounded instances rarely constrained: {active}");
}
