use cpwalk::regen::{build_renewal_sequence, RenewalParameters, RunParameters};
use cpwalk::RateTable;

fn params() -> RenewalParameters {
    let mut run = RunParameters::for_scale(3, 2.0, 0.69).with_burn_in(8.0);
    run.stage1_radius = 20;
    run.stage3_radius = 5;
    run.nu.inner_radius = 5;
    run.p_budget = 100;
    RenewalParameters::new(run, 2.0, 1.0)
}

#[test]
fn good_increments_show_no_lag_one_correlation() {
    let tables = RateTable::from_fn(1, 1.0, |p| (0.2 + 0.3 * f64::from(p.get(2)), 0.1 + 0.1 * f64::from(p.get(0)))).unwrap();
    let steps = build_renewal_sequence(2024, 1000, &params(), &tables).unwrap();
    for s in &steps {
        assert_eq!(s.substitute.is_some(), !s.good, "index {}", s.index);
    }
    let z: Vec<f64> = steps.iter().filter(|s| s.good).map(|s| s.z as f64).collect();
    let n = z.len() as f64;
    assert!(n > 500.0, "only {n} good indices");
    let mean = z.iter().sum::<f64>() / n;
    let c0: f64 = z.iter().map(|v| (v - mean).powi(2)).sum();
    let c1: f64 = z.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    let r1 = c1 / c0;
    assert!(r1.abs() < 3.0 / n.sqrt(), "lag-1 autocorrelation {r1} over {n} increments");
}
