use std::sync::OnceLock;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::harris::{sample_harris, LatticeWindow, SpaceTimeRegion};
use crate::rng::{seeded, split_seed};
use crate::walker::{simulate_walk, RateTable};
use crate::Configuration;

const HORIZON: f64 = 200.0;

/// 10^3 walks with constant rates up 0.3, down 0.1 on [0, 200].
fn constant_paths() -> &'static [WalkPath] {
    static PATHS: OnceLock<Vec<WalkPath>> = OnceLock::new();
    PATHS.get_or_init(|| {
        let table = RateTable::constant(0.3, 0.1, 1.0).unwrap();
        (0..1000)
            .map(|r| {
                let h = sample_harris(LatticeWindow::centered(0, 130), HORIZON, 0.0, 1.0, split_seed(42, 0, r)).unwrap();
                let env = Configuration::empty(h.window());
                simulate_walk(&h, &env, 0, &table, &SpaceTimeRegion::full(&h), &[]).unwrap().1
            })
            .collect()
    })
}

fn endpoints(paths: &[WalkPath]) -> Vec<f64> {
    paths.iter().map(|p| p.end_position() as f64).collect()
}

#[test]
fn constant_endpoints_are_degenerate() {
    let r = estimate_drift_variance(&[60.0; 10], 20.0).unwrap();
    assert_eq!(r.mu_hat, 3.0);
    assert_eq!(r.alpha2_hat, 0.0);
    assert!(r.degenerate && r.ks_p.is_none() && !r.looks_normal());
    assert!(estimate_drift_variance(&[1.0], 1.0).is_err());
    assert!(estimate_drift_variance(&[1.0, 2.0], 0.0).is_err());
}

#[test]
fn constant_rate_walk_matches_closed_form() {
    let r = estimate_drift_variance(&endpoints(constant_paths()), HORIZON).unwrap();
    assert!((r.mu_hat - 0.2).abs() < 3.0 * r.mu_se, "{r:?}");
    assert!((r.alpha2_hat - 0.4).abs() < 0.04, "{r:?}");
    assert!(r.looks_normal(), "{r:?}");
    assert!(r.alpha2_ci.0 <= r.alpha2_hat && r.alpha2_hat <= r.alpha2_ci.1);
}

#[test]
fn ks_pvalues_are_uniform_for_a_known_distribution() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rng = seeded(5);
    let mut ps: Vec<f64> = (0..400)
        .map(|_| {
            let xs: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
            let s = sorted(&xs);
            ks_pvalue(ks_statistic(&s, |x| normal.cdf(x)), s.len())
        })
        .collect();
    ps.sort_by(f64::total_cmp);
    let d = ks_statistic(&ps, |p| p.clamp(0.0, 1.0));
    assert!(ks_pvalue(d, ps.len()) > 0.001, "p-values not uniform, D = {d}");
}

#[test]
fn estimated_parameter_test_is_conservative() {
    let mut rng = seeded(6);
    let rejections = (0..300)
        .filter(|_| {
            let xs: Vec<f64> = (0..200).map(|_| 3.0 + 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            !estimate_drift_variance(&xs, 1.0).unwrap().looks_normal()
        })
        .count();
    assert!(rejections <= 9, "{rejections} rejections at level 0.01");
}

#[test]
fn ks_rejects_a_skewed_sample() {
    let mut rng = seeded(7);
    let xs: Vec<f64> = (0..500).map(|_| rng.random::<f64>().powi(4)).collect();
    assert!(!estimate_drift_variance(&xs, 1.0).unwrap().looks_normal());
}

#[test]
fn kolmogorov_tail_values() {
    // Classical critical points of the Kolmogorov distribution.
    assert!((kolmogorov_tail(1.3581) - 0.05).abs() < 1e-4);
    assert!((kolmogorov_tail(1.6276) - 0.01).abs() < 1e-4);
    assert_eq!(kolmogorov_tail(0.1), 1.0);
}

#[test]
fn anderson_darling_on_uniform_grid_is_small() {
    let n = 100;
    let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    assert!(anderson_darling(&grid, |p| p) < 0.1);
}

proptest! {
    #[test]
    fn translation_equivariance(xs in prop::collection::vec(-1000i64..1000, 2..60), c in -5i64..5, t in prop::sample::select(vec![1.0, 2.0, 10.0])) {
        let a: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x + c as f64 * t).collect();
        let ra = estimate_drift_variance(&a, t).unwrap();
        let rb = estimate_drift_variance(&b, t).unwrap();
        prop_assert_eq!(ra.alpha2_hat, rb.alpha2_hat);
        prop_assert_eq!(ra.ks_stat, rb.ks_stat);
        prop_assert_eq!(ra.ad_stat, rb.ad_stat);
        prop_assert!((rb.mu_hat - ra.mu_hat - c as f64).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariance(xs in prop::collection::vec(-1e3f64..1e3, 2..60), seed in any::<u64>()) {
        let mut ys = xs.clone();
        let mut rng = seeded(seed);
        for i in (1..ys.len()).rev() {
            ys.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(estimate_drift_variance(&xs, 3.0).unwrap(), estimate_drift_variance(&ys, 3.0).unwrap());
        prop_assert_eq!(fourth_moment_ratio(&xs, 3.0, 0.1).unwrap(), fourth_moment_ratio(&ys, 3.0, 0.1).unwrap());
    }
}

fn iid_endpoints(steps: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| (0..steps).map(|_| if rng.random::<f64>() < 0.6 { 1.0 } else { -1.0 }).sum())
        .collect()
}

#[test]
fn doubling_for_iid_increments_is_consistent() {
    let reports: Vec<EstimateReport> = [50, 100, 200]
        .iter()
        .map(|&t| estimate_drift_variance(&iid_endpoints(t, 2000, t as u64), t as f64).unwrap())
        .collect();
    let rows = doubling_consistency(&reports).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r.drift_consistent(3.0), "{r:?}");
        assert!(r.ratio_consistent(3.0), "{r:?}");
    }
    let mut csv = Vec::new();
    write_doubling_csv(&rows, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
    assert!(doubling_consistency(&reports[..1]).is_err());
}

#[test]
fn gaussian_fourth_moment() {
    // Variance alpha^2 T with alpha^2 = 0.5, T = 40: ratio near 3 alpha^4 = 0.75.
    let (a2, t) = (0.5f64, 40.0);
    let mut rng = seeded(8);
    let xs: Vec<f64> = (0..20_000).map(|_| (a2 * t).sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
    let m = fourth_moment_ratio(&xs, t, 0.0).unwrap();
    assert!((m.ratio - 0.75).abs() < 4.0 * m.se, "{m:?}");
}

#[test]
fn constant_walk_fourth_moment_does_not_grow() {
    // Compound Poisson increments: E(X - mu T)^4 = 3 (s T)^2 + s T with s = a + b.
    let s = 0.4;
    for t in [50.0, 100.0, 200.0] {
        let ends: Vec<f64> = constant_paths().iter().map(|p| p.position_at(t) as f64).collect();
        let m = fourth_moment_ratio(&ends, t, 0.2).unwrap();
        let exact = 3.0 * s * s + s / t;
        assert!((m.ratio - exact).abs() < 3.0 * m.se, "T = {t}: {m:?}");
    }
}

#[test]
fn drift_only_path_has_no_fluctuation_events() {
    let mu = 0.5;
    let path = WalkPath {
        start_time: 0.0,
        start: 0,
        end_time: 100.0,
        jumps: (1..=50).map(|k| (k as f64 / mu, k)).collect(),
    };
    let r = maximal_fluctuation(&[path.clone(), path], mu, 0.5, 100.0).unwrap();
    assert_eq!((r.max_freq, r.end_freq, r.ratio), (0.0, 0.0, None));
    assert!(r.bound_holds(3.0));
}

#[test]
fn sup_deviation_sees_interior_excursions() {
    let path = WalkPath {
        start_time: 0.0,
        start: 5,
        end_time: 10.0,
        jumps: vec![(1.0, 6), (2.0, 7), (3.0, 6), (4.0, 5)],
    };
    assert_eq!(sup_deviation(&path, 0.0, 10.0), 2.0);
    assert_eq!(sup_deviation(&path, 1.0, 10.0), 10.0);
}

#[test]
fn constant_walk_satisfies_the_maximal_inequality() {
    let r = maximal_fluctuation(constant_paths(), 0.2, 0.5, HORIZON).unwrap();
    assert!(r.bound_holds(3.0), "{r:?}");
    assert!(r.max_freq >= r.end_freq * 0.0);
    let short = WalkPath::new(0, 0.0);
    assert!(maximal_fluctuation(&[short], 0.0, 0.5, 1.0).is_err());
}

#[test]
fn linear_fit_recovers_a_line() {
    let x = [0.0, 1.0, 2.0, 3.0];
    let y = [1.0, 3.0, 5.0, 7.0];
    let (a, b, se, r2) = linear_fit(&x, &y).unwrap();
    assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && se < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
}

#[test]
fn pure_death_survival_slope_is_minus_one() {
    let grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let r = survival_tail(0.0, &grid, 20_000, &SurvivalOptions::default()).unwrap();
    assert_eq!(r.alive_at_horizon, 0);
    let slope = r.slope.unwrap();
    assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
    assert!(!r.flagged);
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), grid.len() + 1);
}

#[test]
fn subcritical_survival_report_is_well_formed() {
    let r = survival_tail(0.5, &[2.0, 4.0, 6.0], 2000, &SurvivalOptions::default()).unwrap();
    assert_eq!(r.alive_at_horizon, 0);
    assert_eq!(r.dead_by.len(), 3);
    assert!(r.dead_by.windows(2).all(|w| w[0] <= w[1]));
    for (d, b) in r.dead_by.iter().zip(&r.died_between) {
        assert_eq!(d + b + r.alive_at_horizon, r.replicas);
    }
    assert!(survival_tail(0.5, &[2.0, 1.0], 10, &SurvivalOptions::default()).is_err());
}

#[test]
fn edge_speed_bounds() {
    let still = edge_speed(0.0, 10.0, 20, 1).unwrap();
    assert!(still.speed <= 0.0);
    let fast = edge_speed(10.0, 10.0, 10, 2).unwrap();
    assert!(fast.speed > 0.0 && fast.speed < 20.0, "{fast:?}");
}

#[test]
fn edge_speed_is_stable_across_horizons() {
    let a = edge_speed(2.0, 50.0, 40, 3).unwrap();
    let b = edge_speed(2.0, 100.0, 40, 4).unwrap();
    assert!(a.speed > 0.0);
    assert!((a.speed - b.speed).abs() < 3.0 * a.se.hypot(b.se), "{a:?} {b:?}");
}
