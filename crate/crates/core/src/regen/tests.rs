use super::*;
use crate::harris::{sample_harris, ClockMark};
use crate::walker::RateTable;

fn desk() -> RunParameters {
    let mut p = RunParameters::for_scale(3, 2.0, 0.5).with_burn_in(8.0);
    p.stage1_radius = 20;
    p.stage3_radius = 10;
    p.nu.inner_radius = 5;
    p.p_budget = 50;
    p
}

fn w(l: i64, r: i64) -> LatticeWindow {
    LatticeWindow::new(l, r).unwrap()
}

fn symmetric() -> RateTable {
    RateTable::from_fn(1, 1.0, |p| (0.1 + 0.3 * f64::from(p.get(2)), 0.1 + 0.3 * f64::from(p.get(0)))).unwrap()
}

#[test]
fn literal_defaults_at_n_3() {
    let p = RunParameters::for_scale(3, 2.0, 0.5);
    assert_eq!(p.stage1_gap, 5);
    assert_eq!(p.stage1_radius, 144);
    assert_eq!(p.stage3_gap, 2);
    assert_eq!(p.stage3_radius, 19_683);
    assert!((p.stage2_window - 1.4569).abs() < 1e-3);
    assert!((p.run_length - 81.0 - p.stage2_window).abs() < 1e-12);
    assert_eq!(p.p_budget, 200);
    assert!(p.validate(1.0).is_ok());
    assert!(p.validate(2.0).is_err(), "M must exceed Mprime");
    let zero = RunParameters { p_budget: 0, ..p.clone() };
    assert!(zero.validate(1.0).is_err());
}

#[test]
fn stage1_gap_threshold() {
    let p = desk();
    let window = w(-40, 40);
    assert!(stage1(&Configuration::full(window), 0, &p));
    let gap = |start: i64, len: i64| {
        let mut c = Configuration::full(window);
        for x in start..start + len {
            c.set(x, false);
        }
        c
    };
    let k = p.stage1_gap as i64;
    assert!(!stage1(&gap(3, k), 0, &p), "gap of exactly stage1_gap fails");
    assert!(stage1(&gap(3, k - 1), 0, &p));
    // The scan covers |x| < radius only.
    assert!(stage1(&gap(20, k), 0, &p));
    assert!(!stage1(&gap(19 - k + 1, k), 0, &p));
}

#[test]
fn stage3_gap_threshold() {
    let p = desk();
    let window = w(-40, 40);
    assert!(stage3(&Configuration::full(window), 0, &p));
    let mut c = Configuration::full(window);
    c.set(10, false);
    c.set(11, false);
    assert!(stage3(&c, 0, &p), "run straddles the scan edge");
    assert!(!stage3(&c, 1, &p));
    c.set(11, true);
    assert!(stage3(&c, 1, &p), "single vacancy is below stage3_gap = 2");
}

#[test]
fn stages_agree_with_gap_scan() {
    let p = desk();
    let window = w(-30, 30);
    for seed in 0..200 {
        let c = sample_upper_equilibrium_like(window, seed);
        let direct1 = gap_scan(&c, LatticeWindow::centered(0, p.stage1_radius - 1), p.stage1_gap).is_empty();
        let direct3 = gap_scan(&c, LatticeWindow::centered(0, p.stage3_radius), p.stage3_gap).is_empty();
        assert_eq!(stage1(&c, 0, &p), direct1);
        assert_eq!(stage3(&c, 0, &p), direct3);
    }
}

fn sample_upper_equilibrium_like(window: LatticeWindow, seed: u64) -> Configuration {
    crate::dual::sample_upper_equilibrium(window, 1.2, 2.0, seed).unwrap()
}

fn clock_only(marks: Vec<f64>, horizon: f64) -> HarrisSystem {
    let clock = marks.into_iter().map(|time| ClockMark { time, mark: 0.5 }).collect();
    HarrisSystem::from_streams(w(0, 0), horizon, 1.0, 1.0, None, vec![vec![]], vec![], clock).unwrap()
}

#[test]
fn stage2_counting() {
    let p = desk();
    let l = p.run_length;
    assert!(stage2(&clock_only(vec![], l), 0.0, &p));
    assert!(!stage2(&clock_only(vec![8.5], l), 0.0, &p), "point in the quiet window");
    assert!(stage2(&clock_only(vec![1.0, 7.9], l), 0.0, &p));
    // M b = 16 points are too many.
    let many: Vec<f64> = (0..16).map(|k| 0.25 + 0.45 * k as f64).collect();
    assert!(!stage2(&clock_only(many.clone(), l), 0.0, &p));
    assert!(stage2(&clock_only(many[1..].to_vec(), l), 0.0, &p));
}

#[test]
fn stage2_quiet_rate_matches_poisson_void_probability() {
    let mut p = desk();
    p.m = 1e9;
    let replicas = 10_000;
    let passes = (0..replicas)
        .filter(|&s| {
            let h = sample_harris(w(0, 0), p.run_length, 0.0, 1.0, s).unwrap();
            stage2(&h, 0.0, &p)
        })
        .count();
    let expected = (-log4(3)).exp();
    assert!((expected - 0.2329).abs() < 1e-4);
    let se = (expected * (1.0 - expected) / replicas as f64).sqrt();
    let rate = passes as f64 / replicas as f64;
    assert!((rate - expected).abs() < 3.0 * se, "rate {rate} vs {expected}");
}

#[test]
fn stage4_with_vanishing_h1_reduces_to_survival() {
    let mut p = desk();
    p.nu.h1 = 1e-12;
    for seed in 0..50 {
        // Harris window equal to the inner window: every dual's mass is inside it.
        let h = sample_harris(w(-5, 5), p.run_length, 2.0, 1.0, seed).unwrap();
        let (pass, xi) = stage4(&h, 0.0, 0, &p);
        assert!(pass);
        let (_, surviving) = crate::dual::dual_marks(&h, &p.nu, 0, p.run_length);
        assert_eq!(xi.bits(), surviving.bits());
        assert!(xi.outside() && xi.get(-6) && xi.get(100));
    }
}

#[test]
fn stage4_passes_when_every_dual_dies() {
    let p = desk();
    let window = w(-16, 16);
    let t1 = p.run_length;
    let deaths = vec![vec![t1 - 0.1]; window.width()];
    let h = HarrisSystem::from_streams(window, t1, 2.0, 1.0, None, deaths, vec![vec![]; 32], vec![]).unwrap();
    let (pass, xi) = stage4(&h, 0.0, 0, &p);
    assert!(pass);
    assert_eq!(xi.count(), 0);
}

#[test]
fn stage4_pass_rate_at_desk_scale() {
    let p = desk();
    let margin = p.nu.margin_for(2.0) as i64;
    let window = w(-5 - margin, 5 + margin);
    let runs = 1000;
    let passes = (0..runs)
        .filter(|&s| {
            let h = sample_harris(window, p.run_length, 2.0, 1.0, s).unwrap();
            stage4(&h, 0.0, 0, &p).0
        })
        .count();
    assert!(passes as f64 / runs as f64 > 0.5, "stage 4 pass rate {passes}/{runs}");
}

#[test]
fn stage5_decision_rule() {
    for u in [0.0, 0.3, 0.75, 0.9, 0.999] {
        assert!(!stage5_accepts(false, 0.9, u));
        assert!(!stage5_accepts(false, 0.2, u));
        // p_hat <= 3/4 clamps the randomisation at 1.
        assert!(stage5_accepts(true, 0.75, u));
        assert!(stage5_accepts(true, 0.1, u));
        assert!(stage5_accepts(true, 0.0, u));
    }
    assert!(stage5_accepts(true, 1.0, 0.75));
    assert!(!stage5_accepts(true, 1.0, 0.76));
}

#[test]
fn stage5_is_reproducible_and_bounded() {
    let p = desk();
    let h = sample_harris(w(-60, 60), p.run_length, 2.0, 1.0, 9).unwrap();
    let xi_burn = Configuration::full(h.window());
    let (_, xi) = stage4(&h, 0.0, 0, &p);
    let a = stage5(&h, 0.0, 0, &xi_burn, &xi, &p, 77).unwrap();
    let b = stage5(&h, 0.0, 0, &xi_burn, &xi, &p, 77).unwrap();
    assert_eq!(a, b);
    assert!((0.0..=1.0).contains(&a.p_hat));
    assert!((0.0..1.0).contains(&a.uniform));
}

#[test]
fn stage5_without_lower_piece_is_deterministic() {
    // With t_cut equal to the quiet window the continuation has nothing to
    // resample, so p_hat is 0 or 1 and matches the realised agreement.
    let mut p = desk();
    p.nu.t_cut = p.stage2_window;
    for seed in 0..20 {
        let h = sample_harris(w(-60, 60), p.run_length, 2.0, 1.0, seed).unwrap();
        let xi_burn = sample_upper_equilibrium_like(h.window(), seed);
        let (_, xi) = stage4(&h, 0.0, 0, &p);
        let s = stage5(&h, 0.0, 0, &xi_burn, &xi, &p, seed).unwrap();
        assert_eq!(s.p_hat, if s.agreement { 1.0 } else { 0.0 });
    }
}

fn sigma_search(seed: u64, t_start: f64) -> Result<SigmaSearch> {
    let p = desk();
    let h = sample_harris(w(-200, 200), t_start + 40.0 * p.run_length, 2.0, 1.0, seed)?;
    let env = sample_upper_equilibrium_like(h.window(), seed);
    find_sigma(&h, &env, 0, t_start, &symmetric(), &p, seed)
}

#[test]
fn sigma_lies_on_the_run_grid_and_records_are_consistent() {
    let p = desk();
    let mut saw_late = false;
    for seed in 0..12 {
        let t_start = 3.5;
        let s = sigma_search(seed, t_start).unwrap();
        let k = s.records.len();
        saw_late |= k > 1;
        assert_eq!(s.sigma, t_start + k as f64 * p.run_length);
        for (i, r) in s.records.iter().enumerate() {
            assert_eq!(r.index, i as u64);
            assert_eq!(r.is_complete(), i + 1 == k);
            if r.success {
                assert_eq!(r.stages, [true; 5]);
                assert!(r.aborted_at.is_none() && !r.disaster);
            } else {
                let a = r.aborted_at.unwrap() as usize;
                assert!(r.stages[..a - 1].iter().all(|&b| b));
                assert!(r.stages[a - 1..].iter().all(|&b| !b));
            }
            assert_eq!(r.sigma.is_some(), r.success || r.aborted_at == Some(1));
        }
        assert_eq!(s.path.end_position(), s.position);
        assert_eq!(s.xi_prime.window(), p.nu.inner_window(s.position));
    }
    assert!(saw_late, "expected some searches to need several runs");
}

#[test]
fn replay_is_byte_identical() {
    let a = sigma_search(5, 0.0).unwrap();
    let b = sigma_search(5, 0.0).unwrap();
    let (mut ja, mut jb) = (Vec::new(), Vec::new());
    write_records(&a.records, &mut ja).unwrap();
    write_records(&b.records, &mut jb).unwrap();
    assert_eq!(ja, jb);
    assert_eq!(read_records(&ja[..]).unwrap(), a.records);
}

#[test]
fn exhausted_horizon_is_an_error() {
    let p = desk();
    let h = sample_harris(w(-100, 100), p.run_length * 0.5, 2.0, 1.0, 1).unwrap();
    let env = Configuration::full(h.window());
    let err = find_sigma(&h, &env, 0, 0.0, &symmetric(), &p, 1).unwrap_err();
    assert!(matches!(err, Error::HorizonExhausted { attempts: 0 }));
}

#[test]
fn coupling_with_identical_starts_agrees() {
    let tables = symmetric();
    for seed in 0..20 {
        let h = sample_harris(w(-60, 60), 5.0, 2.0, 1.0, seed).unwrap();
        let env = sample_upper_equilibrium_like(h.window(), seed);
        let out = coupling_pair(&h, &env, &env, 0, &tables, &[1.0, 2.0, 3.0], 10).unwrap();
        assert!(out.paths_agree && out.endpoints_agree && out.configs_agree && out.dominated);
    }
}

#[test]
fn coupling_preserves_domination() {
    let setup = CouplingSetup {
        lambda: 2.0,
        inner_radius: 20,
        window_radius: 60,
        horizon: 5.0,
        equilibrium_time: 10.0,
        sample_step: 0.25,
        agreement_radius: 10,
    };
    let tables = symmetric();
    let mut agree = 0;
    for seed in 0..100 {
        let out = coupling_experiment(seed, &setup, &tables).unwrap();
        assert!(out.dominated);
        agree += usize::from(out.paths_agree);
    }
    assert!(agree >= 90, "{agree}/100 paths agree");
}

fn renewal_params() -> RenewalParameters {
    RenewalParameters::new(desk(), 2.0, 1.0)
}

#[test]
fn renewal_lengths_are_base_plus_whole_runs() {
    let params = renewal_params();
    let steps = build_renewal_sequence(3, 6, &params, &symmetric()).unwrap();
    let mut beta = 0.0;
    for s in &steps {
        assert_eq!(s.beta, beta);
        assert_eq!(s.length, params.segment_base + s.runs as f64 * params.run.run_length);
        assert!(s.increment().is_some());
        beta += s.length;
    }
}

#[test]
fn renewal_increments_for_constant_rates_are_centred() {
    // X_t - (a - b) t is a martingale and segment ends are stopping times.
    let (a, b) = (0.3, 0.1);
    let tables = RateTable::constant(a, b, 1.0).unwrap();
    let params = renewal_params();
    let steps = build_renewal_sequence(11, 150, &params, &tables).unwrap();
    let d: Vec<f64> = steps.iter().map(|s| s.z as f64 - (a - b) * s.length).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 3.0 * (var / n).sqrt(), "mean {mean}, se {}", (var / n).sqrt());
}
