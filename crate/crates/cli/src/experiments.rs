//! One function per experiment kind. Each returns the artifacts to persist;
//! the caller owns the thread pool and the output directory.

use std::fmt::Write as _;

use cpwalk::contact::{rate_matrix, transition_distribution, write_trajectory_csv};
use cpwalk::dual::{check_duality, estimate_h1, sample_nu, sample_upper_equilibrium};
use cpwalk::harris::reachable_set;
use cpwalk::regen::{build_renewal_sequence, execute_run, stage2, write_records, RenewalParameters, RunParameters};
use cpwalk::rng::split_seed;
use cpwalk::stats::{edge_speed, survival_tail, SurvivalOptions};
use cpwalk::stats::{doubling_consistency, estimate_drift_variance, fourth_moment_ratio, maximal_fluctuation};
use cpwalk::walker::walker_window;
use cpwalk::{
    sample_harris, simulate_walk, Configuration, LatticeWindow, RateTable, SpaceTimeRegion, Trajectory, WalkPath,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, Environment, Kind, LoadedConfig};
use crate::RunError;

const ENV_TAG: u64 = 1;
const HARRIS_TAG: u64 = 2;
const AUX_TAG: u64 = 3;
const NU_SAMPLE_TAG: u64 = 4;
const H1_TAG: u64 = 5;
const RENEWAL_TAG: u64 = 6;

/// Contact-process identities with a zero tolerance.
const EXACT_CHECKS: [&str; 3] = ["duality", "attractiveness", "semigroup"];

/// `(replica, seed, value)` of completed replicas, in replica order.
type Completed<T> = Vec<(u64, u64, T)>;

/// A replica that raised an error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaError {
    pub replica: u64,
    pub seed: u64,
    pub message: String,
}

/// What an experiment leaves on disk.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub raw_csv: String,
    pub report: Value,
    /// Further files, by name, next to `raw.csv`.
    pub extra: Vec<(String, Vec<u8>)>,
    pub errors: Vec<ReplicaError>,
    /// A check the experiment exists to perform failed.
    pub violation: bool,
}

pub(crate) struct Context<'a> {
    pub loaded: &'a LoadedConfig,
    pub seed: u64,
    pub replicas: usize,
}

impl Context<'_> {
    fn replica_seed(&self, i: u64) -> u64 {
        split_seed(self.seed, self.loaded.kind.tag(), i)
    }

    fn tables(&self) -> &RateTable {
        self.loaded.tables.as_ref().expect("checked at load")
    }

    fn lambda(&self) -> f64 {
        self.loaded.config.model.lambda
    }

    /// Runs `f` for every replica in index order on the current pool.
    fn map_replicas<T: Send>(
        &self,
        count: usize,
        f: impl Fn(u64, u64) -> cpwalk::Result<T> + Sync,
    ) -> (Completed<T>, Vec<ReplicaError>) {
        let results: Vec<_> = (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let seed = self.replica_seed(i);
                (i, seed, f(i, seed))
            })
            .collect();
        let mut ok = Vec::with_capacity(results.len());
        let mut errors = Vec::new();
        for (i, seed, r) in results {
            match r {
                Ok(v) => ok.push((i, seed, v)),
                Err(e) => errors.push(ReplicaError {
                    replica: i,
                    seed,
                    message: e.to_string(),
                }),
            }
        }
        (ok, errors)
    }

    fn metadata(&self) -> Value {
        let mut m = json!({
            "kind": self.loaded.kind.name(),
            "seed": self.seed,
            "replicas": self.replicas,
            "lambda": self.lambda(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        if let Some(t) = &self.loaded.tables {
            m["rate_table_digest"] = json!(t.digest());
            m["mprime"] = json!(t.mprime());
            m["table_radius"] = json!(t.radius());
        }
        m
    }
}

pub(crate) fn run(ctx: &Context) -> Result<Artifacts, RunError> {
    match ctx.loaded.kind {
        Kind::Validate => validate(ctx),
        Kind::Simulate => simulate(ctx),
        Kind::Clt => clt(ctx),
        Kind::RegenStats => regen_stats(ctx),
        Kind::Survival => survival(ctx),
        Kind::Speed => speed(ctx),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialises")
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, Copy, Default, Serialize)]
struct IdentityCounts {
    instances: usize,
    duality: usize,
    attractiveness: usize,
    semigroup: usize,
}

fn random_subset(rng: &mut ChaCha8Rng, window: LatticeWindow, density: f64) -> Configuration {
    let bits = window.sites().map(|_| rng.random_bool(density)).collect();
    Configuration::new(window, bits, false).expect("bits match window")
}

/// One random instance: `(duality, attractiveness, semigroup)` hold.
pub fn identity_instance(window: LatticeWindow, horizon: f64, lambda: f64, seed: u64) -> cpwalk::Result<[bool; 3]> {
    let h = sample_harris(window, horizon, lambda, 0.0, split_seed(seed, HARRIS_TAG, 0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, AUX_TAG, 0));
    let density = rng.random_range(0.05..0.5);
    let a = random_subset(&mut rng, window, density);
    let b = random_subset(&mut rng, window, density);
    let extra = random_subset(&mut rng, window, density);
    let t = rng.random_range(0.0..=horizon);
    let s = rng.random_range(0.0..=t);
    let region = SpaceTimeRegion::full(&h);

    let duality = check_duality(&h, &a, &b, t);
    let larger = a.union(&extra);
    let attractive = reachable_set(&h, &a, 0.0, t, &region).le(&reachable_set(&h, &larger, 0.0, t, &region));
    let direct = reachable_set(&h, &a, 0.0, t, &region);
    let mid = reachable_set(&h, &a, 0.0, s, &region);
    let composed = reachable_set(&h, &mid, s, t, &region);
    Ok([duality, attractive, composed == direct])
}

/// Structural checks of the dense generator and its exponential on windows
/// of width 1 to 4. Returns the failures.
pub fn rate_matrix_violations(lambda: f64) -> Vec<String> {
    let mut out = Vec::new();
    for width in 1..=4i64 {
        let window = LatticeWindow::new(0, width - 1).expect("valid window");
        let q = match rate_matrix(window, lambda) {
            Ok(q) => q,
            Err(e) => {
                out.push(format!("width {width}: {e}"));
                continue;
            }
        };
        let n = q.nrows();
        if q.row(0).iter().any(|&v| v != 0.0) {
            out.push(format!("width {width}: empty state not absorbing"));
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
            if (0..n).any(|j| j != i && q[(i, j)] < 0.0) {
                out.push(format!("width {width}: negative off-diagonal in row {i}"));
            }
            if q[(i, i)] != -off {
                out.push(format!("width {width}: row {i} does not sum to zero"));
            }
        }
        let full = vec![true; width as usize];
        match transition_distribution(window, lambda, &full, 1.0) {
            Ok(p) => {
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-10 || p.iter().any(|&v| v < -1e-12) {
                    out.push(format!("width {width}: exp(tQ) row is not a distribution (sum {total})"));
                }
            }
            Err(e) => out.push(format!("width {width}: {e}")),
        }
    }
    out
}

fn validate(ctx: &Context) -> Result<Artifacts, RunError> {
    let v = ctx.loaded.config.validate.clone().unwrap_or_default();
    let window = LatticeWindow::centered(0, v.radius);
    let mut raw = String::from("lambda,instance,seed,duality,attractiveness,semigroup\n");
    let mut per_lambda = Vec::new();
    let mut errors = Vec::new();
    let mut violation = false;
    for (k, &lambda) in v.lambdas.iter().enumerate() {
        let offset = (k * v.instances) as u64;
        let (ok, errs) = ctx.map_replicas(v.instances, |i, _| {
            identity_instance(window, v.horizon, lambda, ctx.replica_seed(offset + i))
        });
        errors.extend(errs);
        let mut counts = IdentityCounts::default();
        for (i, _, checks) in &ok {
            let seed = ctx.replica_seed(offset + i);
            counts.instances += 1;
            counts.duality += checks[0] as usize;
            counts.attractiveness += checks[1] as usize;
            counts.semigroup += checks[2] as usize;
            let _ = writeln!(raw, "{lambda},{i},{seed},{},{},{}", checks[0] as u8, checks[1] as u8, checks[2] as u8);
        }
        let rm = rate_matrix_violations(lambda);
        let passed = [counts.duality, counts.attractiveness, counts.semigroup]
            .iter()
            .all(|&c| c == counts.instances)
            && rm.is_empty();
        violation |= !passed;
        per_lambda.push(json!({
            "lambda": lambda,
            "counts": to_value(&counts),
            "rate_matrix_violations": rm,
            "passed": passed,
        }));
    }
    violation |= !errors.is_empty();
    let report = json!({
        "metadata": ctx.metadata(),
        "window": [window.left(), window.right()],
        "horizon": v.horizon,
        "checks": EXACT_CHECKS,
        "results": per_lambda,
        "passed": !violation,
    });
    Ok(Artifacts {
        raw_csv: raw,
        report,
        extra: Vec::new(),
        errors,
        violation,
    })
}

// ------------------------------------------------------------- walk kinds

/// One walk from the origin over `horizon`, in the configured environment.
pub fn walk_replica(
    loaded: &LoadedConfig,
    seed: u64,
    horizon: f64,
    sample_times: &[f64],
) -> cpwalk::Result<(Trajectory, WalkPath)> {
    let model = &loaded.config.model;
    let tables = loaded.tables.as_ref().expect("walk kinds have a table");
    let window = match model.window {
        Some((l, r)) => LatticeWindow::new(l, r)?,
        None => walker_window(0, tables, horizon, model.window_margin),
    };
    let env = match model.environment {
        Environment::Empty => Configuration::empty(window),
        Environment::Full => Configuration::full(window).with_outside(true),
        Environment::Equilibrium => {
            sample_upper_equilibrium(window, model.lambda, model.equilibrium_time, split_seed(seed, ENV_TAG, 0))?
        }
    };
    let h = sample_harris(window, horizon, model.lambda, tables.mprime(), split_seed(seed, HARRIS_TAG, 0))?;
    simulate_walk(&h, &env, 0, tables, &SpaceTimeRegion::full(&h), sample_times)
}

fn walk_paths(ctx: &Context) -> (Vec<f64>, Completed<WalkPath>, Vec<ReplicaError>) {
    let walk = ctx.loaded.config.walk.as_ref().expect("checked at load");
    let mut horizons = walk.horizons.clone();
    horizons.sort_by(f64::total_cmp);
    horizons.dedup();
    let longest = *horizons.last().expect("non-empty");
    let (ok, errors) = ctx.map_replicas(ctx.replicas, |_, seed| {
        walk_replica(ctx.loaded, seed, longest, &[]).map(|(_, p)| p)
    });
    (horizons, ok, errors)
}

fn endpoints_csv(horizons: &[f64], paths: &[(u64, u64, WalkPath)]) -> String {
    let mut raw = String::from("replica,seed,horizon,endpoint,jumps\n");
    for (i, seed, p) in paths {
        for &t in horizons {
            let jumps = p.jumps.iter().filter(|j| j.0 <= t).count();
            let _ = writeln!(raw, "{i},{seed},{t},{},{jumps}", p.position_at(t) - p.start);
        }
    }
    raw
}

fn endpoints_at(paths: &[(u64, u64, WalkPath)], t: f64) -> Vec<f64> {
    paths.iter().map(|(_, _, p)| (p.position_at(t) - p.start) as f64).collect()
}

fn simulate(ctx: &Context) -> Result<Artifacts, RunError> {
    let (horizons, paths, errors) = walk_paths(ctx);
    let summary: Vec<Value> = horizons
        .iter()
        .map(|&t| {
            let (mean, se) = mean_se(&endpoints_at(&paths, t));
            let jumps: Vec<f64> = paths
                .iter()
                .map(|(_, _, p)| p.jumps.iter().filter(|j| j.0 <= t).count() as f64)
                .collect();
            json!({ "horizon": t, "mean_displacement": mean, "se": se, "mean_jumps": mean_se(&jumps).0 })
        })
        .collect();
    let mut extra = Vec::new();
    // The first replica in full: its path and environment at each horizon.
    let longest = *horizons.last().expect("non-empty");
    if let Ok((traj, path)) = walk_replica(ctx.loaded, ctx.replica_seed(0), longest, &horizons) {
        let mut buf = Vec::new();
        path.write_csv(&mut buf)?;
        extra.push(("path.csv".to_string(), buf));
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf)?;
        extra.push(("environment.csv".to_string(), buf));
    }
    let report = json!({
        "metadata": ctx.metadata(),
        "completed": paths.len(),
        "horizons": summary,
    });
    Ok(Artifacts {
        raw_csv: endpoints_csv(&horizons, &paths),
        report,
        extra,
        violation: false,
        errors,
    })
}

fn clt(ctx: &Context) -> Result<Artifacts, RunError> {
    let gamma = ctx.loaded.config.walk.as_ref().expect("checked").gamma;
    let (horizons, paths, errors) = walk_paths(ctx);
    if paths.len() < 2 {
        return Err(RunError::Runtime(format!("only {} replicas completed", paths.len())));
    }
    let reports = horizons
        .iter()
        .map(|&t| estimate_drift_variance(&endpoints_at(&paths, t), t))
        .collect::<cpwalk::Result<Vec<_>>>()?;
    let longest = reports.last().expect("non-empty");
    let doubling = if reports.len() >= 2 {
        to_value(&doubling_consistency(&reports)?)
    } else {
        Value::Null
    };
    let moments = horizons
        .iter()
        .map(|&t| fourth_moment_ratio(&endpoints_at(&paths, t), t, longest.mu_hat))
        .collect::<cpwalk::Result<Vec<_>>>()?;
    let walks: Vec<WalkPath> = paths.iter().map(|(_, _, p)| p.clone()).collect();
    let fluct = maximal_fluctuation(&walks, longest.mu_hat, gamma, longest.horizon)?;
    let report = json!({
        "metadata": ctx.metadata(),
        "completed": paths.len(),
        "estimates": to_value(&reports),
        "doubling": doubling,
        "fourth_moments": to_value(&moments),
        "fluctuation": to_value(&fluct),
        "fluctuation_bound_holds": fluct.bound_holds(3.0),
    });
    Ok(Artifacts {
        raw_csv: endpoints_csv(&horizons, &paths),
        report,
        extra: Vec::new(),
        violation: false,
        errors,
    })
}

// ------------------------------------------------------------ regen-stats

/// Run parameters from the `[regen]` section.
pub fn run_parameters(loaded: &LoadedConfig, seed: u64) -> Result<RunParameters, RunError> {
    let r = loaded.config.regen.as_ref().expect("checked at load");
    let model = &loaded.config.model;
    let m = model.m.expect("checked at load");
    let mut p = RunParameters::for_scale(r.n, m, 1.0);
    if let Some(b) = r.burn_in {
        p = p.with_burn_in(b);
    }
    if let Some(v) = r.stage1_radius {
        p.stage1_radius = v;
    }
    if let Some(v) = r.stage1_gap {
        p.stage1_gap = v;
    }
    if let Some(v) = r.stage3_radius {
        p.stage3_radius = v;
    }
    if let Some(v) = r.stage3_gap {
        p.stage3_gap = v;
    }
    if let Some(v) = r.inner_radius {
        p.nu.inner_radius = v;
    }
    if let Some(v) = r.p_budget {
        p.p_budget = v;
    }
    p.nu.h1 = match r.h1 {
        Some(h1) => h1,
        None => estimate_h1(model.lambda, p.nu.t_cut, 4000, split_seed(seed, H1_TAG, 0))?.h1,
    };
    let mprime = loaded.tables.as_ref().expect("checked").mprime();
    p.validate(mprime)
        .map_err(|e| RunError::Config(ConfigError::Invalid(e.to_string())))?;
    Ok(p)
}

fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let idx = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len()) - 1;
    Some(sorted[idx])
}

fn regen_stats(ctx: &Context) -> Result<Artifacts, RunError> {
    let section = ctx.loaded.config.regen.clone().expect("checked at load");
    let p = run_parameters(ctx.loaded, ctx.seed)?;
    let tables = ctx.tables();
    let lambda = ctx.lambda();
    let mprime = tables.mprime();
    let window = LatticeWindow::centered(0, p.harris_radius(lambda, mprime, p.run_length));

    let (runs, errors) = ctx.map_replicas(ctx.replicas, |i, seed| {
        let h = sample_harris(window, p.run_length, lambda, mprime, split_seed(seed, HARRIS_TAG, 0))?;
        let quiet = stage2(&h, 0.0, &p);
        let env = sample_nu(&p.nu, lambda, split_seed(seed, ENV_TAG, 0))?.config;
        let out = execute_run(&h, 0.0, &env, 0, tables, &p, seed, i)?;
        Ok((quiet, out.record))
    });
    let nu_densities: Vec<f64> = (0..section.nu_samples as u64)
        .into_par_iter()
        .map(|j| sample_nu(&p.nu, lambda, split_seed(ctx.seed, NU_SAMPLE_TAG, j)))
        .collect::<cpwalk::Result<Vec<_>>>()?
        .iter()
        .map(|s| s.config.count() as f64 / s.config.window().width() as f64)
        .collect();

    let n = runs.len();
    let mut raw = String::from("replica,seed,quiet,stage1,stage2,stage3,stage4,stage5,aborted_at,success,disaster,p_hat,density\n");
    let mut stage_passes = [0usize; 5];
    let mut aborted = [0usize; 5];
    let (mut quiet_count, mut completed, mut successes, mut disasters) = (0, 0, 0, 0);
    let mut densities = Vec::new();
    let mut p_hats = Vec::new();
    for (i, seed, (quiet, rec)) in &runs {
        quiet_count += *quiet as usize;
        for (count, passed) in stage_passes.iter_mut().zip(rec.stages) {
            *count += passed as usize;
        }
        if let Some(a) = rec.aborted_at {
            aborted[a as usize - 1] += 1;
        }
        completed += rec.is_complete() as usize;
        successes += rec.success as usize;
        disasters += rec.disaster as usize;
        let density = rec
            .xi_prime
            .as_ref()
            .filter(|_| rec.success)
            .map(|xi| xi.count() as f64 / xi.window().width() as f64);
        densities.extend(density);
        p_hats.extend(rec.p_hat);
        let b = |v: bool| v as u8;
        let _ = writeln!(
            raw,
            "{i},{seed},{},{},{},{},{},{},{},{},{},{},{}",
            b(*quiet),
            b(rec.stages[0]),
            b(rec.stages[1]),
            b(rec.stages[2]),
            b(rec.stages[3]),
            b(rec.stages[4]),
            rec.aborted_at.map_or(String::new(), |a| a.to_string()),
            b(rec.success),
            b(rec.disaster),
            rec.p_hat.map_or(String::new(), |v| v.to_string()),
            density.map_or(String::new(), |v| v.to_string()),
        );
    }

    let quiet_freq = quiet_count as f64 / n.max(1) as f64;
    let quiet_expected = (-mprime * p.stage2_window).exp();
    let quiet_se = (quiet_expected * (1.0 - quiet_expected) / n.max(1) as f64).sqrt();
    let (succ_mean, succ_se) = mean_se(&densities);
    let (nu_mean, nu_se) = mean_se(&nu_densities);
    let density_z = (succ_mean - nu_mean) / succ_se.hypot(nu_se);
    p_hats.sort_by(f64::total_cmp);

    let renewal = if section.renewal_segments > 0 {
        let params = RenewalParameters::new(p.clone(), lambda, mprime);
        let steps = build_renewal_sequence(split_seed(ctx.seed, RENEWAL_TAG, 0), section.renewal_segments, &params, tables)?;
        let z: Vec<f64> = steps.iter().filter(|s| s.good).map(|s| s.z as f64).collect();
        let r1 = lag_one_autocorrelation(&z);
        json!({
            "segments": steps.len(),
            "good": z.len(),
            "disasters": steps.iter().filter(|s| s.disaster).count(),
            "mean_length": mean_se(&steps.iter().map(|s| s.length).collect::<Vec<_>>()).0,
            "mean_increment": mean_se(&z).0,
            "lag1_autocorrelation": r1,
            "lag1_bound": 3.0 / (z.len() as f64).sqrt(),
        })
    } else {
        Value::Null
    };

    let mut records = Vec::new();
    let recs: Vec<_> = runs.iter().map(|(_, _, (_, r))| r.clone()).collect();
    write_records(&recs, &mut records)?;

    let report = json!({
        "metadata": ctx.metadata(),
        "parameters": to_value(&p),
        "runs": n,
        "stage_passes": stage_passes,
        "aborted_at": aborted,
        "completed": completed,
        "successes": successes,
        "disasters": disasters,
        "quiet": {
            "count": quiet_count,
            "frequency": quiet_freq,
            "expected": quiet_expected,
            "se": quiet_se,
            "z": (quiet_freq - quiet_expected) / quiet_se,
        },
        "density": {
            "success_mean": succ_mean,
            "success_se": succ_se,
            "nu_mean": nu_mean,
            "nu_se": nu_se,
            "nu_samples": nu_densities.len(),
            "z": density_z,
        },
        "p_hat": {
            "count": p_hats.len(),
            "q10": quantile(&p_hats, 0.1),
            "median": quantile(&p_hats, 0.5),
            "q90": quantile(&p_hats, 0.9),
        },
        "renewal": renewal,
    });
    Ok(Artifacts {
        raw_csv: raw,
        report,
        extra: vec![("records.jsonl".to_string(), records)],
        violation: false,
        errors,
    })
}

fn lag_one_autocorrelation(z: &[f64]) -> Option<f64> {
    if z.len() < 3 {
        return None;
    }
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let c0: f64 = z.iter().map(|v| (v - mean).powi(2)).sum();
    let c1: f64 = z.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    (c0 > 0.0).then(|| c1 / c0)
}

// ------------------------------------------------------ survival and speed

fn survival(ctx: &Context) -> Result<Artifacts, RunError> {
    let s = ctx.loaded.config.survival.as_ref().expect("checked at load");
    let options = SurvivalOptions {
        margin: s.margin,
        seed: ctx.seed,
        ..SurvivalOptions::default()
    };
    let report = survival_tail(ctx.lambda(), &s.t_grid, ctx.replicas, &options)?;
    let mut raw = Vec::new();
    report.write_csv(&mut raw)?;
    let non_increasing = report.frequencies.windows(2).all(|w| w[1] <= w[0]);
    let decreasing = non_increasing && report.slope.is_some_and(|b| b < 0.0);
    let json = json!({
        "metadata": ctx.metadata(),
        "tail": to_value(&report),
        "decreasing": decreasing,
    });
    Ok(Artifacts {
        raw_csv: String::from_utf8(raw).expect("ascii csv"),
        report: json,
        extra: Vec::new(),
        violation: false,
        errors: Vec::new(),
    })
}

fn speed(ctx: &Context) -> Result<Artifacts, RunError> {
    let s = ctx.loaded.config.speed.as_ref().expect("checked at load");
    let mut raw = String::from("horizon,speed,se,ci_low,ci_high\n");
    let mut estimates = Vec::new();
    for (k, &t) in s.horizons.iter().enumerate() {
        let e = edge_speed(ctx.lambda(), t, ctx.replicas, split_seed(ctx.seed, Kind::Speed.tag(), k as u64))?;
        let _ = writeln!(raw, "{t},{},{},{},{}", e.speed, e.se, e.ci.0, e.ci.1);
        estimates.push(e);
    }
    let report = json!({
        "metadata": ctx.metadata(),
        "estimates": to_value(&estimates),
    });
    Ok(Artifacts {
        raw_csv: raw,
        report,
        extra: Vec::new(),
        violation: false,
        errors: Vec::new(),
    })
}
