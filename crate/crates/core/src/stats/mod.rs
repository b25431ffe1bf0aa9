//! Estimators and diagnostics over replica output.
//!
//! Every estimator sorts its sample first, so results do not depend on the
//! order in which replicas finished.

mod survival;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub use survival::{edge_speed, survival_tail, SpeedEstimate, SurvivalOptions, SurvivalReport};

use crate::error::{Error, Result};
use crate::walker::WalkPath;

/// Level at which normality is rejected.
pub const KS_LEVEL: f64 = 0.01;

/// Drift and variance-rate estimates for one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mu_hat: f64,
    pub mu_se: f64,
    pub alpha2_hat: f64,
    pub alpha2_se: f64,
    pub alpha2_ci: (f64, f64),
    pub n_replicas: usize,
    pub horizon: f64,
    /// Kolmogorov-Smirnov statistic of the standardised endpoints; `None`
    /// for a degenerate sample.
    pub ks_stat: Option<f64>,
    pub ks_p: Option<f64>,
    pub ad_stat: Option<f64>,
    /// All endpoints equal.
    pub degenerate: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl EstimateReport {
    pub fn with_metadata(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// KS p-value at or above [`KS_LEVEL`].
    pub fn looks_normal(&self) -> bool {
        self.ks_p.is_some_and(|p| p >= KS_LEVEL)
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

/// Asymptotic Kolmogorov distribution tail `P(K > x)`.
fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic of a sorted sample against `cdf`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// KS p-value with Stephens' finite-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)
}

/// Anderson-Darling statistic of a sorted sample against `cdf`.
pub fn anderson_darling(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len();
    let f: Vec<f64> = sorted.iter().map(|&x| cdf(x).clamp(1e-300, 1.0 - 1e-16)).collect();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (f[i].ln() + (1.0 - f[n - 1 - i]).ln()))
        .sum();
    -(n as f64) - s / n as f64
}

/// `mu_hat = mean / T`, `alpha2_hat = variance / T`, and normality of the
/// standardised endpoints. Deviations are taken from the smallest endpoint,
/// so translating integer endpoints leaves `alpha2_hat` and the test
/// statistics bit-identical.
pub fn estimate_drift_variance(endpoints: &[f64], horizon: f64) -> Result<EstimateReport> {
    let n = endpoints.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 endpoints, got {n}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::BadHorizon(horizon));
    }
    let xs = sorted(endpoints);
    let base = xs[0];
    let ys: Vec<f64> = xs.iter().map(|x| x - base).collect();
    let nf = n as f64;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let dev: Vec<f64> = ys.iter().map(|y| y - mean_y).collect();
    let var = dev.iter().map(|d| d * d).sum::<f64>() / (nf - 1.0);
    let m4 = dev.iter().map(|d| d.powi(4)).sum::<f64>() / nf;
    let mu_hat = (base + mean_y) / horizon;
    let mu_se = (var / nf).sqrt() / horizon;
    let alpha2_hat = var / horizon;
    let alpha2_se = ((m4 - var * var).max(0.0) / nf).sqrt() / horizon;
    let alpha2_ci = ((alpha2_hat - 1.96 * alpha2_se).max(0.0), alpha2_hat + 1.96 * alpha2_se);
    let degenerate = var == 0.0;
    let (ks_stat, ks_p, ad_stat) = if degenerate {
        (None, None, None)
    } else {
        let sd = var.sqrt();
        let z: Vec<f64> = dev.iter().map(|d| d / sd).collect();
        let normal = standard_normal();
        let d = ks_statistic(&z, |x| normal.cdf(x));
        (Some(d), Some(ks_pvalue(d, n)), Some(anderson_darling(&z, |x| normal.cdf(x))))
    };
    Ok(EstimateReport {
        mu_hat,
        mu_se,
        alpha2_hat,
        alpha2_se,
        alpha2_ci,
        n_replicas: n,
        horizon,
        ks_stat,
        ks_p,
        ad_stat,
        degenerate,
        metadata: BTreeMap::new(),
    })
}

/// Consecutive-horizon comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingRow {
    pub horizon: f64,
    pub next_horizon: f64,
    pub drift_diff: f64,
    pub drift_diff_se: f64,
    pub variance_ratio: f64,
    pub variance_ratio_se: f64,
}

impl DoublingRow {
    pub fn drift_consistent(&self, k: f64) -> bool {
        self.drift_diff.abs() <= k * self.drift_diff_se
    }

    /// Ratio within `k` standard errors of 1.
    pub fn ratio_consistent(&self, k: f64) -> bool {
        (self.variance_ratio - 1.0).abs() <= k * self.variance_ratio_se
    }
}

/// `mu(2T) - mu(T)` and `alpha2(2T) / alpha2(T)` for successive reports,
/// with independent-sample standard errors (delta method for the ratio).
pub fn doubling_consistency(reports: &[EstimateReport]) -> Result<Vec<DoublingRow>> {
    if reports.len() < 2 {
        return Err(Error::InvalidArgument("doubling table needs at least 2 horizons".into()));
    }
    let mut rs: Vec<&EstimateReport> = reports.iter().collect();
    rs.sort_by(|a, b| a.horizon.total_cmp(&b.horizon));
    Ok(rs
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let ratio = b.alpha2_hat / a.alpha2_hat;
            let rel = (a.alpha2_se / a.alpha2_hat).powi(2) + (b.alpha2_se / b.alpha2_hat).powi(2);
            DoublingRow {
                horizon: a.horizon,
                next_horizon: b.horizon,
                drift_diff: b.mu_hat - a.mu_hat,
                drift_diff_se: a.mu_se.hypot(b.mu_se),
                variance_ratio: ratio,
                variance_ratio_se: ratio.abs() * rel.sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRatio {
    pub horizon: f64,
    pub ratio: f64,
    pub se: f64,
}

/// `E[(X_T - mu T)^4] / T^2` with a jackknife standard error.
pub fn fourth_moment_ratio(endpoints: &[f64], horizon: f64, mu: f64) -> Result<MomentRatio> {
    let n = endpoints.len();
    if n < 2 || !(horizon > 0.0) {
        return Err(Error::InvalidArgument("fourth moment needs 2 endpoints and T > 0".into()));
    }
    let v: Vec<f64> = sorted(endpoints)
        .iter()
        .map(|x| (x - mu * horizon).powi(4) / (horizon * horizon))
        .collect();
    let nf = n as f64;
    let total: f64 = v.iter().sum();
    let ratio = total / nf;
    let loo: Vec<f64> = v.iter().map(|vi| (total - vi) / (nf - 1.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let se = ((nf - 1.0) / nf * loo.iter().map(|t| (t - loo_mean).powi(2)).sum::<f64>()).sqrt();
    Ok(MomentRatio { horizon, ratio, se })
}

/// Maximal excursion against the endpoint event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub horizon: f64,
    pub gamma: f64,
    pub threshold: f64,
    /// Frequency of `sup_{s<=T} |X_s - s mu| >= T^{(1+gamma)/2}`.
    pub max_freq: f64,
    /// Frequency of `|X_T - T mu| >= T^{(1+gamma)/2} / 2`.
    pub end_freq: f64,
    /// `max_freq / end_freq`, absent when the endpoint event never occurs.
    pub ratio: Option<f64>,
    /// Standard error of `max_freq - 2 end_freq`.
    pub diff_se: f64,
    pub n_replicas: usize,
}

impl FluctuationReport {
    /// `max_freq <= 2 end_freq` up to `k` standard errors.
    pub fn bound_holds(&self, k: f64) -> bool {
        self.max_freq - 2.0 * self.end_freq <= k * self.diff_se
    }
}

fn sup_deviation(path: &WalkPath, mu: f64, horizon: f64) -> f64 {
    let t0 = path.start_time;
    let mut worst: f64 = 0.0;
    let mut x = 0.0;
    let mut seg_start = t0;
    for &(t, y) in path.jumps.iter().filter(|j| j.0 <= t0 + horizon) {
        worst = worst.max((x - mu * (seg_start - t0)).abs()).max((x - mu * (t - t0)).abs());
        x = (y - path.start) as f64;
        seg_start = t;
    }
    worst.max((x - mu * (seg_start - t0)).abs()).max((x - mu * horizon).abs())
}

/// Empirical maximal inequality over complete paths on `[0, horizon]`.
pub fn maximal_fluctuation(paths: &[WalkPath], mu: f64, gamma: f64, horizon: f64) -> Result<FluctuationReport> {
    if paths.is_empty() || !(horizon > 0.0) {
        return Err(Error::InvalidArgument("maximal_fluctuation needs paths and T > 0".into()));
    }
    if let Some(p) = paths.iter().find(|p| p.end_time - p.start_time < horizon) {
        return Err(Error::InvalidArgument(format!("path ends at {} before the horizon", p.end_time)));
    }
    let threshold = horizon.powf((1.0 + gamma) / 2.0);
    let events: Vec<(bool, bool)> = paths
        .iter()
        .map(|p| {
            let end = (p.position_at(p.start_time + horizon) - p.start) as f64;
            (
                sup_deviation(p, mu, horizon) >= threshold,
                (end - mu * horizon).abs() >= threshold / 2.0,
            )
        })
        .collect();
    let n = events.len() as f64;
    let max_freq = events.iter().filter(|e| e.0).count() as f64 / n;
    let end_freq = events.iter().filter(|e| e.1).count() as f64 / n;
    // Per-replica 1{max} - 2 * 1{end}; its mean is max_freq - 2 end_freq.
    let mean = max_freq - 2.0 * end_freq;
    let ss: f64 = [(false, false), (false, true), (true, false), (true, true)]
        .iter()
        .map(|&(m, e)| {
            let count = events.iter().filter(|&&x| x == (m, e)).count() as f64;
            count * (f64::from(u8::from(m)) - 2.0 * f64::from(u8::from(e)) - mean).powi(2)
        })
        .sum();
    let var = if events.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    Ok(FluctuationReport {
        horizon,
        gamma,
        threshold,
        max_freq,
        end_freq,
        ratio: (end_freq > 0.0).then(|| max_freq / end_freq),
        diff_se: (var / n).sqrt(),
        n_replicas: paths.len(),
    })
}

/// Unweighted least squares `y = a + b x`: `(intercept, slope, slope_se, r2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    Some((intercept, slope, slope_se, r2))
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// CSV of a doubling table.
pub fn write_doubling_csv<W: Write>(rows: &[DoublingRow], mut out: W) -> Result<()> {
    writeln!(out, "horizon,next_horizon,drift_diff,drift_diff_se,variance_ratio,variance_ratio_se")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.horizon, r.next_horizon, r.drift_diff, r.drift_diff_se, r.variance_ratio, r.variance_ratio_se
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
