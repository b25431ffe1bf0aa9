use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear_fit;
use crate::contact::Configuration;
use crate::error::{Error, Result};
use crate::harris::sweep::{occupancy_of, ForwardSweep};
use crate::harris::{sample_harris, LatticeWindow};
use crate::rng::split_seed;

const REPLICA_TAG: u64 = 0x7375;
const BLOCK_TAG: u64 = 0x626c;
const SPEED_TAG: u64 = 0x7370;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalOptions {
    /// Alive at `max(t_grid) + margin` counts as surviving forever.
    pub margin: f64,
    /// Time blocks in which the Harris system is sampled around the
    /// occupied hull.
    pub block: f64,
    /// Sites added on each side of the occupied hull per block.
    pub pad: u64,
    pub seed: u64,
}

impl Default for SurvivalOptions {
    fn default() -> Self {
        Self {
            margin: 20.0,
            block: 2.0,
            pad: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub lambda: f64,
    pub t_grid: Vec<f64>,
    pub horizon: f64,
    pub replicas: usize,
    pub alive_at_horizon: usize,
    pub dead_by: Vec<usize>,
    /// Replicas with `t < tau <= horizon`, per grid point.
    pub died_between: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub slope_se: Option<f64>,
    pub r2: Option<f64>,
    /// Grid points with a non-empty late-death class.
    pub fitted_points: usize,
    /// Too few late deaths for a trustworthy fit.
    pub flagged: bool,
}

impl SurvivalReport {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,dead_by,died_between,alive_at_horizon,frequency")?;
        for (i, t) in self.t_grid.iter().enumerate() {
            writeln!(
                out,
                "{t},{},{},{},{}",
                self.dead_by[i], self.died_between[i], self.alive_at_horizon, self.frequencies[i]
            )?;
        }
        Ok(())
    }
}

/// Extinction time of the process started from `{0}`, or `None` if it is
/// alive at `horizon`.
fn extinction_time(lambda: f64, horizon: f64, options: &SurvivalOptions, seed: u64) -> Result<Option<f64>> {
    let pad = options.pad as i64;
    let mut config = Configuration::from_sites(LatticeWindow::centered(0, options.pad), [0]);
    let mut t = 0.0;
    let mut k = 0;
    while t < horizon {
        let dur = options.block.min(horizon - t);
        let (lo, hi) = {
            let mut occ = config.occupied_sites();
            let lo = occ.next().expect("process alive");
            (lo, occ.last().unwrap_or(lo))
        };
        let window = LatticeWindow::new(lo - pad, hi + pad)?;
        let h = sample_harris(window, dur, lambda, 0.0, split_seed(seed, BLOCK_TAG, k))?;
        let mut sweep = ForwardSweep::new(&h, occupancy_of(&h, &config), 0.0, dur, None);
        sweep.advance_to(dur);
        if let Some(e) = sweep.extinct_at() {
            return Ok(Some(t + e));
        }
        config = Configuration::new(window, sweep.into_occupancy(), false)?;
        t += dur;
        k += 1;
    }
    Ok(None)
}

/// Classifies singleton starts by extinction time and fits the log
/// frequency of `t < tau <= horizon` against `t`.
pub fn survival_tail(lambda: f64, t_grid: &[f64], replicas: usize, options: &SurvivalOptions) -> Result<SurvivalReport> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid[0] < 0.0 {
        return Err(Error::InvalidArgument("t_grid must be non-empty, non-negative and increasing".into()));
    }
    if replicas == 0 || !(options.margin > 0.0) || !(options.block > 0.0) {
        return Err(Error::InvalidArgument("survival_tail needs replicas, margin and block > 0".into()));
    }
    let horizon = t_grid[t_grid.len() - 1] + options.margin;
    let taus = (0..replicas as u64)
        .into_par_iter()
        .map(|r| extinction_time(lambda, horizon, options, split_seed(options.seed, REPLICA_TAG, r)))
        .collect::<Result<Vec<_>>>()?;
    let alive_at_horizon = taus.iter().filter(|t| t.is_none()).count();
    let dead_by: Vec<usize> = t_grid
        .iter()
        .map(|&t| taus.iter().filter(|tau| tau.is_some_and(|x| x <= t)).count())
        .collect();
    let died_between: Vec<usize> = dead_by.iter().map(|d| replicas - alive_at_horizon - d).collect();
    let frequencies: Vec<f64> = died_between.iter().map(|&c| c as f64 / replicas as f64).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(&frequencies)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&t, &f)| (t, f.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys);
    let flagged = xs.len() < 3 || died_between.iter().any(|&c| c < 5);
    Ok(SurvivalReport {
        lambda,
        t_grid: t_grid.to_vec(),
        horizon,
        replicas,
        alive_at_horizon,
        dead_by,
        died_between,
        frequencies,
        slope: fit.map(|f| f.1),
        intercept: fit.map(|f| f.0),
        slope_se: fit.map(|f| f.2),
        r2: fit.map(|f| f.3),
        fitted_points: xs.len(),
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub lambda: f64,
    pub horizon: f64,
    pub replicas: usize,
    pub speed: f64,
    pub se: f64,
    pub ci: (f64, f64),
}

/// Speed of the rightmost particle started from the occupied half-line
/// `(-inf, 0]`, from per-replica increments `(r_T - r_{T/2}) / (T/2)`.
pub fn edge_speed(lambda: f64, horizon: f64, replicas: usize, seed: u64) -> Result<SpeedEstimate> {
    if replicas < 2 || !(horizon > 0.0) {
        return Err(Error::InvalidArgument("edge_speed needs at least 2 replicas and T > 0".into()));
    }
    let reach = lambda * horizon;
    let radius = (reach + 6.0 * reach.sqrt() + 10.0).ceil() as i64;
    let window = LatticeWindow::new(-radius, radius)?;
    let half = horizon / 2.0;
    let rightmost = |occ: &[bool]| occ.iter().rposition(|&b| b).map_or(-radius - 1, |i| window.site_at(i));
    let mut increments = (0..replicas as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let h = sample_harris(window, horizon, lambda, 0.0, split_seed(seed, SPEED_TAG, r))?;
            let occ = window.sites().map(|x| x <= 0).collect();
            let mut sweep = ForwardSweep::new(&h, occ, 0.0, horizon, None);
            sweep.advance_to(half);
            let mid = rightmost(sweep.occupancy());
            sweep.advance_to(horizon);
            Ok((rightmost(sweep.occupancy()) - mid) as f64 / half)
        })
        .collect::<Result<Vec<_>>>()?;
    increments.sort_by(f64::total_cmp);
    let n = replicas as f64;
    let speed = increments.iter().sum::<f64>() / n;
    let var = increments.iter().map(|v| (v - speed).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    Ok(SpeedEstimate {
        lambda,
        horizon,
        replicas,
        speed,
        se,
        ci: (speed - 1.96 * se, speed + 1.96 * se),
    })
}
