//! Regeneration runs.
//!
//! A run started at time `t` has a burn-in `(t, t + b]` followed by a quiet
//! window `(t + b, t + L]`. It passes five stages in order:
//!
//! 1. no long vacant gap near the walker at `t`;
//! 2. few walker clock points during the burn-in and none in the quiet window;
//! 3. no short vacant gap near the walker at `t + b`;
//! 4. every inner-window dual that survives back `t_cut` from `t + L` also
//!    meets the mass condition, which defines the replacement `xi'`;
//! 5. `xi'` agrees with the true configuration on the inner window, accepted
//!    with probability `min(1, (3/4) / p)`.
//!
//! A run completes when it succeeds or fails stage 1; the first completion
//! time is the regeneration time `sigma`.

mod coupling;
mod renewal;
mod run;

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coupling::{coupling_experiment, coupling_pair, CouplingOutcome, CouplingSetup};
pub use renewal::{build_renewal_sequence, run_segment, RenewalParameters, RenewalStep, SegmentOutcome};
pub use run::{execute_run, find_sigma, RunOutcome, SigmaSearch};

use crate::contact::{gap_scan, Configuration};
use crate::dual::{inner_duals, log4, marks_from_duals, NuParameters};
use crate::error::{Error, Result};
use crate::harris::sweep::{occupancy_of, ForwardSweep};
use crate::harris::{sample_harris, HarrisSystem, LatticeWindow};
use crate::rng::{seeded, split_seed};

const CONTINUATION_TAG: u64 = 0x636f6e74;
const UNIFORM_TAG: u64 = 0x756e6966;
pub(crate) const RUN_TAG: u64 = 0x72756e;
pub(crate) const REPLACEMENT_TAG: u64 = 0x7265706c;

/// Scales of one run. Paper-scale defaults come from [`RunParameters::for_scale`];
/// at runnable `n` the radii and the burn-in are overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParameters {
    pub n: u32,
    /// Burn-in plus quiet window; `n^4 + ln(n)^4` by default.
    pub run_length: f64,
    /// Quiet window; `ln(n)^4` by default.
    pub stage2_window: f64,
    pub stage1_gap: usize,
    pub stage1_radius: u64,
    pub stage3_gap: usize,
    pub stage3_radius: u64,
    /// Bound on the burn-in clock rate; must exceed `M'`.
    pub m: f64,
    pub nu: NuParameters,
    /// Continuations used to estimate the stage-5 probability.
    pub p_budget: usize,
}

impl RunParameters {
    pub fn for_scale(n: u32, m: f64, h1: f64) -> Self {
        let nf = n as f64;
        let quiet = log4(n);
        Self {
            n,
            run_length: nf.powi(4) + quiet,
            stage2_window: quiet,
            stage1_gap: nf.powf(1.5).round() as usize,
            stage1_radius: 2 * (n as u64).pow(2) * 2u64.saturating_pow(n),
            stage3_gap: (nf.ln().powf(1.5).ceil() as usize).max(1),
            stage3_radius: (n as u64).saturating_pow(9),
            m,
            nu: NuParameters::for_scale(n, h1),
            p_budget: 200,
        }
    }

    /// Same parameters with the burn-in replaced.
    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.run_length = burn_in + self.stage2_window;
        self
    }

    pub fn burn_in(&self) -> f64 {
        self.run_length - self.stage2_window
    }

    pub fn validate(&self, mprime: f64) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("run parameters: {what}")));
        self.nu.validate()?;
        if !(self.stage2_window > 0.0 && self.stage2_window < self.run_length && self.run_length.is_finite()) {
            return bad("need 0 < stage2_window < run_length");
        }
        if self.nu.t_cut > self.stage2_window {
            return bad("t_cut must fit inside the quiet window");
        }
        if self.stage1_gap == 0 || self.stage3_gap == 0 || self.stage1_radius == 0 || self.stage3_radius == 0 {
            return bad("gaps and radii must be positive");
        }
        if !(self.m > mprime) {
            return bad("M must exceed Mprime");
        }
        if self.p_budget == 0 {
            return bad("p_budget must be positive");
        }
        Ok(())
    }

    /// Distance from the walker that a run inspects.
    pub fn reach(&self, lambda: f64) -> u64 {
        let nu = self.nu.inner_radius + self.nu.margin_for(lambda);
        self.stage1_radius.max(self.stage3_radius).max(nu)
    }

    /// Radius of a Harris window, centred at the walker, that hosts runs
    /// over `duration`: the inspected reach plus the walker's displacement
    /// and the environment's influence range, each with six deviations.
    pub fn harris_radius(&self, lambda: f64, mprime: f64, duration: f64) -> u64 {
        let spread = |rate: f64| {
            let mean = rate * duration;
            (mean + 6.0 * mean.sqrt()).ceil() as u64
        };
        self.reach(lambda) + spread(mprime) + spread(lambda) + 2
    }

    pub(crate) fn check_reach(&self, h: &HarrisSystem, center: i64) -> Result<()> {
        let need = LatticeWindow::centered(center, self.reach(h.lambda()));
        if h.window().contains_window(&need) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "run at {center} needs sites {}..={} inside the Harris window {}..={}",
                need.left(),
                need.right(),
                h.window().left(),
                h.window().right()
            )))
        }
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: u64,
    pub seed: u64,
    pub start: f64,
    pub end: f64,
    pub start_position: i64,
    pub end_position: i64,
    /// Stage `k` was reached and passed.
    pub stages: [bool; 5],
    /// 1-based index of the failing stage.
    pub aborted_at: Option<u8>,
    pub success: bool,
    pub disaster: bool,
    pub sigma: Option<f64>,
    pub xi_prime: Option<Configuration>,
    pub p_hat: Option<f64>,
    pub uniform: Option<f64>,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.sigma.is_some()
    }
}

/// One JSON object per line.
pub fn write_records<W: Write>(records: &[RunRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(input: R) -> Result<Vec<RunRecord>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(|e| Error::Format(e.to_string())))
        .collect()
}

/// No vacant run of length `stage1_gap` or more strictly within
/// `stage1_radius` of `center`.
pub fn stage1(config: &Configuration, center: i64, params: &RunParameters) -> bool {
    let interval = LatticeWindow::centered(center, params.stage1_radius - 1);
    gap_scan(config, interval, params.stage1_gap).is_empty()
}

/// Clock count on `(t, t + b]` below `M b`, and no clock point on
/// `(t + b, t + L]`.
pub fn stage2(h: &HarrisSystem, t: f64, params: &RunParameters) -> bool {
    let b = params.burn_in();
    (h.clock_count(t, t + b) as f64) < params.m * b && h.clock_count(t + b, t + params.run_length) == 0
}

/// No vacant run of length `stage3_gap` or more within `stage3_radius` of
/// `center`.
pub fn stage3(config: &Configuration, center: i64, params: &RunParameters) -> bool {
    let interval = LatticeWindow::centered(center, params.stage3_radius);
    gap_scan(config, interval, params.stage3_gap).is_empty()
}

/// Builds `xi'` at `t + L` from the inner-window duals around `center` and
/// passes iff every surviving dual also qualifies.
pub fn stage4(h: &HarrisSystem, t: f64, center: i64, params: &RunParameters) -> (bool, Configuration) {
    let duals = inner_duals(h, &params.nu, center, t + params.run_length);
    let (qualifying, surviving) = marks_from_duals(h, &params.nu, center, &duals);
    (surviving.le(&qualifying.clone().with_outside(false)), qualifying)
}

/// The stage-5 randomisation: pass iff agreement holds and
/// `u <= min(1, (3/4) / p_hat)`.
pub fn stage5_accepts(agreement: bool, p_hat: f64, u: f64) -> bool {
    agreement && u <= (0.75 / p_hat).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage5Outcome {
    pub passed: bool,
    pub agreement: bool,
    pub p_hat: f64,
    pub uniform: f64,
}

/// Stage 5 for the run started at `t` with the walker at `center` during
/// the quiet window. `xi_burn` is the configuration at `t + b`.
///
/// `p_hat` is the fraction of `p_budget` continuations, each resampling the
/// Harris events on `(t + b, t + L - t_cut]` and keeping those above, in
/// which `xi'` agrees with the resulting configuration on the inner window.
/// Continuations are sampled on the inner window widened by twice the dual
/// margin.
pub fn stage5(
    h: &HarrisSystem,
    t: f64,
    center: i64,
    xi_burn: &Configuration,
    xi_prime: &Configuration,
    params: &RunParameters,
    aux_seed: u64,
) -> Result<Stage5Outcome> {
    let nu = &params.nu;
    let inner = nu.inner_window(center);
    let (t0, t1) = (t + params.burn_in(), t + params.run_length);
    let lower = t1 - nu.t_cut - t0;

    let mut sweep = ForwardSweep::new(h, occupancy_of(h, xi_burn), t0, t1, None);
    sweep.advance_to(t1);
    let truth = Configuration::from_bits(h.window(), sweep.into_occupancy(), false);
    let agreement = xi_prime.agrees_on(&truth, inner);

    let hw = h.window();
    let duals: Vec<Vec<i64>> = inner_duals(h, nu, center, t1)
        .into_iter()
        .map(|d| d.into_iter().map(|i| hw.site_at(i)).collect())
        .collect();
    let wide = 2 * nu.margin_for(h.lambda()) as i64;
    let sub = LatticeWindow::new(inner.left() - wide, inner.right() + wide)?
        .intersect(&hw)
        .expect("inner window inside the Harris window");
    let start = xi_burn.rewindowed(sub).with_outside(false);
    let agrees = |mid: &Configuration| {
        inner
            .sites()
            .zip(&duals)
            .all(|(x, d)| xi_prime.get(x) == d.iter().any(|&y| mid.get(y)))
    };
    let hits: usize = (0..params.p_budget as u64)
        .into_par_iter()
        .map(|j| -> Result<usize> {
            if lower <= 0.0 {
                return Ok(usize::from(agrees(&start)));
            }
            let piece = sample_harris(sub, lower, h.lambda(), 0.0, split_seed(aux_seed, CONTINUATION_TAG, j))?;
            let mut s = ForwardSweep::new(&piece, start.bits().to_vec(), 0.0, lower, None);
            s.advance_to(lower);
            let mid = Configuration::from_bits(sub, s.into_occupancy(), false);
            Ok(usize::from(agrees(&mid)))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p_hat = hits as f64 / params.p_budget as f64;
    let uniform: f64 = seeded(split_seed(aux_seed, UNIFORM_TAG, 0)).random();
    Ok(Stage5Outcome {
        passed: stage5_accepts(agreement, p_hat, uniform),
        agreement,
        p_hat,
        uniform,
    })
}

#[cfg(test)]
mod tests;
