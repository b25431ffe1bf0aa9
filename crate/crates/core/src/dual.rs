//! Dual processes, the duality identity, and the two equilibrium samplers:
//! the truncated upper invariant measure and the approximate equilibrium
//! `nu(n)` with its vacant-free exterior.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::contact::Configuration;
use crate::error::{Error, Result};
use crate::harris::sweep::{occupancy_of, BackwardSweep, ForwardSweep};
use crate::harris::{reachable_set, sample_harris, HarrisSystem, LatticeWindow, SpaceTimeRegion};
use crate::rng::split_seed;

pub(crate) const NU_TAG: u64 = 0x6e75;
const H1_TAG: u64 = 0x6831;

/// Sites `y` such that `(y, t - s)` connects to `b x {t}` inside `region`.
pub fn dual_set(h: &HarrisSystem, b: &Configuration, t: f64, s: f64, region: &SpaceTimeRegion) -> Configuration {
    assert!(0.0 <= s && s <= t, "dual_set needs 0 <= s <= t");
    let mut sweep = BackwardSweep::new(h, occupancy_of(h, b), t - s, t, Some(region));
    sweep.retreat_to(t - s);
    Configuration::from_bits(h.window(), sweep.into_occupancy(), false)
}

/// Backward survival of the singleton `{site}` from `t` over a duration
/// `s`, returning the dual set (whole window, unrestricted region).
fn singleton_dual(h: &HarrisSystem, site: i64, t: f64, s: f64) -> Vec<bool> {
    let mut occ = vec![false; h.window().width()];
    occ[h.window().index_of(site).expect("site inside window")] = true;
    let mut sweep = BackwardSweep::new(h, occ, t - s, t, None);
    sweep.retreat_to(t - s);
    sweep.into_occupancy()
}

/// Checks `xi^A_t ∩ B ≠ ∅  <=>  A ∩ dual^{B,t}_t ≠ ∅` on this realisation.
pub fn check_duality(h: &HarrisSystem, a: &Configuration, b: &Configuration, t: f64) -> bool {
    let region = SpaceTimeRegion::full(h);
    let forward = reachable_set(h, a, 0.0, t, &region);
    let backward = dual_set(h, b, t, t, &region);
    let a_in = a.rewindowed(h.window()).with_outside(false);
    let b_in = b.rewindowed(h.window()).with_outside(false);
    forward.intersects(&b_in) == a_in.intersects(&backward)
}

/// Marks the sites whose dual survives for `t_cut`, all sites sharing one
/// Harris system. By duality this equals the forward evolution of the
/// fully occupied window over `[0, t_cut]`, which is how it is computed.
pub fn sample_upper_equilibrium(window: LatticeWindow, lambda: f64, t_cut: f64, seed: u64) -> Result<Configuration> {
    if t_cut <= 0.0 {
        return Ok(Configuration::full(window));
    }
    let h = sample_harris(window, t_cut, lambda, 0.0, seed)?;
    Ok(upper_equilibrium_from(&h))
}

pub(crate) fn upper_equilibrium_from(h: &HarrisSystem) -> Configuration {
    let mut sweep = ForwardSweep::new(h, vec![true; h.window().width()], 0.0, h.horizon(), None);
    sweep.advance_to(h.horizon());
    Configuration::from_bits(h.window(), sweep.into_occupancy(), false)
}

/// Scale parameters of the approximate equilibrium `nu(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuParameters {
    pub n: u32,
    /// Dual survival time; `ln(n)^4 / 2` by default.
    pub t_cut: f64,
    /// Half-width of the inner window; `n^9` by default.
    pub inner_radius: u64,
    /// Mass constant of the inner-window condition.
    pub h1: f64,
    /// Extra sites on each side of the inner window for the dual walks.
    /// `None` sizes it from the link rate.
    #[serde(default)]
    pub margin: Option<u64>,
    #[serde(default = "default_attempts")]
    pub max_attempts: u64,
}

fn default_attempts() -> u64 {
    100_000
}

pub fn log4(n: u32) -> f64 {
    (n as f64).ln().powi(4)
}

impl NuParameters {
    /// Literal scale formulas. At small `n` they are degenerate and callers
    /// are expected to override `inner_radius`.
    pub fn for_scale(n: u32, h1: f64) -> Self {
        Self {
            n,
            t_cut: log4(n) / 2.0,
            inner_radius: (n as u64).saturating_pow(9),
            h1,
            margin: None,
            max_attempts: default_attempts(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.t_cut > 0.0) || self.inner_radius < 1 || !(self.h1 > 0.0) || self.max_attempts == 0 {
            return Err(Error::InvalidArgument(format!("invalid nu parameters {self:?}")));
        }
        Ok(())
    }

    pub fn inner_window(&self, center: i64) -> LatticeWindow {
        LatticeWindow::centered(center, self.inner_radius)
    }

    pub fn margin_for(&self, lambda: f64) -> u64 {
        self.margin.unwrap_or_else(|| {
            let reach = lambda * self.t_cut;
            (reach + 6.0 * reach.sqrt()).ceil() as u64 + 2
        })
    }

    /// Minimum inner-window mass of a qualifying dual.
    pub fn mass_threshold(&self) -> f64 {
        (self.h1 * self.t_cut).max(f64::MIN_POSITIVE)
    }
}

/// For each site of the inner window centred at `center`, the window
/// indices occupied by its singleton dual run back `t_cut` from `t`.
pub(crate) fn inner_duals(h: &HarrisSystem, params: &NuParameters, center: i64, t: f64) -> Vec<Vec<usize>> {
    params
        .inner_window(center)
        .sites()
        .map(|x| {
            let dual = singleton_dual(h, x, t, params.t_cut);
            dual.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
        })
        .collect()
}

/// `(qualifying, surviving)` marks of the inner window from its duals:
/// `xi'` (occupied outside) and `xi~` (vacant outside).
pub(crate) fn marks_from_duals(
    h: &HarrisSystem,
    params: &NuParameters,
    center: i64,
    duals: &[Vec<usize>],
) -> (Configuration, Configuration) {
    let inner = params.inner_window(center);
    let w = h.window();
    let (lo, hi) = (
        w.index_of(inner.left()).expect("inner window inside harris window"),
        w.index_of(inner.right()).expect("inner window inside harris window"),
    );
    let threshold = params.mass_threshold();
    let surviving: Vec<bool> = duals.iter().map(|d| !d.is_empty()).collect();
    let qualifying = duals
        .iter()
        .map(|d| !d.is_empty() && d.iter().filter(|&&i| (lo..=hi).contains(&i)).count() as f64 >= threshold)
        .collect();
    (
        Configuration::from_bits(inner, qualifying, true),
        Configuration::from_bits(inner, surviving, false),
    )
}

/// Inner-window configurations built from duals running back `t_cut` from
/// `t` on `h`: `(qualifying, surviving)`, i.e. `xi'` and `xi~` restricted to
/// the inner window centred at `center`.
pub(crate) fn dual_marks(
    h: &HarrisSystem,
    params: &NuParameters,
    center: i64,
    t: f64,
) -> (Configuration, Configuration) {
    let duals = inner_duals(h, params, center, t);
    marks_from_duals(h, params, center, &duals)
}

/// One accepted draw from `nu(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuSample {
    /// Inner window centred at 0; `outside` is occupied.
    pub config: Configuration,
    pub attempts: u64,
}

impl NuSample {
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.attempts as f64
    }
}

/// Draws from `nu(n)` by rejection: resample the shared Harris system until
/// every inner site whose dual survives `t_cut` also meets the mass
/// condition.
pub fn sample_nu(params: &NuParameters, lambda: f64, seed: u64) -> Result<NuSample> {
    params.validate()?;
    let inner = params.inner_window(0);
    let margin = params.margin_for(lambda);
    let window = LatticeWindow::new(inner.left() - margin as i64, inner.right() + margin as i64)?;
    for attempt in 0..params.max_attempts {
        let h = sample_harris(window, params.t_cut, lambda, 0.0, split_seed(seed, NU_TAG, attempt))?;
        let (qualifying, surviving) = dual_marks(&h, params, 0, params.t_cut);
        if surviving.le(&qualifying.clone().with_outside(false)) {
            return Ok(NuSample {
                config: qualifying,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::RejectionExhausted {
        attempts: params.max_attempts,
        acceptance: 0.0,
    })
}

/// Estimated mass constant: the 10th percentile `q` of
/// `(occupied count at t) / t` over surviving singleton processes, and the
/// default `h1 = q / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H1Estimate {
    pub quantile: f64,
    pub h1: f64,
    pub survivors: usize,
}

pub fn estimate_h1(lambda: f64, t: f64, replicas: usize, seed: u64) -> Result<H1Estimate> {
    if !(t > 0.0) || replicas == 0 {
        return Err(Error::InvalidArgument("estimate_h1 needs t > 0 and replicas > 0".into()));
    }
    let reach = lambda * t;
    let radius = (reach + 6.0 * reach.sqrt()).ceil() as u64 + 5;
    let window = LatticeWindow::centered(0, radius);
    let mut ratios = Vec::new();
    for r in 0..replicas {
        let h = sample_harris(window, t, lambda, 0.0, split_seed(seed, H1_TAG, r as u64))?;
        let mut occ = vec![false; window.width()];
        occ[radius as usize] = true;
        let mut sweep = ForwardSweep::new(&h, occ, 0.0, t, None);
        sweep.advance_to(t);
        if sweep.alive() > 0 {
            ratios.push(sweep.alive() as f64 / t);
        }
    }
    if ratios.is_empty() {
        return Err(Error::InvalidArgument(format!("no singleton survived to t = {t} at lambda = {lambda}")));
    }
    ratios.sort_by(f64::total_cmp);
    let idx = ((ratios.len() as f64 * 0.1).ceil() as usize).saturating_sub(1);
    let quantile = ratios[idx];
    Ok(H1Estimate {
        quantile,
        h1: quantile / 2.0,
        survivors: ratios.len(),
    })
}

/// JSON sidecar written next to a sampled bitstring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSidecar {
    pub sampler: String,
    pub lambda: f64,
    pub t_cut: f64,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub left: i64,
    pub right: i64,
    pub outside: bool,
}

/// One-line bitstring plus its sidecar.
pub fn write_sample<W1: Write, W2: Write>(
    config: &Configuration,
    sidecar: &SamplerSidecar,
    mut bits: W1,
    json: W2,
) -> Result<()> {
    writeln!(bits, "{}", config.to_bitstring())?;
    serde_json::to_writer_pretty(json, sidecar).map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
