use serde::{Deserialize, Serialize};

use crate::contact::Configuration;
use crate::dual::sample_upper_equilibrium;
use crate::error::{Error, Result};
use crate::harris::{sample_harris, HarrisSystem, LatticeWindow};
use crate::rng::split_seed;
use crate::walker::{DynamicWalk, RateTable};

const ENV_TAG: u64 = 0x656e76;
const HARRIS_TAG: u64 = 0x68;

/// Desk-scale version of the no-encroachment coupling: an equilibrium
/// start against the same start made fully occupied off the inner window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSetup {
    pub lambda: f64,
    /// The two starts agree on `[-inner_radius, inner_radius]`.
    pub inner_radius: u64,
    pub window_radius: u64,
    pub horizon: f64,
    /// Time the upper-equilibrium sample is run for.
    pub equilibrium_time: f64,
    /// Spacing of the domination checks.
    pub sample_step: f64,
    /// Half-width of the final configuration comparison around the walker.
    pub agreement_radius: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingOutcome {
    pub paths_agree: bool,
    pub endpoints_agree: bool,
    pub configs_agree: bool,
    /// `xi_t <= xi'_t` at every sample time.
    pub dominated: bool,
}

/// Runs both walks from `x0` on one Harris system and compares them.
pub fn coupling_pair(
    h: &HarrisSystem,
    xi0: &Configuration,
    xi0_prime: &Configuration,
    x0: i64,
    tables: &RateTable,
    sample_times: &[f64],
    agreement_radius: u64,
) -> Result<CouplingOutcome> {
    let mut a = DynamicWalk::new(h, &xi0.rewindowed(h.window()), x0, tables, 0.0, None)?;
    let mut b = DynamicWalk::new(h, &xi0_prime.rewindowed(h.window()), x0, tables, 0.0, None)?;
    let mut dominated = a.environment().le(&b.environment());
    for &t in sample_times.iter().chain(std::iter::once(&h.horizon())) {
        a.advance_to(t)?;
        b.advance_to(t)?;
        dominated &= a.environment().le(&b.environment());
    }
    let (ea, eb) = (a.environment(), b.environment());
    let around = LatticeWindow::centered(a.position(), agreement_radius);
    let (pa, pb) = (a.into_path(), b.into_path());
    Ok(CouplingOutcome {
        paths_agree: pa == pb,
        endpoints_agree: pa.end_position() == pb.end_position(),
        configs_agree: ea.agrees_on(&eb, around),
        dominated,
    })
}

/// One seed of the coupling experiment with the walker started at 0.
pub fn coupling_experiment(seed: u64, setup: &CouplingSetup, tables: &RateTable) -> Result<CouplingOutcome> {
    if !(setup.sample_step > 0.0) || setup.inner_radius > setup.window_radius {
        return Err(Error::InvalidArgument(format!("bad coupling setup {setup:?}")));
    }
    let window = LatticeWindow::centered(0, setup.window_radius);
    let inner = LatticeWindow::centered(0, setup.inner_radius);
    let xi0 = sample_upper_equilibrium(window, setup.lambda, setup.equilibrium_time, split_seed(seed, ENV_TAG, 0))?;
    let bits = window.sites().map(|x| !inner.contains(x) || xi0.get(x)).collect();
    let xi0_prime = Configuration::new(window, bits, true)?;
    let h = sample_harris(window, setup.horizon, setup.lambda, tables.mprime(), split_seed(seed, HARRIS_TAG, 0))?;
    let steps = (setup.horizon / setup.sample_step).floor() as usize;
    let times: Vec<f64> = (1..=steps).map(|k| k as f64 * setup.sample_step).collect();
    coupling_pair(&h, &xi0, &xi0_prime, 0, tables, &times, setup.agreement_radius)
}
