//! Monte Carlo engine for the one-dimensional contact process and the
//! nearest-neighbour random walk whose jump rates read the contact process
//! around it.
//!
//! Everything is built from a [`harris::HarrisSystem`]: the sampled Poisson
//! streams of death marks, links and walker clock points. Forward processes,
//! duals, walkers and regeneration runs are deterministic functions of one
//! such system plus initial data, which makes couplings exact and every
//! replica replayable from its seed.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contact;
pub mod dual;
pub mod error;
pub mod harris;
pub mod regen;
pub mod rng;
pub mod stats;
pub mod walker;

pub use contact::{Configuration, Trajectory};
pub use error::{Error, Result};
pub use harris::{sample_harris, HarrisSystem, LatticeWindow, SpaceTimePoint, SpaceTimeRegion};
pub use walker::{simulate_piecewise, simulate_walk, RateTable, WalkPath};
