//! Harris systems: every Poisson event stream driving the contact process
//! and the walker, sampled eagerly over a finite window and horizon.
//!
//! The sampled system is immutable. Every process in the crate is a
//! deterministic function of one of these plus its initial data, so couplings
//! and duals replay the exact same randomness.

mod io;
mod path;
mod region;
pub(crate) mod sweep;
mod window;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamKind};

pub use io::{read_harris, write_harris};
pub use path::path_exists;
pub use region::{Rect, SpaceTimeRegion};
pub use sweep::reachable_set;
pub use window::{window_for_speed, LatticeWindow};

/// A point `(site, time)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub site: i64,
    pub time: f64,
}

impl SpaceTimePoint {
    pub fn new(site: i64, time: f64) -> Self {
        Self { site, time }
    }
}

/// One point of the walker clock with its uniform mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockMark {
    pub time: f64,
    pub mark: f64,
}

/// Entry of the merged death/link stream. `code` packs the stream index
/// shifted left once, with the low bit set for links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Event {
    pub time: f64,
    pub code: u32,
}

impl Event {
    #[inline]
    pub fn is_link(self) -> bool {
        self.code & 1 == 1
    }

    #[inline]
    pub fn index(self) -> usize {
        (self.code >> 1) as usize
    }
}

/// Realisation of the death marks, links and walker clock on
/// `window x (0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarrisSystem {
    window: LatticeWindow,
    horizon: f64,
    lambda: f64,
    walker_rate: f64,
    seed: Option<u64>,
    death_offsets: Vec<usize>,
    death_times: Vec<f64>,
    link_offsets: Vec<usize>,
    link_times: Vec<f64>,
    clock: Vec<ClockMark>,
    events: Vec<Event>,
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate >= 0.0 {
        Ok(())
    } else {
        Err(Error::BadRate(rate))
    }
}

fn poisson_times<R: Rng>(rng: &mut R, rate: f64, horizon: f64, out: &mut Vec<f64>) {
    if rate <= 0.0 {
        return;
    }
    let mut t = 0.0f64;
    loop {
        let gap: f64 = Exp1.sample(rng);
        let next = t + gap / rate;
        if next > horizon {
            return;
        }
        // A tie at f64 precision: redraw the gap.
        if next <= t {
            continue;
        }
        out.push(next);
        t = next;
    }
}

/// Samples a Harris system. Identical arguments give a bit-identical system.
pub fn sample_harris(
    window: LatticeWindow,
    horizon: f64,
    lambda: f64,
    walker_rate: f64,
    seed: u64,
) -> Result<HarrisSystem> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::BadHorizon(horizon));
    }
    check_rate(lambda)?;
    check_rate(walker_rate)?;

    let width = window.width();
    let expected = horizon * (width as f64 + lambda * (width - 1) as f64);
    let mut death_offsets = Vec::with_capacity(width + 1);
    let mut death_times = Vec::with_capacity((horizon * width as f64 * 1.1) as usize + 16);
    death_offsets.push(0);
    for x in window.sites() {
        let mut rng = stream_rng(seed, StreamKind::Death, x);
        poisson_times(&mut rng, 1.0, horizon, &mut death_times);
        death_offsets.push(death_times.len());
    }

    let mut link_offsets = Vec::with_capacity(width);
    let mut link_times = Vec::with_capacity((expected * 1.1) as usize);
    link_offsets.push(0);
    for x in window.left()..window.right() {
        let mut rng = stream_rng(seed, StreamKind::Link, x);
        poisson_times(&mut rng, lambda, horizon, &mut link_times);
        link_offsets.push(link_times.len());
    }

    let mut clock = Vec::new();
    if walker_rate > 0.0 {
        let mut rng = stream_rng(seed, StreamKind::WalkerClock, 0);
        let mut times = Vec::new();
        poisson_times(&mut rng, walker_rate, horizon, &mut times);
        clock = times
            .into_iter()
            .map(|time| ClockMark {
                time,
                mark: rng.random::<f64>(),
            })
            .collect();
    }

    let mut h = HarrisSystem {
        window,
        horizon,
        lambda,
        walker_rate,
        seed: Some(seed),
        death_offsets,
        death_times,
        link_offsets,
        link_times,
        clock,
        events: Vec::new(),
    };
    h.merge_events();
    Ok(h)
}

impl HarrisSystem {
    /// Assembles a system from explicit streams, validating every invariant.
    /// `deaths` has one list per site, `links` one per edge `{x, x+1}`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_streams(
        window: LatticeWindow,
        horizon: f64,
        lambda: f64,
        walker_rate: f64,
        seed: Option<u64>,
        deaths: Vec<Vec<f64>>,
        links: Vec<Vec<f64>>,
        clock: Vec<ClockMark>,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::BadHorizon(horizon));
        }
        check_rate(lambda)?;
        check_rate(walker_rate)?;
        if deaths.len() != window.width() || links.len() != window.edge_count() {
            return Err(Error::InvalidArgument(format!(
                "stream counts {}/{} do not match window width {}",
                deaths.len(),
                links.len(),
                window.width()
            )));
        }
        let valid = |times: &[f64]| {
            times.iter().all(|&t| t > 0.0 && t <= horizon) && times.windows(2).all(|w| w[0] < w[1])
        };
        if !deaths.iter().chain(links.iter()).all(|s| valid(s)) {
            return Err(Error::InvalidArgument("event stream not strictly increasing in (0, horizon]".into()));
        }
        let clock_times: Vec<f64> = clock.iter().map(|c| c.time).collect();
        if !valid(&clock_times) || !clock.iter().all(|c| (0.0..=1.0).contains(&c.mark)) {
            return Err(Error::InvalidArgument("invalid walker clock".into()));
        }

        let flatten = |streams: Vec<Vec<f64>>| {
            let mut offsets = vec![0];
            let mut flat = Vec::new();
            for s in streams {
                flat.extend(s);
                offsets.push(flat.len());
            }
            (offsets, flat)
        };
        let (death_offsets, death_times) = flatten(deaths);
        let (link_offsets, link_times) = flatten(links);
        let mut h = Self {
            window,
            horizon,
            lambda,
            walker_rate,
            seed,
            death_offsets,
            death_times,
            link_offsets,
            link_times,
            clock,
            events: Vec::new(),
        };
        h.merge_events();
        Ok(h)
    }

    fn merge_events(&mut self) {
        let mut events = Vec::with_capacity(self.death_times.len() + self.link_times.len());
        for i in 0..self.window.width() {
            let code = (i as u32) << 1;
            for &time in &self.death_times[self.death_offsets[i]..self.death_offsets[i + 1]] {
                events.push(Event { time, code });
            }
        }
        for e in 0..self.window.edge_count() {
            let code = ((e as u32) << 1) | 1;
            for &time in &self.link_times[self.link_offsets[e]..self.link_offsets[e + 1]] {
                events.push(Event { time, code });
            }
        }
        // Times are positive, so the IEEE bit pattern orders them.
        events.sort_unstable_by_key(|e| (e.time.to_bits(), e.code));
        self.events = events;
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn walker_rate(&self) -> f64 {
        self.walker_rate
    }

    /// Master seed, or `None` for systems derived by mirroring or
    /// concatenation.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Death marks at `site`; empty outside the window.
    pub fn deaths(&self, site: i64) -> &[f64] {
        match self.window.index_of(site) {
            Some(i) => &self.death_times[self.death_offsets[i]..self.death_offsets[i + 1]],
            None => &[],
        }
    }

    /// Links on the edge `{left, left + 1}`; empty unless both ends are inside.
    pub fn links(&self, left: i64) -> &[f64] {
        match self.window.index_of(left) {
            Some(i) if i < self.window.edge_count() => {
                &self.link_times[self.link_offsets[i]..self.link_offsets[i + 1]]
            }
            _ => &[],
        }
    }

    pub fn walker_clock(&self) -> &[ClockMark] {
        &self.clock
    }

    /// Number of walker clock points in `(from, to]`.
    pub fn clock_count(&self, from: f64, to: f64) -> usize {
        let lo = self.clock.partition_point(|c| c.time <= from);
        let hi = self.clock.partition_point(|c| c.time <= to);
        hi.saturating_sub(lo)
    }

    pub fn death_count(&self) -> usize {
        self.death_times.len()
    }

    pub fn link_count(&self) -> usize {
        self.link_times.len()
    }

    pub(crate) fn events(&self) -> &[Event] {
        &self.events
    }

    /// Index of the first merged event with time strictly greater than `t`.
    pub(crate) fn first_event_after(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }

    /// Index of the first merged event with time greater than or equal to `t`.
    pub(crate) fn first_event_at_or_after(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time < t)
    }

    /// Spatial mirror image under `x -> -x`; walker marks become `1 - u`.
    pub fn mirrored(&self) -> Self {
        let window = self.window.mirrored();
        let deaths = window.sites().map(|y| self.deaths(-y).to_vec()).collect();
        let links = (window.left()..window.right())
            .map(|y| self.links(-y - 1).to_vec())
            .collect();
        let clock = self
            .clock
            .iter()
            .map(|c| ClockMark {
                time: c.time,
                mark: 1.0 - c.mark,
            })
            .collect();
        Self::from_streams(window, self.horizon, self.lambda, self.walker_rate, None, deaths, links, clock)
            .expect("mirror of a valid system is valid")
    }

    /// `self` followed by `next` shifted in time by `self.horizon()`.
    pub fn concatenate(&self, next: &Self) -> Result<Self> {
        if self.window != next.window || self.lambda != next.lambda || self.walker_rate != next.walker_rate {
            return Err(Error::InvalidArgument("cannot concatenate systems with different windows or rates".into()));
        }
        let shift = self.horizon;
        let join = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().copied().chain(b.iter().map(|t| t + shift)).collect()
        };
        let deaths = self.window.sites().map(|x| join(self.deaths(x), next.deaths(x))).collect();
        let links = (self.window.left()..self.window.right())
            .map(|x| join(self.links(x), next.links(x)))
            .collect();
        let clock = self
            .clock
            .iter()
            .copied()
            .chain(next.clock.iter().map(|c| ClockMark {
                time: c.time + shift,
                mark: c.mark,
            }))
            .collect();
        Self::from_streams(
            self.window,
            self.horizon + next.horizon,
            self.lambda,
            self.walker_rate,
            None,
            deaths,
            links,
            clock,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(l: i64, r: i64) -> LatticeWindow {
        LatticeWindow::new(l, r).unwrap()
    }

    #[test]
    fn zero_rates_give_empty_streams() {
        let h = sample_harris(window(-5, 5), 3.0, 0.0, 0.0, 11).unwrap();
        assert_eq!(h.link_count(), 0);
        assert!(h.walker_clock().is_empty());
        assert!(h.death_count() > 0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(sample_harris(window(0, 3), 0.0, 1.0, 1.0, 1), Err(Error::BadHorizon(_))));
        assert!(matches!(sample_harris(window(0, 3), 1.0, -1.0, 1.0, 1), Err(Error::BadRate(_))));
        assert!(LatticeWindow::new(1, 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_sorted() {
        let a = sample_harris(window(-10, 10), 7.0, 2.0, 1.0, 99).unwrap();
        let b = sample_harris(window(-10, 10), 7.0, 2.0, 1.0, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_harris(window(-10, 10), 7.0, 2.0, 1.0, 100).unwrap();
        assert_ne!(a, c);
        assert!(a.events().windows(2).all(|w| w[0].time <= w[1].time));
        for x in a.window().sites() {
            assert!(a.deaths(x).windows(2).all(|w| w[0] < w[1]));
        }
        assert!(a.walker_clock().iter().all(|c| (0.0..=1.0).contains(&c.mark)));
    }

    #[test]
    fn streams_do_not_depend_on_window_extent() {
        let small = sample_harris(window(-3, 3), 5.0, 2.0, 1.0, 5).unwrap();
        let big = sample_harris(window(-9, 12), 5.0, 2.0, 1.0, 5).unwrap();
        for x in -3..=3 {
            assert_eq!(small.deaths(x), big.deaths(x));
        }
        for x in -3..3 {
            assert_eq!(small.links(x), big.links(x));
        }
        assert_eq!(small.walker_clock(), big.walker_clock());
    }

    #[test]
    fn mean_death_count_matches_poisson() {
        // 10^4 samples of a Poisson(5) count: mean 5, sd of the mean sqrt(5/10^4).
        let n = 10_000;
        let total: usize = (0..n)
            .map(|s| sample_harris(window(0, 0), 5.0, 0.0, 0.0, s).unwrap().death_count())
            .sum();
        let mean = total as f64 / n as f64;
        let se = (5.0f64 / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn mirror_is_an_involution() {
        let h = sample_harris(window(-4, 7), 3.0, 1.5, 1.0, 3).unwrap();
        let back = h.mirrored().mirrored();
        assert_eq!(back.window(), h.window());
        for x in h.window().sites() {
            assert_eq!(back.deaths(x), h.deaths(x));
        }
        assert_eq!(back.events(), h.events());
        assert_eq!(h.mirrored().deaths(4), h.deaths(-4));
        assert_eq!(h.mirrored().links(-7), h.links(6));
    }

    #[test]
    fn concatenation_shifts_the_second_block() {
        let a = sample_harris(window(0, 4), 2.0, 1.0, 1.0, 1).unwrap();
        let b = sample_harris(window(0, 4), 3.0, 1.0, 1.0, 2).unwrap();
        let c = a.concatenate(&b).unwrap();
        assert_eq!(c.horizon(), 5.0);
        assert_eq!(c.death_count(), a.death_count() + b.death_count());
        assert_eq!(c.walker_clock().len(), a.walker_clock().len() + b.walker_clock().len());
        assert_eq!(c.clock_count(2.0, 5.0), b.walker_clock().len());
    }
}
