//! Random walk driven by the contact environment.
//!
//! At each mark `(t, u)` of the walker clock the walk looks at the pattern
//! `p` around its position just before `t` and steps down if
//! `u <= g_minus(p) / M'`, up if `1 - u <= g_plus(p) / M'`, and otherwise
//! stays put.

mod table;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use table::{local_pattern, LocalPattern, RateTable};

use crate::contact::{Configuration, Trajectory};
use crate::error::{Error, Result};
use crate::harris::sweep::{occupancy_of, ForwardSweep};
use crate::harris::{HarrisSystem, LatticeWindow, SpaceTimeRegion};

/// Piecewise-constant path: start point plus the list of jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub start_time: f64,
    pub start: i64,
    pub end_time: f64,
    /// `(time, position after the jump)`.
    pub jumps: Vec<(f64, i64)>,
}

impl WalkPath {
    pub fn new(start: i64, start_time: f64) -> Self {
        Self {
            start_time,
            start,
            end_time: start_time,
            jumps: Vec::new(),
        }
    }

    /// Right-continuous position at `t`.
    pub fn position_at(&self, t: f64) -> i64 {
        let k = self.jumps.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            self.start
        } else {
            self.jumps[k - 1].1
        }
    }

    pub fn end_position(&self) -> i64 {
        self.jumps.last().map_or(self.start, |j| j.1)
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    pub fn max_displacement(&self) -> u64 {
        self.jumps.iter().map(|j| j.1.abs_diff(self.start)).max().unwrap_or(0)
    }

    /// Reflection `x -> -x`.
    pub fn mirrored(&self) -> Self {
        Self {
            start: -self.start,
            jumps: self.jumps.iter().map(|&(t, x)| (t, -x)).collect(),
            ..*self
        }
    }

    /// CSV `time,position`: the start, every jump, and the end.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "time,position")?;
        writeln!(out, "{},{}", self.start_time, self.start)?;
        for (t, x) in &self.jumps {
            writeln!(out, "{t},{x}")?;
        }
        writeln!(out, "{},{}", self.end_time, self.end_position())?;
        Ok(())
    }
}

/// Incremental walk in a fixed Harris system. The environment carries the
/// initial configuration's `outside` value.
pub struct DynamicWalk<'a> {
    h: &'a HarrisSystem,
    tables: &'a RateTable,
    sweep: ForwardSweep<'a>,
    outside: bool,
    position: i64,
    clock: usize,
    path: WalkPath,
}

impl<'a> DynamicWalk<'a> {
    pub fn new(
        h: &'a HarrisSystem,
        env: &Configuration,
        x0: i64,
        tables: &'a RateTable,
        start: f64,
        region: Option<&SpaceTimeRegion>,
    ) -> Result<Self> {
        let w = h.window();
        if !w.contains(x0) {
            return Err(Error::InvalidArgument(format!("start {x0} outside window {}..={}", w.left(), w.right())));
        }
        if !(0.0..=h.horizon()).contains(&start) {
            return Err(Error::BadHorizon(start));
        }
        if tables.mprime() > h.walker_rate() {
            return Err(Error::RateTable(format!(
                "Mprime = {} exceeds the clock rate {} of the Harris system",
                tables.mprime(),
                h.walker_rate()
            )));
        }
        let clock = h.walker_clock().partition_point(|m| m.time <= start);
        Ok(Self {
            h,
            tables,
            sweep: ForwardSweep::new(h, occupancy_of(h, env), start, h.horizon(), region),
            outside: env.outside(),
            position: x0,
            clock,
            path: WalkPath::new(x0, start),
        })
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    pub fn time(&self) -> f64 {
        self.sweep.now()
    }

    pub fn path(&self) -> &WalkPath {
        &self.path
    }

    pub fn into_path(self) -> WalkPath {
        self.path
    }

    /// Current environment, with the carried `outside` value.
    pub fn environment(&self) -> Configuration {
        Configuration::from_bits(self.h.window(), self.sweep.occupancy().to_vec(), self.outside)
    }

    fn pattern(&self) -> LocalPattern {
        let w = self.h.window();
        let occ = self.sweep.occupancy();
        let r = i64::from(self.tables.radius());
        let bits = (self.position - r..=self.position + r).fold(0u32, |acc, x| {
            let b = w.index_of(x).map_or(self.outside, |i| occ[i]);
            acc << 1 | u32::from(b)
        });
        LocalPattern::new(bits, 2 * self.tables.radius() + 1)
    }

    /// Processes environment events and clock marks strictly before `until`.
    pub fn advance_to(&mut self, until: f64) -> Result<()> {
        let until = until.min(self.h.horizon());
        let marks = self.h.walker_clock();
        let mprime = self.tables.mprime();
        while let Some(mark) = marks.get(self.clock).filter(|m| m.time < until) {
            self.clock += 1;
            self.sweep.advance_to(mark.time);
            let (up, down) = self.tables.rates(self.pattern());
            let step = if mark.mark <= down / mprime {
                -1
            } else if 1.0 - mark.mark <= up / mprime {
                1
            } else {
                0
            };
            if step != 0 {
                self.position += step;
                self.path.jumps.push((mark.time, self.position));
                let w = self.h.window();
                if !w.contains(self.position) {
                    return Err(Error::WalkerEscaped {
                        time: mark.time,
                        position: self.position,
                        left: w.left(),
                        right: w.right(),
                    });
                }
            }
        }
        self.sweep.advance_to(until);
        self.path.end_time = self.path.end_time.max(until);
        Ok(())
    }
}

/// Walk and environment on `[0, horizon]` from `initial_env` and `x0`.
/// Snapshots are taken at `sample_times` and are vacant outside the window.
pub fn simulate_walk(
    h: &HarrisSystem,
    initial_env: &Configuration,
    x0: i64,
    tables: &RateTable,
    region: &SpaceTimeRegion,
    sample_times: &[f64],
) -> Result<(Trajectory, WalkPath)> {
    crate::contact::evolve::check_sample_times(h, sample_times, 0.0)?;
    let mut walk = DynamicWalk::new(h, initial_env, x0, tables, 0.0, Some(region))?;
    let mut snapshots = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        walk.advance_to(t)?;
        snapshots.push(walk.environment().with_outside(false));
    }
    walk.advance_to(h.horizon())?;
    let traj = Trajectory {
        sample_times: sample_times.to_vec(),
        snapshots,
    };
    Ok((traj, walk.into_path()))
}

/// One piece of a piecewise walk.
#[derive(Debug, Clone)]
pub struct Segment {
    pub harris: HarrisSystem,
    /// Environment installed at the start of the segment, in coordinates
    /// relative to the walker. `None` carries the evolved environment over.
    pub replacement: Option<Configuration>,
}

/// Result of [`simulate_piecewise`]; times are global.
#[derive(Debug, Clone)]
pub struct PiecewiseWalk {
    pub path: WalkPath,
    /// Segment start times, followed by the final end time.
    pub boundaries: Vec<f64>,
    /// Environment at the end of the last segment.
    pub final_environment: Configuration,
}

/// Runs the walk through consecutive segments, each on its own Harris
/// system over `[0, horizon]`. The walker position carries over; the
/// environment is replaced when a segment provides a replacement, shifted
/// to the walker's position, and otherwise carried and rewindowed.
pub fn simulate_piecewise(
    initial_env: &Configuration,
    x0: i64,
    segments: &[Segment],
    tables: &RateTable,
) -> Result<PiecewiseWalk> {
    let mut env = initial_env.clone();
    let mut x = x0;
    let mut offset = 0.0;
    let mut path = WalkPath::new(x0, 0.0);
    let mut boundaries = Vec::with_capacity(segments.len() + 1);
    for seg in segments {
        boundaries.push(offset);
        if let Some(r) = &seg.replacement {
            env = r.shifted(x);
        }
        let start_env = env.rewindowed(seg.harris.window());
        let mut walk = DynamicWalk::new(&seg.harris, &start_env, x, tables, 0.0, None)?;
        let outcome = walk.advance_to(seg.harris.horizon());
        let local = walk.path();
        path.jumps.extend(local.jumps.iter().map(|&(t, y)| (t + offset, y)));
        if let Err(Error::WalkerEscaped { time, position, left, right }) = outcome {
            return Err(Error::WalkerEscaped {
                time: time + offset,
                position,
                left,
                right,
            });
        }
        outcome?;
        x = walk.position();
        env = walk.environment();
        offset += seg.harris.horizon();
    }
    path.end_time = offset;
    boundaries.push(offset);
    Ok(PiecewiseWalk {
        path,
        boundaries,
        final_environment: env,
    })
}

/// Window for a walk started at `center` over `horizon`: the walk makes at
/// most Poisson(`(sup g_plus + sup g_minus) horizon`) jumps, so six
/// deviations of that count plus the table radius plus `margin` sites of
/// environment.
pub fn walker_window(center: i64, tables: &RateTable, horizon: f64, margin: u64) -> LatticeWindow {
    let mean = (tables.sup_plus() + tables.sup_minus()) * horizon;
    let reach = (mean + 6.0 * mean.sqrt()).ceil() as u64;
    LatticeWindow::centered(center, reach + u64::from(tables.radius()) + margin)
}
