//! Chronological sweeps over the merged event stream.
//!
//! A forward sweep carries the set of sites reachable from the initial set;
//! a death mark vacates its site and a link occupies both endpoints when
//! either is occupied. A backward sweep runs the same rules in reverse time
//! and yields dual processes. Only events strictly inside the sweep interval
//! count.

use super::region::{Mask, Schedule};
use super::{HarrisSystem, SpaceTimeRegion};
use crate::contact::Configuration;

fn apply_mask(occ: &mut [bool], alive: &mut usize, mask: &Mask) {
    if let Some(mask) = mask {
        for (o, &m) in occ.iter_mut().zip(mask) {
            if *o && !m {
                *o = false;
                *alive -= 1;
            }
        }
    }
}

#[inline]
fn link_allowed(mask: &Mask, i: usize) -> bool {
    match mask {
        None => true,
        Some(m) => m[i] && m[i + 1],
    }
}

/// Forward-in-time sweep over `[from, to]`.
pub(crate) struct ForwardSweep<'h> {
    h: &'h HarrisSystem,
    schedule: Option<Schedule>,
    occ: Vec<bool>,
    alive: usize,
    // Number of schedule segments whose masks have been applied.
    entered: usize,
    cursor: usize,
    from: f64,
    to: f64,
    now: f64,
    extinct_at: Option<f64>,
}

impl<'h> ForwardSweep<'h> {
    /// `occ` is indexed by the window of `h`. `region = None` means the
    /// whole window for all time.
    pub fn new(h: &'h HarrisSystem, mut occ: Vec<bool>, from: f64, to: f64, region: Option<&SpaceTimeRegion>) -> Self {
        debug_assert_eq!(occ.len(), h.window().width());
        let schedule = region.map(|r| r.schedule(h.window(), from, to));
        let mut alive = occ.iter().filter(|&&o| o).count();
        if let Some(s) = &schedule {
            apply_mask(&mut occ, &mut alive, &s.at_from);
        }
        Self {
            h,
            schedule,
            occ,
            alive,
            entered: 0,
            cursor: h.first_event_after(from),
            from,
            to,
            now: from,
            extinct_at: None,
        }
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occ
    }

    pub fn alive(&self) -> usize {
        self.alive
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn into_occupancy(self) -> Vec<bool> {
        self.occ
    }

    /// Time of the death mark that emptied the window, if any.
    pub fn extinct_at(&self) -> Option<f64> {
        self.extinct_at
    }

    fn enter_segments_before(&mut self, t: f64) {
        let Some(s) = &self.schedule else { return };
        if t <= self.from {
            return;
        }
        let target = s.bounds.partition_point(|&b| b < t);
        while self.entered < target.min(s.masks.len()) {
            apply_mask(&mut self.occ, &mut self.alive, &s.masks[self.entered]);
            self.entered += 1;
        }
    }

    fn current_mask(&self) -> &Mask {
        match &self.schedule {
            Some(s) if self.entered > 0 => &s.masks[self.entered - 1],
            _ => &None,
        }
    }

    /// Processes every event with time in `(now, until)`.
    pub fn advance_to(&mut self, until: f64) {
        let until = until.min(self.to);
        if until <= self.now {
            return;
        }
        let events = self.h.events();
        if self.alive == 0 {
            self.cursor = self.cursor.max(self.h.first_event_at_or_after(until));
            self.enter_segments_before(until);
            self.now = until;
            return;
        }
        while self.cursor < events.len() {
            let ev = events[self.cursor];
            if ev.time >= until {
                break;
            }
            self.cursor += 1;
            self.enter_segments_before(ev.time);
            let i = ev.index();
            if ev.is_link() {
                let (a, b) = (self.occ[i], self.occ[i + 1]);
                if a != b && link_allowed(self.current_mask(), i) {
                    self.occ[i] = true;
                    self.occ[i + 1] = true;
                    self.alive += 1;
                }
            } else if self.occ[i] {
                self.occ[i] = false;
                self.alive -= 1;
                if self.alive == 0 {
                    self.extinct_at = Some(ev.time);
                    self.cursor = self.h.first_event_at_or_after(until);
                    break;
                }
            }
        }
        self.enter_segments_before(until);
        self.now = until;
    }
}

/// Backward-in-time sweep from `to` down to `from`.
pub(crate) struct BackwardSweep<'h> {
    h: &'h HarrisSystem,
    schedule: Option<Schedule>,
    occ: Vec<bool>,
    alive: usize,
    // Segments are entered from the last one down; this counts them.
    entered: usize,
    // One past the next event to process (events[cursor - 1]).
    cursor: usize,
    from: f64,
    now: f64,
}

impl<'h> BackwardSweep<'h> {
    pub fn new(h: &'h HarrisSystem, mut occ: Vec<bool>, from: f64, to: f64, region: Option<&SpaceTimeRegion>) -> Self {
        debug_assert_eq!(occ.len(), h.window().width());
        let schedule = region.map(|r| r.schedule(h.window(), from, to));
        let mut alive = occ.iter().filter(|&&o| o).count();
        if let Some(s) = &schedule {
            apply_mask(&mut occ, &mut alive, &s.at_to);
        }
        Self {
            h,
            schedule,
            occ,
            alive,
            entered: 0,
            cursor: h.first_event_at_or_after(to),
            from,
            now: to,
        }
    }

    #[cfg(test)]
    pub fn alive(&self) -> usize {
        self.alive
    }

    pub fn into_occupancy(self) -> Vec<bool> {
        self.occ
    }

    fn enter_segments_after(&mut self, t: f64) {
        let Some(s) = &self.schedule else { return };
        let n = s.masks.len();
        // Segment k is (bounds[k], bounds[k+1]); we need every k with bounds[k+1] > t.
        let first_needed = s.bounds[1..].partition_point(|&b| b <= t);
        while self.entered < n - first_needed.min(n) {
            let k = n - 1 - self.entered;
            apply_mask(&mut self.occ, &mut self.alive, &s.masks[k]);
            self.entered += 1;
        }
    }

    fn current_mask(&self) -> &Mask {
        match &self.schedule {
            Some(s) if self.entered > 0 => &s.masks[s.masks.len() - self.entered],
            _ => &None,
        }
    }

    /// Processes every event with time in `(until, now)`, going backwards.
    pub fn retreat_to(&mut self, until: f64) {
        let until = until.max(self.from);
        if until >= self.now {
            return;
        }
        let events = self.h.events();
        while self.cursor > 0 && self.alive > 0 {
            let ev = events[self.cursor - 1];
            if ev.time <= until {
                break;
            }
            self.cursor -= 1;
            self.enter_segments_after(ev.time);
            let i = ev.index();
            if ev.is_link() {
                let (a, b) = (self.occ[i], self.occ[i + 1]);
                if a != b && link_allowed(self.current_mask(), i) {
                    self.occ[i] = true;
                    self.occ[i + 1] = true;
                    self.alive += 1;
                }
            } else if self.occ[i] {
                self.occ[i] = false;
                self.alive -= 1;
            }
        }
        self.enter_segments_after(until);
        self.now = until;
    }
}

pub(crate) fn occupancy_of(h: &HarrisSystem, config: &Configuration) -> Vec<bool> {
    h.window().sites().map(|x| config.get(x)).collect()
}

/// Sites reachable at time `t` from occupied sites of `initial` at time `s`
/// through infection paths inside `region`. Vacant outside the window.
pub fn reachable_set(
    h: &HarrisSystem,
    initial: &Configuration,
    s: f64,
    t: f64,
    region: &SpaceTimeRegion,
) -> Configuration {
    assert!(s <= t, "reachable_set needs s <= t (got {s} > {t})");
    let mut sweep = ForwardSweep::new(h, occupancy_of(h, initial), s, t, Some(region));
    sweep.advance_to(t);
    Configuration::from_bits(h.window(), sweep.into_occupancy(), false)
}
