//! Contact process configurations, forward evolution and diagnostics.

pub(crate) mod evolve;
mod generator;
mod scan;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harris::LatticeWindow;

pub use evolve::{evolve, write_trajectory_csv, Trajectory};
pub use generator::{expm, rate_matrix, state_index, transition_distribution, MAX_GENERATOR_WIDTH};
pub use scan::{edge_positions, gap_scan, VacantRun};

/// Occupancy of a lattice window, with one fixed value for every site
/// beyond it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    window: LatticeWindow,
    bits: Vec<bool>,
    outside: bool,
}

impl Configuration {
    pub fn new(window: LatticeWindow, bits: Vec<bool>, outside: bool) -> Result<Self> {
        if bits.len() != window.width() {
            return Err(Error::InvalidArgument(format!(
                "{} bits for a window of width {}",
                bits.len(),
                window.width()
            )));
        }
        Ok(Self { window, bits, outside })
    }

    pub(crate) fn from_bits(window: LatticeWindow, bits: Vec<bool>, outside: bool) -> Self {
        debug_assert_eq!(bits.len(), window.width());
        Self { window, bits, outside }
    }

    pub fn empty(window: LatticeWindow) -> Self {
        Self::from_bits(window, vec![false; window.width()], false)
    }

    pub fn full(window: LatticeWindow) -> Self {
        Self::from_bits(window, vec![true; window.width()], false)
    }

    /// Occupied exactly at `sites` (those inside the window), vacant outside.
    pub fn from_sites(window: LatticeWindow, sites: impl IntoIterator<Item = i64>) -> Self {
        let mut c = Self::empty(window);
        for x in sites {
            if let Some(i) = window.index_of(x) {
                c.bits[i] = true;
            }
        }
        c
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn outside(&self) -> bool {
        self.outside
    }

    pub fn with_outside(mut self, outside: bool) -> Self {
        self.outside = outside;
        self
    }

    #[inline]
    pub fn get(&self, site: i64) -> bool {
        match self.window.index_of(site) {
            Some(i) => self.bits[i],
            None => self.outside,
        }
    }

    /// Panics if `site` is outside the window.
    pub fn set(&mut self, site: i64, value: bool) {
        let i = self
            .window
            .index_of(site)
            .unwrap_or_else(|| panic!("site {site} outside {:?}", self.window));
        self.bits[i] = value;
    }

    /// Occupied sites inside the window.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn count_in(&self, range: LatticeWindow) -> usize {
        range.sites().filter(|&x| self.get(x)).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn occupied_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.window.site_at(i))
    }

    /// Sitewise `self <= other` on every site of the lattice.
    pub fn le(&self, other: &Self) -> bool {
        if self.outside && !other.outside {
            return false;
        }
        self.window
            .hull(&other.window)
            .sites()
            .all(|x| !self.get(x) || other.get(x))
    }

    /// Whether the two configurations agree on every site of `range`.
    pub fn agrees_on(&self, other: &Self, range: LatticeWindow) -> bool {
        range.sites().all(|x| self.get(x) == other.get(x))
    }

    /// Same configuration re-indexed on `window`; new sites read `outside`.
    pub fn rewindowed(&self, window: LatticeWindow) -> Self {
        let bits = window.sites().map(|x| self.get(x)).collect();
        Self::from_bits(window, bits, self.outside)
    }

    /// Translate by `by` sites.
    pub fn shifted(&self, by: i64) -> Self {
        Self::from_bits(self.window.shifted(by), self.bits.clone(), self.outside)
    }

    pub fn mirrored(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        Self::from_bits(self.window.mirrored(), bits, self.outside)
    }

    pub fn union(&self, other: &Self) -> Self {
        let window = self.window.hull(&other.window);
        let bits = window.sites().map(|x| self.get(x) || other.get(x)).collect();
        Self::from_bits(window, bits, self.outside || other.outside)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        (self.outside && other.outside)
            || self.occupied_sites().any(|x| other.get(x))
            || other.occupied_sites().any(|x| self.get(x))
    }

    /// Window sites as a `0`/`1` string, left to right.
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(window: LatticeWindow, s: &str, outside: bool) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!("bad bit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(window, bits, outside)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(l: i64, r: i64) -> LatticeWindow {
        LatticeWindow::new(l, r).unwrap()
    }

    #[test]
    fn get_honours_outside() {
        let c = Configuration::from_sites(w(0, 3), [1]).with_outside(true);
        assert!(c.get(-1) && c.get(4) && c.get(1));
        assert!(!c.get(0));
        assert_eq!(c.count(), 1);
    }

    #[test]
    fn order_includes_the_outside_value() {
        let a = Configuration::from_sites(w(0, 3), [1]);
        let b = Configuration::from_sites(w(-2, 5), [1, 2, 5]);
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert!(!a.clone().with_outside(true).le(&b));
        assert!(a.le(&b.clone().with_outside(true)));
    }

    #[test]
    fn bitstring_round_trip_and_errors() {
        let c = Configuration::from_sites(w(-2, 2), [-2, 1]);
        assert_eq!(c.to_bitstring(), "10010");
        assert_eq!(Configuration::from_bitstring(w(-2, 2), "10010", false).unwrap(), c);
        assert!(Configuration::from_bitstring(w(-2, 2), "1001", false).is_err());
        assert!(Configuration::from_bitstring(w(-2, 2), "10x10", false).is_err());
    }

    #[test]
    fn shifting_and_rewindowing() {
        let c = Configuration::from_sites(w(0, 2), [0, 2]).with_outside(true);
        let s = c.shifted(5);
        assert!(s.get(5) && !s.get(6) && s.get(7) && s.get(100));
        let r = c.rewindowed(w(-1, 1));
        assert_eq!(r.to_bitstring(), "110");
        assert_eq!(c.mirrored().window(), w(-2, 0));
    }
}
