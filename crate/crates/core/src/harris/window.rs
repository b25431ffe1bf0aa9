use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite interval `[left, right]` of the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeWindow {
    left: i64,
    right: i64,
}

impl LatticeWindow {
    pub fn new(left: i64, right: i64) -> Result<Self> {
        if left > right {
            return Err(Error::DegenerateWindow { left, right });
        }
        Ok(Self { left, right })
    }

    /// `[center - radius, center + radius]`.
    pub fn centered(center: i64, radius: u64) -> Self {
        let r = radius as i64;
        Self {
            left: center - r,
            right: center + r,
        }
    }

    pub fn left(&self) -> i64 {
        self.left
    }

    pub fn right(&self) -> i64 {
        self.right
    }

    pub fn width(&self) -> usize {
        (self.right - self.left + 1) as usize
    }

    pub fn contains(&self, site: i64) -> bool {
        self.left <= site && site <= self.right
    }

    pub fn index_of(&self, site: i64) -> Option<usize> {
        self.contains(site).then(|| (site - self.left) as usize)
    }

    pub fn site_at(&self, index: usize) -> i64 {
        self.left + index as i64
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.left..=self.right
    }

    /// Number of nearest-neighbour edges with both ends inside.
    pub fn edge_count(&self) -> usize {
        self.width() - 1
    }

    pub fn shifted(&self, by: i64) -> Self {
        Self {
            left: self.left + by,
            right: self.right + by,
        }
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self {
            left: self.left.min(other.left),
            right: self.right.max(other.right),
        }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        Self::new(self.left.max(other.left), self.right.min(other.right)).ok()
    }

    pub fn contains_window(&self, other: &Self) -> bool {
        self.left <= other.left && other.right <= self.right
    }

    /// Mirror image under `x -> -x`.
    pub fn mirrored(&self) -> Self {
        Self {
            left: -self.right,
            right: -self.left,
        }
    }
}

/// Smallest symmetric window around `center` that keeps an object moving at
/// most `speed` sites per unit time inside for `horizon`, with `margin` spare
/// sites on each side.
pub fn window_for_speed(center: i64, speed: f64, horizon: f64, margin: u64) -> LatticeWindow {
    let reach = (speed.max(0.0) * horizon).ceil() as u64;
    LatticeWindow::centered(center, reach + margin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed_bounds() {
        assert!(LatticeWindow::new(3, 2).is_err());
        assert_eq!(LatticeWindow::new(2, 2).unwrap().width(), 1);
    }

    #[test]
    fn indexing_round_trips() {
        let w = LatticeWindow::new(-4, 6).unwrap();
        assert_eq!(w.width(), 11);
        for (i, x) in w.sites().enumerate() {
            assert_eq!(w.index_of(x), Some(i));
            assert_eq!(w.site_at(i), x);
        }
        assert_eq!(w.index_of(7), None);
        assert_eq!(w.mirrored(), LatticeWindow::new(-6, 4).unwrap());
    }

    #[test]
    fn speed_window_covers_reach() {
        let w = window_for_speed(10, 1.5, 10.0, 5);
        assert_eq!(w, LatticeWindow::new(-10, 30).unwrap());
    }
}
