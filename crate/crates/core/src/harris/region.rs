use serde::{Deserialize, Serialize};

use super::{HarrisSystem, LatticeWindow};
use crate::error::{Error, Result};

/// Closed space-time rectangle `[left, right] x [start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub left: i64,
    pub right: i64,
    pub start: f64,
    pub end: f64,
}

impl Rect {
    pub fn new(left: i64, right: i64, start: f64, end: f64) -> Result<Self> {
        if left > right || !(start <= end) {
            return Err(Error::InvalidArgument(format!(
                "bad rectangle [{left}, {right}] x [{start}, {end}]"
            )));
        }
        Ok(Self {
            left,
            right,
            start,
            end,
        })
    }

    pub fn contains(&self, site: i64, time: f64) -> bool {
        self.left <= site && site <= self.right && self.start <= time && time <= self.end
    }
}

/// A finite union of closed rectangles. Infection paths used by restricted
/// processes must stay inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeRegion {
    rects: Vec<Rect>,
}

impl SpaceTimeRegion {
    pub fn new(rects: Vec<Rect>) -> Self {
        Self { rects }
    }

    /// The whole window for the whole horizon of `h`.
    pub fn full(h: &HarrisSystem) -> Self {
        Self::window(h.window(), 0.0, h.horizon())
    }

    pub fn window(window: LatticeWindow, start: f64, end: f64) -> Self {
        Self {
            rects: vec![Rect {
                left: window.left(),
                right: window.right(),
                start,
                end,
            }],
        }
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn contains(&self, site: i64, time: f64) -> bool {
        self.rects.iter().any(|r| r.contains(site, time))
    }

    /// Union with another region.
    pub fn union(&self, other: &Self) -> Self {
        let mut rects = self.rects.clone();
        rects.extend_from_slice(&other.rects);
        Self { rects }
    }

    /// Maximal closed time intervals during which `site` is inside.
    pub(crate) fn site_components(&self, site: i64) -> Vec<(f64, f64)> {
        let mut spans: Vec<(f64, f64)> = self
            .rects
            .iter()
            .filter(|r| r.left <= site && site <= r.right)
            .map(|r| (r.start, r.end))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
        for (s, e) in spans {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        merged
    }

    /// Piecewise-constant description of the region's time slices over
    /// `[from, to]` restricted to `window`.
    pub(crate) fn schedule(&self, window: LatticeWindow, from: f64, to: f64) -> Schedule {
        let mut cuts: Vec<f64> = self
            .rects
            .iter()
            .flat_map(|r| [r.start, r.end])
            .filter(|&b| from < b && b < to)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut bounds = Vec::with_capacity(cuts.len() + 2);
        bounds.push(from);
        bounds.extend(cuts);
        bounds.push(to);

        let masks = bounds
            .windows(2)
            .map(|w| {
                self.mask_where(window, |r| r.start <= w[0] && r.end >= w[1])
            })
            .collect();
        Schedule {
            bounds,
            masks,
            at_from: self.mask_where(window, |r| r.start <= from && from <= r.end),
            at_to: self.mask_where(window, |r| r.start <= to && to <= r.end),
        }
    }

    fn mask_where(&self, window: LatticeWindow, keep: impl Fn(&Rect) -> bool) -> Mask {
        let mut mask = vec![false; window.width()];
        for r in self.rects.iter().filter(|r| keep(r)) {
            let lo = r.left.max(window.left());
            let hi = r.right.min(window.right());
            for x in lo..=hi {
                mask[(x - window.left()) as usize] = true;
            }
        }
        if mask.iter().all(|&m| m) {
            None
        } else {
            Some(mask)
        }
    }
}

/// `None` means every site of the window is inside.
pub(crate) type Mask = Option<Vec<bool>>;

/// Segment `k` is the open interval `(bounds[k], bounds[k + 1])`.
#[derive(Debug, Clone)]
pub(crate) struct Schedule {
    pub bounds: Vec<f64>,
    pub masks: Vec<Mask>,
    pub at_from: Mask,
    pub at_to: Mask,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_merge_touching_spans() {
        let r = SpaceTimeRegion::new(vec![
            Rect::new(0, 5, 0.0, 1.0).unwrap(),
            Rect::new(3, 8, 1.0, 2.0).unwrap(),
            Rect::new(4, 4, 3.0, 4.0).unwrap(),
        ]);
        assert_eq!(r.site_components(4), vec![(0.0, 2.0), (3.0, 4.0)]);
        assert_eq!(r.site_components(0), vec![(0.0, 1.0)]);
        assert!(r.site_components(9).is_empty());
    }

    #[test]
    fn schedule_splits_at_rectangle_edges() {
        let w = LatticeWindow::new(0, 8).unwrap();
        let r = SpaceTimeRegion::new(vec![
            Rect::new(0, 5, 0.0, 1.0).unwrap(),
            Rect::new(3, 8, 1.0, 2.0).unwrap(),
        ]);
        let s = r.schedule(w, 0.0, 2.0);
        assert_eq!(s.bounds, vec![0.0, 1.0, 2.0]);
        let first = s.masks[0].as_ref().unwrap();
        assert!(first[5] && !first[6]);
        let second = s.masks[1].as_ref().unwrap();
        assert!(!second[2] && second[3]);
        assert!(SpaceTimeRegion::window(w, 0.0, 2.0).schedule(w, 0.0, 2.0).masks[0].is_none());
    }
}
