use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::{HarrisSystem, SpaceTimePoint, SpaceTimeRegion};
use crate::error::{Error, Result};

#[derive(PartialEq)]
struct Arrival {
    time: f64,
    site: i64,
}

impl Eq for Arrival {}

impl Ord for Arrival {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on time.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.site.cmp(&self.site))
    }
}

impl PartialOrd for Arrival {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Whether an infection path inside `region` joins `from` to `to`.
///
/// Earliest-arrival search over space-time: a node is a site together with
/// the death-free, region-connected stretch of time it is reached in, and
/// reaching a stretch earlier dominates reaching it later. This shares no
/// code with the chronological sweeps and serves as their oracle.
pub fn path_exists(
    h: &HarrisSystem,
    from: SpaceTimePoint,
    to: SpaceTimePoint,
    region: &SpaceTimeRegion,
) -> Result<bool> {
    if from.time > to.time {
        return Err(Error::InvalidArgument("path endpoints out of time order".into()));
    }
    if !region.contains(from.site, from.time) || !region.contains(to.site, to.time) {
        return Err(Error::InvalidArgument("path endpoints must lie in the region".into()));
    }
    let window = h.window();
    if !window.contains(from.site) || !window.contains(to.site) {
        return Ok(false);
    }

    let components: Vec<Vec<(f64, f64)>> = window.sites().map(|x| region.site_components(x)).collect();
    let comp_of = |x: i64, t: f64| -> Option<(usize, f64)> {
        let comps = &components[(x - window.left()) as usize];
        comps
            .iter()
            .position(|&(s, e)| s <= t && t <= e)
            .map(|k| (k, comps[k].1))
    };

    let mut seen: HashSet<(i64, usize, usize)> = HashSet::new();
    let mut heap = BinaryHeap::new();
    heap.push(Arrival {
        time: from.time,
        site: from.site,
    });

    while let Some(Arrival { time, site }) = heap.pop() {
        let deaths = h.deaths(site);
        let death_idx = deaths.partition_point(|&d| d <= time);
        let Some((comp_idx, comp_end)) = comp_of(site, time) else { continue };
        if !seen.insert((site, death_idx, comp_idx)) {
            continue;
        }
        let next_death = deaths.get(death_idx).copied().unwrap_or(f64::INFINITY);
        let live_end = next_death.min(comp_end);

        if site == to.site && to.time <= live_end {
            return Ok(true);
        }
        let last_link = live_end.min(to.time);
        for (edge_left, neighbour) in [(site - 1, site - 1), (site, site + 1)] {
            if !window.contains(neighbour) {
                continue;
            }
            let links = h.links(edge_left);
            let start = links.partition_point(|&l| l <= time);
            for &l in links[start..].iter().take_while(|&&l| l < last_link) {
                if region.contains(neighbour, l) {
                    heap.push(Arrival {
                        time: l,
                        site: neighbour,
                    });
                }
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::{LatticeWindow, Rect};

    fn system(deaths: Vec<Vec<f64>>, links: Vec<Vec<f64>>) -> HarrisSystem {
        let w = LatticeWindow::new(0, deaths.len() as i64 - 1).unwrap();
        HarrisSystem::from_streams(w, 10.0, 1.0, 0.0, None, deaths, links, vec![]).unwrap()
    }

    #[test]
    fn empty_path_without_deaths() {
        let h = system(vec![vec![], vec![5.0]], vec![vec![]]);
        let r = SpaceTimeRegion::full(&h);
        assert!(path_exists(&h, SpaceTimePoint::new(0, 1.0), SpaceTimePoint::new(0, 9.0), &r).unwrap());
    }

    #[test]
    fn death_on_start_site_kills() {
        let h = system(vec![vec![], vec![5.0]], vec![vec![]]);
        let r = SpaceTimeRegion::full(&h);
        assert!(!path_exists(&h, SpaceTimePoint::new(1, 1.0), SpaceTimePoint::new(1, 9.0), &r).unwrap());
        // A death exactly at the end time does not count.
        assert!(path_exists(&h, SpaceTimePoint::new(1, 1.0), SpaceTimePoint::new(1, 5.0), &r).unwrap());
    }

    #[test]
    fn crosses_a_link_before_dying() {
        let h = system(vec![vec![3.0], vec![], vec![]], vec![vec![2.0], vec![4.0]]);
        let r = SpaceTimeRegion::full(&h);
        assert!(path_exists(&h, SpaceTimePoint::new(0, 0.0), SpaceTimePoint::new(2, 9.0), &r).unwrap());
        assert!(!path_exists(&h, SpaceTimePoint::new(0, 2.5), SpaceTimePoint::new(2, 9.0), &r).unwrap());
        // Time order matters: the second link fires before the first.
        let h2 = system(vec![vec![], vec![], vec![]], vec![vec![4.0], vec![2.0]]);
        assert!(!path_exists(&h2, SpaceTimePoint::new(0, 0.0), SpaceTimePoint::new(2, 9.0), &SpaceTimeRegion::full(&h2)).unwrap());
    }

    #[test]
    fn region_blocks_paths() {
        let h = system(vec![vec![], vec![], vec![]], vec![vec![2.0], vec![4.0]]);
        let r = SpaceTimeRegion::new(vec![Rect::new(0, 1, 0.0, 10.0).unwrap(), Rect::new(2, 2, 5.0, 10.0).unwrap()]);
        assert!(!path_exists(&h, SpaceTimePoint::new(0, 0.0), SpaceTimePoint::new(2, 9.0), &r).unwrap());
        assert!(path_exists(&h, SpaceTimePoint::new(0, 0.0), SpaceTimePoint::new(1, 9.0), &r).unwrap());
    }

    #[test]
    fn rejects_reversed_times() {
        let h = system(vec![vec![]], vec![]);
        let r = SpaceTimeRegion::full(&h);
        assert!(path_exists(&h, SpaceTimePoint::new(0, 2.0), SpaceTimePoint::new(0, 1.0), &r).is_err());
    }
}
