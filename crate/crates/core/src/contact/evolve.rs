use std::io::Write;

use super::Configuration;
use crate::error::{Error, Result};
use crate::harris::sweep::{occupancy_of, ForwardSweep};
use crate::harris::{HarrisSystem, SpaceTimeRegion};

/// Snapshots of one forward evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub sample_times: Vec<f64>,
    pub snapshots: Vec<Configuration>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> Option<&Configuration> {
        self.snapshots.last()
    }
}

pub(crate) fn check_sample_times(h: &HarrisSystem, times: &[f64], start: f64) -> Result<()> {
    let in_range = times.iter().all(|&t| t >= start && t <= h.horizon());
    let sorted = times.windows(2).all(|w| w[0] <= w[1]);
    if in_range && sorted {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "sample times must be sorted within [{start}, {}]",
            h.horizon()
        )))
    }
}

/// Forward evolution from `initial` at time 0; one sweep produces every
/// snapshot. Each snapshot equals `reachable_set(h, initial, 0, t, region)`.
pub fn evolve(
    h: &HarrisSystem,
    initial: &Configuration,
    region: &SpaceTimeRegion,
    sample_times: &[f64],
) -> Result<Trajectory> {
    check_sample_times(h, sample_times, 0.0)?;
    let mut sweep = ForwardSweep::new(h, occupancy_of(h, initial), 0.0, h.horizon(), Some(region));
    let snapshots = sample_times
        .iter()
        .map(|&t| {
            sweep.advance_to(t);
            Configuration::from_bits(h.window(), sweep.occupancy().to_vec(), false)
        })
        .collect();
    Ok(Trajectory {
        sample_times: sample_times.to_vec(),
        snapshots,
    })
}

/// CSV with a `time` column followed by one 0/1 column per window site.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let Some(first) = traj.snapshots.first() else {
        writeln!(out, "time")?;
        return Ok(());
    };
    let header: Vec<String> = std::iter::once("time".to_string())
        .chain(first.window().sites().map(|x| format!("x{x}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (t, snap) in traj.sample_times.iter().zip(&traj.snapshots) {
        write!(out, "{t}")?;
        for &b in snap.bits() {
            write!(out, ",{}", u8::from(b))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::{reachable_set, sample_harris, LatticeWindow};

    #[test]
    fn empty_start_is_absorbing() {
        let h = sample_harris(LatticeWindow::new(0, 20).unwrap(), 5.0, 3.0, 0.0, 8).unwrap();
        let traj = evolve(&h, &Configuration::empty(h.window()), &SpaceTimeRegion::full(&h), &[0.0, 1.0, 5.0]).unwrap();
        assert!(traj.snapshots.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn pure_death_kills_the_singleton() {
        let h = sample_harris(LatticeWindow::new(0, 4).unwrap(), 50.0, 0.0, 0.0, 2).unwrap();
        let first_death = h.deaths(2)[0];
        let traj = evolve(
            &h,
            &Configuration::from_sites(h.window(), [2]),
            &SpaceTimeRegion::full(&h),
            &[first_death * 0.5, (first_death + 50.0) / 2.0],
        )
        .unwrap();
        assert_eq!(traj.snapshots[0].count(), 1);
        assert!(traj.snapshots[1].is_empty());
    }

    #[test]
    fn snapshots_equal_independent_reachable_sets() {
        for seed in 0..50 {
            let h = sample_harris(LatticeWindow::new(-8, 8).unwrap(), 3.0, 1.8, 0.0, seed).unwrap();
            let region = SpaceTimeRegion::full(&h);
            let init = Configuration::from_sites(h.window(), [-8, -2, 0, 3, 7]);
            let times = [0.0, 0.4, 1.1, 2.0, 2.9, 3.0];
            let traj = evolve(&h, &init, &region, &times).unwrap();
            for (t, snap) in times.iter().zip(&traj.snapshots) {
                assert_eq!(snap, &reachable_set(&h, &init, 0.0, *t, &region));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let h = sample_harris(LatticeWindow::new(-1, 1).unwrap(), 1.0, 1.0, 0.0, 1).unwrap();
        let traj = evolve(&h, &Configuration::full(h.window()), &SpaceTimeRegion::full(&h), &[0.0]).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time,x-1,x0,x1\n0,1,1,1\n");
    }

    #[test]
    fn unsorted_times_are_rejected() {
        let h = sample_harris(LatticeWindow::new(0, 1).unwrap(), 1.0, 1.0, 0.0, 1).unwrap();
        assert!(evolve(&h, &Configuration::full(h.window()), &SpaceTimeRegion::full(&h), &[0.5, 0.2]).is_err());
    }
}
