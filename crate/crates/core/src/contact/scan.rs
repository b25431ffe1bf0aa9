use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::harris::LatticeWindow;

/// A maximal vacant run `[start, start + len - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VacantRun {
    pub start: i64,
    pub len: usize,
}

/// Maximal all-vacant runs of `interval` with length at least `k`, left to
/// right. Runs are clipped to the interval.
pub fn gap_scan(config: &Configuration, interval: LatticeWindow, k: usize) -> Vec<VacantRun> {
    let mut out = Vec::new();
    let mut run_start: Option<i64> = None;
    for x in interval.sites() {
        match (config.get(x), run_start) {
            (false, None) => run_start = Some(x),
            (true, Some(s)) => {
                let len = (x - s) as usize;
                if len >= k {
                    out.push(VacantRun { start: s, len });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        let len = (interval.right() - s + 1) as usize;
        if len >= k {
            out.push(VacantRun { start: s, len });
        }
    }
    out
}

/// Leftmost and rightmost occupied sites inside the window.
pub fn edge_positions(config: &Configuration) -> (Option<i64>, Option<i64>) {
    let bits = config.bits();
    let w = config.window();
    let left = bits.iter().position(|&b| b).map(|i| w.site_at(i));
    let right = bits.iter().rposition(|&b| b).map(|i| w.site_at(i));
    (left, right)
}
