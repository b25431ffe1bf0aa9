//! Dense generator of the contact process on a small window. Used only to
//! check the Harris construction against the Markov generator.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::harris::LatticeWindow;

pub const MAX_GENERATOR_WIDTH: usize = 12;

/// Bit `i` of the index is the occupancy of the `i`-th site from the left.
pub fn state_index(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| 1usize << i)
        .sum()
}

/// Transition-rate matrix over `{0,1}^width`, boundary vacant. Row `xi`
/// holds rate 1 to each single-site healing and rate `lambda` to each edge
/// transmission that changes the state; the diagonal is minus the row sum.
pub fn rate_matrix(window: LatticeWindow, lambda: f64) -> Result<DMatrix<f64>> {
    let width = window.width();
    if width > MAX_GENERATOR_WIDTH {
        return Err(Error::WindowTooLarge {
            width,
            max: MAX_GENERATOR_WIDTH,
        });
    }
    let n = 1usize << width;
    let mut q = DMatrix::<f64>::zeros(n, n);
    for state in 0..n {
        let occ = |i: usize| state >> i & 1 == 1;
        for x in 0..width {
            if occ(x) {
                q[(state, state & !(1 << x))] += 1.0;
            }
        }
        for e in 0..width.saturating_sub(1) {
            if occ(e) != occ(e + 1) {
                q[(state, state | (1 << e) | (1 << (e + 1)))] += lambda;
            }
        }
        let total: f64 = (0..n).filter(|&j| j != state).map(|j| q[(state, j)]).sum();
        q[(state, state)] = -total;
    }
    Ok(q)
}

/// Matrix exponential (nalgebra's Pade scaling and squaring).
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().exp()
}

/// Law at time `t` of the process started from `initial`.
pub fn transition_distribution(window: LatticeWindow, lambda: f64, initial: &[bool], t: f64) -> Result<Vec<f64>> {
    let q = rate_matrix(window, lambda)?;
    let p = expm(&(q * t));
    let mut start = DVector::<f64>::zeros(p.nrows());
    start[state_index(initial)] = 1.0;
    Ok((p.transpose() * start).iter().copied().collect())
}
