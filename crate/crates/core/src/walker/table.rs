use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contact::Configuration;
use crate::error::{Error, Result};
use crate::rng::mix64;

/// Occupancy of the `2 r + 1` sites around a centre, leftmost site in the
/// most significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalPattern {
    bits: u32,
    len: u32,
}

impl LocalPattern {
    pub fn new(bits: u32, len: u32) -> Self {
        debug_assert!(len < 32 && bits < (1 << len));
        Self { bits, len }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> u32 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Occupancy at offset `k` from the left end.
    pub fn get(self, k: u32) -> bool {
        self.bits >> (self.len - 1 - k) & 1 == 1
    }

    pub fn reversed(self) -> Self {
        let bits = (0..self.len).fold(0, |acc, k| acc | (u32::from(self.get(k)) << k));
        Self { bits, len: self.len }
    }

    pub fn to_bitstring(self) -> String {
        (0..self.len).map(|k| if self.get(k) { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        if s.is_empty() || s.len() > 31 {
            return None;
        }
        let mut bits = 0;
        for c in s.chars() {
            bits = bits << 1
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return None,
                };
        }
        Some(Self { bits, len: s.len() as u32 })
    }
}

/// Pattern `(config(center - radius), ..., config(center + radius))`;
/// sites beyond the window read the configuration's `outside` value.
pub fn local_pattern(config: &Configuration, center: i64, radius: u32) -> LocalPattern {
    let r = radius as i64;
    let bits = (center - r..=center + r).fold(0u32, |acc, x| acc << 1 | u32::from(config.get(x)));
    LocalPattern::new(bits, 2 * radius + 1)
}

/// Jump rates as functions of the local pattern around the walker, with the
/// clock rate `mprime` that dominates them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    radius: u32,
    mprime: f64,
    g_plus: Vec<f64>,
    g_minus: Vec<f64>,
}

impl RateTable {
    /// Requires `max g_plus + max g_minus < mprime`.
    pub fn new(radius: u32, mprime: f64, g_plus: Vec<f64>, g_minus: Vec<f64>) -> Result<Self> {
        if radius > 14 {
            return Err(Error::RateTable(format!("radius {radius} too large")));
        }
        let n = 1usize << (2 * radius + 1);
        if g_plus.len() != n || g_minus.len() != n {
            return Err(Error::RateTable(format!("expected {n} patterns")));
        }
        if !g_plus.iter().chain(&g_minus).all(|g| g.is_finite() && *g >= 0.0) {
            return Err(Error::RateTable("rates must be finite and non-negative".into()));
        }
        let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        if !(mprime.is_finite() && sup(&g_plus) + sup(&g_minus) < mprime) {
            return Err(Error::RateTable(format!(
                "Mprime = {mprime} must exceed sup g_plus + sup g_minus = {}",
                sup(&g_plus) + sup(&g_minus)
            )));
        }
        Ok(Self {
            radius,
            mprime,
            g_plus,
            g_minus,
        })
    }

    /// Environment-independent rates at radius 0.
    pub fn constant(up: f64, down: f64, mprime: f64) -> Result<Self> {
        Self::new(0, mprime, vec![up; 2], vec![down; 2])
    }

    /// Tabulates `rates(pattern) = (g_plus, g_minus)` over every pattern.
    pub fn from_fn(radius: u32, mprime: f64, rates: impl Fn(LocalPattern) -> (f64, f64)) -> Result<Self> {
        let len = 2 * radius + 1;
        let (g_plus, g_minus) = (0..1u32 << len).map(|b| rates(LocalPattern::new(b, len))).unzip();
        Self::new(radius, mprime, g_plus, g_minus)
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn mprime(&self) -> f64 {
        self.mprime
    }

    pub fn pattern_count(&self) -> usize {
        self.g_plus.len()
    }

    /// `(g_plus, g_minus)` for a pattern of the table's length.
    #[inline]
    pub fn rates(&self, pattern: LocalPattern) -> (f64, f64) {
        let i = pattern.bits() as usize;
        (self.g_plus[i], self.g_minus[i])
    }

    pub fn sup_plus(&self) -> f64 {
        self.g_plus.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_minus(&self) -> f64 {
        self.g_minus.iter().copied().fold(0.0, f64::max)
    }

    /// Same rates with a different clock bound.
    pub fn with_mprime(&self, mprime: f64) -> Result<Self> {
        Self::new(self.radius, mprime, self.g_plus.clone(), self.g_minus.clone())
    }

    /// Table of the mirror-image walk: `g_plus'(p) = g_minus(rev p)` and
    /// `g_minus'(p) = g_plus(rev p)`.
    pub fn mirrored(&self) -> Self {
        Self::from_fn(self.radius, self.mprime, |p| {
            let (up, down) = self.rates(p.reversed());
            (down, up)
        })
        .expect("mirror of a valid table is valid")
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        self == &self.mirrored()
    }

    /// The text format: header `radius=r Mprime=m`, then `bits g_plus g_minus`
    /// for every pattern.
    pub fn to_text(&self) -> String {
        let mut s = format!("radius={} Mprime={}\n", self.radius, self.mprime);
        let len = 2 * self.radius + 1;
        for b in 0..self.g_plus.len() {
            let p = LocalPattern::new(b as u32, len);
            let _ = writeln!(s, "{} {} {}", p.to_bitstring(), self.g_plus[b], self.g_minus[b]);
        }
        s
    }

    /// Strict parser: every pattern exactly once. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::RateTable("empty file".into()))?;
        let (mut radius, mut mprime) = (None, None);
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("radius", v)) => radius = v.parse::<u32>().ok(),
                Some(("Mprime", v)) => mprime = v.parse::<f64>().ok(),
                _ => return Err(Error::RateTable(format!("bad header field {field:?}"))),
            }
        }
        let (Some(radius), Some(mprime)) = (radius, mprime) else {
            return Err(Error::RateTable(format!("header must be `radius=<r> Mprime=<m>`, got {header:?}")));
        };
        if radius > 14 {
            return Err(Error::RateTable(format!("radius {radius} too large")));
        }
        let len = 2 * radius + 1;
        let n = 1usize << len;
        let mut g_plus = vec![None; n];
        let mut g_minus = vec![f64::NAN; n];
        for (lineno, line) in lines {
            let bad = || Error::RateTable(format!("line {}: cannot parse {line:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            let (Some(bits), Some(up), Some(down), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad());
            };
            let pattern = LocalPattern::from_bitstring(bits).filter(|p| p.len() == len).ok_or_else(bad)?;
            let up: f64 = up.parse().map_err(|_| bad())?;
            let down: f64 = down.parse().map_err(|_| bad())?;
            let slot = &mut g_plus[pattern.bits() as usize];
            if slot.is_some() {
                return Err(Error::RateTable(format!("line {}: duplicate pattern {bits}", lineno + 1)));
            }
            *slot = Some(up);
            g_minus[pattern.bits() as usize] = down;
        }
        if let Some(missing) = g_plus.iter().position(Option::is_none) {
            return Err(Error::RateTable(format!(
                "missing pattern {}",
                LocalPattern::new(missing as u32, len).to_bitstring()
            )));
        }
        Self::new(radius, mprime, g_plus.into_iter().map(Option::unwrap).collect(), g_minus)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Short content digest of the text form.
    pub fn digest(&self) -> String {
        let h = self
            .to_text()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |acc, b| mix64(acc ^ u64::from(b)));
        format!("{h:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::LatticeWindow;

    #[test]
    fn pattern_reads_outside_value() {
        let w = LatticeWindow::new(0, 4).unwrap();
        let c = Configuration::from_sites(w, [0, 2]).with_outside(true);
        assert_eq!(local_pattern(&c, 0, 1).to_bitstring(), "110");
        assert_eq!(local_pattern(&c, 4, 1).to_bitstring(), "001");
        assert_eq!(local_pattern(&c, 2, 0).to_bitstring(), "1");
        let full = Configuration::full(w);
        assert_eq!(local_pattern(&full, 2, 2).bits(), 0b11111);
    }

    #[test]
    fn reversal() {
        let p = LocalPattern::from_bitstring("110").unwrap();
        assert_eq!(p.reversed().to_bitstring(), "011");
    }

    #[test]
    fn text_round_trip() {
        let t = RateTable::from_fn(1, 1.0, |p| (0.1 + 0.1 * f64::from(p.get(2)), 0.2 * f64::from(p.get(0)))).unwrap();
        assert_eq!(RateTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn strict_parsing() {
        let ok = "radius=0 Mprime=1\n0 0.3 0.1\n1 0.3 0.1\n";
        assert!(RateTable::parse(ok).is_ok());
        assert!(RateTable::parse("radius=0 Mprime=1\n0 0.3 0.1\n").is_err(), "missing pattern");
        assert!(RateTable::parse("radius=0 Mprime=1\n0 0.3 0.1\n0 0.3 0.1\n1 0 0\n").is_err(), "duplicate");
        assert!(RateTable::parse("radius=0 Mprime=0.3\n0 0.3 0.1\n1 0.3 0.1\n").is_err(), "bound");
        assert!(RateTable::parse("radius=1 Mprime=1\n0 0.3 0.1\n1 0.3 0.1\n").is_err(), "length");
        assert!(RateTable::parse("Mprime=1\n").is_err());
    }

    #[test]
    fn sup_norm_bound_is_enforced() {
        // Each pattern sums below 1, but the sup norms do not.
        let r = RateTable::new(0, 1.0, vec![0.9, 0.0], vec![0.0, 0.9]);
        assert!(r.is_err());
    }

    #[test]
    fn mirror_swaps_and_reverses() {
        let t = RateTable::from_fn(1, 1.0, |p| (0.4 * f64::from(p.get(2)), 0.1)).unwrap();
        let m = t.mirrored();
        let p = LocalPattern::from_bitstring("100").unwrap();
        assert_eq!(m.rates(p), (0.1, 0.4));
        assert_eq!(m.mirrored(), t);
        assert!(!t.is_mirror_symmetric());
        let sym = RateTable::from_fn(1, 1.0, |p| (0.1 + 0.3 * f64::from(p.get(2)), 0.1 + 0.3 * f64::from(p.get(0)))).unwrap();
        assert!(sym.is_mirror_symmetric());
    }
}
