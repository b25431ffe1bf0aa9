//! Versioned little-endian dump of a Harris system.
//!
//! Layout: magic `HARRISv\0`, `u32` version, `i64` left, `i64` right,
//! `f64` horizon, `f64` lambda, `f64` walker rate, `u8` seed flag, `u64`
//! seed; then one length-prefixed (`u64`) array of `f64` times per site,
//! one per edge, and finally the walker clock as `(time, mark)` pairs.

use std::io::{Read, Write};

use super::{ClockMark, HarrisSystem, LatticeWindow};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HARRISv\0";
const VERSION: u32 = 1;

pub fn write_harris<W: Write>(h: &HarrisSystem, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&h.window().left().to_le_bytes())?;
    out.write_all(&h.window().right().to_le_bytes())?;
    for v in [h.horizon(), h.lambda(), h.walker_rate()] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&[u8::from(h.seed().is_some())])?;
    out.write_all(&h.seed().unwrap_or(0).to_le_bytes())?;

    let mut put_times = |times: &[f64]| -> Result<()> {
        out.write_all(&(times.len() as u64).to_le_bytes())?;
        for t in times {
            out.write_all(&t.to_le_bytes())?;
        }
        Ok(())
    };
    for x in h.window().sites() {
        put_times(h.deaths(x))?;
    }
    for x in h.window().left()..h.window().right() {
        put_times(h.links(x))?;
    }
    out.write_all(&(h.walker_clock().len() as u64).to_le_bytes())?;
    for c in h.walker_clock() {
        out.write_all(&c.time.to_le_bytes())?;
        out.write_all(&c.mark.to_le_bytes())?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated input: {e}")))?;
        Ok(buf)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn times(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()?;
        if n > 1 << 40 {
            return Err(Error::Format(format!("implausible stream length {n}")));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn read_harris<R: Read>(input: R) -> Result<HarrisSystem> {
    let mut r = Reader { inner: input };
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.bytes()?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let window = LatticeWindow::new(r.i64()?, r.i64()?)?;
    let horizon = r.f64()?;
    let lambda = r.f64()?;
    let walker_rate = r.f64()?;
    let has_seed = r.bytes::<1>()?[0] != 0;
    let seed = r.u64()?;
    let deaths = (0..window.width()).map(|_| r.times()).collect::<Result<Vec<_>>>()?;
    let links = (0..window.edge_count()).map(|_| r.times()).collect::<Result<Vec<_>>>()?;
    let n = r.u64()?;
    let clock = (0..n)
        .map(|_| Ok(ClockMark { time: r.f64()?, mark: r.f64()? }))
        .collect::<Result<Vec<_>>>()?;
    HarrisSystem::from_streams(window, horizon, lambda, walker_rate, has_seed.then_some(seed), deaths, links, clock)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::sample_harris;

    #[test]
    fn dump_and_load_is_lossless() {
        let h = sample_harris(LatticeWindow::new(-6, 9).unwrap(), 4.5, 2.0, 1.0, 1234).unwrap();
        let mut buf = Vec::new();
        write_harris(&h, &mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let back = read_harris(buf.as_slice()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_harris(&b"nope"[..]), Err(Error::Format(_))));
        let h = sample_harris(LatticeWindow::new(0, 2).unwrap(), 1.0, 1.0, 1.0, 1).unwrap();
        let mut buf = Vec::new();
        write_harris(&h, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_harris(buf.as_slice()).is_err());
    }
}
