//! Trajectory export: long-format CSV and a binary spectral dump.
//!
//! Dump layout (all little-endian):
//!
//! ```text
//! magic   [u8; 4] = "GKSD"
//! version u32     = 1
//! n       u64     spatial points
//! L       f64     box length
//! n_t     u64     snapshot count
//! n_t x { t: f64, n x { re: f64, im: f64 } }   coefficients in FFT order
//! ```

use std::io::Write;

use num_complex::Complex64;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid1D};

pub const DUMP_MAGIC: [u8; 4] = *b"GKSD";
pub const DUMP_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8;

/// Decoded spectral dump.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDump {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl SpectralDump {
    /// Reconstruct real fields (Hermitian projection applied).
    pub fn fields(&self) -> Result<Vec<Field>> {
        self.coeffs
            .iter()
            .map(|c| Field::from_coeffs(self.grid, c.clone()))
            .collect()
    }
}

/// CSV with header `t,x,u`, one row per (snapshot, grid point). Lines starting
/// with `#` before the header are written verbatim from `preamble`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, preamble: &[String], mut w: W) -> std::io::Result<()> {
    for line in preamble {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "t,x,u")?;
    let g = traj.config.grid;
    for snap in &traj.snapshots {
        for (j, v) in snap.field.samples().iter().enumerate() {
            writeln!(w, "{},{},{}", snap.t, g.x(j), v)?;
        }
    }
    Ok(())
}

pub fn encode_spectral_dump(traj: &Trajectory) -> Vec<u8> {
    let g = traj.config.grid;
    let n = g.n();
    let mut out = Vec::with_capacity(HEADER_LEN + traj.snapshots.len() * (8 + 16 * n));
    out.extend_from_slice(&DUMP_MAGIC);
    out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&g.box_length().to_le_bytes());
    out.extend_from_slice(&(traj.snapshots.len() as u64).to_le_bytes());
    for snap in &traj.snapshots {
        out.extend_from_slice(&snap.t.to_le_bytes());
        for c in snap.field.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::Decode(format!("unexpected end of input at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Decode a dump, validating the header and exact payload size before
/// allocating.
pub fn decode_spectral_dump(bytes: &[u8]) -> Result<SpectralDump> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take::<4>()? != DUMP_MAGIC {
        return Err(Error::Decode("bad magic".into()));
    }
    let version = r.u32()?;
    if version != DUMP_VERSION {
        return Err(Error::Decode(format!("unsupported version {version}")));
    }
    let n = r.u64()?;
    let l = r.f64()?;
    let n_t = r.u64()?;
    let n_usize = usize::try_from(n).map_err(|_| Error::Decode("n too large".into()))?;
    let grid = Grid1D::new(n_usize, l).map_err(|e| Error::Decode(format!("invalid grid: {e}")))?;
    let block = 16u64
        .checked_mul(n)
        .and_then(|b| b.checked_add(8))
        .ok_or_else(|| Error::Decode("size overflow".into()))?;
    let payload = block
        .checked_mul(n_t)
        .ok_or_else(|| Error::Decode("size overflow".into()))?;
    let remaining = (bytes.len() - HEADER_LEN) as u64;
    if payload != remaining {
        return Err(Error::Decode(format!(
            "payload is {remaining} bytes, header implies {payload}"
        )));
    }
    let mut times = Vec::with_capacity(n_t as usize);
    let mut coeffs = Vec::with_capacity(n_t as usize);
    for _ in 0..n_t {
        let t = r.f64()?;
        if !t.is_finite() {
            return Err(Error::Decode("non-finite snapshot time".into()));
        }
        if times.last().is_some_and(|&p| t <= p) {
            return Err(Error::Decode("snapshot times must increase".into()));
        }
        times.push(t);
        let mut c = Vec::with_capacity(n_usize);
        for _ in 0..n_usize {
            let re = r.f64()?;
            let im = r.f64()?;
            c.push(Complex64::new(re, im));
        }
        coeffs.push(c);
    }
    Ok(SpectralDump { grid, times, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{evolve, SolverConfig};

    fn small_traj() -> Trajectory {
        let g = Grid1D::new(32, 12.0).unwrap();
        let cfg = SolverConfig::new(g, 0.01).unwrap();
        let u = Field::from_fn(g, |x| 0.3 * (-(x * x)).exp());
        evolve(&u, 0.05, &cfg, 2).unwrap()
    }

    #[test]
    fn dump_round_trip() {
        let tr = small_traj();
        let bytes = encode_spectral_dump(&tr);
        let d = decode_spectral_dump(&bytes).unwrap();
        assert_eq!(d.grid, tr.config.grid);
        assert_eq!(d.times.len(), tr.snapshots.len());
        for (c, s) in d.coeffs.iter().zip(&tr.snapshots) {
            assert_eq!(c.as_slice(), s.field.coeffs());
        }
    }

    #[test]
    fn truncated_and_corrupt_dumps_rejected() {
        let bytes = encode_spectral_dump(&small_traj());
        assert!(decode_spectral_dump(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_spectral_dump(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_spectral_dump(&bad).is_err());
        let mut huge = bytes;
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_spectral_dump(&huge).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let tr = small_traj();
        let mut out = Vec::new();
        write_trajectory_csv(&tr, &["manifest_hash=abc".into()], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# manifest_hash=abc"));
        assert_eq!(lines.next(), Some("t,x,u"));
        assert_eq!(lines.count(), 32 * tr.snapshots.len());
    }
}
