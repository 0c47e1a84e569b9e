//! Little-endian binary snapshots of `f64` FDCMSS sketches.
//!
//! Layout:
//!
//! ```text
//! "FDC1"            4 bytes magic
//! d                 u32
//! w                 u32
//! landmark          f64
//! count             f64
//! cells             d*w times, row-major: (item u32, count f64) x 2
//! decay tag         u8   (0 exponential, 1 polynomial)
//! decay parameter   f64  (lambda or beta)
//! phi               f64
//! hash seed         u64
//! ```
//!
//! A free counter is written as item 0 with count 0.

use std::io::{Read, Write};

use crate::decay::{DecayKind, DecaySpec};
use crate::error::{Error, Result};
use crate::hashing::XxColumns;
use crate::sketch::FdcmssSketch;
use crate::space_saving::SpaceSaving;

pub const MAGIC: &[u8; 4] = b"FDC1";

const TAG_EXPONENTIAL: u8 = 0;
const TAG_POLYNOMIAL: u8 = 1;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

impl FdcmssSketch<f64, XxColumns> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.cells().len() * 24 + 25);
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, self.rows() as u32);
        put_u32(&mut out, self.width() as u32);
        put_f64(&mut out, self.landmark());
        put_f64(&mut out, self.count());
        for cell in self.cells() {
            for c in cell.counters() {
                let item = if c.is_occupied() { c.item } else { 0 };
                put_u32(&mut out, item);
                put_f64(&mut out, c.count.max(0.0));
            }
        }
        let (tag, param) = match self.decay().kind() {
            DecayKind::Exponential { lambda } => (TAG_EXPONENTIAL, lambda),
            DecayKind::Polynomial { beta } => (TAG_POLYNOMIAL, beta),
        };
        out.push(tag);
        put_f64(&mut out, param);
        put_f64(&mut out, self.phi());
        out.extend_from_slice(&self.seed().to_le_bytes());
        out
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic or unsupported version".into()));
        }
        let rows = r.u32()? as usize;
        let width = r.u32()? as usize;
        if rows == 0 || width == 0 {
            return Err(Error::Format(format!("empty grid {rows}x{width}")));
        }
        let landmark = r.f64()?;
        let count = r.f64()?;
        let n_cells = rows
            .checked_mul(width)
            .filter(|&n| n.checked_mul(24).is_some_and(|b| b <= bytes.len()))
            .ok_or_else(|| Error::Format(format!("grid {rows}x{width} exceeds snapshot size")))?;
        let mut cells = Vec::with_capacity(n_cells);
        for idx in 0..n_cells {
            let mut pairs = Vec::with_capacity(2);
            for _ in 0..2 {
                let item = r.u32()?;
                let c = r.f64()?;
                if c > 0.0 {
                    pairs.push((item, c));
                } else if c != 0.0 || item != 0 {
                    return Err(Error::Format(format!("cell {idx}: invalid free counter")));
                }
            }
            let cell = SpaceSaving::from_counters(&pairs)
                .map_err(|e| Error::Format(format!("cell {idx}: {e}")))?;
            cells.push(cell);
        }
        let tag = r.take(1)?[0];
        let param = r.f64()?;
        let decay = match tag {
            TAG_EXPONENTIAL => DecaySpec::exponential(param, landmark),
            TAG_POLYNOMIAL => DecaySpec::polynomial(param, landmark),
            other => return Err(Error::Format(format!("unknown decay tag {other}"))),
        }
        .map_err(|e| Error::Format(e.to_string()))?;
        let phi = r.f64()?;
        let seed = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        if r.pos != bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        FdcmssSketch::from_parts(phi, decay, XxColumns::new(seed, rows, width), cells, count)
            .map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
