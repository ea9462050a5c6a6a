//! Little-endian binary format for factor chains.
//!
//! ```text
//! magic      8 bytes  "BNETFAC\0"
//! version    u32
//! n k k0 L Lξ r      6 × u64
//! grid sign variant init   4 × u8
//! factors    u32
//!   stage tag u8, level u32, blocks u32
//!     out input phase rows cols   5 × u32
//!     rows·cols × (re f64, im f64)
//! ```
//!
//! Floats are written with `to_bits`, so a round trip is bit-exact.

use super::{Block, BlockKey, ButterflyFactors, InitKind, Stage, Variant};
use crate::chebyshev::GridKind;
use crate::error::{Error, Result};
use crate::geometry::ButterflyGeometry;
use crate::oracle::KernelSign;
use num_complex::Complex64;
use std::io::{Read, Write};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"BNETFAC\0";

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

pub fn write_factors<W: Write>(f: &ButterflyFactors, mut w: W) -> Result<()> {
    let g = f.geometry();
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for v in [g.n(), g.k(), g.k0(), g.depth(), g.freq_depth(), g.rank()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    let flags = [
        matches!(g.grid(), GridKind::Literal) as u8,
        matches!(g.sign(), KernelSign::Positive) as u8,
        matches!(f.variant(), Variant::Inflated) as u8,
        matches!(f.init_kind(), InitKind::Random) as u8,
    ];
    w.write_all(&flags)?;
    w.write_all(&(f.factors().len() as u32).to_le_bytes())?;
    for factor in f.factors() {
        let (tag, level) = match factor.stage {
            Stage::Interpolation => (0u8, 0usize),
            Stage::Time(l) => (1, l),
            Stage::Switch => (2, 0),
            Stage::Frequency(l) => (3, l),
            Stage::Output => (4, 0),
        };
        w.write_all(&[tag])?;
        w.write_all(&(level as u32).to_le_bytes())?;
        w.write_all(&(factor.blocks.len() as u32).to_le_bytes())?;
        for b in &factor.blocks {
            for v in [b.key.out, b.key.input, b.key.phase, b.rows, b.cols] {
                w.write_all(&(v as u32).to_le_bytes())?;
            }
            for z in &b.data {
                w.write_all(&z.re.to_bits().to_le_bytes())?;
                w.write_all(&z.im.to_bits().to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const B: usize>(&mut self) -> Result<[u8; B]> {
        let mut buf = [0u8; B];
        match self.inner.read_exact(&mut buf) {
            Ok(()) => Ok(buf),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => format_err("truncated file"),
            Err(e) => Err(e.into()),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.bytes()?) as usize)
    }

    fn u64(&mut self) -> Result<usize> {
        usize::try_from(u64::from_le_bytes(self.bytes()?)).or_else(|_| format_err("size overflow"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(u64::from_le_bytes(self.bytes()?)))
    }
}

fn flag<T>(v: u8, a: T, b: T, what: &str) -> Result<T> {
    match v {
        0 => Ok(a),
        1 => Ok(b),
        _ => format_err(format!("bad {what} flag {v}")),
    }
}

/// Read a chain and check every block against the declared variant's mask.
pub fn read_factors<R: Read>(r: R) -> Result<ButterflyFactors> {
    let mut r = Reader { inner: r };
    if &r.bytes::<8>()? != MAGIC {
        return format_err("bad magic");
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION as usize {
        return format_err(format!("unsupported version {version}"));
    }
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = r.u64()?;
    }
    let [n, k, k0, depth, freq_depth, rank] = dims;
    let geometry = ButterflyGeometry::new(n, k, k0, depth, freq_depth, rank)
        .or_else(|e| format_err(format!("header geometry: {e}")))?;
    let grid = flag(r.u8()?, GridKind::Roots, GridKind::Literal, "grid")?;
    let sign = flag(r.u8()?, KernelSign::Negative, KernelSign::Positive, "sign")?;
    let variant = flag(r.u8()?, Variant::Butterfly, Variant::Inflated, "variant")?;
    let init = flag(r.u8()?, InitKind::Butterfly, InitKind::Random, "init")?;
    let geometry = geometry.with_grid(grid).with_sign(sign);

    let count = r.u32()?;
    if count != depth + 3 {
        return format_err(format!("{count} factors, expected {}", depth + 3));
    }
    // Cap on entries per block, so a corrupted header cannot force a huge allocation.
    let max_entries = geometry.n().max(geometry.k()) * rank.max(1) * 2;
    let mut blocks = Vec::with_capacity(count);
    for idx in 0..count {
        let (tag, level) = (r.u8()?, r.u32()?);
        let stage = match tag {
            0 => Stage::Interpolation,
            1 => Stage::Time(level),
            2 => Stage::Switch,
            3 => Stage::Frequency(level),
            4 => Stage::Output,
            t => return format_err(format!("bad stage tag {t}")),
        };
        let expected = expected_stage(&geometry, idx);
        if stage != expected {
            return format_err(format!("factor {idx} is {}, expected {}", stage.label(), expected.label()));
        }
        let nb = r.u32()?;
        let mut list = Vec::with_capacity(nb.min(1 << 16));
        for _ in 0..nb {
            let key = BlockKey { out: r.u32()?, input: r.u32()?, phase: r.u32()? };
            let (rows, cols) = (r.u32()?, r.u32()?);
            if rows.saturating_mul(cols) > max_entries {
                return format_err(format!("block {key:?} of {rows}x{cols} is too large"));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                let (re, im) = (r.f64()?, r.f64()?);
                data.push(Complex64::new(re, im));
            }
            list.push(Block { key, rows, cols, data });
        }
        blocks.push(list);
    }
    let mut tail = [0u8; 1];
    if r.inner.read(&mut tail)? != 0 {
        return format_err("trailing bytes");
    }
    ButterflyFactors::from_blocks(geometry, variant, init, blocks)
}

fn expected_stage(g: &ButterflyGeometry, idx: usize) -> Stage {
    let lt = g.time_depth();
    match idx {
        0 => Stage::Interpolation,
        i if i <= lt => Stage::Time(i),
        i if i == lt + 1 => Stage::Switch,
        i if i <= g.depth() + 1 => Stage::Frequency(i - 1),
        _ => Stage::Output,
    }
}
