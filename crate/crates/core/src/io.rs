//! Binary field dumps.
//!
//! Layout, all little-endian: the magic `LKSF`, a `u32` format version,
//! `u32` dimension, `u32` points per axis, `f64` box length, `f64` time,
//! then the `n^d` samples as `f64` in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

pub const MAGIC: &[u8; 4] = b"LKSF";
pub const VERSION: u32 = 1;

/// Serializes `field` stamped with time `t`.
pub fn write_field<W: Write>(mut w: W, field: &Field, t: f64) -> std::io::Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Parses a dump, returning the field and its time stamp.
pub fn read_field<R: Read>(mut r: R) -> Result<(Field, f64)> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let length = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;
    let grid = GridSpec::new(dim, n, length).map_err(|e| Error::Format(e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(read_f64(&mut r)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::Format(e.to_string()))? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    let field = Field::new(grid, values).map_err(|e| Error::Format(e.to_string()))?;
    Ok((field, t))
}

pub fn save(path: &Path, field: &Field, t: f64) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_field(&mut w, field, t).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(Field, f64)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(BufReader::new(file))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format("truncated field dump".into()))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_exact() {
        let g = GridSpec::new(1, 4, 2.0).unwrap();
        let f = Field::new(g, vec![1.0, -2.0, 0.5, 0.0]).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f, 0.25).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 4 + 8 + 8 + 4 * 8);
        assert_eq!(&buf[..4], b"LKSF");
        assert_eq!(&buf[4..8], &[1, 0, 0, 0]);
        assert_eq!(&buf[8..12], &[1, 0, 0, 0]);
        assert_eq!(&buf[12..16], &[4, 0, 0, 0]);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 2.0);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), 0.25);
        assert_eq!(f64::from_le_bytes(buf[40..48].try_into().unwrap()), -2.0);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = GridSpec::new(2, 8, 3.5).unwrap();
        let f = Field::from_fn(g, |x| (x[0] * 1.3).sin() * x[1].exp() / 7.0).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f, 1.0 / 3.0).unwrap();
        let (back, t) = read_field(buf.as_slice()).unwrap();
        assert_eq!(t.to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(back, f);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let g = GridSpec::new(1, 4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &Field::zeros(g), 0.0).unwrap();
        assert!(matches!(read_field(&buf[..buf.len() - 1]), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_field(bad.as_slice()).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_field(long.as_slice()).is_err());
    }
}
