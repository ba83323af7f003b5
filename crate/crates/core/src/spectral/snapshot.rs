//! `SLAB1` binary field snapshots.
//!
//! Layout: the five magic bytes `SLAB1`, then little-endian `u64 n_points`,
//! `f64 length`, `f64 time`, and `n_points` `f64` samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Grid1D, WaveField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"SLAB1";

pub fn write_snapshot<W: Write>(mut w: W, field: &WaveField) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(field.grid().n_points() as u64).to_le_bytes())?;
    w.write_all(&field.grid().length().to_le_bytes())?;
    w.write_all(&field.time().to_le_bytes())?;
    for v in field.samples() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::Snapshot(format!("truncated header: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<WaveField> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Snapshot(format!("missing magic: {e}")))?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!("bad magic {magic:?}")));
    }
    let n = usize::try_from(read_u64(&mut r)?)
        .map_err(|_| Error::Snapshot("n_points overflows usize".into()))?;
    let length = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let grid = Grid1D::new(n, length)?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push(read_f64(&mut r)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Snapshot("trailing bytes after samples".into()));
    }
    WaveField::new(grid, samples, time)
}

pub fn save_snapshot(path: impl AsRef<Path>, field: &WaveField) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot(BufWriter::new(file), field)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<WaveField> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid1D::new(16, 4.0).unwrap();
        let f = WaveField::from_fn(g, |x| x * x).unwrap().with_time(2.5);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 5 + 8 + 8 + 8 + 16 * 8);
        assert_eq!(&buf[..5], b"SLAB1");
        assert_eq!(u64::from_le_bytes(buf[5..13].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(buf[13..21].try_into().unwrap()), 4.0);
        assert_eq!(f64::from_le_bytes(buf[21..29].try_into().unwrap()), 2.5);
        assert_eq!(read_snapshot(&buf[..]).unwrap(), f);
    }

    #[test]
    fn rejects_corruption() {
        let g = Grid1D::new(16, 4.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &WaveField::zeros(g)).unwrap();
        assert!(read_snapshot(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_snapshot(&extra[..]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshot(&bad[..]).is_err());
    }
}
