//! Binary field dumps.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size | content                         |
//! |--------|------|---------------------------------|
//! | 0      | 8    | magic `DIRACFLD`                |
//! | 8      | 4    | format version (`1`)            |
//! | 12     | 4    | endianness tag `0x01020304`     |
//! | 16     | 4    | points per axis `n`             |
//! | 20     | 4    | component count `c`             |
//! | 24     | 8    | period `L` (f64)                |
//! | 32     | 8·c·n³ | values, component-major, each component in grid order |

use std::io::{Read, Write};

use super::{GridSpec, RealField8};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DIRACFLD";
pub const VERSION: u32 = 1;
pub const ENDIAN_TAG: u32 = 0x0102_0304;
pub const HEADER_LEN: usize = 32;

/// Writes any number of real components defined on `grid`.
pub fn write_components<W: Write>(mut w: W, grid: &GridSpec, comps: &[&[f64]]) -> Result<()> {
    if comps.iter().any(|c| c.len() != grid.len()) {
        return Err(Error::Dump("component length does not match grid".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&ENDIAN_TAG.to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&(comps.len() as u32).to_le_bytes())?;
    w.write_all(&grid.length().to_le_bytes())?;
    let mut bytes = Vec::with_capacity(8 * grid.len());
    for c in comps {
        bytes.clear();
        c.iter().for_each(|v| bytes.extend_from_slice(&v.to_le_bytes()));
        w.write_all(&bytes)?;
    }
    Ok(())
}

pub fn write_field<W: Write>(w: W, field: &RealField8) -> Result<()> {
    let comps: Vec<&[f64]> = field.components().iter().map(Vec::as_slice).collect();
    write_components(w, field.grid(), &comps)
}

/// Reads a dump back as its grid and components.
pub fn read_components<R: Read>(mut r: R) -> Result<(GridSpec, Vec<Vec<f64>>)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let word = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().expect("4 bytes"));
    if word(8) != VERSION {
        return Err(Error::Dump(format!("unsupported version {}", word(8))));
    }
    if word(12) != ENDIAN_TAG {
        return Err(Error::Dump("endianness tag mismatch".into()));
    }
    let n = word(16) as usize;
    let count = word(20) as usize;
    let length = f64::from_le_bytes(header[24..32].try_into().expect("8 bytes"));
    let grid = GridSpec::new(n, length).map_err(|e| Error::Dump(e.to_string()))?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    let mut comps = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut bytes)?;
        comps.push(bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect());
    }
    Ok((grid, comps))
}

pub fn read_field<R: Read>(r: R) -> Result<RealField8> {
    let (grid, comps) = read_components(r)?;
    let comps: [Vec<f64>; 8] =
        comps.try_into().map_err(|c: Vec<_>| Error::Dump(format!("expected 8 components, found {}", c.len())))?;
    RealField8::from_components(grid, comps)
}
