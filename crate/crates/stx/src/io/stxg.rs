//! The STXG binary grid container.
//!
//! A deliberately small, dependency-free format for moving [`Grid3D`]
//! volumes between pipeline stages and test fixtures, designed around two
//! guarantees: `write ∘ read` is byte-identical and `read ∘ write` is
//! value-identical (bit-exact, including canonical NaN missing markers).
//!
//! Layout, all integers little-endian:
//!
//! | section        | encoding                                        |
//! |----------------|-------------------------------------------------|
//! | magic          | 4 bytes `"STXG"`                                |
//! | version        | u32 = 1                                         |
//! | ntime, nlat, nlon | u32 each                                     |
//! | dtype          | u8: 0 = IEEE-754 binary32, 1 = binary64         |
//! | units          | u16 length + UTF-8 bytes                        |
//! | variable name  | u16 length + UTF-8 bytes                        |
//! | time axis      | ntime × i32 month index (`year·12 + month − 1`) |
//! | lat edges      | (nlat+1) × f64                                  |
//! | lat centers    | nlat × f64                                      |
//! | lon edges      | (nlon+1) × f64                                  |
//! | lon centers    | nlon × f64                                      |
//! | data           | ntime·nlat·nlon × dtype, (time, lat, lon) row-major |
//!
//! Missing voxels are IEEE NaN (quiet/canonical NaNs round-trip exactly).

use std::path::Path;

use crate::error::{Result, StxError};
use crate::grid::{DataKind, Grid3D, GridAxes, MonthIndex};

const MAGIC: &[u8; 4] = b"STXG";
const VERSION: u32 = 1;

/// Serializes a grid to the canonical STXG byte stream. Deterministic:
/// identical grids produce identical bytes.
pub fn write_grid(grid: &Grid3D) -> Result<Vec<u8>> {
    let (ntime, nlat, nlon) = grid.dims();
    let mut out = Vec::with_capacity(64 + grid.values().len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(ntime as u32).to_le_bytes());
    out.extend_from_slice(&(nlat as u32).to_le_bytes());
    out.extend_from_slice(&(nlon as u32).to_le_bytes());
    out.push(grid.dtype().code());
    write_str(&mut out, grid.units())?;
    write_str(&mut out, grid.variable_name())?;
    for m in grid.time_axis() {
        out.extend_from_slice(&m.raw().to_le_bytes());
    }
    for axis in [
        grid.lat_edges(),
        grid.lat_centers(),
        grid.lon_edges(),
        grid.lon_centers(),
    ] {
        for v in axis {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    match grid.dtype() {
        DataKind::F32 => {
            for v in grid.values() {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        DataKind::F64 => {
            for v in grid.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Parses an STXG byte stream into a grid, re-validating every structural
/// invariant.
pub fn read_grid(bytes: &[u8]) -> Result<Grid3D> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let magic = c.take(4)?;
    if magic != MAGIC {
        return Err(StxError::format(format!(
            "bad magic {:02x?}, expected \"STXG\"",
            magic
        )));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(StxError::format(format!(
            "unsupported container version {version}"
        )));
    }
    let ntime = c.u32()? as usize;
    let nlat = c.u32()? as usize;
    let nlon = c.u32()? as usize;
    let dtype = DataKind::from_code(c.u8()?)?;
    let units = c.string()?;
    let name = c.string()?;
    let time_axis: Vec<MonthIndex> = (0..ntime)
        .map(|_| c.i32().map(MonthIndex::from_raw))
        .collect::<Result<_>>()?;
    let lat_edges = c.f64_vec(nlat + 1)?;
    let lat_centers = c.f64_vec(nlat)?;
    let lon_edges = c.f64_vec(nlon + 1)?;
    let lon_centers = c.f64_vec(nlon)?;
    let nvox = ntime
        .checked_mul(nlat)
        .and_then(|n| n.checked_mul(nlon))
        .ok_or_else(|| StxError::corrupt("declared dimensions overflow"))?;
    let values = match dtype {
        DataKind::F32 => {
            let raw = c.take(nvox * 4)?;
            raw.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
                .collect()
        }
        DataKind::F64 => {
            let raw = c.take(nvox * 8)?;
            raw.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        }
    };
    if c.pos != bytes.len() {
        return Err(StxError::corrupt(format!(
            "{} trailing bytes after declared payload",
            bytes.len() - c.pos
        )));
    }
    let axes = GridAxes {
        lat_edges,
        lat_centers,
        lon_edges,
        lon_centers,
    };
    Grid3D::new(name, units, time_axis, axes, values, dtype)
}

/// Reads an STXG file from disk.
pub fn read_grid_file(path: impl AsRef<Path>) -> Result<Grid3D> {
    let bytes = std::fs::read(&path)?;
    read_grid(&bytes)
}

/// Writes a grid to disk in STXG form.
pub fn write_grid_file(path: impl AsRef<Path>, grid: &Grid3D) -> Result<()> {
    std::fs::write(&path, write_grid(grid)?)?;
    Ok(())
}

fn write_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    let len: u16 = s
        .len()
        .try_into()
        .map_err(|_| StxError::domain(format!("string field too long ({} bytes)", s.len())))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                StxError::corrupt(format!(
                    "truncated: needed {n} bytes at offset {}, have {}",
                    self.pos,
                    self.buf.len() - self.pos
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = u16::from_le_bytes(self.take(2)?.try_into().unwrap()) as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| StxError::corrupt("string field is not valid UTF-8"))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }
}
