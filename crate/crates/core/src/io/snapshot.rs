//! Binary snapshot files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "SDPMSNAP"
//! version    u32      1
//! dim        u32      1 or 2
//! per axis   f64 lo, f64 hi, u64 cells
//! time       f64
//! name       u32 byte length, then UTF-8 bytes
//! count      u64      product of the cell counts
//! payload    count × f64, cell (i, j) at j * nx + i
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Axis, Field, Grid};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SDPMSNAP";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub name: String,
    pub t: f64,
    pub field: Field,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::Format(format!(
                "file truncated while reading {what} at byte {}",
                self.pos
            )));
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

impl SnapshotFile {
    pub fn new(name: impl Into<String>, t: f64, field: Field) -> Self {
        SnapshotFile {
            name: name.into(),
            t,
            field,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.field.grid();
        let values = self.field.values();
        let mut out = Vec::with_capacity(64 + self.name.len() + 8 * values.len());
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
        for a in grid.axes() {
            out.extend_from_slice(&a.lo.to_le_bytes());
            out.extend_from_slice(&a.hi.to_le_bytes());
            out.extend_from_slice(&(a.cells as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&(self.name.len() as u32).to_le_bytes());
        out.extend_from_slice(self.name.as_bytes());
        out.extend_from_slice(&(values.len() as u64).to_le_bytes());
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8, "magic")? != SNAPSHOT_MAGIC {
            return Err(Error::Format("not a snapshot file (bad magic)".into()));
        }
        let version = r.u32("version")?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!(
                "unsupported snapshot version {version}, expected {SNAPSHOT_VERSION}"
            )));
        }
        let dim = r.u32("dimension")?;
        if dim != 1 && dim != 2 {
            return Err(Error::Format(format!("snapshot dimension must be 1 or 2, got {dim}")));
        }
        let mut axes = Vec::with_capacity(dim as usize);
        for _ in 0..dim {
            let lo = r.f64("axis bounds")?;
            let hi = r.f64("axis bounds")?;
            let cells = r.u64("cell count")? as usize;
            axes.push(Axis::new(lo, hi, cells).map_err(|e| Error::Format(format!("bad axis: {e}")))?);
        }
        let grid = Grid::new(axes).map_err(|e| Error::Format(format!("bad grid: {e}")))?;
        let t = r.f64("time")?;
        let name_len = r.u32("name length")? as usize;
        let name = std::str::from_utf8(r.take(name_len, "name")?)
            .map_err(|_| Error::Format("field name is not UTF-8".into()))?
            .to_string();
        let count = r.u64("payload length")? as usize;
        if count != grid.len() {
            return Err(Error::Format(format!(
                "payload length {count} does not match the {} grid cells",
                grid.len()
            )));
        }
        let payload = r.take(count.checked_mul(8).ok_or_else(|| Error::Format("payload too large".into()))?, "payload")?;
        if r.pos != bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes after payload", bytes.len() - r.pos)));
        }
        let values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(SnapshotFile {
            name,
            t,
            field: Field::new(grid, values)?,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Write `field` to `path` and read it back.
pub fn snapshot_roundtrip(field: &Field, path: impl AsRef<Path>) -> Result<Field> {
    let path = path.as_ref();
    SnapshotFile::new("u", 0.0, field.clone()).write(path)?;
    Ok(SnapshotFile::read(path)?.field)
}
