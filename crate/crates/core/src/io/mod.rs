//! File formats for complexes and ECT grids.
//!
//! * OFF: triangle meshes; polygon faces are fan-triangulated and edges are
//!   synthesised from the faces.
//! * edgelist: `n d` header, `n` coordinate lines, then `i j` edge lines.
//! * csv-points: one comma-separated point per line.
//!
//! ECT grids are written as CSV (header row of height samples, one row per
//! direction, shortest round-trip decimal) or as 8-bit binary PGM with a
//! `.scale` sidecar recording the affine scaling.

mod complex_io;
mod ect_io;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub use complex_io::{load_complex, parse_complex, write_complex, ComplexFormat};
pub use ect_io::{read_ect_csv, write_ect, write_table, EctFormat, PGM_CONSTANT_GRAY};

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
