use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::write_atomic;
use crate::ect::EctGrid;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Gray level written for every pixel of a constant grid.
pub const PGM_CONSTANT_GRAY: u8 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EctFormat {
    Csv,
    Pgm,
}

impl fmt::Display for EctFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EctFormat::Csv => "csv",
            EctFormat::Pgm => "pgm",
        })
    }
}

impl FromStr for EctFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EctFormat::Csv),
            "pgm" => Ok(EctFormat::Pgm),
            _ => Err(Error::UnknownVariant {
                what: "ECT format",
                value: s.to_owned(),
            }),
        }
    }
}

fn csv_row(s: &mut String, values: &[f64]) {
    for (i, x) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{x}").unwrap();
    }
    s.push('\n');
}

/// Writes `grid` to `path`. PGM additionally writes `<path>.scale`.
pub fn write_ect(grid: &EctGrid, path: &Path, format: EctFormat) -> Result<()> {
    let (rows, cols) = grid.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidConfig("cannot write an empty grid".into()));
    }
    match format {
        EctFormat::Csv => {
            let mut s = String::new();
            csv_row(&mut s, grid.heights());
            for r in grid.values().row_iter() {
                csv_row(&mut s, r);
            }
            write_atomic(path, s.as_bytes())
        }
        EctFormat::Pgm => {
            let values = grid.values().as_slice();
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut bytes = format!("P5\n{cols} {rows}\n255\n").into_bytes();
            if max > min {
                let scale = 255.0 / (max - min);
                bytes.extend(values.iter().map(|v| ((v - min) * scale).round() as u8));
            } else {
                bytes.extend(std::iter::repeat_n(PGM_CONSTANT_GRAY, values.len()));
            }
            write_atomic(path, &bytes)?;
            let sidecar = format!(
                "min {min}\nmax {max}\nconstant {}\n# value = min + pixel * (max - min) / 255\n",
                max <= min
            );
            write_atomic(&scale_path(path), sidecar.as_bytes())
        }
    }
}

fn scale_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".scale");
    PathBuf::from(os)
}

/// Reads a grid CSV back into its height samples and values.
pub fn read_ect_csv(path: &Path) -> Result<(Vec<f64>, Matrix)> {
    let text = std::fs::read_to_string(path)?;
    let parse_row = |line: usize, s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("invalid number `{t}`"),
                })
            })
            .collect()
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: "empty file".into(),
    })?;
    let heights = parse_row(1, header)?;
    let mut rows = Vec::new();
    for (i, l) in lines {
        let row = parse_row(i + 1, l)?;
        if row.len() != heights.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected {} values, found {}", heights.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((heights, Matrix::from_rows(&rows)))
}

/// Writes a numeric table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        csv_row(&mut s, r);
    }
    write_atomic(path, s.as_bytes())
}
