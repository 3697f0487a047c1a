use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use super::write_atomic;
use crate::complex::{normalize, validate, GeometricComplex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexFormat {
    Off,
    Edgelist,
    CsvPoints,
}

impl ComplexFormat {
    pub fn name(self) -> &'static str {
        match self {
            ComplexFormat::Off => "off",
            ComplexFormat::Edgelist => "edgelist",
            ComplexFormat::CsvPoints => "csv-points",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(ComplexFormat::Off),
            "edges" | "edgelist" | "el" => Some(ComplexFormat::Edgelist),
            "csv" => Some(ComplexFormat::CsvPoints),
            _ => None,
        }
    }
}

impl fmt::Display for ComplexFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComplexFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(ComplexFormat::Off),
            "edgelist" => Ok(ComplexFormat::Edgelist),
            "csv-points" | "csv" => Ok(ComplexFormat::CsvPoints),
            _ => Err(Error::UnknownVariant {
                what: "complex format",
                value: s.to_owned(),
            }),
        }
    }
}

/// Reads, validates and optionally normalises a complex.
pub fn load_complex(
    path: &Path,
    format: ComplexFormat,
    normalize_coords: bool,
) -> Result<GeometricComplex> {
    let text = std::fs::read_to_string(path)?;
    let complex = parse_complex(&text, format, path)?;
    if normalize_coords {
        normalize(&complex)
    } else {
        Ok(complex)
    }
}

/// Parses `text`; `path` only labels error messages.
pub fn parse_complex(text: &str, format: ComplexFormat, path: &Path) -> Result<GeometricComplex> {
    let complex = match format {
        ComplexFormat::Off => parse_off(text, path)?,
        ComplexFormat::Edgelist => parse_edgelist(text, path)?,
        ComplexFormat::CsvPoints => parse_csv_points(text, path)?,
    };
    let report = validate(&complex);
    if !report.is_valid() {
        return Err(Error::InvalidComplex(format!(
            "{}: {report}",
            path.display()
        )));
    }
    Ok(complex)
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    /// Numbered, trimmed, non-empty lines with `#` comments removed.
    fn new(text: &'a str, path: &'a Path) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self {
            path,
            inner: it.peekable(),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner.next().ok_or_else(|| Error::Parse {
            path: self.path.to_path_buf(),
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, line: usize, tok: &str, what: &str) -> Result<T> {
        tok.parse()
            .map_err(|_| self.err(line, format!("invalid {what} `{tok}`")))
    }

    fn index(&self, line: usize, tok: &str, num_vertices: usize) -> Result<usize> {
        let i: usize = self.parse(line, tok, "vertex index")?;
        if i >= num_vertices {
            return Err(self.err(
                line,
                format!("vertex index {i} out of range for {num_vertices} vertices"),
            ));
        }
        Ok(i)
    }

    fn reals(&self, line: usize, toks: &[&str]) -> Result<Vec<f64>> {
        toks.iter()
            .map(|t| {
                let x: f64 = self.parse(line, t, "coordinate")?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(self.err(line, format!("non-finite coordinate `{t}`")))
                }
            })
            .collect()
    }
}

fn parse_off(text: &str, path: &Path) -> Result<GeometricComplex> {
    let mut lines = Lines::new(text, path);
    let (hl, header) = lines.next_line("OFF header")?;
    let mut toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"OFF") {
        return Err(lines.err(hl, "missing OFF header"));
    }
    toks.remove(0);
    let (cl, counts) = if toks.is_empty() {
        let (l, s) = lines.next_line("vertex and face counts")?;
        (l, s.split_whitespace().collect::<Vec<_>>())
    } else {
        (hl, toks)
    };
    if counts.len() < 2 {
        return Err(lines.err(cl, "expected `num_vertices num_faces [num_edges]`"));
    }
    let nv: usize = lines.parse(cl, counts[0], "vertex count")?;
    let nf: usize = lines.parse(cl, counts[1], "face count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines.next_line("vertex line")?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(lines.err(l, format!("expected 3 coordinates, found {}", toks.len())));
        }
        vertices.push(lines.reals(l, &toks)?);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines.next_line("face line")?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        let k: usize = lines.parse(l, toks.first().copied().unwrap_or(""), "face size")?;
        if k < 3 || toks.len() < k + 1 {
            return Err(lines.err(
                l,
                format!("face needs at least 3 vertex indices, got `{s}`"),
            ));
        }
        let idx = toks[1..=k]
            .iter()
            .map(|t| lines.index(l, t, nv))
            .collect::<Result<Vec<_>>>()?;
        for j in 1..k - 1 {
            let t = [idx[0], idx[j], idx[j + 1]];
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(lines.err(l, "degenerate face"));
            }
            triangles.push(t);
        }
    }
    Ok(GeometricComplex::new(vertices, Vec::new(), triangles)?.close_faces())
}

fn parse_edgelist(text: &str, path: &Path) -> Result<GeometricComplex> {
    let mut lines = Lines::new(text, path);
    let (hl, header) = lines.next_line("`n d` header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(lines.err(hl, "expected header `n d`"));
    }
    let n: usize = lines.parse(hl, toks[0], "vertex count")?;
    let d: usize = lines.parse(hl, toks[1], "dimension")?;
    if d == 0 {
        return Err(lines.err(hl, "dimension must be positive"));
    }
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        let (l, s) = lines.next_line("coordinate line")?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != d {
            return Err(lines.err(l, format!("expected {d} coordinates, found {}", toks.len())));
        }
        coords.extend(lines.reals(l, &toks)?);
    }
    let mut edges = Vec::new();
    while let Some((l, s)) = lines.inner.next() {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(lines.err(l, "expected edge line `i j`"));
        }
        let e = [lines.index(l, toks[0], n)?, lines.index(l, toks[1], n)?];
        if e[0] == e[1] {
            return Err(lines.err(l, "self-loop edge"));
        }
        edges.push(e);
    }
    GeometricComplex::from_flat(d, coords, edges, Vec::new())
}

fn parse_csv_points(text: &str, path: &Path) -> Result<GeometricComplex> {
    let mut lines = Lines::new(text, path);
    let mut dim = None;
    let mut coords = Vec::new();
    while let Some((l, s)) = lines.inner.next() {
        let toks: Vec<&str> = s.split(',').map(str::trim).collect();
        match dim {
            None => dim = Some(toks.len()),
            Some(d) if d != toks.len() => {
                return Err(lines.err(l, format!("expected {d} values, found {}", toks.len())));
            }
            _ => {}
        }
        coords.extend(lines.reals(l, &toks)?);
    }
    GeometricComplex::from_flat(dim.unwrap_or(0), coords, Vec::new(), Vec::new())
}

/// Serialises a complex. Fails when the format cannot represent it.
pub fn write_complex(complex: &GeometricComplex, path: &Path, format: ComplexFormat) -> Result<()> {
    let text = format_complex(complex, format)?;
    write_atomic(path, text.as_bytes())
}

fn format_complex(c: &GeometricComplex, format: ComplexFormat) -> Result<String> {
    let mut s = String::new();
    let coord_line = |s: &mut String, v: &[f64], sep: &str| {
        for (i, x) in v.iter().enumerate() {
            if i > 0 {
                s.push_str(sep);
            }
            write!(s, "{x}").unwrap();
        }
        s.push('\n');
    };
    match format {
        ComplexFormat::Off => {
            if c.num_vertices() > 0 && c.dim() != 3 {
                return Err(Error::InvalidComplex(
                    "OFF stores three-dimensional vertices".into(),
                ));
            }
            let closed = GeometricComplex::from_flat(
                c.dim(),
                c.coords().to_vec(),
                Vec::new(),
                c.triangles().to_vec(),
            )?
            .close_faces();
            if closed.edges().len() != c.edges().len() {
                return Err(Error::InvalidComplex(
                    "OFF cannot store edges that are not triangle faces".into(),
                ));
            }
            writeln!(
                s,
                "OFF\n{} {} {}",
                c.num_vertices(),
                c.triangles().len(),
                c.edges().len()
            )
            .unwrap();
            for v in c.vertices() {
                coord_line(&mut s, v, " ");
            }
            for t in c.triangles() {
                writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
            }
        }
        ComplexFormat::Edgelist => {
            if !c.triangles().is_empty() {
                return Err(Error::InvalidComplex(
                    "edgelist cannot store triangles".into(),
                ));
            }
            writeln!(s, "{} {}", c.num_vertices(), c.dim()).unwrap();
            for v in c.vertices() {
                coord_line(&mut s, v, " ");
            }
            for e in c.edges() {
                writeln!(s, "{} {}", e[0], e[1]).unwrap();
            }
        }
        ComplexFormat::CsvPoints => {
            if !c.is_point_cloud() {
                return Err(Error::InvalidComplex(
                    "csv-points stores bare point clouds only".into(),
                ));
            }
            for v in c.vertices() {
                coord_line(&mut s, v, ",");
            }
        }
    }
    Ok(s)
}
