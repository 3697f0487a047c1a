//! Embedded simplicial complexes of dimension at most two.
//!
//! A [`GeometricComplex`] stores vertex coordinates in a flat buffer together
//! with explicit edge and triangle lists. Bare point clouds have no edges or
//! triangles and geometric graphs have no triangles.

mod shapes;

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

pub use shapes::{generate, ShapeKind, ShapeSpec};

/// Dimension of a simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimplexDim {
    Vertex = 0,
    Edge = 1,
    Triangle = 2,
}

impl SimplexDim {
    /// `(-1)^k` weight in the Euler characteristic.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            SimplexDim::Vertex | SimplexDim::Triangle => 1.0,
            SimplexDim::Edge => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricComplex {
    dim: usize,
    coords: Vec<f64>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl GeometricComplex {
    /// Builds a complex from per-vertex coordinate vectors.
    ///
    /// Rejects ragged coordinates and simplices with repeated vertices.
    /// Face closure, duplicates and index ranges are reported by
    /// [`validate`] rather than enforced here.
    pub fn new(
        vertices: Vec<Vec<f64>>,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let dim = vertices.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(vertices.len() * dim);
        for (index, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::RaggedVertices {
                    index,
                    expected: dim,
                    found: v.len(),
                });
            }
            coords.extend_from_slice(v);
        }
        Self::from_flat(dim, coords, edges, triangles)
    }

    /// Builds a complex from a flat row-major coordinate buffer.
    pub fn from_flat(
        dim: usize,
        coords: Vec<f64>,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        if dim == 0 && !coords.is_empty() {
            return Err(Error::InvalidComplex(
                "ambient dimension must be at least 1".into(),
            ));
        }
        if dim > 0 && !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidComplex(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        for e in &edges {
            if e[0] == e[1] {
                return Err(Error::DegenerateSimplex(e.to_vec()));
            }
        }
        for t in &triangles {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::DegenerateSimplex(t.to_vec()));
            }
        }
        Ok(Self {
            dim,
            coords,
            edges,
            triangles,
        })
    }

    /// A bare point cloud.
    pub fn point_cloud(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vertices, Vec::new(), Vec::new())
    }

    /// Ambient dimension (0 for the empty complex).
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.num_vertices()).map(move |i| self.vertex(i))
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    #[inline]
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_simplices(&self) -> usize {
        self.num_vertices() + self.edges.len() + self.triangles.len()
    }

    pub fn is_point_cloud(&self) -> bool {
        self.edges.is_empty() && self.triangles.is_empty()
    }

    pub fn max_simplex_dim(&self) -> Option<SimplexDim> {
        if !self.triangles.is_empty() {
            Some(SimplexDim::Triangle)
        } else if !self.edges.is_empty() {
            Some(SimplexDim::Edge)
        } else if self.num_vertices() > 0 {
            Some(SimplexDim::Vertex)
        } else {
            None
        }
    }

    /// Same simplices with new coordinates. `coords` must keep the layout.
    pub fn with_coords(&self, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != self.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                found: coords.len(),
            });
        }
        Ok(Self {
            dim: self.dim,
            coords,
            edges: self.edges.clone(),
            triangles: self.triangles.clone(),
        })
    }

    /// Returns an error if any simplex references a missing vertex.
    pub(crate) fn check_indices(&self) -> Result<()> {
        let n = self.num_vertices();
        let bad = |s: &[usize]| s.iter().copied().find(|&i| i >= n);
        for e in &self.edges {
            if let Some(index) = bad(e) {
                return Err(Error::IndexOutOfRange {
                    simplex: e.to_vec(),
                    index,
                    num_vertices: n,
                });
            }
        }
        for t in &self.triangles {
            if let Some(index) = bad(t) {
                return Err(Error::IndexOutOfRange {
                    simplex: t.to_vec(),
                    index,
                    num_vertices: n,
                });
            }
        }
        Ok(())
    }

    /// Disjoint union; vertex indices of `other` are shifted past `self`.
    pub fn disjoint_union(&self, other: &GeometricComplex) -> Result<Self> {
        if self.num_vertices() > 0 && other.num_vertices() > 0 && self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let offset = self.num_vertices();
        let dim = self.dim.max(other.dim);
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| [e[0] + offset, e[1] + offset]));
        let mut triangles = self.triangles.clone();
        triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
        );
        Self::from_flat(dim, coords, edges, triangles)
    }

    /// Adds every triangle edge missing from the edge list, keeping existing
    /// edges in order.
    pub fn close_faces(mut self) -> Self {
        let mut seen: HashSet<[usize; 2]> = self.edges.iter().map(|&e| sorted2(e)).collect();
        for t in &self.triangles {
            for e in triangle_edges(*t) {
                if seen.insert(sorted2(e)) {
                    self.edges.push(sorted2(e));
                }
            }
        }
        self
    }
}

#[inline]
pub(crate) fn sorted2(e: [usize; 2]) -> [usize; 2] {
    if e[0] <= e[1] {
        e
    } else {
        [e[1], e[0]]
    }
}

#[inline]
pub(crate) fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

#[inline]
fn triangle_edges(t: [usize; 3]) -> [[usize; 2]; 3] {
    [[t[0], t[1]], [t[1], t[2]], [t[0], t[2]]]
}

/// One invariant violation found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BadIndex {
        simplex: Vec<usize>,
        index: usize,
    },
    MissingFace {
        triangle: [usize; 3],
        edge: [usize; 2],
    },
    DuplicateEdge([usize; 2]),
    DuplicateTriangle([usize; 3]),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadIndex { simplex, index } => {
                write!(f, "bad index {index} in simplex {simplex:?}")
            }
            Violation::MissingFace { edge, .. } => {
                write!(f, "missing face {{{},{}}}", edge[0], edge[1])
            }
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge {{{},{}}}", e[0], e[1]),
            Violation::DuplicateTriangle(t) => {
                write!(f, "duplicate triangle {{{},{},{}}}", t[0], t[1], t[2])
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks index ranges, face closure and duplicate simplices.
pub fn validate(complex: &GeometricComplex) -> ValidationReport {
    let n = complex.num_vertices();
    let mut violations = Vec::new();

    let mut edge_set = HashSet::with_capacity(complex.edges.len());
    for e in &complex.edges {
        for &i in e {
            if i >= n {
                violations.push(Violation::BadIndex {
                    simplex: e.to_vec(),
                    index: i,
                });
            }
        }
        if !edge_set.insert(sorted2(*e)) {
            violations.push(Violation::DuplicateEdge(sorted2(*e)));
        }
    }

    let mut tri_set = HashSet::with_capacity(complex.triangles.len());
    for t in &complex.triangles {
        for &i in t {
            if i >= n {
                violations.push(Violation::BadIndex {
                    simplex: t.to_vec(),
                    index: i,
                });
            }
        }
        if !tri_set.insert(sorted3(*t)) {
            violations.push(Violation::DuplicateTriangle(sorted3(*t)));
        }
        for e in triangle_edges(sorted3(*t)) {
            if !edge_set.contains(&e) {
                violations.push(Violation::MissingFace {
                    triangle: *t,
                    edge: e,
                });
            }
        }
    }

    ValidationReport { violations }
}

/// Centres vertices at the origin and scales them into the unit ball.
///
/// After centring, coordinates are divided by the largest vertex norm unless
/// every vertex coincides with the centroid.
pub fn normalize(complex: &GeometricComplex) -> Result<GeometricComplex> {
    let n = complex.num_vertices();
    if n == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let dim = complex.dim;
    let mut centroid = vec![0.0; dim];
    for v in complex.vertices() {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x;
        }
    }
    for c in &mut centroid {
        *c /= n as f64;
    }

    let mut coords = complex.coords.clone();
    for v in coords.chunks_exact_mut(dim) {
        for (x, c) in v.iter_mut().zip(&centroid) {
            *x -= c;
        }
    }
    let max_norm = coords
        .chunks_exact(dim)
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if max_norm > 0.0 {
        for x in &mut coords {
            *x /= max_norm;
        }
    }
    complex.with_coords(coords)
}

/// `|V| - |E| + |T|`.
pub fn euler_characteristic(complex: &GeometricComplex) -> i64 {
    complex.num_vertices() as i64 - complex.edges.len() as i64 + complex.triangles.len() as i64
}
