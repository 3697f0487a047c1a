use super::DirectionSet;
use crate::complex::GeometricComplex;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::{dot, Matrix};

/// Heights of every simplex for every direction.
///
/// Rows index directions. A simplex height is the maximum of its vertex
/// heights; `*_argmax` records the attaining vertex, lowest index on ties.
#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationValues {
    pub vertex_heights: Matrix,
    pub edge_heights: Matrix,
    pub edge_argmax: Vec<usize>,
    pub triangle_heights: Matrix,
    pub triangle_argmax: Vec<usize>,
}

impl FiltrationValues {
    pub fn num_directions(&self) -> usize {
        self.vertex_heights.rows()
    }

    pub fn edge_argmax_row(&self, d: usize) -> &[usize] {
        let e = self.edge_heights.cols();
        &self.edge_argmax[d * e..(d + 1) * e]
    }

    pub fn triangle_argmax_row(&self, d: usize) -> &[usize] {
        let t = self.triangle_heights.cols();
        &self.triangle_argmax[d * t..(d + 1) * t]
    }
}

pub fn heights(complex: &GeometricComplex, dirs: &DirectionSet) -> Result<FiltrationValues> {
    heights_with(complex, dirs, Execution::default())
}

pub(crate) fn check_compatible(complex: &GeometricComplex, dirs: &DirectionSet) -> Result<()> {
    if complex.num_vertices() > 0 && complex.dim() != dirs.dim() {
        return Err(Error::DimensionMismatch {
            expected: complex.dim(),
            found: dirs.dim(),
        });
    }
    complex.check_indices()
}

#[inline]
fn argmax(h: &[f64], simplex: &[usize]) -> (f64, usize) {
    let mut best = simplex[0];
    for &v in &simplex[1..] {
        if h[v] > h[best] || (h[v] == h[best] && v < best) {
            best = v;
        }
    }
    (h[best], best)
}

struct Row {
    vertex: Vec<f64>,
    edge: Vec<f64>,
    edge_arg: Vec<usize>,
    tri: Vec<f64>,
    tri_arg: Vec<usize>,
}

pub fn heights_with(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    exec: Execution,
) -> Result<FiltrationValues> {
    check_compatible(complex, dirs)?;
    let nv = complex.num_vertices();
    let ne = complex.edges().len();
    let nt = complex.triangles().len();
    let nd = dirs.len();

    let rows = exec.map(nd, |d| {
        let xi = dirs.direction(d);
        let vertex: Vec<f64> = complex.vertices().map(|x| dot(x, xi)).collect();
        let (edge, edge_arg) = complex.edges().iter().map(|e| argmax(&vertex, e)).unzip();
        let (tri, tri_arg) = complex
            .triangles()
            .iter()
            .map(|t| argmax(&vertex, t))
            .unzip();
        Row {
            vertex,
            edge,
            edge_arg,
            tri,
            tri_arg,
        }
    });

    let mut out = FiltrationValues {
        vertex_heights: Matrix::zeros(nd, nv),
        edge_heights: Matrix::zeros(nd, ne),
        edge_argmax: Vec::with_capacity(nd * ne),
        triangle_heights: Matrix::zeros(nd, nt),
        triangle_argmax: Vec::with_capacity(nd * nt),
    };
    for (d, row) in rows.into_iter().enumerate() {
        out.vertex_heights.row_mut(d).copy_from_slice(&row.vertex);
        out.edge_heights.row_mut(d).copy_from_slice(&row.edge);
        out.triangle_heights.row_mut(d).copy_from_slice(&row.tri);
        out.edge_argmax.extend(row.edge_arg);
        out.triangle_argmax.extend(row.tri_arg);
    }
    Ok(out)
}
