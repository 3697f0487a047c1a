//! Reverse-mode gradients of the smooth ECT.
//!
//! With `s = S(lambda * (h - height(sigma)))` each grid cell contributes
//! `(-1)^k * s'` to the derivative of its simplex height, where
//! `s' = -lambda * s * (1 - s)`. The height of a simplex is the height of its
//! argmax vertex `a`, so the derivative flows to `x_a` along `xi` and to `xi`
//! along `x_a`. Ties use the lowest vertex index, matching [`heights`].
//!
//! [`heights`]: crate::ect::heights

use crate::complex::GeometricComplex;
use crate::ect::{
    ect_smooth, ect_smooth_raw_with, sigmoid, DirectionSet, EctConfig, Normalization,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::{dot, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct EctGradients {
    /// `dL/dx`, one row per vertex.
    pub d_vertices: Matrix,
    /// `dL/dxi`, one row per direction; tangent to the sphere when the set is
    /// constrained.
    pub d_directions: Matrix,
    /// The `dL/dECT` seed the gradients were computed from.
    pub upstream: Matrix,
}

impl EctGradients {
    pub fn is_finite(&self) -> bool {
        self.d_vertices.is_finite() && self.d_directions.is_finite()
    }
}

pub fn ect_smooth_backward(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
    upstream: &Matrix,
) -> Result<EctGradients> {
    ect_smooth_backward_with(complex, dirs, config, upstream, Execution::default())
}

pub fn ect_smooth_backward_with(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
    upstream: &Matrix,
    exec: Execution,
) -> Result<EctGradients> {
    let expected = (dirs.len(), config.num_heights);
    if upstream.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            found: upstream.shape(),
        });
    }
    let (raw, filt) = ect_smooth_raw_with(complex, dirs, config, exec)?;
    let seed = raw_upstream(&raw, upstream, config.normalization, complex.num_vertices())?;

    let grid = config.heights();
    let lambda = config.lambda;
    let dim = dirs.dim();
    let nv = complex.num_vertices();

    // Per direction: dL/dheight summed onto each argmax vertex, and dL/dxi.
    let per_dir = exec.map(dirs.len(), |d| {
        let u = seed.row(d);
        let height_grad = |t: f64, sign: f64| -> f64 {
            let mut acc = 0.0;
            for (&h, &g) in grid.iter().zip(u) {
                let s = sigmoid(lambda * (h - t));
                acc += g * s * (1.0 - s);
            }
            -lambda * sign * acc
        };
        let mut w = vec![0.0; nv];
        for (v, &t) in filt.vertex_heights.row(d).iter().enumerate() {
            w[v] += height_grad(t, 1.0);
        }
        for (&t, &a) in filt.edge_heights.row(d).iter().zip(filt.edge_argmax_row(d)) {
            w[a] += height_grad(t, -1.0);
        }
        for (&t, &a) in filt
            .triangle_heights
            .row(d)
            .iter()
            .zip(filt.triangle_argmax_row(d))
        {
            w[a] += height_grad(t, 1.0);
        }
        let mut g_dir = vec![0.0; dim];
        for (v, &wv) in w.iter().enumerate() {
            if wv != 0.0 {
                for (g, x) in g_dir.iter_mut().zip(complex.vertex(v)) {
                    *g += wv * x;
                }
            }
        }
        if dirs.constrained() {
            let xi = dirs.direction(d);
            let radial = dot(&g_dir, xi);
            for (g, x) in g_dir.iter_mut().zip(xi) {
                *g -= radial * x;
            }
        }
        (w, g_dir)
    });

    let mut d_directions = Matrix::zeros(dirs.len(), dim);
    for (d, (_, g)) in per_dir.iter().enumerate() {
        d_directions.row_mut(d).copy_from_slice(g);
    }

    let mut d_vertices = Matrix::zeros(nv, dim);
    exec.for_each_chunk(d_vertices.as_mut_slice(), dim, |v, out| {
        for (d, (w, _)) in per_dir.iter().enumerate() {
            let wv = w[v];
            if wv != 0.0 {
                for (o, x) in out.iter_mut().zip(dirs.direction(d)) {
                    *o += wv * x;
                }
            }
        }
    });

    Ok(EctGradients {
        d_vertices,
        d_directions,
        upstream: upstream.clone(),
    })
}

/// Pulls `dL/d(normalised grid)` back to `dL/d(raw grid)`.
fn raw_upstream(
    raw: &Matrix,
    upstream: &Matrix,
    mode: Normalization,
    num_vertices: usize,
) -> Result<Matrix> {
    match mode {
        Normalization::None => Ok(upstream.clone()),
        Normalization::PerVertexCount => {
            if num_vertices == 0 {
                return Ok(upstream.clone());
            }
            let n = num_vertices as f64;
            Ok(upstream.map(|g| g / n))
        }
        Normalization::UnitL2 => {
            let norm = raw.frobenius_norm();
            if norm == 0.0 {
                return Err(Error::ZeroNorm);
            }
            // y = v / |v|  =>  dL/dv = (g - y <g, y>) / |v|
            let gy: f64 = dot(upstream.as_slice(), raw.as_slice()) / norm;
            let data = upstream
                .as_slice()
                .iter()
                .zip(raw.as_slice())
                .map(|(g, v)| (g - gy * v / norm) / norm)
                .collect();
            Ok(Matrix::from_vec(raw.rows(), raw.cols(), data))
        }
    }
}

/// Central differences of `<upstream, ect_smooth>` in every vertex and
/// direction coordinate.
///
/// Perturbed directions are evaluated without the sphere constraint; for a
/// constrained set the resulting direction gradient is projected onto the
/// tangent space so that it is comparable with [`ect_smooth_backward`].
pub fn finite_difference_oracle(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
    upstream: &Matrix,
    epsilon: f64,
) -> Result<EctGradients> {
    if !(1e-8..=1e-2).contains(&epsilon) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference epsilon {epsilon} outside [1e-8, 1e-2]"
        )));
    }
    let expected = (dirs.len(), config.num_heights);
    if upstream.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            found: upstream.shape(),
        });
    }
    let free = dirs.with_constrained(false)?;
    let objective = |c: &GeometricComplex, d: &DirectionSet| -> Result<f64> {
        let grid = ect_smooth(c, d, config)?;
        Ok(dot(grid.values().as_slice(), upstream.as_slice()))
    };

    let dim = dirs.dim();
    let mut d_vertices = Matrix::zeros(complex.num_vertices(), dim);
    let mut coords = complex.coords().to_vec();
    for (i, g) in d_vertices.as_mut_slice().iter_mut().enumerate() {
        let x0 = coords[i];
        coords[i] = x0 + epsilon;
        let plus = objective(&complex.with_coords(coords.clone())?, &free)?;
        coords[i] = x0 - epsilon;
        let minus = objective(&complex.with_coords(coords.clone())?, &free)?;
        coords[i] = x0;
        *g = (plus - minus) / (2.0 * epsilon);
    }

    let mut d_directions = Matrix::zeros(dirs.len(), dim);
    let mut data = dirs.as_slice().to_vec();
    for (i, g) in d_directions.as_mut_slice().iter_mut().enumerate() {
        let x0 = data[i];
        data[i] = x0 + epsilon;
        let plus = objective(complex, &free.with_data(data.clone())?)?;
        data[i] = x0 - epsilon;
        let minus = objective(complex, &free.with_data(data.clone())?)?;
        data[i] = x0;
        *g = (plus - minus) / (2.0 * epsilon);
    }
    if dirs.constrained() {
        for d in 0..dirs.len() {
            let xi = dirs.direction(d);
            let row = d_directions.row_mut(d);
            let radial = dot(row, xi);
            for (g, x) in row.iter_mut().zip(xi) {
                *g -= radial * x;
            }
        }
    }

    Ok(EctGradients {
        d_vertices,
        d_directions,
        upstream: upstream.clone(),
    })
}

/// Largest componentwise `|a - b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(a: &Matrix, b: &Matrix, floor: f64) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_point(x: f64) -> GeometricComplex {
        GeometricComplex::point_cloud(vec![vec![x, 0.0]]).unwrap()
    }

    /// Single height at h = 0.5 via the interval's upper end.
    fn one_height_config() -> EctConfig {
        EctConfig::default()
            .with_lambda(1.0)
            .with_num_heights(2)
            .with_interval(-1.0, 0.5)
    }

    #[test]
    fn single_point_gradient() {
        let c = single_point(0.3);
        let dirs = DirectionSet::new(vec![vec![1.0, 0.0]], false).unwrap();
        let up = Matrix::from_vec(1, 2, vec![0.0, 1.0]);
        let g = ect_smooth_backward(&c, &dirs, &one_height_config(), &up).unwrap();
        let s = sigmoid(0.2);
        let expected = -s * (1.0 - s);
        assert!((expected + 0.247_517).abs() < 1e-6);
        assert!((g.d_vertices[(0, 0)] - expected).abs() < 1e-15);
        assert_eq!(g.d_vertices[(0, 1)], 0.0);

        let fd = finite_difference_oracle(&c, &dirs, &one_height_config(), &up, 1e-4).unwrap();
        assert!((fd.d_vertices[(0, 0)] + 0.247_517).abs() < 1e-6);
        assert!(fd.d_vertices[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let c = crate::generate(&crate::complex::ShapeSpec::new(
            crate::complex::ShapeKind::Octahedron,
            1,
            0.0,
            0,
        ))
        .unwrap();
        let dirs = crate::ect::uniform_directions(3, 4, 1).unwrap();
        let cfg = EctConfig::default();
        let g = ect_smooth_backward(&c, &dirs, &cfg, &Matrix::zeros(4, 16)).unwrap();
        assert!(g.d_vertices.as_slice().iter().all(|&x| x == 0.0));
        assert!(g.d_directions.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn origin_point_has_zero_direction_gradient() {
        let c = single_point(0.0);
        let dirs = DirectionSet::new(vec![vec![1.0, 0.0]], true).unwrap();
        let cfg = EctConfig::default().with_lambda(1.0).with_num_heights(3);
        let up = Matrix::from_vec(1, 3, vec![0.0, 1.0, 0.0]);
        let g = ect_smooth_backward(&c, &dirs, &cfg, &up).unwrap();
        assert_eq!(g.d_directions.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let c = single_point(0.1);
        let dirs = DirectionSet::new(vec![vec![1.0, 0.0]], true).unwrap();
        let r = ect_smooth_backward(&c, &dirs, &EctConfig::default(), &Matrix::zeros(2, 16));
        assert!(matches!(r, Err(Error::ShapeMismatch { .. })));
        let r =
            finite_difference_oracle(&c, &dirs, &EctConfig::default(), &Matrix::zeros(1, 16), 1.0);
        assert!(r.is_err());
    }

    #[test]
    fn normalisation_is_propagated() {
        let c = GeometricComplex::new(
            vec![vec![0.1, 0.7], vec![-0.4, 0.2], vec![0.5, -0.3]],
            vec![[0, 1], [1, 2], [0, 2]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let dirs = DirectionSet::new(vec![vec![0.6, 0.8], vec![-1.0, 0.0]], true).unwrap();
        let up = Matrix::from_vec(2, 8, (0..16).map(|i| (i as f64 * 0.37).sin()).collect());
        for norm in [
            Normalization::None,
            Normalization::PerVertexCount,
            Normalization::UnitL2,
        ] {
            let cfg = EctConfig::default()
                .with_lambda(5.0)
                .with_num_heights(8)
                .with_normalization(norm);
            let a = ect_smooth_backward(&c, &dirs, &cfg, &up).unwrap();
            let n = finite_difference_oracle(&c, &dirs, &cfg, &up, 1e-5).unwrap();
            assert!(
                max_relative_error(&a.d_vertices, &n.d_vertices, 1e-4) < 1e-5,
                "{norm}"
            );
            assert!(
                max_relative_error(&a.d_directions, &n.d_directions, 1e-4) < 1e-5,
                "{norm}"
            );
        }
    }

    #[test]
    fn sequential_and_parallel_backward_agree_bitwise() {
        let c = crate::generate(&crate::complex::ShapeSpec::new(
            crate::complex::ShapeKind::TwoCircles,
            300,
            0.05,
            4,
        ))
        .unwrap();
        let dirs = crate::ect::uniform_directions(2, 16, 0).unwrap();
        let up = Matrix::filled(16, 16, 0.25);
        let cfg = EctConfig::default();
        let s = ect_smooth_backward_with(&c, &dirs, &cfg, &up, Execution::Sequential).unwrap();
        let p = ect_smooth_backward_with(&c, &dirs, &cfg, &up, Execution::Parallel).unwrap();
        assert_eq!(s, p);
    }
}
