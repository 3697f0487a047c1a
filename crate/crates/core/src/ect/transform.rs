use super::filtration::FiltrationValues;
use super::{heights_with, sigmoid, DirectionSet, EctConfig, EctGrid, EctMode, Normalization};
use crate::complex::GeometricComplex;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::Matrix;

/// Computes the transform selected by `config.mode`.
pub fn ect(complex: &GeometricComplex, dirs: &DirectionSet, config: &EctConfig) -> Result<EctGrid> {
    match config.mode {
        EctMode::Hard => ect_hard(complex, dirs, config),
        EctMode::Smooth => ect_smooth(complex, dirs, config),
    }
}

pub fn ect_hard(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
) -> Result<EctGrid> {
    ect_hard_with(complex, dirs, config, Execution::default())
}

/// Exact transform: `sum_k (-1)^k #{sigma_k : height <= h}` on the grid.
///
/// The returned grid's config has `mode = Hard`.
pub fn ect_hard_with(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
    exec: Execution,
) -> Result<EctGrid> {
    config.validate()?;
    let filt = heights_with(complex, dirs, exec)?;
    let grid = config.heights();
    let m = grid.len();

    let mut values = Matrix::zeros(dirs.len(), m);
    exec.for_each_chunk(values.as_mut_slice(), m, |d, row| {
        // Each simplex enters at the first grid index whose height is >= its own.
        let mut delta = vec![0i64; m + 1];
        let mut add = |hs: &[f64], sign: i64| {
            for &t in hs {
                delta[grid.partition_point(|&h| h < t)] += sign;
            }
        };
        add(filt.vertex_heights.row(d), 1);
        add(filt.edge_heights.row(d), -1);
        add(filt.triangle_heights.row(d), 1);
        let mut acc = 0i64;
        for (out, &x) in row.iter_mut().zip(&delta[..m]) {
            acc += x;
            *out = acc as f64;
        }
    });

    apply_normalization(&mut values, config.normalization, complex.num_vertices())?;
    EctGrid::new(
        values,
        config.with_mode(EctMode::Hard),
        complex.num_vertices(),
    )
}

pub fn ect_smooth(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
) -> Result<EctGrid> {
    ect_smooth_with(complex, dirs, config, Execution::default())
}

/// Sigmoid-relaxed transform
/// `sum_k (-1)^k sum_sigma S(lambda * (h - height(sigma)))`,
/// normalised per `config.normalization`.
///
/// The returned grid's config has `mode = Smooth`.
pub fn ect_smooth_with(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
    exec: Execution,
) -> Result<EctGrid> {
    let (mut values, _) = ect_smooth_raw_with(complex, dirs, config, exec)?;
    apply_normalization(&mut values, config.normalization, complex.num_vertices())?;
    EctGrid::new(
        values,
        config.with_mode(EctMode::Smooth),
        complex.num_vertices(),
    )
}

/// Unnormalised smooth transform together with the filtration it used.
pub fn ect_smooth_raw_with(
    complex: &GeometricComplex,
    dirs: &DirectionSet,
    config: &EctConfig,
    exec: Execution,
) -> Result<(Matrix, FiltrationValues)> {
    config.validate()?;
    let filt = heights_with(complex, dirs, exec)?;
    let grid = config.heights();
    let m = grid.len();
    let lambda = config.lambda;

    let mut values = Matrix::zeros(dirs.len(), m);
    exec.for_each_chunk(values.as_mut_slice(), m, |d, row| {
        let mut add = |hs: &[f64], sign: f64| {
            for &t in hs {
                for (out, &h) in row.iter_mut().zip(&grid) {
                    *out += sign * sigmoid(lambda * (h - t));
                }
            }
        };
        add(filt.vertex_heights.row(d), 1.0);
        add(filt.edge_heights.row(d), -1.0);
        add(filt.triangle_heights.row(d), 1.0);
    });
    Ok((values, filt))
}

/// Applies `mode` in place to a raw grid computed from `num_vertices` vertices.
pub fn apply_normalization(
    values: &mut Matrix,
    mode: Normalization,
    num_vertices: usize,
) -> Result<()> {
    match mode {
        Normalization::None => {}
        Normalization::PerVertexCount => {
            // An empty complex has an all-zero grid; leave it as is.
            if num_vertices > 0 {
                let n = num_vertices as f64;
                values.as_mut_slice().iter_mut().for_each(|x| *x /= n);
            }
        }
        Normalization::UnitL2 => {
            let norm = values.frobenius_norm();
            if norm == 0.0 {
                return Err(Error::ZeroNorm);
            }
            values.as_mut_slice().iter_mut().for_each(|x| *x /= norm);
        }
    }
    Ok(())
}

/// Normalises an unnormalised grid.
pub fn normalize_ect(grid: &EctGrid, mode: Normalization) -> Result<EctGrid> {
    if mode == Normalization::None {
        return Ok(grid.clone());
    }
    if grid.config().normalization != Normalization::None {
        return Err(Error::AlreadyNormalized(
            grid.config().normalization.to_string(),
        ));
    }
    let mut values = grid.values().clone();
    apply_normalization(&mut values, mode, grid.num_vertices())?;
    EctGrid::new(
        values,
        grid.config().with_normalization(mode),
        grid.num_vertices(),
    )
}
