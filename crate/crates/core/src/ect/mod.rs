//! Directional height filtrations and the hard and sigmoid-relaxed Euler
//! Characteristic Transforms.
//!
//! For a direction `xi`, every vertex gets the height `<x, xi>` and every
//! higher simplex the maximum height of its vertices. The hard transform
//! counts simplices with height `<= h` weighted by `(-1)^k`; the smooth
//! transform replaces each indicator with `sigmoid(lambda * (h - height))`.

mod directions;
mod filtration;
mod transform;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use directions::{uniform_directions, DirectionSet};
pub use filtration::{heights, heights_with, FiltrationValues};
pub use transform::{
    apply_normalization, ect, ect_hard, ect_hard_with, ect_smooth, ect_smooth_raw_with,
    ect_smooth_with, normalize_ect,
};

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Normalization {
    #[default]
    None,
    /// Divide every cell by the number of vertices.
    PerVertexCount,
    /// Divide the whole grid by its Frobenius norm.
    UnitL2,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::PerVertexCount => "vertex",
            Normalization::UnitL2 => "l2",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "vertex" | "per-vertex-count" => Ok(Normalization::PerVertexCount),
            "l2" | "unit-l2" => Ok(Normalization::UnitL2),
            _ => Err(Error::UnknownVariant {
                what: "normalization",
                value: s.to_owned(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EctMode {
    Hard,
    #[default]
    Smooth,
}

impl EctMode {
    pub fn name(self) -> &'static str {
        match self {
            EctMode::Hard => "hard",
            EctMode::Smooth => "smooth",
        }
    }
}

impl fmt::Display for EctMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EctMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(EctMode::Hard),
            "smooth" => Ok(EctMode::Smooth),
            _ => Err(Error::UnknownVariant {
                what: "ECT mode",
                value: s.to_owned(),
            }),
        }
    }
}

/// Discretisation and relaxation parameters of an ECT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EctConfig {
    /// Sigmoid tightness.
    pub lambda: f64,
    pub num_heights: usize,
    /// Closed height interval `[lo, hi]` sampled with both endpoints.
    pub interval: (f64, f64),
    pub normalization: Normalization,
    pub mode: EctMode,
}

impl Default for EctConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            num_heights: 16,
            interval: (-1.0, 1.0),
            normalization: Normalization::None,
            mode: EctMode::Smooth,
        }
    }
}

impl EctConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_num_heights(mut self, num_heights: usize) -> Self {
        self.num_heights = num_heights;
        self
    }

    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = (lo, hi);
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_mode(mut self, mode: EctMode) -> Self {
        self.mode = mode;
        self
    }

    /// Whether grids computed under `self` and `other` are cell-for-cell
    /// comparable: same height grid and normalisation, and the same lambda
    /// when both are smooth.
    pub fn compatible(&self, other: &EctConfig) -> bool {
        self.num_heights == other.num_heights
            && self.interval == other.interval
            && self.normalization == other.normalization
            && (self.mode == EctMode::Hard
                || other.mode == EctMode::Hard
                || self.lambda == other.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "height interval [{lo}, {hi}] must satisfy lo < hi"
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.num_heights < 2 {
            return Err(Error::InvalidConfig(format!(
                "num_heights must be at least 2, got {}",
                self.num_heights
            )));
        }
        Ok(())
    }

    /// Equally spaced height samples; the last sample is exactly `hi`.
    pub fn heights(&self) -> Vec<f64> {
        let (lo, hi) = self.interval;
        let m = self.num_heights;
        let step = (hi - lo) / (m - 1) as f64;
        (0..m)
            .map(|i| if i + 1 == m { hi } else { lo + step * i as f64 })
            .collect()
    }
}

/// A discretised ECT: one Euler characteristic curve per row.
#[derive(Clone, Debug, PartialEq)]
pub struct EctGrid {
    values: Matrix,
    config: EctConfig,
    heights: Vec<f64>,
    num_vertices: usize,
}

impl EctGrid {
    pub fn new(values: Matrix, config: EctConfig, num_vertices: usize) -> Result<Self> {
        config.validate()?;
        if values.cols() != config.num_heights {
            return Err(Error::ShapeMismatch {
                expected: (values.rows(), config.num_heights),
                found: values.shape(),
            });
        }
        let heights = config.heights();
        Ok(Self {
            values,
            config,
            heights,
            num_vertices,
        })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_values(self) -> Matrix {
        self.values
    }

    pub fn config(&self) -> &EctConfig {
        &self.config
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Vertex count of the complex the grid was computed from.
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_directions(&self) -> usize {
        self.values.rows()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    /// The Euler characteristic curve of direction `d`.
    pub fn ecc(&self, d: usize) -> &[f64] {
        self.values.row(d)
    }
}
