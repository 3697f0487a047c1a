use std::f64::consts::TAU;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

const UNIT_TOLERANCE: f64 = 1e-9;

/// An ordered set of direction vectors sharing one ambient dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    data: Vec<f64>,
    constrained: bool,
}

impl DirectionSet {
    pub fn new(directions: Vec<Vec<f64>>, constrained: bool) -> Result<Self> {
        let dim = directions.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(directions.len() * dim);
        for d in &directions {
            if d.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d.len(),
                });
            }
            data.extend_from_slice(d);
        }
        Self::from_flat(dim, data, constrained)
    }

    /// `constrained` sets require every vector to have unit norm within 1e-9.
    pub fn from_flat(dim: usize, data: Vec<f64>, constrained: bool) -> Result<Self> {
        if dim == 0 || data.is_empty() {
            return Err(Error::InvalidDirections(
                "direction set must be nonempty".into(),
            ));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidDirections(format!(
                "buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDirections("non-finite component".into()));
        }
        let set = Self {
            dim,
            data,
            constrained,
        };
        if constrained {
            for (i, d) in set.iter().enumerate() {
                let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > UNIT_TOLERANCE {
                    return Err(Error::InvalidDirections(format!(
                        "direction {i} has norm {norm}, expected 1"
                    )));
                }
            }
        }
        Ok(set)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn constrained(&self) -> bool {
        self.constrained
    }

    #[inline]
    pub fn direction(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norms(&self) -> Vec<f64> {
        self.iter()
            .map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    /// Replaces the vectors, projecting back onto the sphere when constrained.
    pub fn with_data(&self, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != self.data.len() {
            return Err(Error::DimensionMismatch {
                expected: self.data.len(),
                found: data.len(),
            });
        }
        if self.constrained {
            renormalize(&mut data, self.dim)?;
        }
        Self::from_flat(self.dim, data, self.constrained)
    }

    pub fn with_constrained(&self, constrained: bool) -> Result<Self> {
        Self::from_flat(self.dim, self.data.clone(), constrained)
    }

    /// Directions reordered so that output `i` is input `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let data = order
            .iter()
            .flat_map(|&i| self.direction(i).iter().copied())
            .collect();
        Self {
            dim: self.dim,
            data,
            constrained: self.constrained,
        }
    }
}

fn renormalize(data: &mut [f64], dim: usize) -> Result<()> {
    for d in data.chunks_exact_mut(dim) {
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidDirections(
                "cannot project a zero or non-finite direction onto the sphere".into(),
            ));
        }
        for x in d.iter_mut() {
            *x /= norm;
        }
    }
    Ok(())
}

/// Unit directions: equally spaced angles from 0 in the plane, normalised
/// Gaussian samples otherwise.
pub fn uniform_directions(dim: usize, count: usize, seed: u64) -> Result<DirectionSet> {
    if dim == 0 || count == 0 {
        return Err(Error::InvalidDirections(format!(
            "need dim >= 1 and count >= 1, got dim={dim} count={count}"
        )));
    }
    let mut data = Vec::with_capacity(dim * count);
    if dim == 2 {
        for k in 0..count {
            let a = TAU * k as f64 / count as f64;
            data.push(a.cos());
            data.push(a.sin());
        }
    } else {
        let mut rng = rng::seeded(seed);
        while data.len() < dim * count {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            data.extend(v.iter().map(|x| x / norm));
        }
    }
    DirectionSet::from_flat(dim, data, true)
}
