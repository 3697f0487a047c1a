//! Seeded synthetic shapes.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::{normalize, GeometricComplex};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    /// Equally spaced points on a circle.
    Circle,
    /// Two disjoint circles side by side along the first axis.
    TwoCircles,
    /// Four-vertex cycle graph.
    SquareCycle,
    /// Triangle with its edges and interior.
    FilledTriangle,
    /// Surface of the octahedron in three dimensions.
    Octahedron,
    /// Points sampled uniformly from the unit disc.
    UniformBlob,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        ShapeKind::Circle,
        ShapeKind::TwoCircles,
        ShapeKind::SquareCycle,
        ShapeKind::FilledTriangle,
        ShapeKind::Octahedron,
        ShapeKind::UniformBlob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::TwoCircles => "two-circles",
            ShapeKind::SquareCycle => "square-cycle",
            ShapeKind::FilledTriangle => "filled-triangle",
            ShapeKind::Octahedron => "octahedron",
            ShapeKind::UniformBlob => "uniform-blob",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownVariant {
                what: "shape kind",
                value: s.to_owned(),
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// Used by the sampled shapes; the fixed polytopes ignore it.
    pub num_points: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, num_points: usize, noise_sigma: f64, seed: u64) -> Self {
        Self {
            kind,
            num_points,
            noise_sigma,
            seed,
        }
    }
}

/// Generates the shape, adds isotropic Gaussian noise and normalises.
pub fn generate(spec: &ShapeSpec) -> Result<GeometricComplex> {
    if spec.num_points == 0 {
        return Err(Error::InvalidConfig("num_points must be positive".into()));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise_sigma must be a nonnegative real, got {}",
            spec.noise_sigma
        )));
    }
    let mut rng = rng::substream(spec.seed, rng::DATA);
    let n = spec.num_points;

    let mut complex = match spec.kind {
        ShapeKind::Circle => GeometricComplex::point_cloud(circle(n, [0.0, 0.0]))?,
        ShapeKind::TwoCircles => {
            let left = n.div_ceil(2);
            let mut pts = circle(left, [-1.5, 0.0]);
            pts.extend(circle(n - left, [1.5, 0.0]));
            GeometricComplex::point_cloud(pts)?
        }
        ShapeKind::SquareCycle => GeometricComplex::new(
            vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ],
            vec![[0, 1], [1, 2], [2, 3], [0, 3]],
            vec![],
        )?,
        ShapeKind::FilledTriangle => {
            let pts = (0..3)
                .map(|i| {
                    let a = TAU * i as f64 / 3.0;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            GeometricComplex::new(pts, vec![[0, 1], [1, 2], [0, 2]], vec![[0, 1, 2]])?
        }
        ShapeKind::Octahedron => octahedron()?,
        ShapeKind::UniformBlob => {
            let pts = (0..n)
                .map(|_| {
                    let r = rng.random::<f64>().sqrt();
                    let a = TAU * rng.random::<f64>();
                    vec![r * a.cos(), r * a.sin()]
                })
                .collect();
            GeometricComplex::point_cloud(pts)?
        }
    };

    if spec.noise_sigma > 0.0 {
        let normal =
            Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let coords = complex
            .coords()
            .iter()
            .map(|x| x + normal.sample(&mut rng))
            .collect();
        complex = complex.with_coords(coords)?;
    }
    normalize(&complex)
}

fn circle(n: usize, centre: [f64; 2]) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            vec![centre[0] + a.cos(), centre[1] + a.sin()]
        })
        .collect()
}

fn octahedron() -> Result<GeometricComplex> {
    // 0:+x 1:-x 2:+y 3:-y 4:+z 5:-z
    let vertices = vec![
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ];
    let mut triangles = Vec::with_capacity(8);
    for x in [0, 1] {
        for y in [2, 3] {
            for z in [4, 5] {
                triangles.push([x, y, z]);
            }
        }
    }
    let edges = vec![
        [0, 2],
        [0, 3],
        [0, 4],
        [0, 5],
        [1, 2],
        [1, 3],
        [1, 4],
        [1, 5],
        [2, 4],
        [2, 5],
        [3, 4],
        [3, 5],
    ];
    GeometricComplex::new(vertices, edges, triangles)
}
