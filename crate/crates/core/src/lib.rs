//! Exact and differentiable Euler Characteristic Transforms.
//!
//! The crate computes directional Euler characteristic curves of point
//! clouds, geometric graphs and triangle meshes, relaxes them with a sigmoid
//! so that they are differentiable in both the vertex coordinates and the
//! directions, and builds optimisation and classification on top of the
//! analytic gradients.
//!
//! Kernels are data-parallel over directions, vertices or samples via rayon
//! behind the default `parallel` feature; see [`Execution`].

pub mod benchmark;
pub mod classify;
pub mod complex;
pub mod ect;
pub mod error;
pub mod exec;
pub mod grad;
pub mod io;
pub mod matrix;
pub mod optim;
pub mod rng;

pub use complex::{euler_characteristic, generate, normalize, validate, GeometricComplex};
pub use ect::{DirectionSet, EctConfig, EctGrid, EctMode, Normalization};
pub use error::{Error, Result};
pub use exec::Execution;
pub use matrix::Matrix;
