use std::f64::consts::PI;

use super::adam::{adam_step_lr, AdamState};
use crate::complex::GeometricComplex;
use crate::ect::{ect_smooth, DirectionSet, EctConfig, EctGrid, Normalization};
use crate::error::{Error, Result};
use crate::grad::ect_smooth_backward;
use crate::matrix::Matrix;

/// Mean squared error over all cells and its gradient `2 (a - b) / cells`
/// with respect to `a`.
pub fn mse_loss(a: &EctGrid, b: &EctGrid) -> Result<(f64, Matrix)> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    if !a.config().compatible(b.config()) {
        return Err(Error::InvalidConfig(format!(
            "grids computed under incompatible configs: {:?} vs {:?}",
            a.config(),
            b.config()
        )));
    }
    let (rows, cols) = a.shape();
    let cells = (rows * cols) as f64;
    let mut loss = 0.0;
    let diff: Vec<f64> = a
        .values()
        .as_slice()
        .iter()
        .zip(b.values().as_slice())
        .map(|(x, y)| {
            let d = x - y;
            loss += d * d;
            2.0 * d / cells
        })
        .collect();
    Ok((loss / cells, Matrix::from_vec(rows, cols, diff)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum LrSchedule {
    #[default]
    Constant,
    /// Cosine decay from the base rate to zero over the run.
    Cosine,
}

impl LrSchedule {
    pub fn lr(self, base: f64, step: usize, total: usize) -> f64 {
        match self {
            LrSchedule::Constant => base,
            LrSchedule::Cosine => {
                if total == 0 {
                    base
                } else {
                    0.5 * base * (1.0 + (PI * step as f64 / total as f64).cos())
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub steps: usize,
    /// `converged` is reported when the final loss is below this.
    pub tolerance: f64,
    pub schedule: LrSchedule,
    /// For point-cloud fitting, also update the directions.
    pub joint: bool,
    /// Keep a copy of the parameters at every step in [`FitReport::iterates`].
    pub record_iterates: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            steps: 1000,
            tolerance: 1e-4,
            schedule: LrSchedule::Constant,
            joint: false,
            record_iterates: false,
        }
    }
}

impl FitOptions {
    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitParams {
    Directions(DirectionSet),
    Coordinates(GeometricComplex),
    Joint {
        complex: GeometricComplex,
        directions: DirectionSet,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// Loss at the start of each step; `loss_trace[0] == initial_loss`.
    pub loss_trace: Vec<f64>,
    pub initial_loss: f64,
    /// Loss of `final_params`, evaluated after the last update.
    pub final_loss: f64,
    pub final_params: FitParams,
    pub steps_run: usize,
    pub converged: bool,
    /// Parameters after each update when `record_iterates` is set.
    pub iterates: Vec<Vec<f64>>,
}

/// Learns directions whose smooth ECT of `complex` matches `target`.
pub fn learn_directions(
    complex: &GeometricComplex,
    target: &EctGrid,
    init: &DirectionSet,
    config: &EctConfig,
    options: &FitOptions,
    mut adam: AdamState,
) -> Result<FitReport> {
    check_target(target, config, init.len())?;
    let mut params = init.as_slice().to_vec();
    ensure_state(&adam, params.len())?;
    let mut dirs = init.clone();
    let base_lr = adam.lr;

    let mut trace = Vec::with_capacity(options.steps);
    let mut iterates = Vec::new();
    for step in 0..options.steps {
        let grid = ect_smooth(complex, &dirs, config)?;
        let (loss, upstream) = mse_loss(&grid, target)?;
        trace.push(loss);
        let grads = ect_smooth_backward(complex, &dirs, config, &upstream)?;
        let lr = options.schedule.lr(base_lr, step, options.steps);
        adam_step_lr(&mut params, grads.d_directions.as_slice(), &mut adam, lr)?;
        dirs = dirs.with_data(params.clone())?;
        // Constrained sets are renormalised inside `with_data`; keep the
        // optimiser's copy on the sphere too.
        params.copy_from_slice(dirs.as_slice());
        if options.record_iterates {
            iterates.push(params.clone());
        }
    }
    let final_loss = mse_loss(&ect_smooth(complex, &dirs, config)?, target)?.0;
    Ok(FitReport {
        initial_loss: trace.first().copied().unwrap_or(final_loss),
        loss_trace: trace,
        final_loss,
        final_params: FitParams::Directions(dirs),
        steps_run: options.steps,
        converged: final_loss < options.tolerance,
        iterates,
    })
}

/// Moves the points of a bare point cloud so that its normalised smooth ECT
/// matches `target`. `source` may have a different cardinality than the
/// cloud `target` was computed from.
pub fn optimize_pointcloud(
    source: &GeometricComplex,
    target: &EctGrid,
    dirs: &DirectionSet,
    config: &EctConfig,
    options: &FitOptions,
    mut adam: AdamState,
) -> Result<FitReport> {
    if !source.is_point_cloud() {
        return Err(Error::InvalidComplex(
            "point-cloud optimisation requires a complex without edges or triangles".into(),
        ));
    }
    if config.normalization == Normalization::None {
        return Err(Error::InvalidConfig(
            "point-cloud optimisation requires a normalised ECT".into(),
        ));
    }
    check_target(target, config, dirs.len())?;
    let num_coords = source.coords().len();
    let mut params = source.coords().to_vec();
    if options.joint {
        params.extend_from_slice(dirs.as_slice());
    }
    ensure_state(&adam, params.len())?;
    let mut cloud = source.clone();
    let mut dirs = dirs.clone();
    let base_lr = adam.lr;

    let mut trace = Vec::with_capacity(options.steps);
    let mut iterates = Vec::new();
    let mut grad_buf = Vec::with_capacity(params.len());
    for step in 0..options.steps {
        let grid = ect_smooth(&cloud, &dirs, config)?;
        let (loss, upstream) = mse_loss(&grid, target)?;
        trace.push(loss);
        let grads = ect_smooth_backward(&cloud, &dirs, config, &upstream)?;
        grad_buf.clear();
        grad_buf.extend_from_slice(grads.d_vertices.as_slice());
        if options.joint {
            grad_buf.extend_from_slice(grads.d_directions.as_slice());
        }
        let lr = options.schedule.lr(base_lr, step, options.steps);
        adam_step_lr(&mut params, &grad_buf, &mut adam, lr)?;
        cloud = cloud.with_coords(params[..num_coords].to_vec())?;
        if options.joint {
            dirs = dirs.with_data(params[num_coords..].to_vec())?;
            params[num_coords..].copy_from_slice(dirs.as_slice());
        }
        if options.record_iterates {
            iterates.push(params.clone());
        }
    }
    let final_loss = mse_loss(&ect_smooth(&cloud, &dirs, config)?, target)?.0;
    let final_params = if options.joint {
        FitParams::Joint {
            complex: cloud,
            directions: dirs,
        }
    } else {
        FitParams::Coordinates(cloud)
    };
    Ok(FitReport {
        initial_loss: trace.first().copied().unwrap_or(final_loss),
        loss_trace: trace,
        final_loss,
        final_params,
        steps_run: options.steps,
        converged: final_loss < options.tolerance,
        iterates,
    })
}

fn check_target(target: &EctGrid, config: &EctConfig, num_directions: usize) -> Result<()> {
    config.validate()?;
    let expected = (num_directions, config.num_heights);
    if target.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            found: target.shape(),
        });
    }
    if !config.compatible(target.config()) {
        return Err(Error::InvalidConfig(
            "target grid was computed under a different config".into(),
        ));
    }
    Ok(())
}

fn ensure_state(adam: &AdamState, n: usize) -> Result<()> {
    if adam.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: adam.len(),
        });
    }
    Ok(())
}
