//! Adam and the two ECT inverse problems: learning directions for a fixed
//! complex, and moving point-cloud coordinates for fixed directions.

mod adam;
mod fit;

pub use adam::{adam_step, adam_step_lr, AdamState};
pub use fit::{
    learn_directions, mse_loss, optimize_pointcloud, FitOptions, FitParams, FitReport, LrSchedule,
};
