//! Forward-pass scaling measurements.

use std::time::{Duration, Instant};

use crate::complex::{generate, ShapeKind, ShapeSpec};
use crate::ect::{ect_smooth_with, uniform_directions, EctConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub num_points: usize,
    pub num_directions: usize,
    /// Median wall-clock seconds of one smooth forward pass.
    pub seconds: f64,
    pub repeats: usize,
}

/// Times the smooth ECT of uniform planar clouds of each size.
///
/// Each size is repeated until at least `min_total` has elapsed (and at
/// least three times); the median is reported.
pub fn forward_scaling(
    sizes: &[usize],
    num_directions: usize,
    config: &EctConfig,
    exec: Execution,
    min_total: Duration,
    seed: u64,
) -> Result<Vec<ScalingPoint>> {
    let dirs = uniform_directions(2, num_directions, seed)?;
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let cloud = generate(&ShapeSpec::new(ShapeKind::UniformBlob, n, 0.0, seed))?;
        // Warm-up also brings the thread pool up.
        ect_smooth_with(&cloud, &dirs, config, exec)?;
        let mut times = Vec::new();
        let start = Instant::now();
        while times.len() < 3 || start.elapsed() < min_total {
            let t = Instant::now();
            let grid = ect_smooth_with(&cloud, &dirs, config, exec)?;
            times.push(t.elapsed().as_secs_f64());
            std::hint::black_box(grid);
        }
        times.sort_by(f64::total_cmp);
        out.push(ScalingPoint {
            num_points: n,
            num_directions,
            seconds: times[times.len() / 2],
            repeats: times.len(),
        });
    }
    Ok(out)
}

/// Least-squares slope of `log(seconds)` against `log(num_points)`.
pub fn loglog_slope(points: &[ScalingPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two sizes for a slope".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.num_points as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.seconds.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("sizes must differ".into()));
    }
    Ok(sxy / sxx)
}
