//! Experiment configuration: a flat TOML file, overridden by command-line
//! flags. Unset keys take their defaults; `normalize` defaults per task.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dect_core::classify::Pool;
use dect_core::complex::ShapeKind;
use dect_core::io::ComplexFormat;
use dect_core::optim::LrSchedule;
use dect_core::{EctConfig, EctMode, Execution, Normalization};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Compute,
    LearnDirections,
    OptimizePointcloud,
    Classify,
    Benchmark,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Compute => "compute",
            Task::LearnDirections => "learn-directions",
            Task::OptimizePointcloud => "optimize-pointcloud",
            Task::Classify => "classify",
            Task::Benchmark => "benchmark",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: PathBuf,

    /// Input complex; when absent a shape is generated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// `off`, `edgelist` or `csv-points`; inferred from the extension if unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_format: Option<String>,
    /// Centre and scale loaded coordinates into the unit ball.
    pub normalize_coords: bool,
    pub shape: String,
    pub num_points: usize,
    pub noise: f64,

    pub directions: usize,
    pub constrained: bool,
    pub heights: usize,
    pub lambda: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
    /// ECT normalisation: `none`, `vertex` or `l2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<String>,
    /// `smooth` or `hard`; only `compute` honours `hard`.
    pub mode: String,
    pub pgm: bool,

    pub steps: usize,
    pub lr: f64,
    pub tolerance: f64,
    pub schedule: String,
    pub joint: bool,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_input: Option<PathBuf>,
    pub target_shape: String,
    pub target_points: usize,
    pub target_noise: f64,
    pub source_points: usize,

    pub classes: Vec<String>,
    pub per_class: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learn_directions: bool,
    pub pool: String,

    pub sizes: Vec<usize>,
    pub min_time_ms: u64,
    pub execution: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let ect = EctConfig::default();
        Self {
            seed: 0,
            output: PathBuf::from("out"),
            input: None,
            input_format: None,
            normalize_coords: true,
            shape: "circle".into(),
            num_points: 64,
            noise: 0.05,
            directions: 16,
            constrained: true,
            heights: ect.num_heights,
            lambda: ect.lambda,
            interval_lo: ect.interval.0,
            interval_hi: ect.interval.1,
            normalize: None,
            mode: "smooth".into(),
            pgm: true,
            steps: 1000,
            lr: 0.001,
            tolerance: 1e-4,
            schedule: "constant".into(),
            joint: false,
            target_input: None,
            target_shape: "two-circles".into(),
            target_points: 256,
            target_noise: 0.0,
            source_points: 64,
            classes: vec!["circle".into(), "two-circles".into()],
            per_class: 100,
            epochs: 30,
            batch_size: 16,
            learn_directions: true,
            pool: "mean".into(),
            sizes: vec![1_000, 10_000, 100_000],
            min_time_ms: 200,
            execution: "parallel".into(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub directions: Option<usize>,
    pub heights: Option<usize>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub normalize: Option<String>,
    pub constrained: Option<bool>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads a TOML config, or the `config` table of a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("{} is not valid JSON", path.display()))?;
            let config = manifest
                .get("config")
                .with_context(|| format!("{} has no config entry", path.display()))?;
            return serde_json::from_value(config.clone())
                .with_context(|| format!("bad config entry in {}", path.display()));
        }
        toml::from_str(&text).with_context(|| format!("cannot parse config {}", path.display()))
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.directions {
            self.directions = v;
        }
        if let Some(v) = o.heights {
            self.heights = v;
        }
        if let Some(v) = o.lambda {
            self.lambda = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.normalize {
            self.normalize = Some(v);
        }
        if let Some(v) = o.constrained {
            self.constrained = v;
        }
        if let Some(v) = o.out {
            self.output = v;
        }
    }

    /// Fills task-dependent defaults and checks every field the task uses.
    pub fn resolve(&mut self, task: Task) -> Result<()> {
        if self.normalize.is_none() {
            let default = match task {
                Task::OptimizePointcloud | Task::Classify => "vertex",
                _ => "none",
            };
            self.normalize = Some(default.into());
        }
        self.ect_config()?;
        if self.directions == 0 {
            bail!("directions must be positive");
        }
        match task {
            Task::Compute => {
                self.source()?;
            }
            Task::LearnDirections => {
                self.source()?;
                self.fit_schedule()?;
            }
            Task::OptimizePointcloud => {
                self.fit_schedule()?;
                if self.target_input.is_none() {
                    parse_shape(&self.target_shape)?;
                }
                if self.ect_config()?.normalization == Normalization::None {
                    bail!("optimize-pointcloud needs a normalised ECT (normalize = vertex or l2)");
                }
            }
            Task::Classify => {
                self.pool()?;
                self.class_kinds()?;
                if self.batch_size == 0 {
                    bail!("batch_size must be positive");
                }
            }
            Task::Benchmark => {
                self.execution()?;
                if self.sizes.len() < 2 {
                    bail!("benchmark needs at least two sizes");
                }
            }
        }
        Ok(())
    }

    pub fn ect_config(&self) -> Result<EctConfig> {
        let normalization: Normalization = self
            .normalize
            .as_deref()
            .unwrap_or("none")
            .parse()
            .map_err(anyhow::Error::from)?;
        let mode: EctMode = self.mode.parse().map_err(anyhow::Error::from)?;
        let config = EctConfig::default()
            .with_lambda(self.lambda)
            .with_num_heights(self.heights)
            .with_interval(self.interval_lo, self.interval_hi)
            .with_normalization(normalization)
            .with_mode(mode);
        config.validate()?;
        Ok(config)
    }

    pub fn source(&self) -> Result<Source> {
        match &self.input {
            Some(path) => {
                let format = match &self.input_format {
                    Some(f) => f.parse().map_err(anyhow::Error::from)?,
                    None => ComplexFormat::from_path(path).with_context(|| {
                        format!(
                            "cannot infer format of {}; set input_format",
                            path.display()
                        )
                    })?,
                };
                Ok(Source::File(path.clone(), format))
            }
            None => Ok(Source::Shape(parse_shape(&self.shape)?)),
        }
    }

    pub fn fit_schedule(&self) -> Result<LrSchedule> {
        match self.schedule.as_str() {
            "constant" => Ok(LrSchedule::Constant),
            "cosine" => Ok(LrSchedule::Cosine),
            other => bail!("unknown schedule {other:?} (expected constant or cosine)"),
        }
    }

    pub fn pool(&self) -> Result<Pool> {
        self.pool.parse().map_err(anyhow::Error::from)
    }

    pub fn class_kinds(&self) -> Result<Vec<ShapeKind>> {
        if self.classes.len() < 2 {
            bail!("classify needs at least two classes");
        }
        self.classes.iter().map(|c| parse_shape(c)).collect()
    }

    pub fn execution(&self) -> Result<Execution> {
        match self.execution.as_str() {
            "parallel" => Ok(Execution::Parallel),
            "sequential" => Ok(Execution::Sequential),
            other => bail!("unknown execution {other:?} (expected parallel or sequential)"),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

pub enum Source {
    File(PathBuf, ComplexFormat),
    Shape(ShapeKind),
}

fn parse_shape(name: &str) -> Result<ShapeKind> {
    name.parse().map_err(anyhow::Error::from)
}
