//! Task drivers. Each task writes its artifacts into the output directory
//! and returns the results recorded in the manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dect_core::benchmark::{forward_scaling, loglog_slope};
use dect_core::classify::{
    save_checkpoint, synthetic_dataset, train, ClassifierModel, ModelLayout, TrainRun,
};
use dect_core::complex::{generate, ShapeKind, ShapeSpec};
use dect_core::ect::{ect, ect_hard, ect_smooth, uniform_directions};
use dect_core::io::{
    load_complex, write_atomic, write_complex, write_ect, write_table, ComplexFormat, EctFormat,
};
use dect_core::optim::{
    learn_directions, optimize_pointcloud, AdamState, FitOptions, FitParams, FitReport,
};
use dect_core::rng::{self, substream_seed};
use dect_core::{
    euler_characteristic, DirectionSet, EctGrid, EctMode, GeometricComplex, Matrix, Normalization,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, Source, Task};

/// Wall-clock time per named phase, in execution order.
#[derive(Default)]
pub struct Phases(Vec<(String, f64)>);

impl Phases {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.0
            .push((name.to_owned(), start.elapsed().as_secs_f64()));
        out
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.0
                .iter()
                .map(|(name, s)| json!({ "name": name, "seconds": s }))
                .collect(),
        )
    }
}

struct Run<'a> {
    config: &'a ExperimentConfig,
    out: PathBuf,
    phases: Phases,
    results: Map<String, Value>,
    outputs: Vec<String>,
}

impl Run<'_> {
    fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.phases
            .0
            .push((name.to_owned(), start.elapsed().as_secs_f64()));
        out
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_owned());
        self.out.join(name)
    }

    fn record(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_owned(), value.into());
    }

    fn write_ect(&mut self, grid: &EctGrid, stem: &str) -> Result<()> {
        let csv = self.path(&format!("{stem}.csv"));
        write_ect(grid, &csv, EctFormat::Csv)?;
        if self.config.pgm {
            let pgm = self.path(&format!("{stem}.pgm"));
            self.outputs.push(format!("{stem}.pgm.scale"));
            write_ect(grid, &pgm, EctFormat::Pgm)?;
        }
        Ok(())
    }

    fn write_directions(&mut self, dirs: &DirectionSet, name: &str) -> Result<()> {
        let mut header: Vec<String> = (0..dirs.dim()).map(|i| format!("x{i}")).collect();
        header.push("norm".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = dirs
            .iter()
            .zip(dirs.norms())
            .map(|(v, n)| v.iter().copied().chain([n]).collect())
            .collect();
        let path = self.path(name);
        Ok(write_table(&path, &header, &rows)?)
    }

    fn write_trace(&mut self, report: &FitReport) -> Result<()> {
        let rows: Vec<Vec<f64>> = report
            .loss_trace
            .iter()
            .enumerate()
            .map(|(i, l)| vec![i as f64, *l])
            .collect();
        let path = self.path("loss_trace.csv");
        Ok(write_table(&path, &["step", "loss"], &rows)?)
    }
}

/// Runs `task` and writes `manifest.json` and `config.toml` next to its
/// artifacts. Returns the manifest.
pub fn run(task: Task, config: &ExperimentConfig) -> Result<Value> {
    let out = config.output.clone();
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    let mut run = Run {
        config,
        out,
        phases: Phases::default(),
        results: Map::new(),
        outputs: Vec::new(),
    };
    match task {
        Task::Compute => compute(&mut run)?,
        Task::LearnDirections => learn(&mut run)?,
        Task::OptimizePointcloud => fit_cloud(&mut run)?,
        Task::Classify => classify(&mut run)?,
        Task::Benchmark => benchmark(&mut run)?,
    }
    let config_path = run.path("config.toml");
    write_atomic(&config_path, config.to_toml()?.as_bytes())?;
    run.outputs.push("manifest.json".into());
    let manifest = json!({
        "tool": "dect",
        "version": env!("CARGO_PKG_VERSION"),
        "task": task.name(),
        "seed": config.seed,
        "config": serde_json::to_value(config)?,
        "phases": run.phases.to_json(),
        "results": Value::Object(run.results),
        "outputs": run.outputs,
    });
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write_atomic(&run.out.join("manifest.json"), text.as_bytes())?;
    Ok(manifest)
}

fn load_source(config: &ExperimentConfig) -> Result<GeometricComplex> {
    match config.source()? {
        Source::File(path, format) => load(&path, format, config.normalize_coords),
        Source::Shape(kind) => Ok(generate(&ShapeSpec::new(
            kind,
            config.num_points,
            config.noise,
            config.seed,
        ))?),
    }
}

fn load(path: &Path, format: ComplexFormat, normalize: bool) -> Result<GeometricComplex> {
    load_complex(path, format, normalize).with_context(|| format!("cannot load {}", path.display()))
}

fn directions(config: &ExperimentConfig, dim: usize) -> Result<DirectionSet> {
    let dirs = uniform_directions(
        dim,
        config.directions,
        substream_seed(config.seed, "directions"),
    )?;
    Ok(dirs.with_constrained(config.constrained)?)
}

/// Random initial directions from the init substream. Unconstrained sets
/// start with norms in [0.8, 1.2] so that learning has to restore them.
fn random_directions(config: &ExperimentConfig, dim: usize) -> Result<DirectionSet> {
    let mut r = rng::substream(config.seed, rng::INIT);
    let data = (0..config.directions)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = if config.constrained {
                1.0
            } else {
                r.random_range(0.8..1.2)
            };
            v.iter().map(|x| scale * x / norm).collect()
        })
        .collect();
    Ok(DirectionSet::new(data, config.constrained)?)
}

fn fit_options(config: &ExperimentConfig) -> Result<FitOptions> {
    Ok(FitOptions {
        steps: config.steps,
        tolerance: config.tolerance,
        schedule: config.fit_schedule()?,
        joint: config.joint,
        record_iterates: false,
    })
}

fn record_fit(run: &mut Run, report: &FitReport) {
    run.record("initial_loss", report.initial_loss);
    run.record("final_loss", report.final_loss);
    run.record("steps", report.steps_run);
    run.record("converged", report.converged);
    run.record(
        "moving_average_nonincreasing",
        moving_average_nonincreasing(&report.loss_trace, 100),
    );
}

/// Whether the `window`-step moving average of `trace` never rises. Traces
/// shorter than the window are checked with one window over the whole run.
pub fn moving_average_nonincreasing(trace: &[f64], window: usize) -> bool {
    let window = window.min(trace.len()).max(1);
    if trace.is_empty() {
        return true;
    }
    let mut sum: f64 = trace[..window].iter().sum();
    for i in window..trace.len() {
        let next = sum + trace[i] - trace[i - window];
        if next > sum + 1e-15 {
            return false;
        }
        sum = next;
    }
    true
}

fn compute(run: &mut Run) -> Result<()> {
    let config = run.config;
    let ect_config = config.ect_config()?;
    let complex = run.phases.time("load", || load_source(config))?;
    let dirs = directions(config, complex.dim())?;
    let grid = run
        .phases
        .time("ect", || Ok(ect(&complex, &dirs, &ect_config)?))?;
    run.write_ect(&grid, "ect")?;
    run.write_directions(&dirs, "directions.csv")?;

    let chi = euler_characteristic(&complex);
    let hard = ect_hard(
        &complex,
        &dirs,
        &ect_config.with_normalization(Normalization::None),
    )?;
    let covers = ect_config.interval.1 >= max_height(&complex, &dirs);
    let limit_ok = (0..hard.num_directions()).all(|d| hard.ecc(d).last() == Some(&(chi as f64)));
    run.record("euler_characteristic", chi);
    run.record("num_vertices", complex.num_vertices());
    run.record("num_edges", complex.edges().len());
    run.record("num_triangles", complex.triangles().len());
    run.record("shape", vec![grid.num_directions(), ect_config.num_heights]);
    run.record(
        "sanity",
        if !covers {
            format!("euler characteristic {chi}; interval does not reach the top height, right limit not checked")
        } else if limit_ok {
            format!("euler characteristic {chi}; hard right limit equals {chi} in every direction")
        } else {
            format!("euler characteristic {chi}; hard right limit MISMATCH")
        },
    );
    if covers && !limit_ok {
        bail!("hard ECT right limit disagrees with the Euler characteristic {chi}");
    }
    Ok(())
}

fn max_height(complex: &GeometricComplex, dirs: &DirectionSet) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for v in complex.vertices() {
        for xi in dirs.iter() {
            best = best.max(v.iter().zip(xi).map(|(a, b)| a * b).sum());
        }
    }
    best
}

fn learn(run: &mut Run) -> Result<()> {
    let config = run.config;
    let ect_config = config.ect_config()?.with_mode(EctMode::Smooth);
    let complex = run.phases.time("load", || load_source(config))?;
    let truth = uniform_directions(
        complex.dim(),
        config.directions,
        substream_seed(config.seed, "target"),
    )?;
    let target = run
        .phases
        .time("target", || Ok(ect_smooth(&complex, &truth, &ect_config)?))?;
    let init = random_directions(config, complex.dim())?;
    let adam = AdamState::new(init.as_slice().len(), config.lr);
    let options = fit_options(config)?;
    let report = run.phases.time("optimise", || {
        Ok(learn_directions(
            &complex,
            &target,
            &init,
            &ect_config,
            &options,
            adam,
        )?)
    })?;
    let FitParams::Directions(learned) = &report.final_params else {
        unreachable!("direction learning returns directions")
    };
    run.timed("write", |run| {
        run.write_trace(&report)?;
        run.write_directions(&truth, "target_directions.csv")?;
        run.write_directions(&init, "initial_directions.csv")?;
        run.write_directions(learned, "learned_directions.csv")?;
        run.write_ect(&target, "target_ect")?;
        run.write_ect(&ect_smooth(&complex, learned, &ect_config)?, "learned_ect")
    })?;
    record_fit(run, &report);
    let dev = learned
        .norms()
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0, f64::max);
    run.record("max_norm_deviation", dev);
    Ok(())
}

fn fit_cloud(run: &mut Run) -> Result<()> {
    let config = run.config;
    let ect_config = config.ect_config()?.with_mode(EctMode::Smooth);
    let target_cloud = run.phases.time("load", || match &config.target_input {
        Some(path) => {
            let format = ComplexFormat::from_path(path).unwrap_or(ComplexFormat::CsvPoints);
            load(path, format, config.normalize_coords)
        }
        None => Ok(generate(&ShapeSpec::new(
            config.target_shape.parse()?,
            config.target_points,
            config.target_noise,
            config.seed,
        ))?),
    })?;
    let source = match &config.input {
        Some(_) => load_source(config)?,
        None => generate(&ShapeSpec::new(
            ShapeKind::UniformBlob,
            config.source_points,
            0.0,
            substream_seed(config.seed, rng::INIT),
        ))?,
    };
    if source.dim() != target_cloud.dim() {
        bail!(
            "source is {}-dimensional but the target is {}-dimensional",
            source.dim(),
            target_cloud.dim()
        );
    }
    let dirs = directions(config, source.dim())?;
    let target = ect_smooth(&target_cloud, &dirs, &ect_config)?;
    let mut num_params = source.coords().len();
    if config.joint {
        num_params += dirs.as_slice().len();
    }
    let adam = AdamState::new(num_params, config.lr);
    let options = fit_options(config)?;
    let report = run.phases.time("optimise", || {
        Ok(optimize_pointcloud(
            &source,
            &target,
            &dirs,
            &ect_config,
            &options,
            adam,
        )?)
    })?;
    let (fitted, fitted_dirs) = match &report.final_params {
        FitParams::Coordinates(c) => (c.clone(), dirs.clone()),
        FitParams::Joint {
            complex,
            directions,
        } => (complex.clone(), directions.clone()),
        FitParams::Directions(_) => unreachable!("point-cloud fitting moves coordinates"),
    };
    let r = {
        let a = ect_hard(&fitted, &fitted_dirs, &ect_config)?;
        let b = ect_hard(&target_cloud, &dirs, &ect_config)?;
        pearson(a.values(), b.values())
    };
    run.timed("write", |run| {
        run.write_trace(&report)?;
        let points = run.path("source_points.csv");
        write_complex(&source, &points, ComplexFormat::CsvPoints)?;
        let points = run.path("fitted_points.csv");
        write_complex(&fitted, &points, ComplexFormat::CsvPoints)?;
        let points = run.path("target_points.csv");
        write_complex(&target_cloud, &points, ComplexFormat::CsvPoints)?;
        run.write_directions(&fitted_dirs, "directions.csv")?;
        run.write_ect(&target, "target_ect")?;
        run.write_ect(
            &ect_smooth(&fitted, &fitted_dirs, &ect_config)?,
            "fitted_ect",
        )
    })?;
    record_fit(run, &report);
    run.record("hard_ect_pearson", r);
    Ok(())
}

fn pearson(a: &Matrix, b: &Matrix) -> f64 {
    let (x, y) = (a.as_slice(), b.as_slice());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(p, q)| (p - mx) * (q - my)).sum();
    let vx: f64 = x.iter().map(|p| (p - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|q| (q - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn classify(run: &mut Run) -> Result<()> {
    let config = run.config;
    let ect_config = config.ect_config()?.with_mode(EctMode::Smooth);
    let kinds = config.class_kinds()?;
    let data = run.phases.time("data", || {
        Ok(synthetic_dataset(
            &kinds,
            config.per_class,
            config.num_points,
            config.noise,
            config.seed,
        )?)
    })?;
    let model = ClassifierModel::new(
        directions(config, 2)?,
        ect_config,
        kinds.len(),
        config.pool()?,
        &ModelLayout::default(),
        config.seed,
    )?;
    let spec = TrainRun {
        seed: config.seed,
        epochs: config.epochs,
        batch_size: config.batch_size,
        lr: config.lr,
        learn_directions: config.learn_directions,
        ..TrainRun::default()
    };
    let (model, trained) = run
        .phases
        .time("train", || Ok(train(model, &data, spec)?))?;
    run.timed("write", |run| {
        let rows: Vec<Vec<f64>> = trained
            .metrics
            .iter()
            .map(|m| {
                vec![
                    m.epoch as f64,
                    m.train_loss,
                    m.train_accuracy,
                    m.val_loss,
                    m.val_accuracy,
                ]
            })
            .collect();
        let path = run.path("metrics.csv");
        write_table(
            &path,
            &[
                "epoch",
                "train_loss",
                "train_accuracy",
                "val_loss",
                "val_accuracy",
            ],
            &rows,
        )?;
        let path = run.path("model.ckpt");
        save_checkpoint(&model, &path)?;
        run.write_directions(&model.directions, "learned_directions.csv")
    })?;
    if let Some(last) = trained.metrics.last() {
        run.record("final_val_accuracy", last.val_accuracy);
        run.record("final_train_loss", last.train_loss);
    }
    let best = trained
        .metrics
        .iter()
        .map(|m| m.val_accuracy)
        .fold(0.0, f64::max);
    run.record("best_val_accuracy", best);
    run.record("test_accuracy", trained.test_accuracy);
    run.record("num_samples", data.len());
    Ok(())
}

fn benchmark(run: &mut Run) -> Result<()> {
    let config = run.config;
    let ect_config = config.ect_config()?.with_mode(EctMode::Smooth);
    let points = run.phases.time("measure", || {
        Ok(forward_scaling(
            &config.sizes,
            config.directions,
            &ect_config,
            config.execution()?,
            std::time::Duration::from_millis(config.min_time_ms),
            config.seed,
        )?)
    })?;
    let slope = loglog_slope(&points)?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            vec![
                p.num_points as f64,
                p.num_directions as f64,
                p.seconds,
                p.repeats as f64,
            ]
        })
        .collect();
    let path = run.path("timing.csv");
    write_table(
        &path,
        &["num_points", "num_directions", "seconds", "repeats"],
        &rows,
    )?;
    run.record("loglog_slope", slope);
    run.record(
        "max_seconds",
        points.iter().map(|p| p.seconds).fold(0.0, f64::max),
    );
    Ok(())
}
