//! End-to-end acceptance checks. Runs every criterion in sequence, prints a
//! PASS/FAIL line for each and exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use dect_core::benchmark::{forward_scaling, loglog_slope};
use dect_core::classify::{
    classifier_ect_config, synthetic_dataset, train, ClassifierModel, ModelLayout, Pool, TrainRun,
};
use dect_core::complex::{generate, ShapeKind, ShapeSpec};
use dect_core::ect::{ect_hard, ect_smooth, heights, uniform_directions, DirectionSet};
use dect_core::grad::{ect_smooth_backward, finite_difference_oracle, max_relative_error};
use dect_core::optim::{learn_directions, optimize_pointcloud, AdamState, FitOptions, FitParams};
use dect_core::{
    euler_characteristic, EctConfig, Execution, GeometricComplex, Matrix, Normalization,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn euler_exact() -> Outcome {
    let cases = [
        (ShapeKind::FilledTriangle, 1),
        (ShapeKind::SquareCycle, 0),
        (ShapeKind::Octahedron, 2),
    ];
    let mut pass = true;
    let mut found = Vec::new();
    for (kind, expected) in cases {
        let c = generate(&ShapeSpec::new(kind, 1, 0.0, 0)).unwrap();
        let chi = euler_characteristic(&c);
        pass &= chi == expected;
        found.push(format!("{}={chi}", kind.name()));
    }
    outcome(pass, found.join(" "))
}

fn hard_smooth_consistency() -> Outcome {
    let config = EctConfig::default()
        .with_lambda(1000.0)
        .with_num_heights(121)
        .with_interval(-1.2, 1.2);
    let grid = config.heights();
    let mut worst = 0.0f64;
    let mut cells = 0usize;
    for seed in 0..20 {
        let mut r = rng(seed);
        let c = random_complex(&mut r, 2 + (seed as usize % 2), 50, 80, 30);
        let dirs = random_directions(&mut r, c.dim(), 8, true);
        let f = heights(&c, &dirs).unwrap();
        let hard = ect_hard(&c, &dirs, &config).unwrap();
        let smooth = ect_smooth(&c, &dirs, &config).unwrap();
        for d in 0..dirs.len() {
            let all: Vec<f64> = [&f.vertex_heights, &f.edge_heights, &f.triangle_heights]
                .iter()
                .flat_map(|m| {
                    if m.cols() == 0 {
                        Vec::new()
                    } else {
                        m.row(d).to_vec()
                    }
                })
                .collect();
            for (i, &t) in grid.iter().enumerate() {
                if all.iter().all(|h| (h - t).abs() >= 0.05) {
                    cells += 1;
                    worst = worst.max((smooth.values()[(d, i)] - hard.values()[(d, i)]).abs());
                }
            }
        }
    }
    outcome(
        worst <= 1e-6 && cells > 0,
        format!("max |smooth - hard| = {worst:.3e} over {cells} admissible cells"),
    )
}

fn tie_free_instance(r: &mut TestRng, constrained: bool) -> (GeometricComplex, DirectionSet) {
    loop {
        let dim = 2 + r.random_range(0..2);
        let c = random_complex(r, dim, 30, 40, 20);
        let dirs = random_directions(r, c.dim(), 3, constrained);
        if min_vertex_gap(&heights(&c, &dirs).unwrap()) >= 1e-3 {
            return (c, dirs);
        }
    }
}

fn gradient_check() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut r = rng(1000 + seed);
        let (c, dirs) = tie_free_instance(&mut r, seed % 2 == 0);
        for lambda in [1.0, 5.0, 20.0] {
            let config = EctConfig::default().with_lambda(lambda);
            let upstream = Matrix::from_vec(
                dirs.len(),
                config.num_heights,
                (0..dirs.len() * config.num_heights)
                    .map(|_| r.random_range(-1.0..1.0))
                    .collect(),
            );
            let analytic = ect_smooth_backward(&c, &dirs, &config, &upstream).unwrap();
            let numeric = finite_difference_oracle(&c, &dirs, &config, &upstream, 1e-5).unwrap();
            worst = worst
                .max(max_relative_error(
                    &analytic.d_vertices,
                    &numeric.d_vertices,
                    1e-4,
                ))
                .max(max_relative_error(
                    &analytic.d_directions,
                    &numeric.d_directions,
                    1e-4,
                ));
        }
    }
    outcome(worst <= 1e-4, format!("max relative error = {worst:.3e}"))
}

fn direction_learning() -> Outcome {
    let circle = generate(&ShapeSpec::new(ShapeKind::Circle, 64, 0.05, 0)).unwrap();
    let config = EctConfig::default().with_normalization(Normalization::PerVertexCount);
    let target = ect_smooth(&circle, &uniform_directions(2, 8, 0).unwrap(), &config).unwrap();
    let mut r = rng(1);
    let init: Vec<Vec<f64>> = (0..8)
        .map(|_| {
            let a: f64 = r.random_range(0.0..std::f64::consts::TAU);
            let s: f64 = r.random_range(0.8..1.2);
            vec![s * a.cos(), s * a.sin()]
        })
        .collect();
    let init = DirectionSet::new(init, false).unwrap();
    let report = learn_directions(
        &circle,
        &target,
        &init,
        &config,
        &FitOptions::default().with_steps(1000),
        AdamState::new(16, 1e-3),
    )
    .unwrap();
    let FitParams::Directions(learned) = &report.final_params else {
        unreachable!()
    };
    let norm_dev = learned
        .norms()
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        report.final_loss < 1e-3 && norm_dev <= 0.1,
        format!(
            "mse {:.3e} -> {:.3e}, max | |xi| - 1 | = {norm_dev:.3e}",
            report.initial_loss, report.final_loss
        ),
    )
}

fn pointcloud_fit() -> Outcome {
    let target_cloud = generate(&ShapeSpec::new(ShapeKind::TwoCircles, 256, 0.0, 0)).unwrap();
    let source = generate(&ShapeSpec::new(ShapeKind::UniformBlob, 64, 0.0, 1)).unwrap();
    let dirs = uniform_directions(2, 16, 0).unwrap();
    let config = EctConfig::default()
        .with_lambda(20.0)
        .with_normalization(Normalization::PerVertexCount);
    let target = ect_smooth(&target_cloud, &dirs, &config).unwrap();
    let report = optimize_pointcloud(
        &source,
        &target,
        &dirs,
        &config,
        &FitOptions::default().with_steps(2000),
        AdamState::new(128, 1e-3),
    )
    .unwrap();
    let FitParams::Coordinates(fitted) = &report.final_params else {
        unreachable!()
    };
    let a = ect_hard(fitted, &dirs, &config).unwrap();
    let b = ect_hard(&target_cloud, &dirs, &config).unwrap();
    let r = pearson(a.values().as_slice(), b.values().as_slice());
    outcome(
        report.final_loss < 5e-3 && r > 0.95,
        format!(
            "mse {:.3e} -> {:.3e}, hard-ECT pearson r = {r:.4}",
            report.initial_loss, report.final_loss
        ),
    )
}

fn ablation() -> Outcome {
    let data = synthetic_dataset(
        &[ShapeKind::Circle, ShapeKind::TwoCircles],
        100,
        64,
        0.05,
        0,
    )
    .unwrap();
    let mut means = [0.0; 2];
    for (slot, learn) in [false, true].into_iter().enumerate() {
        for seed in 0..10 {
            let model = ClassifierModel::new(
                uniform_directions(2, 2, 0).unwrap(),
                classifier_ect_config(),
                2,
                Pool::Mean,
                &ModelLayout::default(),
                seed,
            )
            .unwrap();
            let run = TrainRun {
                seed,
                epochs: 30,
                lr: 1e-3,
                batch_size: 16,
                learn_directions: learn,
                ..TrainRun::default()
            };
            let (_, run) = train(model, &data, run).unwrap();
            means[slot] += run.test_accuracy.unwrap() / 10.0;
        }
    }
    outcome(
        means[1] >= means[0],
        format!(
            "mean test accuracy fixed {:.4}, learned {:.4}",
            means[0], means[1]
        ),
    )
}

fn invariances() -> Outcome {
    let mut perm = 0.0f64;
    let mut rot = 0.0f64;
    let mut dup_exact = true;
    let mut monotone = true;
    let config = EctConfig::default();
    for seed in 0..10u64 {
        let mut r = rng(2000 + seed);
        let c = random_complex(&mut r, 3, 30, 50, 20);
        let dirs = random_directions(&mut r, 3, 8, true);
        let base = ect_smooth(&c, &dirs, &config).unwrap();

        let mut order: Vec<usize> = (0..c.num_vertices()).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut r);
        let permuted = ect_smooth(&permute(&c, &order), &dirs, &config).unwrap();
        perm = perm.max(base.values().max_abs_diff(permuted.values()));

        let q = random_orthogonal(&mut r, 3);
        let rotated = ect_smooth(
            &rotate_complex(&c, &q),
            &rotate_directions(&dirs, &q),
            &config,
        )
        .unwrap();
        rot = rot.max(base.values().max_abs_diff(rotated.values()));

        let cloud =
            GeometricComplex::point_cloud(c.vertices().map(<[f64]>::to_vec).collect()).unwrap();
        let once = cloud.clone();
        let twice = cloud.disjoint_union(&cloud).unwrap();
        let vcfg = config.with_normalization(Normalization::PerVertexCount);
        let a = ect_hard(&once, &dirs, &vcfg).unwrap();
        let b = ect_hard(&twice, &dirs, &vcfg).unwrap();
        dup_exact &= a.values() == b.values();

        let hard = ect_hard(&cloud, &dirs, &config).unwrap();
        for d in 0..dirs.len() {
            monotone &= hard.ecc(d).windows(2).all(|w| w[0] <= w[1]);
        }
    }
    outcome(
        perm <= 1e-12 && rot <= 1e-9 && dup_exact && monotone,
        format!(
            "permutation {perm:.1e}, rotation {rot:.1e}, duplicate exact {dup_exact}, monotone {monotone}"
        ),
    )
}

fn scaling() -> Outcome {
    let sizes = [1_000, 3_000, 10_000, 30_000, 100_000];
    let points = forward_scaling(
        &sizes,
        16,
        &EctConfig::default(),
        Execution::Sequential,
        Duration::from_millis(200),
        0,
    )
    .unwrap();
    let slope = loglog_slope(&points).unwrap();
    let times: Vec<String> = points
        .iter()
        .map(|p| format!("{}:{:.2e}s", p.num_points, p.seconds))
        .collect();
    outcome(
        (0.8..=1.3).contains(&slope),
        format!("log-log slope {slope:.3} ({})", times.join(" ")),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "exact euler characteristics",
            Duration::from_secs(1),
            euler_exact,
        ),
        (
            "hard/smooth consistency",
            Duration::from_secs(10),
            hard_smooth_consistency,
        ),
        (
            "gradient correctness",
            Duration::from_secs(30),
            gradient_check,
        ),
        (
            "direction learning",
            Duration::from_secs(120),
            direction_learning,
        ),
        (
            "point-cloud optimisation",
            Duration::from_secs(300),
            pointcloud_fit,
        ),
        (
            "direction-learning ablation",
            Duration::from_secs(600),
            ablation,
        ),
        ("invariance suite", Duration::from_secs(10), invariances),
        ("forward-pass scaling", Duration::from_secs(120), scaling),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *budget;
        println!(
            "[{}] {}. {name}: {} ({:.2}s, budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
