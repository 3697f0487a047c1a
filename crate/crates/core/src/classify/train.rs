use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::model::{argmax, cross_entropy, ClassifierModel, ModelGrads};
use crate::complex::{generate, GeometricComplex, ShapeKind, ShapeSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optim::{adam_step, AdamState};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub complex: GeometricComplex,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// Training hyperparameters and the metrics recorded while training.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainRun {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub learn_directions: bool,
    pub metrics: Vec<EpochMetrics>,
    /// Accuracy on the held-out test split after the last epoch.
    pub test_accuracy: Option<f64>,
}

impl Default for TrainRun {
    fn default() -> Self {
        Self {
            seed: 0,
            epochs: 100,
            batch_size: 16,
            lr: 0.001,
            learn_directions: true,
            metrics: Vec::new(),
            test_accuracy: None,
        }
    }
}

/// Index partition of a dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// 80/20 train/test, then 20% of train held out for validation.
pub fn split_indices(n: usize, rng: &mut rng::Rng) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let n_test = n / 5;
    let test = idx.split_off(n - n_test);
    let n_val = idx.len() / 5;
    let val = idx.split_off(idx.len() - n_val);
    Split {
        train: idx,
        val,
        test,
    }
}

fn check_dataset(model: &ClassifierModel, dataset: &[Sample]) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    if let Some(s) = dataset.iter().find(|s| s.label >= model.num_classes()) {
        return Err(Error::InvalidDataset(format!(
            "label {} outside the model's {} classes",
            s.label,
            model.num_classes()
        )));
    }
    Ok(())
}

/// Logits for every complex; parallel over samples.
pub fn forward_batch(
    model: &ClassifierModel,
    complexes: &[&GeometricComplex],
) -> Result<Vec<Vec<f64>>> {
    Execution::default()
        .map(complexes.len(), |i| model.forward(complexes[i]))
        .into_iter()
        .collect()
}

/// Fraction of samples whose argmax logit equals the label.
pub fn evaluate(model: &ClassifierModel, dataset: &[Sample]) -> Result<f64> {
    Ok(loss_and_accuracy(model, dataset)?.1)
}

/// Mean cross-entropy and accuracy.
pub fn loss_and_accuracy(model: &ClassifierModel, dataset: &[Sample]) -> Result<(f64, f64)> {
    check_dataset(model, dataset)?;
    let refs: Vec<&GeometricComplex> = dataset.iter().map(|s| &s.complex).collect();
    let logits = forward_batch(model, &refs)?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (z, s) in logits.iter().zip(dataset) {
        loss += cross_entropy(z, s.label).0;
        correct += usize::from(argmax(z) == s.label);
    }
    let n = dataset.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Minibatch Adam on cross-entropy over the train split of `dataset`.
///
/// The dataset is split per [`split_indices`] using the run seed; per-epoch
/// metrics cover the train and validation splits, and the test accuracy is
/// recorded at the end. Gradients flow into the directions only when
/// `run.learn_directions` is set; constrained directions are renormalised
/// after every update.
pub fn train(
    mut model: ClassifierModel,
    dataset: &[Sample],
    mut run: TrainRun,
) -> Result<(ClassifierModel, TrainRun)> {
    check_dataset(&model, dataset)?;
    let classes: BTreeSet<usize> = dataset.iter().map(|s| s.label).collect();
    if classes.len() < 2 {
        return Err(Error::InvalidDataset(
            "need samples of at least two classes".into(),
        ));
    }
    if run.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    let mut shuffle = rng::substream(run.seed, rng::SHUFFLE);
    let split = split_indices(dataset.len(), &mut shuffle);
    if split.train.is_empty() {
        return Err(Error::InvalidDataset("dataset too small to split".into()));
    }
    let pick = |idx: &[usize]| -> Vec<Sample> { idx.iter().map(|&i| dataset[i].clone()).collect() };
    let train = pick(&split.train);
    let val = pick(&split.val);
    let test = pick(&split.test);

    let mut embed_state = AdamState::new(model.curve_embed.num_params(), run.lr);
    let mut head_state = AdamState::new(model.head.num_params(), run.lr);
    let mut dir_state = AdamState::new(model.directions.as_slice().len(), run.lr);

    let mut order = split.train.clone();
    run.metrics.clear();
    for epoch in 0..run.epochs {
        order.shuffle(&mut shuffle);
        for batch in order.chunks(run.batch_size) {
            let per_sample = Execution::default().map(batch.len(), |i| {
                let s = &dataset[batch[i]];
                model.loss_and_grads(&s.complex, s.label, run.learn_directions)
            });
            // Fixed-order reduction keeps training bitwise reproducible.
            let mut total = ModelGrads::zeros(&model);
            for r in per_sample {
                total.add_assign(&r?.2);
            }
            total.scale(1.0 / batch.len() as f64);
            adam_step(
                model.curve_embed.params_mut(),
                &total.embed,
                &mut embed_state,
            )?;
            adam_step(model.head.params_mut(), &total.head, &mut head_state)?;
            if run.learn_directions {
                let mut data = model.directions.as_slice().to_vec();
                adam_step(&mut data, total.directions.as_slice(), &mut dir_state)?;
                model.directions = model.directions.with_data(data)?;
            }
        }
        let (train_loss, train_accuracy) = loss_and_accuracy(&model, &train)?;
        let (val_loss, val_accuracy) = if val.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            loss_and_accuracy(&model, &val)?
        };
        run.metrics.push(EpochMetrics {
            epoch,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        });
    }
    run.test_accuracy = if test.is_empty() {
        None
    } else {
        Some(evaluate(&model, &test)?)
    };
    Ok((model, run))
}

/// Balanced labelled dataset with `per_class` samples of each kind; label
/// `i` is `kinds[i]`. Sample sizes vary uniformly in
/// `[num_points / 2, num_points]`.
pub fn synthetic_dataset(
    kinds: &[ShapeKind],
    per_class: usize,
    num_points: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<Sample>> {
    let mut r = rng::substream(seed, rng::DATA);
    let lo = (num_points / 2).max(1);
    let mut out = Vec::with_capacity(kinds.len() * per_class);
    for (label, &kind) in kinds.iter().enumerate() {
        for _ in 0..per_class {
            let n = r.random_range(lo..=num_points.max(lo));
            let spec = ShapeSpec::new(kind, n, noise_sigma, r.random());
            out.push(Sample {
                complex: generate(&spec)?,
                label,
            });
        }
    }
    Ok(out)
}
