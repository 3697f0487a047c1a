use std::fmt;
use std::str::FromStr;

use super::mlp::{MlpParams, MlpTrace};
use crate::complex::GeometricComplex;
use crate::ect::{ect_smooth, DirectionSet, EctConfig, EctMode, Normalization};
use crate::error::{Error, Result};
use crate::grad::ect_smooth_backward;
use crate::matrix::Matrix;
use crate::rng;

/// Symmetric aggregation of the per-curve embeddings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pool {
    Sum,
    #[default]
    Mean,
}

impl Pool {
    pub fn name(self) -> &'static str {
        match self {
            Pool::Sum => "sum",
            Pool::Mean => "mean",
        }
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Pool::Sum),
            "mean" => Ok(Pool::Mean),
            _ => Err(Error::UnknownVariant {
                what: "pooling",
                value: s.to_owned(),
            }),
        }
    }
}

/// Hidden widths of the curve embedding and the classification head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelLayout {
    pub embed_hidden: Vec<usize>,
    pub embed_dim: usize,
    pub head_hidden: Vec<usize>,
}

impl Default for ModelLayout {
    fn default() -> Self {
        Self {
            embed_hidden: vec![32, 32],
            embed_dim: 16,
            head_hidden: vec![25, 25, 25],
        }
    }
}

/// Smooth ECT layer, per-curve MLP embedding, pooling and an MLP head.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    pub directions: DirectionSet,
    pub ect_config: EctConfig,
    pub curve_embed: MlpParams,
    pub pool: Pool,
    pub head: MlpParams,
}

/// Gradients of the loss for every trainable part of a [`ClassifierModel`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGrads {
    pub embed: Vec<f64>,
    pub head: Vec<f64>,
    pub directions: Matrix,
}

impl ModelGrads {
    pub fn zeros(model: &ClassifierModel) -> Self {
        Self {
            embed: vec![0.0; model.curve_embed.num_params()],
            head: vec![0.0; model.head.num_params()],
            directions: Matrix::zeros(model.directions.len(), model.directions.dim()),
        }
    }

    pub fn add_assign(&mut self, other: &ModelGrads) {
        for (a, b) in self.embed.iter_mut().zip(&other.embed) {
            *a += b;
        }
        for (a, b) in self.head.iter_mut().zip(&other.head) {
            *a += b;
        }
        for (a, b) in self
            .directions
            .as_mut_slice()
            .iter_mut()
            .zip(other.directions.as_slice())
        {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.embed.iter_mut().for_each(|x| *x *= s);
        self.head.iter_mut().for_each(|x| *x *= s);
        self.directions
            .as_mut_slice()
            .iter_mut()
            .for_each(|x| *x *= s);
    }
}

/// Default ECT settings for classification: smooth, normalised by vertex
/// count so that clouds of any size produce curves in `[0, 1]`.
pub fn classifier_ect_config() -> EctConfig {
    EctConfig::default().with_normalization(Normalization::PerVertexCount)
}

impl ClassifierModel {
    pub fn new(
        directions: DirectionSet,
        ect_config: EctConfig,
        num_classes: usize,
        pool: Pool,
        layout: &ModelLayout,
        seed: u64,
    ) -> Result<Self> {
        ect_config.validate()?;
        if num_classes < 2 {
            return Err(Error::InvalidConfig("need at least two classes".into()));
        }
        let mut r = rng::substream(seed, rng::INIT);
        let mut embed_sizes = vec![ect_config.num_heights];
        embed_sizes.extend(&layout.embed_hidden);
        embed_sizes.push(layout.embed_dim);
        let mut head_sizes = vec![layout.embed_dim];
        head_sizes.extend(&layout.head_hidden);
        head_sizes.push(num_classes);
        let model = Self {
            directions,
            ect_config: ect_config.with_mode(EctMode::Smooth),
            curve_embed: MlpParams::init(&embed_sizes, &mut r)?,
            pool,
            head: MlpParams::init(&head_sizes, &mut r)?,
        };
        model.check()?;
        Ok(model)
    }

    pub fn num_classes(&self) -> usize {
        self.head.output_dim()
    }

    pub fn check(&self) -> Result<()> {
        if self.curve_embed.input_dim() != self.ect_config.num_heights {
            return Err(Error::DimensionMismatch {
                expected: self.ect_config.num_heights,
                found: self.curve_embed.input_dim(),
            });
        }
        if self.head.input_dim() != self.curve_embed.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.curve_embed.output_dim(),
                found: self.head.input_dim(),
            });
        }
        Ok(())
    }

    fn pool_weight(&self) -> f64 {
        match self.pool {
            Pool::Sum => 1.0,
            Pool::Mean => 1.0 / self.directions.len() as f64,
        }
    }

    /// Class logits for one complex.
    pub fn forward(&self, complex: &GeometricComplex) -> Result<Vec<f64>> {
        Ok(self.forward_traced(complex)?.logits)
    }

    fn forward_traced(&self, complex: &GeometricComplex) -> Result<Forward> {
        let grid = ect_smooth(complex, &self.directions, &self.ect_config)?;
        let w = self.pool_weight();
        let mut pooled = vec![0.0; self.curve_embed.output_dim()];
        let mut curves = Vec::with_capacity(grid.num_directions());
        for d in 0..grid.num_directions() {
            let trace = self.curve_embed.forward_trace(grid.ecc(d));
            for (p, e) in pooled.iter_mut().zip(trace.output()) {
                *p += w * e;
            }
            curves.push(trace);
        }
        let head = self.head.forward_trace(&pooled);
        Ok(Forward {
            logits: head.output().to_vec(),
            curves,
            head,
        })
    }

    /// Cross-entropy loss of one labelled sample and its gradients.
    ///
    /// Direction gradients are only computed when `learn_directions` is set.
    pub fn loss_and_grads(
        &self,
        complex: &GeometricComplex,
        label: usize,
        learn_directions: bool,
    ) -> Result<(f64, Vec<f64>, ModelGrads)> {
        if label >= self.num_classes() {
            return Err(Error::InvalidDataset(format!(
                "label {label} outside the model's {} classes",
                self.num_classes()
            )));
        }
        let fwd = self.forward_traced(complex)?;
        let (loss, d_logits) = cross_entropy(&fwd.logits, label);

        let mut grads = ModelGrads::zeros(self);
        let d_pooled = self.head.backward(&fwd.head, &d_logits, &mut grads.head);
        let w = self.pool_weight();
        let d_embed: Vec<f64> = d_pooled.iter().map(|g| g * w).collect();
        let m = self.ect_config.num_heights;
        let mut upstream = Matrix::zeros(self.directions.len(), m);
        for (d, trace) in fwd.curves.iter().enumerate() {
            let d_curve = self.curve_embed.backward(trace, &d_embed, &mut grads.embed);
            upstream.row_mut(d).copy_from_slice(&d_curve);
        }
        if learn_directions {
            let g = ect_smooth_backward(complex, &self.directions, &self.ect_config, &upstream)?;
            grads.directions = g.d_directions;
        }
        Ok((loss, fwd.logits, grads))
    }
}

struct Forward {
    logits: Vec<f64>,
    curves: Vec<MlpTrace>,
    head: MlpTrace,
}

/// `-log softmax(logits)[label]` and its gradient `softmax - onehot`.
pub fn cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() + max - logits[label];
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    (loss, grad)
}

/// Index of the largest logit, lowest index on ties.
pub fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &z) in logits.iter().enumerate().skip(1) {
        if z > logits[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{generate, ShapeKind, ShapeSpec};
    use crate::ect::uniform_directions;
    use crate::grad::max_relative_error;

    fn model(num_dirs: usize, seed: u64) -> ClassifierModel {
        ClassifierModel::new(
            uniform_directions(2, num_dirs, 0).unwrap(),
            classifier_ect_config(),
            2,
            Pool::Mean,
            &ModelLayout::default(),
            seed,
        )
        .unwrap()
    }

    fn cloud(seed: u64) -> GeometricComplex {
        generate(&ShapeSpec::new(ShapeKind::TwoCircles, 40, 0.05, seed)).unwrap()
    }

    #[test]
    fn direction_order_does_not_matter() {
        let m = model(5, 1);
        let mut p = m.clone();
        p.directions = m.directions.permuted(&[3, 0, 4, 2, 1]);
        let a = m.forward(&cloud(0)).unwrap();
        let b = p.forward(&cloud(0)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn zero_head_gives_zero_logits() {
        let mut m = model(4, 1);
        m.head.params_mut().fill(0.0);
        assert_eq!(m.forward(&cloud(0)).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn vertex_reordering_does_not_change_logits() {
        let c = cloud(2);
        let n = c.num_vertices();
        let order: Vec<usize> = (0..n).rev().collect();
        let coords = order.iter().flat_map(|&i| c.vertex(i).to_vec()).collect();
        let shuffled = GeometricComplex::from_flat(2, coords, vec![], vec![]).unwrap();
        let m = model(8, 3);
        let a = m.forward(&c).unwrap();
        let b = m.forward(&shuffled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn cross_entropy_gradient() {
        let (loss, g) = cross_entropy(&[0.0, 0.0], 1);
        assert!((loss - 2f64.ln()).abs() < 1e-15);
        assert_eq!(g, vec![0.5, -0.5]);
        assert_eq!(argmax(&[1.0, 1.0]), 0);
        assert_eq!(argmax(&[1.0, 2.0, 2.0]), 1);
    }

    #[test]
    fn end_to_end_direction_gradient_matches_finite_differences() {
        let layout = ModelLayout {
            embed_hidden: vec![6],
            embed_dim: 4,
            head_hidden: vec![5],
        };
        let dirs = DirectionSet::new(vec![vec![0.8, 0.6], vec![-0.28, 0.96]], true).unwrap();
        let cfg = classifier_ect_config().with_num_heights(8).with_lambda(5.0);
        let m = ClassifierModel::new(dirs, cfg, 2, Pool::Mean, &layout, 11).unwrap();
        let c = generate(&ShapeSpec::new(ShapeKind::UniformBlob, 12, 0.0, 5)).unwrap();
        let (_, _, grads) = m.loss_and_grads(&c, 1, true).unwrap();

        let eps = 1e-5;
        let loss_at = |data: Vec<f64>| -> f64 {
            let mut p = m.clone();
            p.directions = DirectionSet::from_flat(2, data, false).unwrap();
            let logits = p.forward(&c).unwrap();
            cross_entropy(&logits, 1).0
        };
        let base = m.directions.as_slice().to_vec();
        let mut fd = Matrix::zeros(2, 2);
        for i in 0..base.len() {
            let mut plus = base.clone();
            plus[i] += eps;
            let mut minus = base.clone();
            minus[i] -= eps;
            fd.as_mut_slice()[i] = (loss_at(plus) - loss_at(minus)) / (2.0 * eps);
        }
        // Project onto the tangent space like the analytic path does.
        for d in 0..2 {
            let xi = m.directions.direction(d).to_vec();
            let row = fd.row_mut(d);
            let r: f64 = row.iter().zip(&xi).map(|(a, b)| a * b).sum();
            for (g, x) in row.iter_mut().zip(&xi) {
                *g -= r * x;
            }
        }
        let err = max_relative_error(&grads.directions, &fd, 1e-4);
        assert!(
            err <= 1e-3,
            "relative error {err}: {:?} vs {:?}",
            grads.directions,
            fd
        );
    }

    #[test]
    fn mixed_complex_types_share_one_model() {
        let m = model(6, 4);
        let graph = generate(&ShapeSpec::new(ShapeKind::SquareCycle, 4, 0.0, 0)).unwrap();
        let mesh = generate(&ShapeSpec::new(ShapeKind::FilledTriangle, 3, 0.0, 0)).unwrap();
        for c in [cloud(1), graph, mesh] {
            let logits = m.forward(&c).unwrap();
            assert_eq!(logits.len(), 2);
            assert!(logits.iter().all(|z| z.is_finite()));
        }
        let spatial = generate(&ShapeSpec::new(ShapeKind::Octahedron, 6, 0.0, 0)).unwrap();
        assert!(matches!(
            m.forward(&spatial),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
