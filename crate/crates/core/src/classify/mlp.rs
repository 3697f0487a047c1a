use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Fully connected network with ReLU hidden layers and a linear output.
///
/// All weights and biases live in one flat buffer so that a single optimiser
/// state covers the network. Layer `l` stores its `out x in` row-major weight
/// matrix followed by its `out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Post-activation values of every layer for one input; `acts[0]` is the input.
#[derive(Clone, Debug)]
pub struct MlpTrace {
    acts: Vec<Vec<f64>>,
}

impl MlpTrace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("trace has an input layer")
    }
}

impl MlpParams {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "MLP needs at least two positive layer sizes, got {sizes:?}"
            )));
        }
        let n = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; n],
        })
    }

    /// He-uniform weights, zero biases.
    pub fn init(sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        let mut mlp = Self::zeros(sizes)?;
        for l in 0..mlp.num_layers() {
            let bound = (6.0 / mlp.sizes[l] as f64).sqrt();
            for w in mlp.weights_mut(l) {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(mlp)
    }

    pub fn from_parts(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut mlp = Self::zeros(sizes)?;
        if params.len() != mlp.params.len() {
            return Err(Error::DimensionMismatch {
                expected: mlp.params.len(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("non-finite MLP parameter".into()));
        }
        mlp.params = params;
        Ok(mlp)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn offset(&self, layer: usize) -> usize {
        self.sizes
            .windows(2)
            .take(layer)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let o = self.offset(layer);
        &self.params[o..o + self.sizes[layer] * self.sizes[layer + 1]]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let o = self.offset(layer);
        let n = self.sizes[layer] * self.sizes[layer + 1];
        &mut self.params[o..o + n]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let o = self.offset(layer) + self.sizes[layer] * self.sizes[layer + 1];
        &self.params[o..o + self.sizes[layer + 1]]
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_trace(input).acts.pop().unwrap()
    }

    pub fn forward_trace(&self, input: &[f64]) -> MlpTrace {
        assert_eq!(input.len(), self.input_dim(), "MLP input width");
        let last = self.num_layers() - 1;
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        for l in 0..self.num_layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = self.weights(l);
            let b = self.bias(l);
            let x = &acts[l];
            let mut z = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut s = b[o];
                for (wi, xi) in row.iter().zip(x) {
                    s += wi * xi;
                }
                z.push(if l < last { s.max(0.0) } else { s });
            }
            acts.push(z);
        }
        MlpTrace { acts }
    }

    /// Accumulates `dL/dparams` into `grads` and returns `dL/dinput`.
    pub fn backward(&self, trace: &MlpTrace, d_output: &[f64], grads: &mut [f64]) -> Vec<f64> {
        assert_eq!(grads.len(), self.params.len());
        let last = self.num_layers() - 1;
        let mut delta = d_output.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if l < last {
                for (d, a) in delta.iter_mut().zip(&trace.acts[l + 1]) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let o_w = self.offset(l);
            let o_b = o_w + n_in * n_out;
            let x = &trace.acts[l];
            let w = self.weights(l);
            let mut d_in = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grads[o_b + o] += d;
                let g_row = &mut grads[o_w + o * n_in..o_w + (o + 1) * n_in];
                for (g, xi) in g_row.iter_mut().zip(x) {
                    *g += d * xi;
                }
                for (di, wi) in d_in.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *di += d * wi;
                }
            }
            delta = d_in;
        }
        delta
    }
}
