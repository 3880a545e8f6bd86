//! Fully connected network with rectified hidden layers and a linear head.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{AnnError, Exec, Mat, Result};

/// One affine layer, `w` stored `(out, in)` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w: Mat,
    pub b: Vec<f64>,
}

/// Gradient (or velocity) container mirroring the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub w: Vec<Mat>,
    pub b: Vec<Vec<f64>>,
}

/// Multilayer perceptron; every layer but the last applies `max(0, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Builds a network with the given layer widths (`dims[0]` is the input
    /// dimension). Weights start uniform in `±sqrt(6 / fan_in)`, the scale
    /// that keeps rectified activations from shrinking or blowing up layer
    /// by layer; biases start at zero. Draws happen in layer order, weights
    /// before biases, so one seed fixes the whole network.
    pub fn new(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(AnnError::InvalidConfig(
                "a network needs an input and an output dimension".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(AnnError::InvalidConfig("layer widths must be positive".into()));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for pair in dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            let mut w = Mat::zeros(fan_out, fan_in);
            for v in w.data.iter_mut() {
                *v = rng.gen_range(-limit..limit);
            }
            layers.push(Layer {
                w,
                b: vec![0.0; fan_out],
            });
        }
        Ok(Mlp { layers })
    }

    /// Layer widths, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].w.cols];
        dims.extend(self.layers.iter().map(|l| l.w.rows));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").w.rows
    }

    /// Activations of every layer for a batch, input first, linear output
    /// last.
    pub fn forward(&self, x: &Mat, exec: Exec) -> Vec<Mat> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = acts[li].matmul_nt(&layer.w, exec);
            for r in 0..z.rows {
                let row = z.row_mut(r);
                for (v, &bias) in row.iter_mut().zip(&layer.b) {
                    *v += bias;
                }
                if li + 1 < self.layers.len() {
                    for v in row.iter_mut() {
                        if *v < 0.0 {
                            *v = 0.0;
                        }
                    }
                }
            }
            acts.push(z);
        }
        acts
    }

    /// Just the final linear output.
    pub fn output(&self, x: &Mat, exec: Exec) -> Mat {
        self.forward(x, exec).pop().expect("at least the input")
    }

    /// Backpropagates `delta` (gradient of the loss with respect to the
    /// linear output, batch scaling already applied) through the activations
    /// returned by [`Mlp::forward`].
    pub fn backward(&self, acts: &[Mat], delta_out: Mat, exec: Exec) -> Grads {
        assert_eq!(acts.len(), self.layers.len() + 1, "activation stack mismatch");
        let n = self.layers.len();
        let mut w_grads = vec![Mat::zeros(0, 0); n];
        let mut b_grads = vec![Vec::new(); n];
        let mut delta = delta_out;
        for li in (0..n).rev() {
            w_grads[li] = delta.matmul_tn(&acts[li], exec);
            let mut db = vec![0.0; delta.cols];
            for r in 0..delta.rows {
                for (s, v) in db.iter_mut().zip(delta.row(r)) {
                    *s += v;
                }
            }
            b_grads[li] = db;
            if li > 0 {
                let mut prev = delta.matmul_nn(&self.layers[li].w, exec);
                // Rectifier gate: units that were clamped pass no gradient.
                for (p, a) in prev.data.iter_mut().zip(&acts[li].data) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Grads {
            w: w_grads,
            b: b_grads,
        }
    }

    /// One descent step with classical momentum (`momentum = 0` is plain
    /// gradient descent). `velocity` must mirror the parameter shapes.
    pub fn apply_step(&mut self, velocity: &mut Grads, grads: &Grads, lr: f64, momentum: f64) {
        for li in 0..self.layers.len() {
            for (v, g) in velocity.w[li].data.iter_mut().zip(&grads.w[li].data) {
                *v = momentum * *v - lr * g;
            }
            for (w, v) in self.layers[li].w.data.iter_mut().zip(&velocity.w[li].data) {
                *w += v;
            }
            for (v, g) in velocity.b[li].iter_mut().zip(&grads.b[li]) {
                *v = momentum * *v - lr * g;
            }
            for (b, v) in self.layers[li].b.iter_mut().zip(&velocity.b[li]) {
                *b += v;
            }
        }
    }

    /// Zero-filled gradient/velocity container matching this network.
    pub fn zero_grads(&self) -> Grads {
        Grads {
            w: self
                .layers
                .iter()
                .map(|l| Mat::zeros(l.w.rows, l.w.cols))
                .collect(),
            b: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }
}
