//! Small fully connected networks with hand-written reverse mode and SGD.
//!
//! Hidden layers use the rectifier, the output layer is linear. Shape
//! mismatches are programmer errors and panic.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Error;

/// One affine layer, `y = W x + b` with `W` stored as `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weights: Array2::zeros((output, input)),
            bias: Array1::zeros(output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Per-parameter gradient buffers mirroring an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTape {
    pub layers: Vec<Dense>,
}

/// Activations kept from a batched forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the input; `activations[k]` the output of layer `k - 1`.
    activations: Vec<Array2<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("trace has an input")
    }

    pub fn input(&self) -> &Array2<f64> {
        &self.activations[0]
    }
}

impl Mlp {
    /// Uniform fan-in initialization: `W ~ U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`, zero bias.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "an mlp needs input and output dims");
        let layers = dims
            .windows(2)
            .map(|w| {
                let (input, output) = (w[0], w[1]);
                let bound = (6.0 / input as f64).sqrt();
                let weights =
                    Array2::from_shape_fn((output, input), |_| rng.gen_range(-bound..bound));
                Dense {
                    weights,
                    bias: Array1::zeros(output),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        assert!(dims.len() >= 2, "an mlp needs input and output dims");
        Self {
            layers: dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self, Error> {
        if layers.is_empty() {
            return Err(Error::Shape("mlp has no layers".into()));
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.output_dim() {
                return Err(Error::Shape(format!("layer {k}: bias length mismatch")));
            }
            if k > 0 && layers[k - 1].output_dim() != layer.input_dim() {
                return Err(Error::Shape(format!("layer {k}: input dim mismatch")));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Dense::output_dim));
        dims
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Sum of squared parameters.
    pub fn squared_norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.weights.iter().chain(l.bias.iter()).map(|p| p * p).sum::<f64>())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|p| p.is_finite()))
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_dim(), "input dimension mismatch");
        let mut a = Array1::from_vec(x.to_vec());
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = layer.weights.dot(&a) + &layer.bias;
            if k < last {
                z.mapv_inplace(relu);
            }
            a = z;
        }
        a.to_vec()
    }

    /// Row-wise forward pass; each row of `x` is one input.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Array2<f64> {
        assert_eq!(x.ncols(), self.input_dim(), "input dimension mismatch");
        let last = self.layers.len() - 1;
        let mut a = affine(x, &self.layers[0]);
        if last > 0 {
            a.mapv_inplace(relu);
        }
        for (k, layer) in self.layers.iter().enumerate().skip(1) {
            a = affine(a.view(), layer);
            if k < last {
                a.mapv_inplace(relu);
            }
        }
        a
    }

    pub fn forward_trace(&self, x: ArrayView2<f64>) -> ForwardTrace {
        assert_eq!(x.ncols(), self.input_dim(), "input dimension mismatch");
        let last = self.layers.len() - 1;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_owned());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = affine(activations[k].view(), layer);
            if k < last {
                z.mapv_inplace(relu);
            }
            activations.push(z);
        }
        ForwardTrace { activations }
    }

    /// Gradients of `upstream . forward(x)` with respect to every parameter
    /// and to `x`.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> (GradientTape, Vec<f64>) {
        assert_eq!(upstream.len(), self.output_dim(), "upstream dimension mismatch");
        let xs = ArrayView2::from_shape((1, x.len()), x).expect("row view");
        let trace = self.forward_trace(xs);
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row view");
        let mut tape = self.zero_tape();
        let dx = self.backward_batch(&trace, up, &mut tape);
        (tape, dx.row(0).to_vec())
    }

    /// Accumulates into `tape` the gradient of `sum_rows upstream . forward(row)`
    /// and returns the per-row input gradients.
    pub fn backward_batch(
        &self,
        trace: &ForwardTrace,
        upstream: ArrayView2<f64>,
        tape: &mut GradientTape,
    ) -> Array2<f64> {
        let n_layers = self.layers.len();
        assert_eq!(trace.activations.len(), n_layers + 1, "trace from another network");
        assert_eq!(upstream.dim(), trace.output().dim(), "upstream shape mismatch");
        let mut delta = upstream.to_owned();
        for k in (0..n_layers).rev() {
            let input = &trace.activations[k];
            let grad = &mut tape.layers[k];
            grad.weights += &delta.t().dot(input);
            grad.bias += &delta.sum_axis(Axis(0));
            let mut back = delta.dot(&self.layers[k].weights);
            if k > 0 {
                // `input` is the rectified output of layer k-1.
                ndarray::Zip::from(&mut back)
                    .and(input)
                    .for_each(|d, &a| {
                        if a <= 0.0 {
                            *d = 0.0;
                        }
                    });
            }
            delta = back;
        }
        delta
    }

    pub fn zero_tape(&self) -> GradientTape {
        GradientTape {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.input_dim(), l.output_dim()))
                .collect(),
        }
    }

    pub fn to_snapshot(&self) -> MlpSnapshot {
        MlpSnapshot {
            layers: self
                .layers
                .iter()
                .map(|l| LayerSnapshot {
                    rows: l.output_dim(),
                    cols: l.input_dim(),
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_snapshot(snapshot: &MlpSnapshot) -> Result<Self, Error> {
        let layers = snapshot
            .layers
            .iter()
            .map(|l| {
                let weights = Array2::from_shape_vec((l.rows, l.cols), l.weights.clone())
                    .map_err(|e| Error::Shape(e.to_string()))?;
                Ok(Dense {
                    weights,
                    bias: Array1::from_vec(l.bias.clone()),
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Self::from_layers(layers)
    }
}

#[inline]
fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

fn affine(x: ArrayView2<f64>, layer: &Dense) -> Array2<f64> {
    let mut z = x.dot(&layer.weights.t());
    z += &layer.bias;
    z
}

impl GradientTape {
    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|g| *g == 0.0))
    }

    pub fn add_assign(&mut self, other: &GradientTape) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights *= factor;
            l.bias *= factor;
        }
    }

    /// Adds `factor * p` for every parameter `p` of `net`.
    pub fn add_scaled_params(&mut self, net: &Mlp, factor: f64) {
        for (g, l) in self.layers.iter_mut().zip(net.layers()) {
            g.weights.scaled_add(factor, &l.weights);
            g.bias.scaled_add(factor, &l.bias);
        }
    }

    /// Flattened view: weights row-major, then bias, layer by layer.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn squared_norm(&self) -> f64 {
        self.flatten().iter().map(|g| g * g).sum()
    }
}

/// `p <- p - lr * (grad + l2 * p)` for every parameter.
pub fn sgd_step(net: &mut Mlp, tape: &GradientTape, lr: f64, l2: f64) {
    assert!(lr > 0.0, "learning rate must be positive");
    assert!(l2 >= 0.0, "l2 weight must be nonnegative");
    assert_eq!(net.layers.len(), tape.layers.len(), "tape from another network");
    for (layer, grad) in net.layers.iter_mut().zip(&tape.layers) {
        ndarray::Zip::from(&mut layer.weights)
            .and(&grad.weights)
            .for_each(|p, &g| *p -= lr * (g + l2 * *p));
        ndarray::Zip::from(&mut layer.bias)
            .and(&grad.bias)
            .for_each(|p, &g| *p -= lr * (g + l2 * *p));
    }
}

/// Dense-layer parameters in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSnapshot {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSnapshot {
    pub layers: Vec<LayerSnapshot>,
}

/// Row view over a contiguous slice of inputs.
pub fn rows(data: &[f64], width: usize) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((data.len() / width, width), data).expect("rows view")
}
