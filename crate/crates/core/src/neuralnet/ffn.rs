//! Feedforward network with a single linear output unit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{fill_uniform_vec, sigmoid, Matrix, NeuralError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix, // [out x in]
    pub bias: Vec<f64>,  // [out]
}

/// Affine-activation chain ending in one linear unit. `sizes` lists the
/// layer widths input -> hidden... -> 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfnParams {
    sizes: Vec<usize>,
    activation: Activation,
    pub layers: Vec<DenseLayer>,
}

impl FfnParams {
    pub fn zeros(sizes: Vec<usize>, activation: Activation) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        assert_eq!(*sizes.last().unwrap(), 1, "output must be a single unit");
        let layers = sizes
            .windows(2)
            .map(|w| DenseLayer {
                weights: Matrix::zeros(w[1], w[0]),
                bias: vec![0.0; w[1]],
            })
            .collect();
        Self {
            sizes,
            activation,
            layers,
        }
    }

    /// Seeded uniform init in [-r, r) with r = 1/sqrt(fan-in) per layer.
    pub fn init<R: Rng>(sizes: Vec<usize>, activation: Activation, rng: &mut R) -> Self {
        let mut p = Self::zeros(sizes, activation);
        for layer in &mut p.layers {
            let radius = 1.0 / (layer.weights.cols() as f64).sqrt();
            layer.weights.fill_uniform(rng, radius);
            fill_uniform_vec(&mut layer.bias, rng, radius);
        }
        p
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Forward pass; hidden layers use the configured activation, the output
    /// stays affine so predictions are unbounded.
    pub fn forward(&self, input: &[f64]) -> Result<(f64, FfnCache), NeuralError> {
        if input.len() != self.input_size() {
            return Err(NeuralError::InputLength {
                op: "ffn_forward",
                expected: self.input_size(),
                got: input.len(),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.weights.matvec(activations.last().unwrap());
            for (zv, b) in z.iter_mut().zip(&layer.bias) {
                *zv += b;
            }
            if l + 1 < self.layers.len() {
                for zv in &mut z {
                    *zv = self.activation.apply(*zv);
                }
            }
            activations.push(z);
        }
        let output = activations.last().unwrap()[0];
        Ok((
            output,
            FfnCache {
                sizes: self.sizes.clone(),
                activations,
            },
        ))
    }

    /// Backward pass: returns parameter gradients and dLoss/d(input), given
    /// dLoss/d(output).
    pub fn backward(
        &self,
        cache: &FfnCache,
        d_output: f64,
    ) -> Result<(FfnGrads, Vec<f64>), NeuralError> {
        if cache.sizes != self.sizes {
            return Err(NeuralError::CacheMismatch {
                what: format!(
                    "ffn cache built for sizes {:?}, params are {:?}",
                    cache.sizes, self.sizes
                ),
            });
        }
        let mut grads = FfnGrads {
            layers: self
                .sizes
                .windows(2)
                .map(|w| DenseGrads {
                    weights: Matrix::zeros(w[1], w[0]),
                    bias: vec![0.0; w[1]],
                })
                .collect(),
        };
        let mut delta = vec![d_output];
        for l in (0..self.layers.len()).rev() {
            let input_act = &cache.activations[l];
            grads.layers[l].weights.add_outer(&delta, input_act);
            for (b, d) in grads.layers[l].bias.iter_mut().zip(&delta) {
                *b += d;
            }
            let mut d_prev = self.layers[l].weights.matvec_transpose(&delta);
            if l > 0 {
                for (d, a) in d_prev.iter_mut().zip(input_act) {
                    *d *= self.activation.derivative_from_output(*a);
                }
            }
            delta = d_prev;
        }
        Ok((grads, delta))
    }
}

/// Layer activations recorded by [`FfnParams::forward`]; entry 0 is the
/// input, entry l+1 the output of layer l.
#[derive(Debug, Clone)]
pub struct FfnCache {
    sizes: Vec<usize>,
    activations: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradient tensors, shape-congruent with [`FfnParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct FfnGrads {
    pub layers: Vec<DenseGrads>,
}

impl FfnGrads {
    pub fn zeros_like(params: &FfnParams) -> Self {
        Self {
            layers: params
                .sizes
                .windows(2)
                .map(|w| DenseGrads {
                    weights: Matrix::zeros(w[1], w[0]),
                    bias: vec![0.0; w[1]],
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &FfnGrads) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.add_assign(&b.weights);
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            layer.weights.scale(factor);
            for v in &mut layer.bias {
                *v *= factor;
            }
        }
    }
}
