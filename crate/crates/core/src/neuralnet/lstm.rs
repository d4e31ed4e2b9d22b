//! Single-layer LSTM with full backpropagation through time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{fill_uniform_vec, sigmoid, Matrix, NeuralError};

/// Gate rows are stacked input, forget, cell, output: row block `g*H..(g+1)*H`
/// of `w_input`/`w_hidden`/`bias` belongs to gate `g` in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    input_size: usize,
    hidden_size: usize,
    pub w_input: Matrix,  // [4H x I]
    pub w_hidden: Matrix, // [4H x H]
    pub bias: Vec<f64>,   // [4H]
}

impl LstmParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            input_size,
            hidden_size,
            w_input: Matrix::zeros(4 * hidden_size, input_size),
            w_hidden: Matrix::zeros(4 * hidden_size, hidden_size),
            bias: vec![0.0; 4 * hidden_size],
        }
    }

    /// Seeded uniform init in [-r, r) with r = 1/sqrt(fan-in); the bias
    /// fan-in is the full input+hidden width feeding each gate.
    pub fn init<R: Rng>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_size, hidden_size);
        p.w_input
            .fill_uniform(rng, 1.0 / (input_size as f64).sqrt());
        p.w_hidden
            .fill_uniform(rng, 1.0 / (hidden_size as f64).sqrt());
        fill_uniform_vec(
            &mut p.bias,
            rng,
            1.0 / ((input_size + hidden_size) as f64).sqrt(),
        );
        p
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    /// Standard recurrence from zero initial hidden and cell state; returns
    /// the hidden state after the final step plus the cache backprop needs.
    pub fn forward(&self, sequence: &[Vec<f64>]) -> Result<(Vec<f64>, LstmCache), NeuralError> {
        if sequence.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        let hidden = self.hidden_size;
        let mut cache = LstmCache {
            input_size: self.input_size,
            hidden_size: hidden,
            steps: Vec::with_capacity(sequence.len()),
        };
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        for (t, x) in sequence.iter().enumerate() {
            if x.len() != self.input_size {
                return Err(NeuralError::StepLength {
                    op: "lstm_forward",
                    step: t,
                    expected: self.input_size,
                    got: x.len(),
                });
            }
            let mut pre = self.w_input.matvec(x);
            let rec = self.w_hidden.matvec(&h);
            for (p, (r, b)) in pre.iter_mut().zip(rec.iter().zip(&self.bias)) {
                *p += r + b;
            }
            let mut step = LstmStep {
                input: x.clone(),
                gate_i: vec![0.0; hidden],
                gate_f: vec![0.0; hidden],
                gate_g: vec![0.0; hidden],
                gate_o: vec![0.0; hidden],
                cell: vec![0.0; hidden],
                tanh_cell: vec![0.0; hidden],
                hidden: vec![0.0; hidden],
            };
            for k in 0..hidden {
                let i = sigmoid(pre[k]);
                let f = sigmoid(pre[hidden + k]);
                let g = pre[2 * hidden + k].tanh();
                let o = sigmoid(pre[3 * hidden + k]);
                let c_new = f * c[k] + i * g;
                let tanh_c = c_new.tanh();
                step.gate_i[k] = i;
                step.gate_f[k] = f;
                step.gate_g[k] = g;
                step.gate_o[k] = o;
                step.cell[k] = c_new;
                step.tanh_cell[k] = tanh_c;
                step.hidden[k] = o * tanh_c;
            }
            h.copy_from_slice(&step.hidden);
            c.copy_from_slice(&step.cell);
            cache.steps.push(step);
        }
        Ok((h, cache))
    }

    /// Backpropagation through time for a loss that depends only on the
    /// final hidden state. `d_final_hidden` is dLoss/dh_T.
    pub fn backward(
        &self,
        cache: &LstmCache,
        d_final_hidden: &[f64],
    ) -> Result<LstmGrads, NeuralError> {
        if cache.input_size != self.input_size || cache.hidden_size != self.hidden_size {
            return Err(NeuralError::CacheMismatch {
                what: format!(
                    "lstm cache built for ({}, {}), params are ({}, {})",
                    cache.input_size, cache.hidden_size, self.input_size, self.hidden_size
                ),
            });
        }
        if cache.steps.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        let hidden = self.hidden_size;
        if d_final_hidden.len() != hidden {
            return Err(NeuralError::InputLength {
                op: "lstm_backward",
                expected: hidden,
                got: d_final_hidden.len(),
            });
        }

        let mut grads = LstmGrads::zeros(self.input_size, hidden);
        let zero = vec![0.0; hidden];
        let mut dh_next = vec![0.0; hidden];
        let mut dc_next = vec![0.0; hidden];
        let last = cache.steps.len() - 1;
        let mut d_pre = vec![0.0; 4 * hidden];

        for t in (0..cache.steps.len()).rev() {
            let step = &cache.steps[t];
            let h_prev = if t == 0 {
                &zero
            } else {
                &cache.steps[t - 1].hidden
            };
            let c_prev = if t == 0 {
                &zero
            } else {
                &cache.steps[t - 1].cell
            };

            for k in 0..hidden {
                let dh = if t == last {
                    d_final_hidden[k] + dh_next[k]
                } else {
                    dh_next[k]
                };
                let tanh_c = step.tanh_cell[k];
                let dc = dh * step.gate_o[k] * (1.0 - tanh_c * tanh_c) + dc_next[k];
                let (i, f, g, o) = (
                    step.gate_i[k],
                    step.gate_f[k],
                    step.gate_g[k],
                    step.gate_o[k],
                );
                d_pre[k] = dc * g * i * (1.0 - i);
                d_pre[hidden + k] = dc * c_prev[k] * f * (1.0 - f);
                d_pre[2 * hidden + k] = dc * i * (1.0 - g * g);
                d_pre[3 * hidden + k] = dh * tanh_c * o * (1.0 - o);
                dc_next[k] = dc * f;
            }

            grads.w_input.add_outer(&d_pre, &step.input);
            grads.w_hidden.add_outer(&d_pre, h_prev);
            for (b, d) in grads.bias.iter_mut().zip(&d_pre) {
                *b += d;
            }
            dh_next = self.w_hidden.matvec_transpose(&d_pre);
        }

        Ok(grads)
    }
}

#[derive(Debug, Clone)]
struct LstmStep {
    input: Vec<f64>,
    gate_i: Vec<f64>,
    gate_f: Vec<f64>,
    gate_g: Vec<f64>,
    gate_o: Vec<f64>,
    cell: Vec<f64>,
    tanh_cell: Vec<f64>,
    hidden: Vec<f64>,
}

/// Per-step activations recorded by [`LstmParams::forward`].
#[derive(Debug, Clone)]
pub struct LstmCache {
    input_size: usize,
    hidden_size: usize,
    steps: Vec<LstmStep>,
}

impl LstmCache {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Gradient tensors, shape-congruent with [`LstmParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads {
    pub w_input: Matrix,
    pub w_hidden: Matrix,
    pub bias: Vec<f64>,
}

impl LstmGrads {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_input: Matrix::zeros(4 * hidden_size, input_size),
            w_hidden: Matrix::zeros(4 * hidden_size, hidden_size),
            bias: vec![0.0; 4 * hidden_size],
        }
    }

    pub fn add_assign(&mut self, other: &LstmGrads) {
        self.w_input.add_assign(&other.w_input);
        self.w_hidden.add_assign(&other.w_hidden);
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.w_input.scale(factor);
        self.w_hidden.scale(factor);
        for v in &mut self.bias {
            *v *= factor;
        }
    }
}
