//! Minimal dependency-free neural engine: LSTM, feedforward net, MSE loss,
//! Adam, and finite-difference gradient checking. All arithmetic is f64 and
//! single-threaded; given equal inputs every function is bit-reproducible.

mod adam;
mod ffn;
mod gradcheck;
mod loss;
mod lstm;

pub use adam::{AdamConfig, AdamState, ParamUpdate};
pub use ffn::{Activation, DenseGrads, DenseLayer, FfnCache, FfnGrads, FfnParams};
pub use gradcheck::{gradcheck, GRADCHECK_EXHAUSTIVE_LIMIT};
pub use loss::{mse_grad, mse_loss};
pub use lstm::{LstmCache, LstmGrads, LstmParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("sequence must contain at least one step")]
    EmptySequence,
    #[error("{op}: step {step} has length {got}, expected {expected}")]
    StepLength {
        op: &'static str,
        step: usize,
        expected: usize,
        got: usize,
    },
    #[error("{op}: input has length {got}, expected {expected}")]
    InputLength {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("loss inputs must be non-empty")]
    EmptyLoss,
    #[error("loss inputs differ in length: {left} vs {right}")]
    LossLength { left: usize, right: usize },
    #[error("cache does not match parameters: {what}")]
    CacheMismatch { what: String },
    #[error("non-finite gradient in tensor `{tensor}`")]
    NonFiniteGradient { tensor: String },
    #[error("optimizer tensor `{tensor}`: expected {expected} values, got {got}")]
    TensorShape {
        tensor: String,
        expected: usize,
        got: usize,
    },
    #[error("optimizer expected tensor `{expected}` at slot {slot}, got `{got}`")]
    TensorOrder {
        slot: usize,
        expected: String,
        got: String,
    },
    #[error("non-finite loss during gradient check")]
    NonFiniteLoss,
    #[error("gradcheck epsilon {epsilon} outside (0, 1e-2]")]
    BadEpsilon { epsilon: f64 },
    #[error("gradient vector has {got} entries, parameters have {expected}")]
    GradientLength { expected: usize, got: usize },
}

/// Dense row-major matrix. Small on purpose: the engine only needs
/// matrix-vector products and outer-product accumulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in &rows {
            assert_eq!(row.len(), n_cols, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (out, row) in y.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            let mut acc = 0.0;
            for (w, xv) in row.iter().zip(x) {
                acc += w * xv;
            }
            *out = acc;
        }
        y
    }

    /// x = Aᵀ y
    pub fn matvec_transpose(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut x = vec![0.0; self.cols];
        for (row, yv) in self.data.chunks_exact(self.cols).zip(y) {
            for (acc, w) in x.iter_mut().zip(row) {
                *acc += w * yv;
            }
        }
        x
    }

    /// A += y xᵀ
    pub fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (row, yv) in self.data.chunks_exact_mut(self.cols).zip(y) {
            for (acc, xv) in row.iter_mut().zip(x) {
                *acc += yv * xv;
            }
        }
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    pub fn fill_uniform<R: rand::Rng>(&mut self, rng: &mut R, radius: f64) {
        for v in &mut self.data {
            *v = rng.random_range(-radius..radius);
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub(crate) fn fill_uniform_vec<R: rand::Rng>(v: &mut [f64], rng: &mut R, radius: f64) {
    for x in v {
        *x = rng.random_range(-radius..radius);
    }
}
