//! Scalar-arithmetic reference oracles for the network forward passes.
//!
//! Everything here is written directly from the textbook recurrences with
//! per-gate nested `Vec`s and explicit loops. It shares no code with the
//! engine (no `Matrix`, no combined gate storage), so an agreement between
//! the two is evidence that the engine's indexing and algebra are right.
//! Keep it this way: do not import engine types into this module.

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-gate weights for one LSTM cell. `w_*[h][k]` multiplies input k,
/// `u_*[h][k]` multiplies previous hidden k, `b_*[h]` is the gate bias.
pub struct ScalarLstm {
    pub w_i: Vec<Vec<f64>>,
    pub u_i: Vec<Vec<f64>>,
    pub b_i: Vec<f64>,
    pub w_f: Vec<Vec<f64>>,
    pub u_f: Vec<Vec<f64>>,
    pub b_f: Vec<f64>,
    pub w_g: Vec<Vec<f64>>,
    pub u_g: Vec<Vec<f64>>,
    pub b_g: Vec<f64>,
    pub w_o: Vec<Vec<f64>>,
    pub u_o: Vec<Vec<f64>>,
    pub b_o: Vec<f64>,
}

impl ScalarLstm {
    /// One step of the standard recurrence:
    ///   i = sigma(W_i x + U_i h + b_i), f = sigma(W_f x + U_f h + b_f)
    ///   g = tanh(W_g x + U_g h + b_g), o = sigma(W_o x + U_o h + b_o)
    ///   c' = f * c + i * g,  h' = o * tanh(c')
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hidden = self.b_i.len();
        let mut h_new = vec![0.0; hidden];
        let mut c_new = vec![0.0; hidden];
        for h in 0..hidden {
            let mut pre_i = self.b_i[h];
            let mut pre_f = self.b_f[h];
            let mut pre_g = self.b_g[h];
            let mut pre_o = self.b_o[h];
            for (k, &xk) in x.iter().enumerate() {
                pre_i += self.w_i[h][k] * xk;
                pre_f += self.w_f[h][k] * xk;
                pre_g += self.w_g[h][k] * xk;
                pre_o += self.w_o[h][k] * xk;
            }
            for (k, &hk) in h_prev.iter().enumerate() {
                pre_i += self.u_i[h][k] * hk;
                pre_f += self.u_f[h][k] * hk;
                pre_g += self.u_g[h][k] * hk;
                pre_o += self.u_o[h][k] * hk;
            }
            let i = sigmoid(pre_i);
            let f = sigmoid(pre_f);
            let g = pre_g.tanh();
            let o = sigmoid(pre_o);
            c_new[h] = f * c_prev[h] + i * g;
            h_new[h] = o * c_new[h].tanh();
        }
        (h_new, c_new)
    }

    /// Run the recurrence over a sequence from zero initial state and
    /// return the final hidden vector.
    pub fn run(&self, sequence: &[Vec<f64>]) -> Vec<f64> {
        let hidden = self.b_i.len();
        let mut h = vec![0.0; hidden];
        let mut c = vec![0.0; hidden];
        for x in sequence {
            let (h_next, c_next) = self.step(x, &h, &c);
            h = h_next;
            c = c_next;
        }
        h
    }
}

/// Feedforward reference: `layers[l] = (weights[out][in], bias[out])`,
/// tanh after every layer except the last, which stays affine.
pub fn scalar_ffn(layers: &[(Vec<Vec<f64>>, Vec<f64>)], input: &[f64]) -> Vec<f64> {
    let mut current = input.to_vec();
    for (l, (w, b)) in layers.iter().enumerate() {
        let mut next = vec![0.0; b.len()];
        for (o, row) in w.iter().enumerate() {
            let mut acc = b[o];
            for (k, &wk) in row.iter().enumerate() {
                acc += wk * current[k];
            }
            next[o] = acc;
        }
        if l + 1 < layers.len() {
            for v in next.iter_mut() {
                *v = v.tanh();
            }
        }
        current = next;
    }
    current
}

/// The tiny hand-set cell used by the oracle-equivalence tests:
/// hidden 2, input 1, all weights chosen small and asymmetric.
pub fn tiny_lstm() -> ScalarLstm {
    ScalarLstm {
        w_i: vec![vec![0.1], vec![-0.2]],
        u_i: vec![vec![0.3, -0.1], vec![0.2, 0.4]],
        b_i: vec![0.05, -0.05],
        w_f: vec![vec![0.2], vec![0.1]],
        u_f: vec![vec![-0.3, 0.2], vec![0.1, -0.2]],
        b_f: vec![0.1, 0.0],
        w_g: vec![vec![0.4], vec![-0.3]],
        u_g: vec![vec![0.1, 0.2], vec![-0.2, 0.1]],
        b_g: vec![0.0, 0.2],
        w_o: vec![vec![-0.1], vec![0.3]],
        u_o: vec![vec![0.2, -0.4], vec![0.3, 0.1]],
        b_o: vec![-0.1, 0.05],
    }
}

/// Hand-set 2-3-1 feedforward net used by the oracle-equivalence tests.
pub fn tiny_ffn() -> Vec<(Vec<Vec<f64>>, Vec<f64>)> {
    vec![
        (
            vec![vec![0.2, -0.1], vec![0.4, 0.3], vec![-0.2, 0.5]],
            vec![0.1, -0.1, 0.0],
        ),
        (vec![vec![0.5, -0.3, 0.2]], vec![0.25]),
    ]
}

/// Input sequence (length 6, one feature) for the fold-equivalence check.
pub fn tiny_sequence() -> Vec<Vec<f64>> {
    vec![
        vec![0.5],
        vec![-0.3],
        vec![0.1],
        vec![0.7],
        vec![-0.5],
        vec![0.2],
    ]
}
