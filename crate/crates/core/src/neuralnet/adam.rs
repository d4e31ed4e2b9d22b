//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AdamSlot {
    name: String,
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Per-parameter first/second moment accumulators plus the step counter.
/// The update is a pure function of (state, params, grads); equal inputs
/// give bit-equal outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    slots: Vec<AdamSlot>,
}

/// One named parameter tensor with its gradient, flattened.
pub struct ParamUpdate<'a> {
    pub name: &'a str,
    pub values: &'a mut [f64],
    pub grads: &'a [f64],
}

impl AdamState {
    pub fn new(config: AdamConfig, shapes: &[(&str, usize)]) -> Self {
        Self {
            config,
            step: 0,
            slots: shapes
                .iter()
                .map(|(name, len)| AdamSlot {
                    name: name.to_string(),
                    m: vec![0.0; *len],
                    v: vec![0.0; *len],
                })
                .collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn tensor_names(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.name.as_str()).collect()
    }

    /// Apply one Adam step in place. Tensors must arrive in the slot order
    /// the state was built with; any non-finite gradient aborts before any
    /// parameter is touched.
    pub fn apply(&mut self, updates: &mut [ParamUpdate<'_>]) -> Result<(), NeuralError> {
        if updates.len() != self.slots.len() {
            return Err(NeuralError::TensorShape {
                tensor: "<update list>".into(),
                expected: self.slots.len(),
                got: updates.len(),
            });
        }
        for (i, (u, slot)) in updates.iter().zip(&self.slots).enumerate() {
            if u.name != slot.name {
                return Err(NeuralError::TensorOrder {
                    slot: i,
                    expected: slot.name.clone(),
                    got: u.name.to_string(),
                });
            }
            if u.values.len() != slot.m.len() || u.grads.len() != slot.m.len() {
                return Err(NeuralError::TensorShape {
                    tensor: slot.name.clone(),
                    expected: slot.m.len(),
                    got: u.values.len().max(u.grads.len()),
                });
            }
            if u.grads.iter().any(|g| !g.is_finite()) {
                return Err(NeuralError::NonFiniteGradient {
                    tensor: slot.name.clone(),
                });
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let c = self.config;
        let bias1 = 1.0 - c.beta1.powi(t);
        let bias2 = 1.0 - c.beta2.powi(t);
        for (u, slot) in updates.iter_mut().zip(&mut self.slots) {
            for k in 0..slot.m.len() {
                let g = u.grads[k];
                slot.m[k] = c.beta1 * slot.m[k] + (1.0 - c.beta1) * g;
                slot.v[k] = c.beta2 * slot.v[k] + (1.0 - c.beta2) * g * g;
                let m_hat = slot.m[k] / bias1;
                let v_hat = slot.v[k] / bias2;
                u.values[k] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
        Ok(())
    }
}
