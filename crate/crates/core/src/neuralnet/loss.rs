//! Mean-squared-error loss.

use super::NeuralError;

pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64, NeuralError> {
    if predictions.is_empty() {
        return Err(NeuralError::EmptyLoss);
    }
    if predictions.len() != targets.len() {
        return Err(NeuralError::LossLength {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    let n = predictions.len() as f64;
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

/// dMSE/dpredictions = 2 (p - t) / n.
pub fn mse_grad(predictions: &[f64], targets: &[f64]) -> Result<Vec<f64>, NeuralError> {
    if predictions.is_empty() {
        return Err(NeuralError::EmptyLoss);
    }
    if predictions.len() != targets.len() {
        return Err(NeuralError::LossLength {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    let n = predictions.len() as f64;
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect())
}
