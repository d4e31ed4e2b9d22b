//! Point metrics for disaggregation quality.

use super::EvalError;
use crate::window::HOURS_PER_DAY;

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    check_pair(pred, truth)?;
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / n)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    check_pair(pred, truth)?;
    let n = pred.len() as f64;
    Ok((pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
        .sqrt())
}

/// |mean(hourly_pred) - daily_avg|: what the post-process drives to zero.
pub fn mean_preservation_error(hourly_pred: &[f64], daily_avg: f64) -> Result<f64, EvalError> {
    if hourly_pred.len() != HOURS_PER_DAY {
        return Err(EvalError::HourCount {
            got: hourly_pred.len(),
        });
    }
    if hourly_pred.iter().any(|v| !v.is_finite()) || !daily_avg.is_finite() {
        return Err(EvalError::NonFinite);
    }
    let mean = hourly_pred.iter().sum::<f64>() / HOURS_PER_DAY as f64;
    Ok((mean - daily_avg).abs())
}

/// variance(pred) / variance(truth) with the population convention; 1.0
/// means the sub-daily variation has the right size, < 1 under-estimates it.
pub fn variance_ratio(pred: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    if pred.len() != HOURS_PER_DAY || truth.len() != HOURS_PER_DAY {
        return Err(EvalError::HourCount {
            got: pred.len().max(truth.len()),
        });
    }
    let truth_var = population_variance(truth);
    if truth_var == 0.0 {
        return Err(EvalError::ZeroTruthVariance);
    }
    Ok(population_variance(pred) / truth_var)
}

pub(crate) fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<(), EvalError> {
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    Ok(())
}
