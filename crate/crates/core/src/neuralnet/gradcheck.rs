//! Central-difference verification of analytic gradients.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::NeuralError;

/// Above this many parameters the check samples a seeded random subset of
/// this size instead of every coordinate.
pub const GRADCHECK_EXHAUSTIVE_LIMIT: usize = 10_000;

/// Compare `analytic` against central finite differences of `loss` at
/// `params` and return the worst relative error, using the denominator
/// max(|a|, |b|, 1e-8).
pub fn gradcheck<F>(
    params: &[f64],
    analytic: &[f64],
    mut loss: F,
    epsilon: f64,
    sample_seed: u64,
) -> Result<f64, NeuralError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(NeuralError::BadEpsilon { epsilon });
    }
    if params.len() != analytic.len() {
        return Err(NeuralError::GradientLength {
            expected: params.len(),
            got: analytic.len(),
        });
    }

    let indices: Vec<usize> = if params.len() <= GRADCHECK_EXHAUSTIVE_LIMIT {
        (0..params.len()).collect()
    } else {
        let mut all: Vec<usize> = (0..params.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        all.shuffle(&mut rng);
        all.truncate(GRADCHECK_EXHAUSTIVE_LIMIT);
        all
    };

    let mut theta = params.to_vec();
    let mut max_rel = 0.0f64;
    for idx in indices {
        let original = theta[idx];
        theta[idx] = original + epsilon;
        let plus = loss(&theta);
        theta[idx] = original - epsilon;
        let minus = loss(&theta);
        theta[idx] = original;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(NeuralError::NonFiniteLoss);
        }
        let numeric = (plus - minus) / (2.0 * epsilon);
        let ana = analytic[idx];
        let rel = (numeric - ana).abs() / numeric.abs().max(ana.abs()).max(1e-8);
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}
