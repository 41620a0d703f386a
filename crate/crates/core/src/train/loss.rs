use crate::error::{Error, Result};
use crate::nn::Scalar;

/// Probabilities are clipped into `[CLIP, 1 − CLIP]` before the logarithm.
pub const PROBABILITY_CLIP: f64 = 1e-7;

/// Categorical cross-entropy `−Σ y·ln(clip(p))`.
pub fn cross_entropy<T: Scalar>(probabilities: &[T], target: &[T]) -> Result<T> {
    if probabilities.len() != target.len() {
        return Err(Error::Shape(format!(
            "{} probabilities vs {} targets",
            probabilities.len(),
            target.len()
        )));
    }
    let lo = T::lit(PROBABILITY_CLIP);
    let hi = T::lit(1.0 - PROBABILITY_CLIP);
    let mut loss = T::zero();
    for (&p, &y) in probabilities.iter().zip(target) {
        if y != T::zero() {
            // `max` would turn NaN into the clip value and hide divergence.
            let clipped = if p.is_nan() { p } else { p.max(lo).min(hi) };
            loss -= y * clipped.ln();
        }
    }
    Ok(loss)
}
