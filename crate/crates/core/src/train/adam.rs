use crate::error::{Error, Result};
use crate::nn::{Network, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

/// First and second moment estimates, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T: Scalar = f32> {
    first: Network<T>,
    second: Network<T>,
    step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(net: &Network<T>) -> Self {
        AdamState {
            first: net.zeros_like(),
            second: net.zeros_like(),
            step: 0,
        }
    }

    /// Number of updates applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update of `net` in place:
///
/// ```text
/// m ← β1·m + (1−β1)·g        v ← β2·v + (1−β2)·g²
/// θ ← θ − lr · m̂ / (√v̂ + ε)  with m̂ = m/(1−β1ᵗ), v̂ = v/(1−β2ᵗ)
/// ```
pub fn adam_step<T: Scalar>(
    net: &mut Network<T>,
    grads: &Network<T>,
    state: &mut AdamState<T>,
    config: &AdamConfig,
) -> Result<()> {
    if !net.same_shape(grads) || !net.same_shape(&state.first) {
        return Err(Error::Shape("gradients or optimizer state do not match the network".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let b1 = T::lit(config.beta1);
    let b2 = T::lit(config.beta2);
    let one = T::one();
    let correction1 = T::lit(1.0 - config.beta1.powi(t));
    let correction2 = T::lit(1.0 - config.beta2.powi(t));
    let lr = T::lit(config.learning_rate);
    let eps = T::lit(config.epsilon);

    let params = net.tensors_mut();
    let firsts = state.first.tensors_mut();
    let seconds = state.second.tensors_mut();
    for (((p, g), m), v) in params.into_iter().zip(grads.tensors()).zip(firsts).zip(seconds) {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = b1 * m[i] + (one - b1) * gi;
            v[i] = b2 * v[i] + (one - b2) * gi * gi;
            let m_hat = m[i] / correction1;
            let v_hat = v[i] / correction2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Architecture};

    fn small() -> Network<f64> {
        let arch = Architecture {
            seq_len: 2,
            input_dim: 3,
            lstm_units: vec![2],
            dense: vec![(2, Activation::Softmax)],
        };
        Network::glorot(&arch, 3).unwrap()
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut net = small();
        let before = net.clone();
        let mut grads = net.zeros_like();
        for (k, t) in grads.tensors_mut().into_iter().enumerate() {
            for (i, g) in t.iter_mut().enumerate() {
                *g = if (i + k) % 2 == 0 { 0.3 } else { -2.0 };
            }
        }
        let mut state = AdamState::new(&net);
        let config = AdamConfig::default();
        adam_step(&mut net, &grads, &mut state, &config).unwrap();
        assert_eq!(state.step(), 1);
        for ((after, before), g) in net.tensors().iter().zip(before.tensors()).zip(grads.tensors()) {
            for i in 0..after.len() {
                let delta = after[i] - before[i];
                let expected = -config.learning_rate * g[i] / (g[i].abs() + config.epsilon);
                assert!((delta - expected).abs() < 1e-15);
                assert!((delta.abs() - config.learning_rate).abs() < 1e-8);
                assert_eq!(delta.signum(), -g[i].signum());
            }
        }
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut net = small();
        let before = net.clone();
        let grads = net.zeros_like();
        let mut state = AdamState::new(&net);
        for _ in 0..25 {
            adam_step(&mut net, &grads, &mut state, &AdamConfig::default()).unwrap();
        }
        assert_eq!(net, before);
        assert_eq!(state.step(), 25);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut net = small();
        let other = Network::<f64>::glorot(&Architecture::canonical(), 0).unwrap();
        let mut state = AdamState::new(&net);
        assert!(matches!(
            adam_step(&mut net, &other, &mut state, &AdamConfig::default()),
            Err(Error::Shape(_))
        ));
        assert_eq!(state.step(), 0);
    }
}
