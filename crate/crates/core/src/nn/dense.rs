use super::scalar::{matmul_nn, matmul_nt, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Relu,
    Softmax,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Softmax => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Softmax),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "linear",
            Activation::Relu => "relu",
            Activation::Softmax => "softmax",
        }
    }
}

/// Fully connected layer `y = act(W·x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    pub(crate) input_dim: usize,
    pub(crate) output_dim: usize,
    pub(crate) activation: Activation,
    /// `output_dim × input_dim`, row-major.
    pub(crate) weights: Vec<T>,
    pub(crate) bias: Vec<T>,
}

#[derive(Debug, Clone)]
pub(crate) struct DenseTrace<T> {
    pub(crate) input: Vec<T>,
    pub(crate) pre: Vec<T>,
    pub(crate) output: Vec<T>,
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl<T: Scalar> DenseLayer<T> {
    pub fn zeros(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        DenseLayer {
            input_dim,
            output_dim,
            activation,
            weights: vec![T::zero(); input_dim * output_dim],
            bias: vec![T::zero(); output_dim],
        }
    }

    pub fn from_parts(
        input_dim: usize,
        output_dim: usize,
        activation: Activation,
        weights: Vec<T>,
        bias: Vec<T>,
    ) -> Result<Self> {
        if weights.len() != input_dim * output_dim || bias.len() != output_dim {
            return Err(Error::Shape(format!(
                "dense weights do not match {input_dim} -> {output_dim}"
            )));
        }
        Ok(DenseLayer {
            input_dim,
            output_dim,
            activation,
            weights,
            bias,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    pub fn param_count(&self) -> usize {
        self.output_dim * (self.input_dim + 1)
    }

    pub(crate) fn forward_trace(&self, input: &[T]) -> DenseTrace<T> {
        let mut pre = self.bias.clone();
        matmul_nt(1, self.input_dim, self.output_dim, input, &self.weights, T::one(), &mut pre);
        let output = match self.activation {
            Activation::Identity => pre.clone(),
            Activation::Relu => pre.iter().map(|&z| z.max(T::zero())).collect(),
            Activation::Softmax => softmax(&pre),
        };
        DenseTrace {
            input: input.to_vec(),
            pre,
            output,
        }
    }

    /// Gradient with respect to the layer input, given the gradient with
    /// respect to the pre-activation. Parameter gradients are added to `grads`.
    pub(crate) fn backward(&self, trace: &DenseTrace<T>, d_pre: &[T], grads: &mut DenseLayer<T>) -> Vec<T> {
        for (row, &d) in grads.weights.chunks_exact_mut(self.input_dim).zip(d_pre) {
            for (g, &x) in row.iter_mut().zip(&trace.input) {
                *g += d * x;
            }
        }
        for (gb, &d) in grads.bias.iter_mut().zip(d_pre) {
            *gb += d;
        }
        let mut dx = vec![T::zero(); self.input_dim];
        matmul_nn(1, self.output_dim, self.input_dim, d_pre, &self.weights, T::zero(), &mut dx);
        dx
    }

    /// Maps a gradient with respect to the output to one with respect to the
    /// pre-activation. Softmax layers are handled together with the loss.
    pub(crate) fn output_to_pre_grad(&self, trace: &DenseTrace<T>, d_out: &[T]) -> Vec<T> {
        match self.activation {
            Activation::Identity => d_out.to_vec(),
            Activation::Relu => d_out
                .iter()
                .zip(&trace.pre)
                .map(|(&d, &z)| if z > T::zero() { d } else { T::zero() })
                .collect(),
            Activation::Softmax => unreachable!("softmax gradient is fused with the loss"),
        }
    }
}
