//! Long short-term memory layer.
//!
//! Gate rows are stacked in the order input, forget, candidate, output. For an
//! input `x`, previous hidden state `h` and cell `c`:
//!
//! ```text
//! z  = W·x + U·h + b          (4h rows)
//! i, f, o = σ(z_i), σ(z_f), σ(z_o)
//! g  = tanh(z_g)
//! c' = f ⊙ c + i ⊙ g
//! h' = o ⊙ tanh(c')
//! ```

use super::scalar::{matmul_nn, matmul_nt, matmul_tn, sigmoid, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer<T> {
    pub(crate) input_dim: usize,
    pub(crate) units: usize,
    /// Emit the hidden state at every step rather than only the last one.
    pub(crate) return_sequences: bool,
    /// `4·units × input_dim`, row-major.
    pub(crate) kernel: Vec<T>,
    /// `4·units × units`, row-major.
    pub(crate) recurrent: Vec<T>,
    /// `4·units`.
    pub(crate) bias: Vec<T>,
}

/// Per-step values kept from the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct LstmTrace<T> {
    steps: usize,
    input: Vec<T>,
    /// Activated gates `[i, f, g, o]` per step, `steps × 4h`.
    gates: Vec<T>,
    cells: Vec<T>,
    cells_tanh: Vec<T>,
    hidden: Vec<T>,
}

impl<T: Scalar> LstmLayer<T> {
    pub fn zeros(input_dim: usize, units: usize, return_sequences: bool) -> Self {
        LstmLayer {
            input_dim,
            units,
            return_sequences,
            kernel: vec![T::zero(); 4 * units * input_dim],
            recurrent: vec![T::zero(); 4 * units * units],
            bias: vec![T::zero(); 4 * units],
        }
    }

    /// Builds a layer from explicit weights, checking their sizes.
    pub fn from_parts(
        input_dim: usize,
        units: usize,
        return_sequences: bool,
        kernel: Vec<T>,
        recurrent: Vec<T>,
        bias: Vec<T>,
    ) -> Result<Self> {
        let layer = LstmLayer {
            input_dim,
            units,
            return_sequences,
            kernel,
            recurrent,
            bias,
        };
        if layer.kernel.len() != 4 * units * input_dim
            || layer.recurrent.len() != 4 * units * units
            || layer.bias.len() != 4 * units
        {
            return Err(Error::Shape(format!(
                "lstm weights do not match input_dim {input_dim}, units {units}"
            )));
        }
        Ok(layer)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn return_sequences(&self) -> bool {
        self.return_sequences
    }

    pub fn kernel(&self) -> &[T] {
        &self.kernel
    }

    pub fn recurrent(&self) -> &[T] {
        &self.recurrent
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    /// `4h(d + h + 1)`.
    pub fn param_count(&self) -> usize {
        4 * self.units * (self.input_dim + self.units + 1)
    }

    /// One cell update. Returns the new hidden and cell states.
    pub fn step(&self, x: &[T], h_prev: &[T], c_prev: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let h = self.units;
        if x.len() != self.input_dim || h_prev.len() != h || c_prev.len() != h {
            return Err(Error::Shape(format!(
                "lstm step expects x[{}], h[{h}], c[{h}]; got x[{}], h[{}], c[{}]",
                self.input_dim,
                x.len(),
                h_prev.len(),
                c_prev.len()
            )));
        }
        let mut z = self.bias.clone();
        matmul_nt(1, self.input_dim, 4 * h, x, &self.kernel, T::one(), &mut z);
        matmul_nt(1, h, 4 * h, h_prev, &self.recurrent, T::one(), &mut z);
        let mut h_next = vec![T::zero(); h];
        let mut c_next = vec![T::zero(); h];
        for j in 0..h {
            let i = sigmoid(z[j]);
            let f = sigmoid(z[h + j]);
            let g = z[2 * h + j].tanh();
            let o = sigmoid(z[3 * h + j]);
            c_next[j] = f * c_prev[j] + i * g;
            h_next[j] = o * c_next[j].tanh();
        }
        Ok((h_next, c_next))
    }

    /// Runs the layer over `steps` inputs (`steps × input_dim`, row-major)
    /// from zero initial state.
    pub(crate) fn forward_trace(&self, input: &[T], steps: usize) -> LstmTrace<T> {
        let h = self.units;
        let h4 = 4 * h;
        debug_assert_eq!(input.len(), steps * self.input_dim);

        // Input projections for all steps at once.
        let mut gates = vec![T::zero(); steps * h4];
        matmul_nt(steps, self.input_dim, h4, input, &self.kernel, T::zero(), &mut gates);

        let mut cells = vec![T::zero(); steps * h];
        let mut cells_tanh = vec![T::zero(); steps * h];
        let mut hidden = vec![T::zero(); steps * h];
        for t in 0..steps {
            let z = &mut gates[t * h4..(t + 1) * h4];
            for (zi, bi) in z.iter_mut().zip(&self.bias) {
                *zi += *bi;
            }
            if t > 0 {
                let h_prev = &hidden[(t - 1) * h..t * h];
                matmul_nt(1, h, h4, h_prev, &self.recurrent, T::one(), z);
            }
            for j in 0..h {
                let i = sigmoid(z[j]);
                let f = sigmoid(z[h + j]);
                let g = z[2 * h + j].tanh();
                let o = sigmoid(z[3 * h + j]);
                z[j] = i;
                z[h + j] = f;
                z[2 * h + j] = g;
                z[3 * h + j] = o;
                let c_prev = if t > 0 { cells[(t - 1) * h + j] } else { T::zero() };
                let c = f * c_prev + i * g;
                let ct = c.tanh();
                cells[t * h + j] = c;
                cells_tanh[t * h + j] = ct;
                hidden[t * h + j] = o * ct;
            }
        }
        LstmTrace {
            steps,
            input: input.to_vec(),
            gates,
            cells,
            cells_tanh,
            hidden,
        }
    }

    /// Backpropagation through time.
    ///
    /// `d_output` is the loss gradient with respect to this layer's output:
    /// `steps × units` when the layer returns sequences, otherwise `units`
    /// for the final step. Gradients are added into `grads`. Returns the
    /// gradient with respect to the input when `want_input_grad` is set.
    pub(crate) fn backward(
        &self,
        trace: &LstmTrace<T>,
        d_output: &[T],
        grads: &mut LstmLayer<T>,
        want_input_grad: bool,
    ) -> Option<Vec<T>> {
        let h = self.units;
        let h4 = 4 * h;
        let steps = trace.steps;
        let d_out_at = |t: usize, j: usize| -> T {
            if self.return_sequences {
                d_output[t * h + j]
            } else if t + 1 == steps {
                d_output[j]
            } else {
                T::zero()
            }
        };

        let mut dz = vec![T::zero(); steps * h4];
        let mut dh_next = vec![T::zero(); h];
        let mut dc_next = vec![T::zero(); h];
        let one = T::one();
        for t in (0..steps).rev() {
            let g = &trace.gates[t * h4..(t + 1) * h4];
            let dzt = &mut dz[t * h4..(t + 1) * h4];
            for j in 0..h {
                let dh = dh_next[j] + d_out_at(t, j);
                let (i, f, cand, o) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let ct = trace.cells_tanh[t * h + j];
                let c_prev = if t > 0 {
                    trace.cells[(t - 1) * h + j]
                } else {
                    T::zero()
                };
                let dc = dc_next[j] + dh * o * (one - ct * ct);
                dzt[j] = dc * cand * i * (one - i);
                dzt[h + j] = dc * c_prev * f * (one - f);
                dzt[2 * h + j] = dc * i * (one - cand * cand);
                dzt[3 * h + j] = dh * ct * o * (one - o);
                dc_next[j] = dc * f;
            }
            if t > 0 {
                matmul_nn(1, h4, h, dzt, &self.recurrent, T::zero(), &mut dh_next);
            }
        }

        matmul_tn(h4, steps, self.input_dim, &dz, &trace.input, one, &mut grads.kernel);
        if steps > 1 {
            matmul_tn(
                h4,
                steps - 1,
                h,
                &dz[h4..],
                &trace.hidden[..(steps - 1) * h],
                one,
                &mut grads.recurrent,
            );
        }
        for row in dz.chunks_exact(h4) {
            for (gb, d) in grads.bias.iter_mut().zip(row) {
                *gb += *d;
            }
        }

        want_input_grad.then(|| {
            let mut dx = vec![T::zero(); steps * self.input_dim];
            matmul_nn(steps, h4, self.input_dim, &dz, &self.kernel, T::zero(), &mut dx);
            dx
        })
    }
}

impl<T: Scalar> LstmTrace<T> {
    /// The layer's emitted output: all hidden states or only the last.
    pub(crate) fn output(&self, return_sequences: bool) -> &[T] {
        if return_sequences {
            &self.hidden
        } else {
            let h = self.hidden.len() / self.steps;
            &self.hidden[(self.steps - 1) * h..]
        }
    }
}
