use std::fmt;

use rand::distr::Uniform;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dense::{Activation, DenseLayer, DenseTrace};
use super::lstm::{LstmLayer, LstmTrace};
use super::scalar::Scalar;
use crate::data::{FRAME_DIM, NUM_CLASSES, WINDOW_LEN};
use crate::error::{Error, Result};

/// Layer sizes of a stacked-LSTM classifier: LSTM layers (all but the last
/// emit full sequences), then dense layers ending in softmax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub seq_len: usize,
    pub input_dim: usize,
    pub lstm_units: Vec<usize>,
    pub dense: Vec<(usize, Activation)>,
}

impl Architecture {
    /// LSTM 64 → LSTM 128 → LSTM 64 → Dense 64 → Dense 32 → Dense 8 over
    /// windows of 10 frames × 1662 values.
    pub fn canonical() -> Self {
        Architecture {
            seq_len: WINDOW_LEN,
            input_dim: FRAME_DIM,
            lstm_units: vec![64, 128, 64],
            dense: vec![
                (64, Activation::Relu),
                (32, Activation::Relu),
                (NUM_CLASSES, Activation::Softmax),
            ],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.dense.last().map_or(0, |d| d.0)
    }
}

/// All weights of the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T: Scalar = f32> {
    seq_len: usize,
    lstm: Vec<LstmLayer<T>>,
    dense: Vec<DenseLayer<T>>,
}

/// Gradients of the loss with respect to every parameter, shaped like the
/// network they belong to.
pub type Gradients<T = f32> = Network<T>;

/// Values kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T: Scalar> {
    lstm: Vec<LstmTrace<T>>,
    dense: Vec<DenseTrace<T>>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn probabilities(&self) -> &[T] {
        &self.dense.last().expect("network has a dense layer").output
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSummary {
    pub name: String,
    pub kind: &'static str,
    pub output_shape: String,
    pub params: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCount {
    pub layers: Vec<LayerSummary>,
    pub total: usize,
}

impl ParamCount {
    pub fn per_layer(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.params).collect()
    }
}

impl fmt::Display for ParamCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:<18} {:>10}", "layer (type)", "output shape", "params")?;
        for l in &self.layers {
            writeln!(
                f,
                "{:<18} {:<18} {:>10}",
                format!("{} ({})", l.name, l.kind),
                l.output_shape,
                l.params
            )?;
        }
        write!(f, "total {}", self.total)
    }
}

impl<T: Scalar> Network<T> {
    /// Assembles a network, checking that the layers chain together.
    pub fn from_layers(
        seq_len: usize,
        lstm: Vec<LstmLayer<T>>,
        dense: Vec<DenseLayer<T>>,
    ) -> Result<Self> {
        let arch_err = |msg: String| Err(Error::Architecture(msg));
        if seq_len == 0 {
            return arch_err("sequence length must be positive".into());
        }
        if lstm.is_empty() || dense.is_empty() {
            return arch_err("need at least one LSTM and one dense layer".into());
        }
        for (i, layer) in lstm.iter().enumerate() {
            if layer.input_dim == 0 || layer.units == 0 {
                return arch_err(format!("lstm layer {i} has a zero dimension"));
            }
            let last = i + 1 == lstm.len();
            if layer.return_sequences == last {
                return arch_err(format!(
                    "lstm layer {i} must {}return sequences",
                    if last { "not " } else { "" }
                ));
            }
            if i > 0 && lstm[i - 1].units != layer.input_dim {
                return arch_err(format!(
                    "lstm layer {i} expects {} inputs, previous layer emits {}",
                    layer.input_dim,
                    lstm[i - 1].units
                ));
            }
        }
        let mut width = lstm.last().unwrap().units;
        for (i, layer) in dense.iter().enumerate() {
            if layer.input_dim != width {
                return arch_err(format!(
                    "dense layer {i} expects {} inputs, previous layer emits {width}",
                    layer.input_dim
                ));
            }
            if layer.output_dim == 0 {
                return arch_err(format!("dense layer {i} has no outputs"));
            }
            let last = i + 1 == dense.len();
            if (layer.activation == Activation::Softmax) != last {
                return arch_err("softmax must be the final activation, and only there".into());
            }
            width = layer.output_dim;
        }
        Ok(Network {
            seq_len,
            lstm,
            dense,
        })
    }

    pub fn zeros(arch: &Architecture) -> Result<Self> {
        let mut lstm = Vec::with_capacity(arch.lstm_units.len());
        let mut width = arch.input_dim;
        for (i, &units) in arch.lstm_units.iter().enumerate() {
            let last = i + 1 == arch.lstm_units.len();
            lstm.push(LstmLayer::zeros(width, units, !last));
            width = units;
        }
        let mut dense = Vec::with_capacity(arch.dense.len());
        for &(units, activation) in &arch.dense {
            dense.push(DenseLayer::zeros(width, units, activation));
            width = units;
        }
        Network::from_layers(arch.seq_len, lstm, dense)
    }

    /// Glorot-uniform kernels and recurrent matrices, zero biases except the
    /// LSTM forget-gate block, which starts at 1.
    ///
    /// A matrix stored `rows × cols` has fan-in `cols` and fan-out `rows`.
    /// Values are drawn from one seeded generator in layer order.
    pub fn glorot(arch: &Architecture, seed: u64) -> Result<Self> {
        let mut net = Network::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |values: &mut [T], rows: usize, cols: usize| {
            let bound = T::lit((6.0 / (rows + cols) as f64).sqrt());
            let dist = Uniform::new(-bound, bound).expect("finite positive bound");
            for v in values {
                *v = dist.sample(&mut rng);
            }
        };
        for layer in &mut net.lstm {
            let h4 = 4 * layer.units;
            fill(&mut layer.kernel, h4, layer.input_dim);
            fill(&mut layer.recurrent, h4, layer.units);
            layer.bias[layer.units..2 * layer.units].fill(T::one());
        }
        for layer in &mut net.dense {
            fill(&mut layer.weights, layer.output_dim, layer.input_dim);
        }
        Ok(net)
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            seq_len: self.seq_len,
            input_dim: self.input_dim(),
            lstm_units: self.lstm.iter().map(|l| l.units).collect(),
            dense: self.dense.iter().map(|d| (d.output_dim, d.activation)).collect(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.architecture() == Architecture::canonical()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn input_dim(&self) -> usize {
        self.lstm[0].input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.dense.last().unwrap().output_dim
    }

    pub fn lstm_layers(&self) -> &[LstmLayer<T>] {
        &self.lstm
    }

    pub fn dense_layers(&self) -> &[DenseLayer<T>] {
        &self.dense
    }

    pub fn lstm_layers_mut(&mut self) -> &mut [LstmLayer<T>] {
        &mut self.lstm
    }

    pub fn dense_layers_mut(&mut self) -> &mut [DenseLayer<T>] {
        &mut self.dense
    }

    pub fn param_count(&self) -> ParamCount {
        let mut layers = Vec::new();
        for (i, l) in self.lstm.iter().enumerate() {
            layers.push(LayerSummary {
                name: format!("lstm_{}", i + 1),
                kind: "LSTM",
                output_shape: if l.return_sequences {
                    format!("(None, {}, {})", self.seq_len, l.units)
                } else {
                    format!("(None, {})", l.units)
                },
                params: l.param_count(),
            });
        }
        for (i, d) in self.dense.iter().enumerate() {
            layers.push(LayerSummary {
                name: format!("dense_{}", i + 1),
                kind: "Dense",
                output_shape: format!("(None, {})", d.output_dim),
                params: d.param_count(),
            });
        }
        let total = layers.iter().map(|l| l.params).sum();
        ParamCount { layers, total }
    }

    /// Parameter tensors in declaration order: per LSTM layer kernel,
    /// recurrent, bias; per dense layer weights, bias.
    pub fn tensors(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::with_capacity(3 * self.lstm.len() + 2 * self.dense.len());
        for l in &self.lstm {
            out.extend([&l.kernel[..], &l.recurrent[..], &l.bias[..]]);
        }
        for d in &self.dense {
            out.extend([&d.weights[..], &d.bias[..]]);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::with_capacity(3 * self.lstm.len() + 2 * self.dense.len());
        for l in &mut self.lstm {
            out.push(&mut l.kernel);
            out.push(&mut l.recurrent);
            out.push(&mut l.bias);
        }
        for d in &mut self.dense {
            out.push(&mut d.weights);
            out.push(&mut d.bias);
        }
        out
    }

    /// A network of the same shape with every parameter zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(T::zero());
        }
        z
    }

    /// Elementwise `self += other`.
    pub fn accumulate(&mut self, other: &Self) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, factor: T) {
        for t in self.tensors_mut() {
            for x in t {
                *x *= factor;
            }
        }
    }

    /// Euclidean norm over all parameters, accumulated in f64.
    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|x| {
                let v = x.to_f64().unwrap_or(f64::NAN);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.architecture() == other.architecture()
    }

    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let conv = |v: &[T]| -> Vec<U> { v.iter().map(|x| U::from(*x).unwrap()).collect() };
        Network {
            seq_len: self.seq_len,
            lstm: self
                .lstm
                .iter()
                .map(|l| LstmLayer {
                    input_dim: l.input_dim,
                    units: l.units,
                    return_sequences: l.return_sequences,
                    kernel: conv(&l.kernel),
                    recurrent: conv(&l.recurrent),
                    bias: conv(&l.bias),
                })
                .collect(),
            dense: self
                .dense
                .iter()
                .map(|d| DenseLayer {
                    input_dim: d.input_dim,
                    output_dim: d.output_dim,
                    activation: d.activation,
                    weights: conv(&d.weights),
                    bias: conv(&d.bias),
                })
                .collect(),
        }
    }

    fn check_window(&self, window: &[T]) -> Result<()> {
        let expected = self.seq_len * self.input_dim();
        if window.len() != expected {
            return Err(Error::Shape(format!(
                "window has {} values, expected {} frames x {} = {expected}",
                window.len(),
                self.seq_len,
                self.input_dim()
            )));
        }
        if window.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("window contains a non-finite value".into()));
        }
        Ok(())
    }

    /// Runs the full stack over one window (`seq_len × input_dim`,
    /// row-major) and keeps intermediate values.
    pub fn forward_trace(&self, window: &[T]) -> Result<ForwardTrace<T>> {
        self.check_window(window)?;
        let mut lstm_traces: Vec<LstmTrace<T>> = Vec::with_capacity(self.lstm.len());
        for (i, layer) in self.lstm.iter().enumerate() {
            let input = match i {
                0 => window,
                _ => lstm_traces[i - 1].output(true),
            };
            let trace = layer.forward_trace(input, self.seq_len);
            lstm_traces.push(trace);
        }
        let mut dense_traces: Vec<DenseTrace<T>> = Vec::with_capacity(self.dense.len());
        for (i, layer) in self.dense.iter().enumerate() {
            let trace = match i {
                0 => layer.forward_trace(lstm_traces.last().unwrap().output(false)),
                _ => layer.forward_trace(&dense_traces[i - 1].output),
            };
            dense_traces.push(trace);
        }
        Ok(ForwardTrace {
            lstm: lstm_traces,
            dense: dense_traces,
        })
    }

    /// Class probabilities for one window.
    pub fn forward(&self, window: &[T]) -> Result<Vec<T>> {
        Ok(self.forward_trace(window)?.probabilities().to_vec())
    }

    /// Exact gradients of `cross_entropy(forward(window), target)` from a
    /// recorded forward pass. The softmax/cross-entropy pair contributes
    /// `p − y` at the logits.
    pub fn backward(&self, trace: &ForwardTrace<T>, target: &[T]) -> Result<Gradients<T>> {
        let probs = trace.probabilities();
        if target.len() != probs.len() {
            return Err(Error::Shape(format!(
                "target has {} entries, network has {} classes",
                target.len(),
                probs.len()
            )));
        }
        let mut grads = self.zeros_like();
        let mut d_pre: Vec<T> = probs.iter().zip(target).map(|(&p, &y)| p - y).collect();
        for i in (0..self.dense.len()).rev() {
            let layer = &self.dense[i];
            let d_in = layer.backward(&trace.dense[i], &d_pre, &mut grads.dense[i]);
            if i > 0 {
                d_pre = self.dense[i - 1].output_to_pre_grad(&trace.dense[i - 1], &d_in);
            } else {
                d_pre = d_in;
            }
        }
        let mut d_out = d_pre;
        for i in (0..self.lstm.len()).rev() {
            let want_input = i > 0;
            let d_in = self.lstm[i].backward(&trace.lstm[i], &d_out, &mut grads.lstm[i], want_input);
            if let Some(d) = d_in {
                d_out = d;
            }
        }
        Ok(grads)
    }

    /// Forward pass, loss and gradients for one labeled window.
    pub fn loss_and_gradients(&self, window: &[T], target: &[T]) -> Result<(T, Vec<T>, Gradients<T>)> {
        let trace = self.forward_trace(window)?;
        let probs = trace.probabilities().to_vec();
        let loss = crate::train::cross_entropy(&probs, target)?;
        let grads = self.backward(&trace, target)?;
        Ok((loss, probs, grads))
    }
}

/// The canonical network with seeded Glorot initialization.
pub fn init_params(seed: u64) -> Network<f32> {
    Network::glorot(&Architecture::canonical(), seed).expect("canonical architecture is valid")
}
