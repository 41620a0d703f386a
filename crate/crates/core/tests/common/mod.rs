//! Reference implementations shared by the integration tests.
//!
//! Nothing here calls the library's math. The forward pass is a plain loop
//! over the stored weights, and gradients are central finite differences of
//! that loop. The library is only used for its data types.
#![allow(dead_code)]

pub mod replay;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surya_core::nn::{Activation, DenseLayer, LstmLayer, Network};

/// Step for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Relative error with a floor on the denominator, so that two values that
/// are both essentially zero count as equal.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Straight-line forward pass. Weight layout: LSTM kernels are 4h×d and
/// recurrent matrices 4h×h, row blocks ordered input, forget, candidate,
/// output; dense weights are out×in.
pub fn reference_forward<T: surya_core::nn::Scalar>(net: &Network<T>, window: &[f64]) -> Vec<f64> {
    let f = |v: &[T]| -> Vec<f64> { v.iter().map(|x| x.to_f64().unwrap()).collect() };
    let steps = net.seq_len();
    let mut seq: Vec<Vec<f64>> = (0..steps)
        .map(|t| window[t * net.input_dim()..(t + 1) * net.input_dim()].to_vec())
        .collect();

    for layer in net.lstm_layers() {
        let (d, h) = (layer.input_dim(), layer.units());
        let (wk, wr, b) = (f(layer.kernel()), f(layer.recurrent()), f(layer.bias()));
        let mut hs = vec![0.0; h];
        let mut cs = vec![0.0; h];
        let mut out = Vec::with_capacity(steps);
        for x in &seq {
            let mut z = vec![0.0; 4 * h];
            for r in 0..4 * h {
                let mut acc = b[r];
                for k in 0..d {
                    acc += wk[r * d + k] * x[k];
                }
                for k in 0..h {
                    acc += wr[r * h + k] * hs[k];
                }
                z[r] = acc;
            }
            for u in 0..h {
                let i = sigmoid(z[u]);
                let fg = sigmoid(z[h + u]);
                let g = z[2 * h + u].tanh();
                let o = sigmoid(z[3 * h + u]);
                cs[u] = fg * cs[u] + i * g;
                hs[u] = o * cs[u].tanh();
            }
            out.push(hs.clone());
        }
        seq = if layer.return_sequences() { out } else { vec![hs] };
    }

    let mut a = seq.pop().unwrap();
    for layer in net.dense_layers() {
        let (n_in, n_out) = (layer.input_dim(), layer.output_dim());
        let (w, b) = (f(layer.weights()), f(layer.bias()));
        let mut z: Vec<f64> = (0..n_out)
            .map(|o| b[o] + (0..n_in).map(|k| w[o * n_in + k] * a[k]).sum::<f64>())
            .collect();
        match layer.activation() {
            Activation::Identity => {}
            Activation::Relu => z.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Softmax => {
                let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
                let s: f64 = e.iter().sum();
                z = e.iter().map(|v| v / s).collect();
            }
        }
        a = z;
    }
    a
}

/// Clipped cross-entropy of the reference forward pass.
pub fn reference_loss(net: &Network<f64>, window: &[f64], class: usize) -> f64 {
    let p = reference_forward(net, window);
    -p[class].clamp(1e-7, 1.0 - 1e-7).ln()
}

/// Central-difference gradient of [`reference_loss`], one vector per tensor
/// in [`Network::tensors`] order.
pub fn numeric_gradients(net: &Network<f64>, window: &[f64], class: usize) -> Vec<Vec<f64>> {
    let mut probe = net.clone();
    let sizes: Vec<usize> = net.tensors().iter().map(|t| t.len()).collect();
    let mut out = Vec::new();
    for (ti, &len) in sizes.iter().enumerate() {
        let mut g = vec![0.0; len];
        for (j, gj) in g.iter_mut().enumerate() {
            let orig = probe.tensors()[ti][j];
            probe.tensors_mut()[ti][j] = orig + FD_STEP;
            let up = reference_loss(&probe, window, class);
            probe.tensors_mut()[ti][j] = orig - FD_STEP;
            let down = reference_loss(&probe, window, class);
            probe.tensors_mut()[ti][j] = orig;
            *gj = (up - down) / (2.0 * FD_STEP);
        }
        out.push(g);
    }
    out
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Random network with the given LSTM widths and a relu → softmax head.
pub fn random_net(
    rng: &mut ChaCha8Rng,
    seq_len: usize,
    input_dim: usize,
    lstm_units: &[usize],
    hidden: usize,
    classes: usize,
) -> Network<f64> {
    let mut lstm = Vec::new();
    let mut d = input_dim;
    for (i, &h) in lstm_units.iter().enumerate() {
        let last = i + 1 == lstm_units.len();
        lstm.push(
            LstmLayer::from_parts(
                d,
                h,
                !last,
                uniform(rng, 4 * h * d, 0.8),
                uniform(rng, 4 * h * h, 0.8),
                uniform(rng, 4 * h, 0.5),
            )
            .unwrap(),
        );
        d = h;
    }
    let dense = vec![
        DenseLayer::from_parts(d, hidden, Activation::Relu, uniform(rng, d * hidden, 0.8), uniform(rng, hidden, 0.5))
            .unwrap(),
        DenseLayer::from_parts(
            hidden,
            classes,
            Activation::Softmax,
            uniform(rng, hidden * classes, 0.8),
            uniform(rng, classes, 0.5),
        )
        .unwrap(),
    ];
    Network::from_layers(seq_len, lstm, dense).unwrap()
}

/// A small random instance: network, input window and target class.
pub struct Instance {
    pub net: Network<f64>,
    pub window: Vec<f64>,
    pub class: usize,
}

/// Instance sized for gradient checks: d ≤ 4, h ≤ 3, window ≤ 3 steps.
pub fn gradient_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq_len = rng.random_range(1..=3);
    let d = rng.random_range(1..=4);
    let layers = rng.random_range(1..=2);
    let units: Vec<usize> = (0..layers).map(|_| rng.random_range(1..=3)).collect();
    let classes = rng.random_range(2..=3);
    let net = random_net(&mut rng, seq_len, d, &units, 3, classes);
    let window = uniform(&mut rng, seq_len * d, 1.0);
    let class = rng.random_range(0..classes);
    Instance { net, window, class }
}

/// Instance sized for forward checks: d ≤ 8, h ≤ 4, window ≤ 10 steps.
pub fn forward_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq_len = rng.random_range(1..=10);
    let d = rng.random_range(1..=8);
    let layers = rng.random_range(1..=3);
    let units: Vec<usize> = (0..layers).map(|_| rng.random_range(1..=4)).collect();
    let classes = rng.random_range(2..=8);
    let net = random_net(&mut rng, seq_len, d, &units, 4, classes);
    let window = uniform(&mut rng, seq_len * d, 1.0);
    let class = rng.random_range(0..classes);
    Instance { net, window, class }
}

/// Largest relative error between library and finite-difference gradients.
pub fn max_gradient_error(inst: &Instance) -> f64 {
    let mut target = vec![0.0; inst.net.num_classes()];
    target[inst.class] = 1.0;
    let (_, _, grads) = inst.net.loss_and_gradients(&inst.window, &target).unwrap();
    let numeric = numeric_gradients(&inst.net, &inst.window, inst.class);
    grads
        .tensors()
        .iter()
        .zip(&numeric)
        .flat_map(|(a, n)| a.iter().zip(n).map(|(&a, &n)| rel_err(a, n)))
        .fold(0.0, f64::max)
}

/// Largest relative error between the library's f32 forward pass and the
/// reference evaluated on the same f32 weights.
pub fn max_forward_error(inst: &Instance) -> f64 {
    let net32: Network<f32> = inst.net.cast();
    let window32: Vec<f32> = inst.window.iter().map(|&v| v as f32).collect();
    let fast = net32.forward(&window32).unwrap();
    let window_back: Vec<f64> = window32.iter().map(|&v| v as f64).collect();
    let slow = reference_forward(&net32, &window_back);
    fast.iter().zip(&slow).map(|(&a, &b)| rel_err(a as f64, b)).fold(0.0, f64::max)
}
