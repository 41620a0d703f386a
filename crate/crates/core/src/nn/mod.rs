//! The stacked-LSTM classifier: layers, forward pass, backpropagation,
//! initialization and model files.

mod dense;
mod lstm;
mod model_file;
mod network;
mod scalar;

pub use dense::{softmax, Activation, DenseLayer};
pub use lstm::LstmLayer;
pub use model_file::{decode_model, encode_model, load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use network::{
    init_params, Architecture, ForwardTrace, Gradients, LayerSummary, Network, ParamCount,
};
pub use scalar::Scalar;

/// One LSTM cell update; see [`LstmLayer::step`].
pub fn lstm_cell_step<T: Scalar>(
    layer: &LstmLayer<T>,
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
) -> crate::Result<(Vec<T>, Vec<T>)> {
    layer.step(x, h_prev, c_prev)
}
