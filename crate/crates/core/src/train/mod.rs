//! Loss, optimizer and the training loop.

mod adam;
mod curve;
mod loss;
mod trainer;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use curve::{format_sig6, EpochRecord, LearningCurve, CURVE_CSV_HEADER};
pub use loss::{cross_entropy, PROBABILITY_CLIP};
pub use trainer::{argmax, train, train_network, TrainConfig};
