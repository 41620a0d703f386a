//! Sequence classification of Surya Namaskar poses from per-frame body
//! keypoints.
//!
//! The crate covers the whole pipeline: the keypoint frame layout and dataset
//! files ([`data`]), a stacked-LSTM network with exact backpropagation
//! ([`nn`]), Adam training ([`train`]), evaluation ([`metrics`]) and a
//! streaming inference engine with a small binary protocol ([`engine`]).

pub mod data;
pub mod engine;
mod error;
pub mod metrics;
pub mod nn;
pub mod train;

pub use data::{ClassLabel, KeypointFrame, LabeledDataset, Sequence, SequenceWindow, CLASS_NAMES, FRAME_DIM, NUM_CLASSES, WINDOW_LEN};
pub use engine::{Message, Prediction, Server, Session, SessionConfig};
pub use error::{Error, Result};
pub use metrics::{accuracy, confusion, ConfusionMatrix, PerClassStats};
pub use nn::{load_model, save_model, Architecture, Network};
pub use train::{train, TrainConfig};
