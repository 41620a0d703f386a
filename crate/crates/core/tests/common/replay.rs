//! The recorded streaming fixture and its replay through the server loop.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use surya_core::data::{class_template, gen_synthetic, read_recording, ClassLabel, Sequence, FRAME_DIM};
use surya_core::engine::{read_message, serve_connection, Message, SessionConfig, CANONICAL_CYCLE};
use surya_core::nn::{init_params, Network};
use surya_core::train::{train_network, TrainConfig};

pub const FIXTURE_FRAMES: usize = 120;
pub const FIXTURE_FPS: f32 = 30.0;

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cycle_120.snk")
}

pub fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cycle_120.golden")
}

/// One pass through the twelve-step cycle, ten noisy template frames per step.
pub fn build_fixture() -> Sequence {
    let mut rng = ChaCha8Rng::seed_from_u64(120);
    let noise = Normal::new(0.0f32, 0.02).unwrap();
    let mut values = Vec::with_capacity(FIXTURE_FRAMES * FRAME_DIM);
    for &class in CANONICAL_CYCLE.iter() {
        let template = class_template(ClassLabel::new(class).unwrap());
        values.extend(template.iter().map(|v| v + noise.sample(&mut rng)));
    }
    Sequence::new(FIXTURE_FRAMES, FRAME_DIM, values).unwrap()
}

pub fn load_fixture() -> Sequence {
    read_recording(fixture_path()).expect("replay fixture").sequence
}

/// Small deterministic model used for the replay.
pub fn replay_model() -> Network<f32> {
    let data = gen_synthetic(6, 0.05, 11).unwrap();
    let config = TrainConfig {
        epochs: 40,
        seed: 3,
        ..TrainConfig::default()
    };
    train_network(init_params(config.seed), &data, None, &config).unwrap().0
}

/// Feeds HELLO plus every fixture frame to the server loop; returns the raw
/// reply bytes.
pub fn replay_bytes(net: &Network<f32>, fixture: &Sequence) -> Vec<u8> {
    let mut input = Message::Hello { version: 1, dim: FRAME_DIM as u16 }.encode();
    for t in 0..fixture.steps() {
        let frame = Message::Frame {
            timestamp_ms: (t as f64 * 1000.0 / FIXTURE_FPS as f64).round() as u64,
            values: fixture.frame(t).to_vec(),
        };
        input.extend(frame.encode());
    }
    let mut out = Vec::new();
    serve_connection(input.as_slice(), &mut out, net, &SessionConfig::default()).unwrap();
    out
}

pub fn decode_all(mut bytes: &[u8]) -> Vec<Message> {
    let mut out = Vec::new();
    while let Some(m) = read_message(&mut bytes).unwrap() {
        out.push(m);
    }
    out
}

/// Platform-independent digest of a reply stream: one line per message with
/// classes, flags and cycle fields, but no probabilities.
pub fn digest(messages: &[Message]) -> String {
    let mut s = String::new();
    for m in messages {
        let line = match m {
            Message::HelloAck { classes } => format!("ack {}", classes.len()),
            Message::Prediction { timestamp_ms, class_index, stable, .. } => {
                format!("prediction {timestamp_ms} {class_index} {}", u8::from(*stable))
            }
            Message::Cycle { event, step_index, expected_class, observed_class } => {
                format!("cycle {} {step_index} {expected_class} {observed_class}", *event as u8)
            }
            other => format!("{other:?}"),
        };
        s.push_str(&line);
        s.push('\n');
    }
    s
}
