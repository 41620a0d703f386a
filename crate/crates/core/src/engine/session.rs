use std::collections::VecDeque;

use crate::data::{ClassLabel, KeypointFrame, SequenceWindow, FRAME_DIM, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::train::argmax;

use super::cycle::{CycleEvent, CycleOrder, CycleTracker};

/// Smoothing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    /// Minimum top-class probability for a window to count towards stability.
    pub tau: f32,
    /// Number of consecutive agreeing windows required.
    pub stability_n: usize,
    pub cycle: CycleOrder,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            tau: 0.7,
            stability_n: 5,
            cycle: CycleOrder::default(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau {} outside [0, 1]", self.tau)));
        }
        if self.stability_n == 0 {
            return Err(Error::Config("stability window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub timestamp_ms: u64,
    pub probabilities: Vec<f32>,
    pub top_class: ClassLabel,
    pub stable: bool,
}

/// Tracks the last `n` top classes and their probabilities.
///
/// A prediction is stable when the last `n` predictions share their top
/// class and each puts at least `tau` on it.
#[derive(Debug, Clone)]
pub struct StabilityFilter {
    votes: VecDeque<(ClassLabel, f32)>,
    tau: f32,
    n: usize,
}

impl StabilityFilter {
    pub fn new(tau: f32, n: usize) -> Self {
        StabilityFilter {
            votes: VecDeque::with_capacity(n + 1),
            tau,
            n,
        }
    }

    /// Records one prediction and reports whether it is stable.
    pub fn push(&mut self, top_class: ClassLabel, probability: f32) -> bool {
        self.votes.push_back((top_class, probability));
        if self.votes.len() > self.n {
            self.votes.pop_front();
        }
        self.votes.len() == self.n && self.votes.iter().all(|&(c, p)| c == top_class && p >= self.tau)
    }
}

/// Streaming state for one practitioner.
#[derive(Debug, Clone)]
pub struct Session {
    window: SequenceWindow,
    votes: StabilityFilter,
    tracker: CycleTracker,
    last_timestamp: Option<u64>,
    stable_class: Option<ClassLabel>,
}

/// Checks that a model can be served: frame-sized input, one output per class.
pub fn check_servable(net: &Network<f32>) -> Result<()> {
    if net.input_dim() != FRAME_DIM || net.num_classes() != NUM_CLASSES {
        return Err(Error::Architecture(format!(
            "model takes {} inputs and predicts {} classes; serving needs {FRAME_DIM} and {NUM_CLASSES}",
            net.input_dim(),
            net.num_classes()
        )));
    }
    Ok(())
}

impl Session {
    pub fn new(net: &Network<f32>, config: SessionConfig) -> Result<Self> {
        check_servable(net)?;
        config.validate()?;
        Ok(Session {
            window: SequenceWindow::with_capacity(net.seq_len()),
            votes: StabilityFilter::new(config.tau, config.stability_n),
            tracker: CycleTracker::new(config.cycle.clone()),
            last_timestamp: None,
            stable_class: None,
        })
    }

    pub fn tracker(&self) -> &CycleTracker {
        &self.tracker
    }

    pub fn window(&self) -> &SequenceWindow {
        &self.window
    }

    /// Pushes a frame and, once the window is full, classifies it. See
    /// [`StabilityFilter`] for the meaning of `stable`.
    pub fn ingest_frame(&mut self, net: &Network<f32>, frame: KeypointFrame) -> Result<Option<Prediction>> {
        if let Some(previous) = self.last_timestamp {
            if frame.timestamp_ms() < previous {
                return Err(Error::Ordering {
                    previous,
                    got: frame.timestamp_ms(),
                });
            }
        }
        let timestamp_ms = frame.timestamp_ms();
        self.last_timestamp = Some(timestamp_ms);
        self.window.push(frame);
        if !self.window.is_ready() {
            return Ok(None);
        }
        let probabilities = net.forward(&self.window.to_tensor())?;
        let top = argmax(&probabilities);
        let top_class = ClassLabel::new(top)?;
        let stable = self.votes.push(top_class, probabilities[top]);
        Ok(Some(Prediction {
            timestamp_ms,
            probabilities,
            top_class,
            stable,
        }))
    }

    /// [`Session::ingest_frame`] plus cycle tracking. The tracker is fed once
    /// per stable run: when a prediction becomes stable, or stays stable but
    /// switches class.
    pub fn process_frame(
        &mut self,
        net: &Network<f32>,
        frame: KeypointFrame,
    ) -> Result<Option<(Prediction, Option<CycleEvent>)>> {
        let Some(prediction) = self.ingest_frame(net, frame)? else {
            return Ok(None);
        };
        let event = if prediction.stable {
            let onset = self.stable_class != Some(prediction.top_class);
            self.stable_class = Some(prediction.top_class);
            onset.then(|| self.tracker.advance(prediction.top_class))
        } else {
            self.stable_class = None;
            None
        };
        Ok(Some((prediction, event)))
    }
}
