//! Per-frame holistic landmark vectors and the sliding window of recent frames.
//!
//! A frame is the concatenation of four detection blocks in a fixed order:
//!
//! | block      | landmarks | values per landmark | offset | length |
//! |------------|-----------|---------------------|--------|--------|
//! | pose       | 33        | x, y, z, visibility | 0      | 132    |
//! | face       | 468       | x, y, z             | 132    | 1404   |
//! | left hand  | 21        | x, y, z             | 1536   | 63     |
//! | right hand | 21        | x, y, z             | 1599   | 63     |
//!
//! A block whose detection is missing is written as zeros.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub const POSE_LANDMARKS: usize = 33;
pub const FACE_LANDMARKS: usize = 468;
pub const HAND_LANDMARKS: usize = 21;

pub const POSE_OFFSET: usize = 0;
pub const FACE_OFFSET: usize = POSE_OFFSET + POSE_LANDMARKS * 4;
pub const LEFT_HAND_OFFSET: usize = FACE_OFFSET + FACE_LANDMARKS * 3;
pub const RIGHT_HAND_OFFSET: usize = LEFT_HAND_OFFSET + HAND_LANDMARKS * 3;

/// Length of one frame vector.
pub const FRAME_DIM: usize = RIGHT_HAND_OFFSET + HAND_LANDMARKS * 3;

/// Frames per classifier window.
pub const WINDOW_LEN: usize = 10;

/// Pose landmark: x, y, z, visibility.
pub type PoseLandmark = [f32; 4];
/// Face or hand landmark: x, y, z.
pub type Point3 = [f32; 3];

/// Output of a holistic landmark detector for one video frame. `None` marks a
/// block that was not detected.
#[derive(Debug, Clone, Default)]
pub struct HolisticDetection {
    pub pose: Option<Vec<PoseLandmark>>,
    pub face: Option<Vec<Point3>>,
    pub left_hand: Option<Vec<Point3>>,
    pub right_hand: Option<Vec<Point3>>,
}

/// One holistic landmark snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFrame {
    timestamp_ms: u64,
    values: Vec<f32>,
}

impl KeypointFrame {
    /// Wraps an already flattened vector.
    pub fn new(timestamp_ms: u64, values: Vec<f32>) -> Result<Self> {
        if values.len() != FRAME_DIM {
            return Err(Error::Shape(format!(
                "frame has {} values, expected {FRAME_DIM}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "frame value {i} is {}",
                values[i]
            )));
        }
        Ok(KeypointFrame {
            timestamp_ms,
            values,
        })
    }

    pub fn zeros(timestamp_ms: u64) -> Self {
        KeypointFrame {
            timestamp_ms,
            values: vec![0.0; FRAME_DIM],
        }
    }

    pub fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }
}

fn copy_block<const N: usize>(
    out: &mut [f32],
    block: &'static str,
    expected: usize,
    landmarks: Option<&[[f32; N]]>,
) -> Result<()> {
    let Some(landmarks) = landmarks else {
        return Ok(());
    };
    if landmarks.len() != expected {
        return Err(Error::BlockShape {
            block,
            expected,
            actual: landmarks.len(),
        });
    }
    for (dst, src) in out.chunks_exact_mut(N).zip(landmarks) {
        if src.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "non-finite coordinate in {block} block"
            )));
        }
        dst.copy_from_slice(src);
    }
    Ok(())
}

/// Flattens a detection into a frame vector, zero-filling absent blocks.
pub fn assemble_frame(detection: &HolisticDetection, timestamp_ms: u64) -> Result<KeypointFrame> {
    let mut values = vec![0.0f32; FRAME_DIM];
    copy_block(
        &mut values[POSE_OFFSET..FACE_OFFSET],
        "pose",
        POSE_LANDMARKS,
        detection.pose.as_deref(),
    )?;
    copy_block(
        &mut values[FACE_OFFSET..LEFT_HAND_OFFSET],
        "face",
        FACE_LANDMARKS,
        detection.face.as_deref(),
    )?;
    copy_block(
        &mut values[LEFT_HAND_OFFSET..RIGHT_HAND_OFFSET],
        "left hand",
        HAND_LANDMARKS,
        detection.left_hand.as_deref(),
    )?;
    copy_block(
        &mut values[RIGHT_HAND_OFFSET..],
        "right hand",
        HAND_LANDMARKS,
        detection.right_hand.as_deref(),
    )?;
    Ok(KeypointFrame {
        timestamp_ms,
        values,
    })
}

/// FIFO of the most recent frames, oldest first.
#[derive(Debug, Clone)]
pub struct SequenceWindow {
    frames: VecDeque<KeypointFrame>,
    capacity: usize,
}

impl Default for SequenceWindow {
    fn default() -> Self {
        SequenceWindow::with_capacity(WINDOW_LEN)
    }
}

impl SequenceWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        SequenceWindow {
            frames: VecDeque::with_capacity(capacity + 1),
            capacity,
        }
    }

    /// Appends a frame, evicting the oldest one when over capacity.
    pub fn push(&mut self, frame: KeypointFrame) {
        self.frames.push_back(frame);
        if self.frames.len() > self.capacity {
            self.frames.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_ready(&self) -> bool {
        self.frames.len() == self.capacity
    }

    pub fn frames(&self) -> impl Iterator<Item = &KeypointFrame> {
        self.frames.iter()
    }

    /// Row-major `len × FRAME_DIM` copy of the window contents.
    pub fn to_tensor(&self) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.frames.len() * FRAME_DIM);
        for frame in &self.frames {
            out.extend_from_slice(&frame.values);
        }
        out
    }
}
