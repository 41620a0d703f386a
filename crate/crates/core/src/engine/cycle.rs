//! Position tracking through the 12-step sun salutation.

use std::fmt;

use crate::data::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};

use super::protocol::CycleCode;

/// Class indices of the twelve steps: the eight asanas forward, then four of
/// them again in reverse back to the starting pose.
pub const CANONICAL_CYCLE: [usize; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 3, 2, 1, 0];

/// The expected sequence of stable poses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleOrder(Vec<ClassLabel>);

impl Default for CycleOrder {
    fn default() -> Self {
        CycleOrder(
            CANONICAL_CYCLE
                .iter()
                .map(|&i| ClassLabel::new(i).expect("canonical index"))
                .collect(),
        )
    }
}

impl CycleOrder {
    /// A custom order, for variant sequences. At most 255 steps so the step
    /// index fits a CYCLE message.
    pub fn new(steps: Vec<ClassLabel>) -> Result<Self> {
        if steps.is_empty() || steps.len() > u8::MAX as usize {
            return Err(Error::Config(format!(
                "cycle must have 1..=255 steps, got {}",
                steps.len()
            )));
        }
        Ok(CycleOrder(steps))
    }

    /// Parses a JSON array of class names, e.g. `["Pranamasana", ...]`.
    pub fn from_json(json: &str) -> Result<Self> {
        let names: Vec<String> = serde_json::from_str(json)?;
        let steps = names
            .iter()
            .map(|n| ClassLabel::from_name(n))
            .collect::<Result<Vec<_>>>()?;
        CycleOrder::new(steps)
    }

    pub fn steps(&self) -> &[ClassLabel] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct classes visited.
    pub fn distinct(&self) -> usize {
        let mut seen = [false; NUM_CLASSES];
        for c in &self.0 {
            seen[c.index()] = true;
        }
        seen.iter().filter(|s| **s).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleEventKind {
    /// The expected pose was reached; the tracker moved one step on.
    Advance,
    /// The practitioner is still in the previous step's pose.
    Hold,
    /// A pose other than the expected (or previous) one.
    OutOfOrder,
    /// The last step was reached; the tracker wrapped to step 0.
    CycleComplete,
}

impl CycleEventKind {
    pub fn code(self) -> CycleCode {
        match self {
            CycleEventKind::Advance => CycleCode::Advance,
            CycleEventKind::Hold => CycleCode::Hold,
            CycleEventKind::OutOfOrder => CycleCode::OutOfOrder,
            CycleEventKind::CycleComplete => CycleCode::CycleComplete,
        }
    }
}

/// Outcome of feeding one stable pose to the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleEvent {
    pub kind: CycleEventKind,
    /// Tracker step after the event.
    pub step_index: usize,
    /// Pose the tracker expected when the event was evaluated.
    pub expected: ClassLabel,
    pub observed: ClassLabel,
}

impl fmt::Display for CycleEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CycleEventKind::Advance => write!(f, "{} done, step {}", self.observed, self.step_index),
            CycleEventKind::Hold => write!(f, "holding {}", self.observed),
            CycleEventKind::OutOfOrder => {
                write!(f, "expected {}, observed {}", self.expected, self.observed)
            }
            CycleEventKind::CycleComplete => write!(f, "cycle complete"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleTracker {
    order: CycleOrder,
    step_index: usize,
    completed_cycles: u64,
}

impl Default for CycleTracker {
    fn default() -> Self {
        CycleTracker::new(CycleOrder::default())
    }
}

impl CycleTracker {
    pub fn new(order: CycleOrder) -> Self {
        CycleTracker {
            order,
            step_index: 0,
            completed_cycles: 0,
        }
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn completed_cycles(&self) -> u64 {
        self.completed_cycles
    }

    pub fn order(&self) -> &CycleOrder {
        &self.order
    }

    pub fn expected(&self) -> ClassLabel {
        self.order.0[self.step_index]
    }

    fn previous_expected(&self) -> ClassLabel {
        let n = self.order.len();
        self.order.0[(self.step_index + n - 1) % n]
    }

    /// Feeds one stable pose. The step index moves by 0 or +1 per call.
    pub fn advance(&mut self, stable_class: ClassLabel) -> CycleEvent {
        let expected = self.expected();
        let kind = if stable_class == expected {
            self.step_index = (self.step_index + 1) % self.order.len();
            if self.step_index == 0 {
                self.completed_cycles += 1;
                CycleEventKind::CycleComplete
            } else {
                CycleEventKind::Advance
            }
        } else if stable_class == self.previous_expected() {
            CycleEventKind::Hold
        } else {
            CycleEventKind::OutOfOrder
        };
        CycleEvent {
            kind,
            step_index: self.step_index,
            expected,
            observed: stable_class,
        }
    }
}

/// Free-function form of [`CycleTracker::advance`].
pub fn advance_cycle(tracker: &mut CycleTracker, stable_class: ClassLabel) -> CycleEvent {
    tracker.advance(stable_class)
}
