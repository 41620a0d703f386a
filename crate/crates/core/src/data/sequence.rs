use crate::error::{Error, Result};

use super::frame::{FRAME_DIM, WINDOW_LEN};

/// A row-major `steps × dim` block of frame values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    steps: usize,
    dim: usize,
    values: Vec<f32>,
}

impl Sequence {
    pub fn new(steps: usize, dim: usize, values: Vec<f32>) -> Result<Self> {
        if steps == 0 || dim == 0 {
            return Err(Error::Shape(format!("empty sequence shape {steps}x{dim}")));
        }
        if values.len() != steps * dim {
            return Err(Error::Shape(format!(
                "{} values do not fill a {steps}x{dim} sequence",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "sequence value {i} is {}",
                values[i]
            )));
        }
        Ok(Sequence { steps, dim, values })
    }

    /// A `10 × 1662` window.
    pub fn window(values: Vec<f32>) -> Result<Self> {
        Sequence::new(WINDOW_LEN, FRAME_DIM, values)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.steps, self.dim)
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn frame(&self, step: usize) -> &[f32] {
        &self.values[step * self.dim..(step + 1) * self.dim]
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn is_window(&self) -> bool {
        self.shape() == (WINDOW_LEN, FRAME_DIM)
    }

    /// Cuts a long recording into consecutive non-overlapping pieces of
    /// `steps` frames. A trailing remainder shorter than `steps` is dropped.
    pub fn chunks(&self, steps: usize) -> impl Iterator<Item = Sequence> + '_ {
        assert!(steps > 0);
        self.values
            .chunks_exact(steps * self.dim)
            .map(move |c| Sequence {
                steps,
                dim: self.dim,
                values: c.to_vec(),
            })
    }
}
