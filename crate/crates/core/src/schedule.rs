//! Per-step unmasking budgets and block restriction.

use std::f64::consts::FRAC_PI_2;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::SeqState;

/// How many positions are committed at each decoding step.
///
/// Linear and cosine schedules follow a cumulative unmasked-fraction curve
/// over `steps` steps: `s/S` for linear, `1 - cos(pi s / 2S)` for cosine.
/// Budgets are taken as differences of `round(L * fraction(s))`, so the
/// total is exactly `L`. A step whose rounded target does not advance is
/// bumped to commit one position, and trailing steps past `L` are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant { k: usize },
    Linear { steps: usize },
    Cosine { steps: usize },
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Constant { k: 1 }
    }
}

impl StepSchedule {
    pub fn constant(k: usize) -> Self {
        StepSchedule::Constant { k }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Constant { k: 0 } => Err(Error::InvalidSchedule(
                "constant budget must be >= 1".into(),
            )),
            StepSchedule::Linear { steps: 0 } | StepSchedule::Cosine { steps: 0 } => {
                Err(Error::InvalidSchedule("total steps must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Unmasked fraction after `step` of `total` steps.
    fn fraction(&self, step: usize, total: usize) -> f64 {
        let x = step as f64 / total as f64;
        match self {
            StepSchedule::Cosine { .. } => 1.0 - (FRAC_PI_2 * x).cos(),
            _ => x,
        }
    }

    /// Budgets for a sequence of `length` positions. Sums to `length`.
    pub fn budgets(&self, length: usize) -> Result<Vec<usize>> {
        self.validate()?;
        if length == 0 {
            return Err(Error::InvalidSchedule("zero-length budget list".into()));
        }
        let budgets = match *self {
            StepSchedule::Constant { k } => {
                let mut out = vec![k; length / k];
                if !length.is_multiple_of(k) {
                    out.push(length % k);
                }
                out
            }
            StepSchedule::Linear { steps } | StepSchedule::Cosine { steps } => {
                let mut out = Vec::with_capacity(steps);
                let mut done = 0usize;
                for s in 1..=steps {
                    if done == length {
                        break;
                    }
                    let target = if s == steps {
                        length
                    } else {
                        (length as f64 * self.fraction(s, steps)).round() as usize
                    };
                    let target = target.clamp(done + 1, length);
                    out.push(target - done);
                    done = target;
                }
                out
            }
        };
        debug_assert_eq!(budgets.iter().sum::<usize>(), length);
        Ok(budgets)
    }
}

/// Left-to-right contiguous blocks of a fixed size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub block_size: usize,
}

impl BlockSchedule {
    pub fn new(block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidSchedule("block size must be >= 1".into()));
        }
        Ok(Self { block_size })
    }

    /// One block spanning the whole sequence.
    pub fn global(length: usize) -> Self {
        Self {
            block_size: length.max(1),
        }
    }

    /// The lowest-indexed block that still contains a mask.
    pub fn active_block(&self, state: &SeqState) -> Result<Range<usize>> {
        let first = state
            .tokens()
            .iter()
            .position(|&t| t == crate::state::MASK)
            .ok_or(Error::NoMasksRemaining)?;
        let start = first / self.block_size * self.block_size;
        Ok(start..(start + self.block_size).min(state.len()))
    }
}
