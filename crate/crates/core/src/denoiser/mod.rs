//! Denoiser abstraction and the exact-enumeration oracle.
//!
//! A denoiser maps a partially masked state to one categorical
//! distribution per masked position. The oracle backends compute these by
//! conditioning a [`TabularJoint`] on the unmasked tokens.

mod joint;
mod oracle;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::SeqState;

pub use joint::{random_joint, TabularJoint};
pub use oracle::{OracleDenoiser, OracleKind};

/// Tolerance on the total mass of a categorical distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Per-position categorical distributions over tokens `1..=V`.
///
/// Entry `i` of a distribution is the probability of token `i + 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarginalSet {
    entries: BTreeMap<usize, Vec<f64>>,
}

pub(crate) fn check_distribution(dist: &[f64]) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("bad probability {p}")));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("mass {total} != 1")));
    }
    Ok(())
}

impl MarginalSet {
    pub fn new(entries: BTreeMap<usize, Vec<f64>>) -> Result<Self> {
        for dist in entries.values() {
            check_distribution(dist)?;
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_validated(entries: BTreeMap<usize, Vec<f64>>) -> Self {
        Self { entries }
    }

    pub fn get(&self, position: usize) -> Option<&[f64]> {
        self.entries.get(&position).map(Vec::as_slice)
    }

    pub fn require(&self, position: usize) -> Result<&[f64]> {
        self.get(position).ok_or(Error::MissingPosition(position))
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.entries.iter().map(|(&p, d)| (p, d.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose position lies in `range`.
    pub fn restrict(&self, range: &Range<usize>) -> MarginalSet {
        MarginalSet {
            entries: self
                .entries
                .range(range.clone())
                .map(|(&p, d)| (p, d.clone()))
                .collect(),
        }
    }
}

/// One denoiser output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub marginals: MarginalSet,
    /// No sequence of the data support agrees with the unmasked tokens.
    pub off_manifold: bool,
}

/// A model that predicts the masked tokens of a state.
///
/// Implementations must be callable from several threads at once and
/// count every single-state evaluation they perform.
pub trait Denoiser: Send + Sync {
    fn length(&self) -> usize;

    fn vocab_size(&self) -> u32;

    fn evaluate(&self, state: &SeqState) -> Result<Evaluation>;

    /// Evaluates each state; counts one call per state.
    fn batch_evaluate(&self, states: &[SeqState]) -> Result<Vec<Evaluation>> {
        if states.is_empty() {
            return Err(Error::ShapeMismatch("empty batch".into()));
        }
        states.iter().map(|s| self.evaluate(s)).collect()
    }

    /// Single-state evaluations performed so far.
    fn calls(&self) -> u64;

    /// Whether a fully decoded sequence is supported by the data
    /// distribution, if the backend can tell. Not counted as a call.
    fn on_manifold(&self, _state: &SeqState) -> Option<bool> {
        None
    }
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn length(&self) -> usize {
        (**self).length()
    }
    fn vocab_size(&self) -> u32 {
        (**self).vocab_size()
    }
    fn evaluate(&self, state: &SeqState) -> Result<Evaluation> {
        (**self).evaluate(state)
    }
    fn batch_evaluate(&self, states: &[SeqState]) -> Result<Vec<Evaluation>> {
        (**self).batch_evaluate(states)
    }
    fn calls(&self) -> u64 {
        (**self).calls()
    }
    fn on_manifold(&self, state: &SeqState) -> Option<bool> {
        (**self).on_manifold(state)
    }
}
