use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Denoiser, Evaluation, MarginalSet, TabularJoint};
use crate::error::{Error, Result};
use crate::state::{SeqState, MASK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleKind {
    /// True conditionals of the joint.
    Exact,
    /// `(1 - eta) * exact + eta * uniform` at every position.
    Smoothed { eta: f64 },
}

/// Conditions a [`TabularJoint`] by enumerating its support.
///
/// States that no support sequence agrees with get the uniform
/// distribution at every masked position and are flagged off-manifold.
#[derive(Debug)]
pub struct OracleDenoiser {
    joint: Arc<TabularJoint>,
    kind: OracleKind,
    calls: AtomicU64,
}

impl OracleDenoiser {
    pub fn exact(joint: impl Into<Arc<TabularJoint>>) -> Self {
        Self {
            joint: joint.into(),
            kind: OracleKind::Exact,
            calls: AtomicU64::new(0),
        }
    }

    pub fn smoothed(joint: impl Into<Arc<TabularJoint>>, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidConfig(format!(
                "smoothing {eta} outside [0, 1]"
            )));
        }
        Ok(Self {
            joint: joint.into(),
            kind: OracleKind::Smoothed { eta },
            calls: AtomicU64::new(0),
        })
    }

    pub fn with_kind(joint: impl Into<Arc<TabularJoint>>, kind: OracleKind) -> Result<Self> {
        match kind {
            OracleKind::Exact => Ok(Self::exact(joint)),
            OracleKind::Smoothed { eta } => Self::smoothed(joint, eta),
        }
    }

    /// A handle on the same joint with its own zeroed call counter.
    pub fn fork(&self) -> Self {
        Self {
            joint: Arc::clone(&self.joint),
            kind: self.kind,
            calls: AtomicU64::new(0),
        }
    }

    pub fn joint(&self) -> &TabularJoint {
        &self.joint
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    fn check_shape(&self, state: &SeqState) -> Result<()> {
        if state.len() != self.joint.length() || state.vocab_size() != self.joint.vocab_size() {
            return Err(Error::ShapeMismatch(format!(
                "state (L={}, V={}) vs joint (L={}, V={})",
                state.len(),
                state.vocab_size(),
                self.joint.length(),
                self.joint.vocab_size()
            )));
        }
        Ok(())
    }

    fn consistent(seq: &[u32], state: &SeqState) -> bool {
        seq.iter()
            .zip(state.tokens())
            .all(|(&s, &t)| t == MASK || s == t)
    }
}

impl Denoiser for OracleDenoiser {
    fn length(&self) -> usize {
        self.joint.length()
    }

    fn vocab_size(&self) -> u32 {
        self.joint.vocab_size()
    }

    fn evaluate(&self, state: &SeqState) -> Result<Evaluation> {
        self.check_shape(state)?;
        self.calls.fetch_add(1, Ordering::Relaxed);

        let vocab = self.joint.vocab_size() as usize;
        let masked = state.masked_positions();
        let mut weights = vec![vec![0.0; vocab]; masked.len()];
        let mut total = 0.0;
        for (seq, p) in self.joint.support() {
            if *p == 0.0 || !Self::consistent(seq, state) {
                continue;
            }
            total += p;
            for (slot, &pos) in masked.iter().enumerate() {
                weights[slot][seq[pos] as usize - 1] += p;
            }
        }

        let off_manifold = total <= 0.0;
        let uniform = 1.0 / vocab as f64;
        let mut entries = BTreeMap::new();
        for (slot, &pos) in masked.iter().enumerate() {
            let mut dist = if off_manifold {
                vec![uniform; vocab]
            } else {
                weights[slot].iter().map(|w| w / total).collect()
            };
            if let OracleKind::Smoothed { eta } = self.kind {
                for p in dist.iter_mut() {
                    *p = (1.0 - eta) * *p + eta * uniform;
                }
            }
            entries.insert(pos, dist);
        }
        Ok(Evaluation {
            marginals: MarginalSet::from_validated(entries),
            off_manifold,
        })
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn on_manifold(&self, state: &SeqState) -> Option<bool> {
        Some(
            self.joint
                .support()
                .iter()
                .any(|(seq, p)| *p > 0.0 && Self::consistent(seq, state)),
        )
    }
}
