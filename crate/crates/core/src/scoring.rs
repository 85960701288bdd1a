//! Entropies, certainty scores, and the Info-Gain objective. All in nats.

use serde::{Deserialize, Serialize};

use crate::denoiser::MarginalSet;
use crate::error::{Error, Result};
use crate::state::Action;

/// Probabilities below this contribute nothing to an entropy sum.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

pub const DEFAULT_KLASS_EPSILON: f64 = 5e-4;
pub const DEFAULT_PC_LAMBDA: f64 = 0.01;

/// `-sum p ln p` over a categorical distribution.
pub fn token_entropy(dist: &[f64]) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(p) = dist.iter().find(|p| p.is_nan() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "negative probability {p}"
        )));
    }
    Ok(entropy(dist))
}

pub(crate) fn entropy(dist: &[f64]) -> f64 {
    let h = -dist
        .iter()
        .filter(|&&p| p >= PROBABILITY_FLOOR)
        .map(|&p| p * p.ln())
        .sum::<f64>();
    h.max(0.0)
}

/// `KL(p || q)`. Infinite when `q` misses mass that `p` has.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a >= PROBABILITY_FLOOR)
        .map(|(&a, &b)| {
            if b < PROBABILITY_FLOOR {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum::<f64>()
        .max(0.0)
}

fn top_two(dist: &[f64]) -> (f64, f64) {
    let mut first = f64::NEG_INFINITY;
    let mut second = 0.0f64;
    for &p in dist {
        if p > first {
            second = first.max(0.0);
            first = p;
        } else if p > second {
            second = p;
        }
    }
    (first, second)
}

/// Per-position certainty used by greedy samplers. Higher is more certain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertaintyKind {
    /// Top-1 probability.
    Confidence,
    /// Negative token entropy.
    NegEntropy,
    /// Gap between the top two probabilities.
    Margin,
    /// Confidence plus one when the distribution moved less than
    /// `epsilon` in KL since the previous step.
    Klass {
        #[serde(default = "default_klass_epsilon")]
        epsilon: f64,
    },
    /// Calibration term times `exp(-lambda * position)`. The calibration
    /// defaults to confidence; see [`pc_certainty`] for a custom one.
    Pc {
        #[serde(default = "default_pc_lambda")]
        lambda: f64,
    },
}

fn default_klass_epsilon() -> f64 {
    DEFAULT_KLASS_EPSILON
}

fn default_pc_lambda() -> f64 {
    DEFAULT_PC_LAMBDA
}

impl CertaintyKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CertaintyKind::Klass { epsilon } if !(epsilon > 0.0) => Err(Error::InvalidConfig(
                format!("KLASS threshold {epsilon} must be > 0"),
            )),
            CertaintyKind::Pc { lambda } if !(lambda >= 0.0) => Err(Error::InvalidConfig(format!(
                "PC decay {lambda} must be >= 0"
            ))),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CertaintyKind::Confidence => "confidence",
            CertaintyKind::NegEntropy => "neg_entropy",
            CertaintyKind::Margin => "margin",
            CertaintyKind::Klass { .. } => "klass",
            CertaintyKind::Pc { .. } => "pc",
        }
    }
}

/// PC-Sampler score with a caller-supplied calibration term.
pub fn pc_certainty<F>(position: usize, dist: &[f64], lambda: f64, calibration: F) -> f64
where
    F: Fn(usize, &[f64]) -> f64,
{
    calibration(position, dist) * (-lambda * position as f64).exp()
}

/// Certainty of `position` under `kind`. `prev` holds the previous step's
/// marginals and only matters for KLASS.
pub fn certainty(
    kind: &CertaintyKind,
    position: usize,
    marginals: &MarginalSet,
    prev: Option<&MarginalSet>,
) -> Result<f64> {
    let dist = marginals.require(position)?;
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    let (top1, top2) = top_two(dist);
    Ok(match *kind {
        CertaintyKind::Confidence => top1,
        CertaintyKind::NegEntropy => -entropy(dist),
        CertaintyKind::Margin => top1 - top2,
        CertaintyKind::Klass { epsilon } => {
            let stable = prev
                .and_then(|m| m.get(position))
                .is_some_and(|old| kl_divergence(dist, old) < epsilon);
            if stable {
                top1 + 1.0
            } else {
                top1
            }
        }
        CertaintyKind::Pc { lambda } => pc_certainty(position, dist, lambda, |_, d| top_two(d).0),
    })
}

/// Mean token entropy over the entries; zero for an empty set.
pub fn state_uncertainty(marginals: &MarginalSet) -> f64 {
    if marginals.is_empty() {
        return 0.0;
    }
    marginals.iter().map(|(_, d)| entropy(d)).sum::<f64>() / marginals.len() as f64
}

/// Sum of token entropies at the action's positions.
pub fn immediate_cost(action: &Action, marginals: &MarginalSet) -> Result<f64> {
    action
        .positions()
        .map(|p| marginals.require(p).map(entropy))
        .sum()
}

/// Score of one action against the states before and after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepScore {
    pub immediate_cost: f64,
    pub state_uncertainty_before: f64,
    pub state_uncertainty_after: f64,
    pub info_gain: f64,
    /// `info_gain - immediate_cost`; higher is better.
    pub objective: f64,
}

impl StepScore {
    /// `immediate_cost + state_uncertainty_after`. Ranks candidates of one
    /// state in the reverse order of `objective`.
    pub fn lookahead_cost(&self) -> f64 {
        self.immediate_cost + self.state_uncertainty_after
    }
}

/// Info-Gain objective of `action`, given the marginals of the state it
/// applies to and of the state it produces.
pub fn info_gain_objective(
    before: &MarginalSet,
    after: &MarginalSet,
    action: &Action,
) -> Result<StepScore> {
    let immediate_cost = immediate_cost(action, before)?;
    let state_uncertainty_before = state_uncertainty(before);
    let state_uncertainty_after = state_uncertainty(after);
    let info_gain = state_uncertainty_before - state_uncertainty_after;
    Ok(StepScore {
        immediate_cost,
        state_uncertainty_before,
        state_uncertainty_after,
        info_gain,
        objective: info_gain - immediate_cost,
    })
}
