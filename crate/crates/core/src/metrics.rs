//! Trajectory records and aggregate statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::samplers::SamplerConfig;
use crate::scoring::StepScore;
use crate::state::Action;
use crate::tasks::TaskSpec;

/// One decoding step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub action: Action,
    pub score: StepScore,
    /// The high-confidence bypass decided the whole action.
    pub bypass: bool,
    /// The state this step started from was off the data manifold.
    pub off_manifold: bool,
    /// Distinct candidate actions considered.
    pub candidates: usize,
    /// Single-state denoiser evaluations spent on this step.
    pub denoiser_calls: u64,
}

/// A complete decoding run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub steps: Vec<StepRecord>,
    pub final_sequence: Vec<u32>,
    /// Whether the decoded sequence lies in the data support.
    pub final_on_manifold: bool,
    /// Sum of per-step immediate costs, in nats.
    pub cumulative_entropy: f64,
    pub config: SamplerConfig,
    pub seed: u64,
}

impl TrajectoryRecord {
    pub fn denoiser_calls(&self) -> u64 {
        self.steps.iter().map(|s| s.denoiser_calls).sum()
    }

    /// Any visited state, or the final sequence, left the data manifold.
    pub fn off_manifold(&self) -> bool {
        !self.final_on_manifold || self.steps.iter().any(|s| s.off_manifold)
    }

    /// Running cumulative entropy after each step.
    pub fn cumulative_curve(&self) -> Vec<f64> {
        self.steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.score.immediate_cost;
                Some(*acc)
            })
            .collect()
    }

    /// The record with the fields that only identify how it was produced
    /// (configuration snapshot and bypass flags) cleared. Two policies that
    /// decode identically have equal canonical forms.
    pub fn decoding_path(&self) -> TrajectoryRecord {
        let mut out = self.clone();
        out.config = SamplerConfig::new(crate::samplers::Policy::InfoGain);
        for s in &mut out.steps {
            s.bypass = false;
        }
        out
    }
}

/// Sum of immediate costs along the trajectory.
pub fn cumulative_entropy(traj: &TrajectoryRecord) -> f64 {
    traj.steps.iter().map(|s| s.score.immediate_cost).sum()
}

/// Denoiser evaluations per decoding step over a set of runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CallAccounting {
    pub steps: usize,
    pub calls: u64,
    pub mean_per_step: f64,
    pub max_per_step: u64,
    pub min_per_step: u64,
}

pub fn call_accounting(records: &[TrajectoryRecord]) -> CallAccounting {
    let per_step = records
        .iter()
        .flat_map(|r| r.steps.iter().map(|s| s.denoiser_calls));
    let (mut steps, mut calls, mut max, mut min) = (0usize, 0u64, 0u64, u64::MAX);
    for c in per_step {
        steps += 1;
        calls += c;
        max = max.max(c);
        min = min.min(c);
    }
    CallAccounting {
        steps,
        calls,
        mean_per_step: if steps == 0 {
            0.0
        } else {
            calls as f64 / steps as f64
        },
        max_per_step: max,
        min_per_step: if steps == 0 { 0 } else { min },
    }
}

/// Aggregates for one sampler configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub runs: usize,
    pub mean_cumulative_entropy: f64,
    /// Population standard deviation.
    pub std_cumulative_entropy: f64,
    pub accuracy: f64,
    /// Fraction of runs whose first decoded position falls in each group.
    pub path_frequencies: BTreeMap<String, f64>,
    pub mean_calls_per_step: f64,
    pub off_manifold_rate: f64,
    pub wall_ms: f64,
}

/// Mean and population standard deviation. Values are summed in sorted
/// order so the result does not depend on input order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean).powi(2)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / n).sqrt())
}

pub fn summarize(records: &[TrajectoryRecord], spec: &TaskSpec) -> RunSummary {
    let n = records.len().max(1) as f64;
    let costs: Vec<f64> = records.iter().map(|r| r.cumulative_entropy).collect();
    let (mean, std) = mean_std(&costs);
    let correct = records
        .iter()
        .filter(|r| spec.is_correct(&r.final_sequence))
        .count();
    let mut path_frequencies: BTreeMap<String, f64> =
        spec.groups.keys().map(|g| (g.clone(), 0.0)).collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in records {
        if let Some(group) = spec.classify_path(r) {
            *counts.entry(group.to_string()).or_default() += 1;
        }
    }
    for (g, c) in counts {
        path_frequencies.insert(g, c as f64 / n);
    }
    let off = records.iter().filter(|r| r.off_manifold()).count();
    RunSummary {
        label: records
            .first()
            .map(|r| r.config.label())
            .unwrap_or_default(),
        runs: records.len(),
        mean_cumulative_entropy: mean,
        std_cumulative_entropy: std,
        accuracy: correct as f64 / n,
        path_frequencies,
        mean_calls_per_step: call_accounting(records).mean_per_step,
        off_manifold_rate: off as f64 / n,
        wall_ms: 0.0,
    }
}

/// Pearson correlation. `None` with fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (mx, _) = mean_std(xs);
    let (my, _) = mean_std(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Correlation between mean cumulative entropy and accuracy across
/// configurations. Reported only for three or more configurations.
pub fn entropy_accuracy_correlation(summaries: &[RunSummary]) -> Option<f64> {
    if summaries.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = summaries
        .iter()
        .map(|s| s.mean_cumulative_entropy)
        .collect();
    let ys: Vec<f64> = summaries.iter().map(|s| s.accuracy).collect();
    pearson(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::Policy;
    use crate::tasks;

    fn step(cost: f64, calls: u64) -> StepRecord {
        StepRecord {
            action: Action::new(vec![(0, 1)]).unwrap(),
            score: StepScore {
                immediate_cost: cost,
                state_uncertainty_before: 0.0,
                state_uncertainty_after: 0.0,
                info_gain: 0.0,
                objective: -cost,
            },
            bypass: false,
            off_manifold: false,
            candidates: 1,
            denoiser_calls: calls,
        }
    }

    fn record(final_sequence: Vec<u32>, costs: &[f64]) -> TrajectoryRecord {
        let steps: Vec<StepRecord> = costs.iter().map(|&c| step(c, 1)).collect();
        let mut r = TrajectoryRecord {
            steps,
            final_sequence,
            final_on_manifold: true,
            cumulative_entropy: 0.0,
            config: SamplerConfig::new(Policy::InfoGain),
            seed: 0,
        };
        r.cumulative_entropy = cumulative_entropy(&r);
        r
    }

    #[test]
    fn cumulative_sums_costs() {
        assert!((cumulative_entropy(&record(vec![1], &[0.3, 0.5])) - 0.8).abs() < 1e-12);
        assert_eq!(cumulative_entropy(&record(vec![1], &[0.0, 0.0])), 0.0);
    }

    #[test]
    fn accuracy_and_spread() {
        let spec = tasks::coupled_pair_task();
        let good = record(vec![1, 1, 1], &[0.5]);
        let bad = record(vec![1, 2, 1], &[0.5]);
        let s = summarize(&[good.clone(), bad], &spec);
        assert_eq!(s.accuracy, 0.5);
        assert_eq!(s.std_cumulative_entropy, 0.0);
        let total: f64 = s.path_frequencies.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(summarize(&[good.clone(), good], &spec).accuracy, 1.0);
    }

    #[test]
    fn two_point_correlation() {
        assert!((pearson(&[1.0, 2.0], &[1.0, 0.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 0.0]), None);
    }

    #[test]
    fn call_counts() {
        let mut r = record(vec![1], &[0.1, 0.2]);
        r.steps[0].denoiser_calls = 9;
        let acc = call_accounting(&[r]);
        assert_eq!(acc.calls, 10);
        assert_eq!(acc.mean_per_step, 5.0);
        assert_eq!(acc.max_per_step, 9);
        assert_eq!(acc.min_per_step, 1);
    }
}
