//! Plugging in a different model: a denoiser that ignores context and
//! returns fixed per-position distributions. Any sampler runs on it.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use infogain::{
    CertaintyKind, Denoiser, Evaluation, MarginalSet, Policy, Result, SamplerConfig, SeqState,
};

struct Independent {
    dists: Vec<Vec<f64>>,
    calls: AtomicU64,
}

impl Denoiser for Independent {
    fn length(&self) -> usize {
        self.dists.len()
    }

    fn vocab_size(&self) -> u32 {
        self.dists[0].len() as u32
    }

    fn evaluate(&self, state: &SeqState) -> Result<Evaluation> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let entries: BTreeMap<usize, Vec<f64>> = state
            .masked_positions()
            .into_iter()
            .map(|p| (p, self.dists[p].clone()))
            .collect();
        Ok(Evaluation {
            marginals: MarginalSet::new(entries)?,
            off_manifold: false,
        })
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

pub fn run() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let model = Independent {
        dists: vec![
            vec![0.9, 0.05, 0.05],
            vec![0.4, 0.3, 0.3],
            vec![0.6, 0.2, 0.2],
            vec![1.0 / 3.0; 3],
        ],
        calls: AtomicU64::new(0),
    };
    for cfg in [
        SamplerConfig::greedy(CertaintyKind::Margin),
        SamplerConfig::new(Policy::Lookum),
        SamplerConfig::new(Policy::InfoGain),
    ] {
        let before = model.calls();
        let r = infogain::run_trajectory(&cfg.with_seed(2), &model, model.length())?;
        let order: Vec<usize> = r.steps.iter().flat_map(|s| s.action.positions()).collect();
        println!(
            "{:<12} order {order:?}  H~ {:.4}  calls {}",
            r.config.label(),
            r.cumulative_entropy,
            model.calls() - before
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
