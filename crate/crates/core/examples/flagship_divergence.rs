//! Greedy entropy vs Info-Gain on the three-position coupled joint.
//!
//! `x0` is a fair coin, `x1 = x0`, and `x2` is an independent 0.7/0.3 coin.
//! Greedy entropy commits `x2` first because its marginal is sharpest.
//! Info-Gain sees that committing `x0` also resolves `x1`.
//!
//! ```text
//! cargo run --example flagship_divergence
//! ```

use std::collections::BTreeMap;

use infogain::metrics::summarize;
use infogain::{tasks, CertaintyKind, OracleDenoiser, Policy, SamplerConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let task = tasks::coupled_pair_task();
    let denoiser = OracleDenoiser::exact(task.joint.clone());
    println!("H(joint) = {:.6} nats", task.joint.entropy());

    let samplers = [
        SamplerConfig::greedy(CertaintyKind::NegEntropy).with_name("greedy_entropy"),
        SamplerConfig::new(Policy::InfoGain)
            .with_temperatures(1.0, 1.0)
            .with_candidates(4),
    ];
    for cfg in &samplers {
        let records = (0..200)
            .map(|seed| {
                infogain::run_trajectory(&cfg.clone().with_seed(seed), &denoiser, task.length())
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        for r in &records {
            *first.entry(r.steps[0].action.pairs()[0].0).or_default() += 1;
        }
        let s = summarize(&records, &task);
        println!(
            "{:<16} mean H~ {:.4}  first position {:?}  path {:?}",
            cfg.label(),
            s.mean_cumulative_entropy,
            first,
            s.path_frequencies
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
