//! A reasoning digit followed by a YES/NO verdict that must agree with it.
//!
//! With one position per step, greedy entropy answers before reasoning.
//! With two per step, both tokens are drawn from independent marginals.

use infogain::metrics::summarize;
use infogain::{tasks, CertaintyKind, OracleDenoiser, Policy, SamplerConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let task = tasks::reasoning_verdict_task(3)?;
    let denoiser = OracleDenoiser::exact(task.joint.clone());
    for k in [1, 2] {
        let samplers = [
            SamplerConfig::new(Policy::GreedyCertainty {
                certainty: CertaintyKind::NegEntropy,
            })
            .with_name("greedy_entropy")
            .with_temperatures(1.0, 0.0),
            SamplerConfig::new(Policy::InfoGain).with_temperatures(1.0, 0.1),
        ];
        for cfg in samplers {
            let cfg = cfg.with_k(k);
            let records = (0..200)
                .map(|s| {
                    infogain::run_trajectory(&cfg.clone().with_seed(s), &denoiser, task.length())
                })
                .collect::<Result<Vec<_>, _>>()?;
            let s = summarize(&records, &task);
            println!(
                "K={k} {:<16} H~ {:.4}  inconsistent {:.3}  verdict-first {:.3}",
                cfg.label(),
                s.mean_cumulative_entropy,
                1.0 - s.accuracy,
                s.path_frequencies["verdict"]
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
