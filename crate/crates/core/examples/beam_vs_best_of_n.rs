//! Three ways to spend eight candidate evaluations per step: one Info-Gain
//! trajectory with 8 candidates, a width-2 beam with 4 each, or eight
//! independent single-candidate trajectories keeping the best.

use infogain::metrics::summarize;
use infogain::{tasks, OracleDenoiser, Policy, SamplerConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let task = tasks::multiplication_task(2, 9, 7)?;
    let denoiser = OracleDenoiser::exact(task.joint.clone());
    let base = |p: Policy, n: usize| {
        SamplerConfig::new(p)
            .with_k(2)
            .with_temperatures(1.0, 0.1)
            .with_candidates(n)
    };
    for cfg in [
        base(Policy::InfoGainBeam { beam: 2 }, 4),
        base(Policy::InfoGain, 8),
        base(Policy::BestOfN { trajectories: 8 }, 1),
    ] {
        let records = (0..100)
            .map(|s| infogain::run_trajectory(&cfg.clone().with_seed(s), &denoiser, task.length()))
            .collect::<Result<Vec<_>, _>>()?;
        let s = summarize(&records, &task);
        println!(
            "{:<16} mean H~ {:.4} ± {:.4}  calls/step {:.2}",
            cfg.label(),
            s.mean_cumulative_entropy,
            s.std_cumulative_entropy,
            s.mean_calls_per_step
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
