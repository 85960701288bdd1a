//! Denoiser evaluations per step. Greedy samplers need one; Info-Gain
//! needs one plus a batch of N successors, unless the bypass commits the
//! whole budget.

use infogain::metrics::call_accounting;
use infogain::samplers::Bypass;
use infogain::{tasks, CertaintyKind, OracleDenoiser, Policy, SamplerConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let task = tasks::multiplication_task(2, 9, 7)?;
    let denoiser = OracleDenoiser::exact(task.joint.clone());
    let samplers = [
        SamplerConfig::greedy(CertaintyKind::Confidence),
        SamplerConfig::new(Policy::InfoGain)
            .with_k(2)
            .with_gamma(Bypass::OFF)
            .with_name("info_gain_no_bypass"),
        SamplerConfig::new(Policy::InfoGain)
            .with_k(2)
            .with_gamma(Bypass::threshold(0.8)),
        SamplerConfig::new(Policy::InfoGain)
            .with_k(2)
            .with_gamma(Bypass::threshold(0.0))
            .with_name("info_gain_always_bypass"),
    ];
    for cfg in samplers {
        let records = (0..50)
            .map(|s| infogain::run_trajectory(&cfg.clone().with_seed(s), &denoiser, task.length()))
            .collect::<Result<Vec<_>, _>>()?;
        let acc = call_accounting(&records);
        println!(
            "{:<24} N={} steps {:>4}  calls/step mean {:.3} min {} max {}",
            cfg.label(),
            cfg.candidates,
            acc.steps,
            acc.mean_per_step,
            acc.min_per_step,
            acc.max_per_step
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
