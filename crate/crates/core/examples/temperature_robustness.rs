//! Mean cumulative entropy as the position temperature grows, on a
//! smoothed oracle (`(1 - eta) p + eta / V`).

use infogain::metrics::{mean_std, summarize};
use infogain::{tasks, CertaintyKind, OracleDenoiser, Policy, SamplerConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let task = tasks::multiplication_task(2, 9, 7)?;
    let denoiser = OracleDenoiser::smoothed(task.joint.clone(), 0.1)?;
    let temps = [0.1, 0.5, 1.0, 1.5];
    for (name, policy) in [
        (
            "greedy_entropy",
            Policy::GreedyCertainty {
                certainty: CertaintyKind::NegEntropy,
            },
        ),
        ("info_gain", Policy::InfoGain),
    ] {
        let mut means = vec![];
        for &tau_pos in &temps {
            let cfg = SamplerConfig::new(policy)
                .with_k(2)
                .with_temperatures(0.7, tau_pos);
            let records = (0..50)
                .map(|s| {
                    infogain::run_trajectory(&cfg.clone().with_seed(s), &denoiser, task.length())
                })
                .collect::<Result<Vec<_>, _>>()?;
            means.push(summarize(&records, &task).mean_cumulative_entropy);
        }
        let (_, spread) = mean_std(&means);
        let cells: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
        println!(
            "{name:<16} tau_pos {temps:?} -> H~ [{}]  std {spread:.4}",
            cells.join(", ")
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
