//! Semi-autoregressive decoding: only the lowest block that still holds a
//! mask is open, and Info-Gain scores successors over that block alone.

use infogain::denoiser::random_joint;
use infogain::{OracleDenoiser, Policy, RngHandle, SamplerConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let joint = random_joint(RngHandle::new(11, 0), 6, 3, 40)?;
    let denoiser = OracleDenoiser::exact(joint.clone());
    for block in [6, 3, 2] {
        let cfg = SamplerConfig::new(Policy::InfoGain)
            .with_block_size(block)
            .with_k(2)
            .with_seed(5);
        let record = infogain::run_trajectory(&cfg, &denoiser, joint.length())?;
        let order: Vec<Vec<usize>> = record
            .steps
            .iter()
            .map(|s| s.action.positions().collect())
            .collect();
        println!(
            "block {block}: order {order:?}  H~ {:.4}",
            record.cumulative_entropy
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
