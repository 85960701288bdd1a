//! A hand-written joint in the text format, exported with task metadata,
//! loaded back, and decoded.

use std::collections::BTreeMap;

use infogain::tasks::Predicate;
use infogain::{OracleDenoiser, Policy, SamplerConfig, TabularJoint, TaskSpec};

const JOINT: &str = "\
# length vocab
4 3
1 1 2 3 0.4
2 2 1 3 0.3
3 3 3 1 0.2
1 2 3 3 0.1
";

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let joint = TabularJoint::from_text(JOINT)?;
    println!("H(joint) = {:.4}", joint.entropy());
    for p in 0..joint.length() {
        println!("  marginal {p}: {:?}", joint.marginal(p));
    }
    let groups = BTreeMap::from([
        ("head".to_string(), vec![0, 1]),
        ("tail".to_string(), vec![2, 3]),
    ]);
    let task = TaskSpec::new("toy", joint, groups, Predicate::InSupport)?;

    let dir = std::env::temp_dir().join(format!("infogain-custom-joint-{}", std::process::id()));
    task.export(&dir, "toy")?;
    let loaded = TaskSpec::load(&dir.join("toy.joint"), Some(&dir.join("toy.task.json")))?;
    std::fs::remove_dir_all(&dir)?;
    assert_eq!(loaded.joint, task.joint);

    let denoiser = OracleDenoiser::exact(loaded.joint.clone());
    let cfg = SamplerConfig::new(Policy::InfoGain).with_seed(1);
    let record = infogain::run_trajectory(&cfg, &denoiser, loaded.length())?;
    for (i, s) in record.steps.iter().enumerate() {
        println!(
            "step {i}: {:?} cost {:.4}",
            s.action.pairs(),
            s.score.immediate_cost
        );
    }
    println!(
        "final {:?} in support: {}  H~ {:.4}",
        record.final_sequence,
        loaded.is_correct(&record.final_sequence),
        record.cumulative_entropy
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
