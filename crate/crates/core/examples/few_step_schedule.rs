//! Step schedules: a fixed budget per step, or a linear or cosine curve
//! over a fixed number of steps.

use infogain::{tasks, OracleDenoiser, Policy, SamplerConfig, StepSchedule};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let task = tasks::multiplication_task(2, 9, 7)?;
    let denoiser = OracleDenoiser::exact(task.joint.clone());
    for schedule in [
        StepSchedule::Constant { k: 3 },
        StepSchedule::Linear { steps: 4 },
        StepSchedule::Cosine { steps: 4 },
    ] {
        let budgets = schedule.budgets(task.length())?;
        let cfg = SamplerConfig::new(Policy::InfoGain).with_schedule(schedule);
        let mut total = 0.0;
        let mut correct = 0;
        for seed in 0..50 {
            let r =
                infogain::run_trajectory(&cfg.clone().with_seed(seed), &denoiser, task.length())?;
            total += r.cumulative_entropy;
            correct += task.is_correct(&r.final_sequence) as usize;
        }
        println!(
            "{schedule:?}: budgets {budgets:?}  mean H~ {:.4}  acc {:.2}",
            total / 50.0,
            correct as f64 / 50.0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
