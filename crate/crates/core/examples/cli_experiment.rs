//! Driving the experiment harness from code: write a config, run
//! `compare`, then render the scatter plot from its summary.

use infogain::cli::{cmd_compare, cmd_plot, PlotKind, PlotOptions, RunOptions};

const CONFIG: &str = r#"
config_version = 1

[task]
kind = "coupled_pair"

[seeds]
count = 50

[[sampler]]
name = "greedy_entropy"
policy = "greedy_certainty"
certainty = { kind = "neg_entropy" }
tau_token = 0.0
tau_pos = 0.0

[[sampler]]
policy = "lookum"
tau_pos = 1.0

[[sampler]]
policy = "info_gain"
tau_pos = 1.0
"#;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("infogain-cli-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("experiment.toml");
    std::fs::write(&config, CONFIG)?;
    let out = dir.join("out");
    let report = cmd_compare(&RunOptions {
        config,
        out: Some(out.clone()),
        jobs: 2,
        ..Default::default()
    })?;
    println!("{} result rows", report.rows.len());
    let svg = cmd_plot(&PlotOptions {
        csv: out.join("summary.csv"),
        kind: PlotKind::Scatter,
        out: None,
        x: String::new(),
        y: String::new(),
    })?;
    println!("wrote {}", svg.display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
