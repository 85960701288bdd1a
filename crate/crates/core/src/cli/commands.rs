//! `run`, `compare`, `sweep` and `trace`.
//!
//! Files written under the output directory:
//!
//! - `results.csv`: one row per (sampler, seed) cell, columns [`RESULT_COLUMNS`].
//!   `policy` holds the sampler label, `K` the schedule (`2`, `linear/4`,
//!   `cosine/4`), `beam` the beam width (1 for other policies).
//! - `trajectories.csv`: `policy, seed, step, cumulative_entropy_nats`, with
//!   a step-0 row per run.
//! - `summary.csv` (`compare`, `sweep`): one row per sampler or grid cell.
//! - `traces/<policy>_seed<seed>.json` when `emit.json_traces` is set.
//! - `trajectory.svg`, `scatter.svg`, `sweep.svg` when `emit.svg` is set.
//!
//! Cells run on a rayon pool of `--jobs` threads, each with its own forked
//! oracle; rows are written in config order regardless.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::denoiser::OracleDenoiser;
use crate::metrics::{cumulative_entropy, summarize, RunSummary, TrajectoryRecord};
use crate::samplers::{run_trajectory, Policy, SamplerConfig};
use crate::schedule::StepSchedule;
use crate::state::MASK;
use crate::tasks::TaskSpec;

use super::config::ExperimentConfig;
use super::plot;
use super::CliError;

pub const RESULT_COLUMNS: [&str; 18] = [
    "run_id",
    "task",
    "policy",
    "seed",
    "K",
    "tau_token",
    "tau_pos",
    "N",
    "gamma",
    "beam",
    "steps",
    "cumulative_entropy_nats",
    "final_state_uncertainty_nats",
    "correct",
    "first_group",
    "off_manifold",
    "denoiser_calls",
    "wall_ms",
];

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    /// 0 uses every core.
    pub jobs: usize,
    pub bits: bool,
    pub seed_override: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub run_id: usize,
    pub task: String,
    pub policy: String,
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: String,
    pub tau_token: f64,
    pub tau_pos: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub gamma: String,
    pub beam: usize,
    pub steps: usize,
    pub cumulative_entropy_nats: f64,
    pub final_state_uncertainty_nats: f64,
    pub correct: bool,
    pub first_group: String,
    pub off_manifold: bool,
    pub denoiser_calls: u64,
    pub wall_ms: f64,
}

/// Completed runs of one sampler.
#[derive(Debug, Clone)]
pub struct SamplerRuns {
    pub config: SamplerConfig,
    pub records: Vec<TrajectoryRecord>,
    pub wall_ms: Vec<f64>,
}

impl SamplerRuns {
    pub fn summary(&self, task: &TaskSpec) -> RunSummary {
        let mut s = summarize(&self.records, task);
        s.label = self.config.label();
        s.wall_ms = self.wall_ms.iter().sum();
        s
    }
}

/// What `run`, `compare` and `sweep` produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub output_dir: PathBuf,
    pub task: TaskSpec,
    pub runs: Vec<SamplerRuns>,
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<RunSummary>,
}

struct Prepared {
    config: ExperimentConfig,
    task: TaskSpec,
    oracle: OracleDenoiser,
    output_dir: PathBuf,
}

fn prepare(opts: &RunOptions) -> Result<Prepared, CliError> {
    let mut config = ExperimentConfig::load(&opts.config)?;
    if let Some(base) = opts.seed_override {
        config.seeds.base = base;
    }
    let task = config.build_task()?;
    config.check_against(&task)?;
    let oracle = config.build_oracle(&task)?;
    let output_dir = opts
        .out
        .clone()
        .unwrap_or_else(|| config.output_dir.clone());
    Ok(Prepared {
        config,
        task,
        oracle,
        output_dir,
    })
}

fn schedule_label(s: &StepSchedule) -> String {
    match s {
        StepSchedule::Constant { k } => k.to_string(),
        StepSchedule::Linear { steps } => format!("linear/{steps}"),
        StepSchedule::Cosine { steps } => format!("cosine/{steps}"),
    }
}

fn beam_width(p: &Policy) -> usize {
    match p {
        Policy::InfoGainBeam { beam } => *beam,
        _ => 1,
    }
}

fn check_record(r: &TrajectoryRecord) -> Result<(), CliError> {
    if r.final_sequence.contains(&MASK) {
        return Err(CliError::Runtime(format!(
            "seed {}: final sequence still masked",
            r.seed
        )));
    }
    if (cumulative_entropy(r) - r.cumulative_entropy).abs() > 1e-9 {
        return Err(CliError::Runtime(format!(
            "seed {}: cumulative entropy {} differs from the step sum {}",
            r.seed,
            r.cumulative_entropy,
            cumulative_entropy(r)
        )));
    }
    Ok(())
}

/// Runs every (sampler, seed) cell on a pool of `jobs` threads.
pub fn execute(
    samplers: &[SamplerConfig],
    seeds: impl Iterator<Item = u64> + Clone,
    oracle: &OracleDenoiser,
    task: &TaskSpec,
    jobs: usize,
) -> Result<Vec<SamplerRuns>, CliError> {
    let seeds: Vec<u64> = seeds.collect();
    let cells: Vec<(usize, u64)> = (0..samplers.len())
        .flat_map(|i| seeds.iter().map(move |s| (i, *s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let length = task.length();
    let results: Vec<Result<(TrajectoryRecord, f64), CliError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, seed)| {
                let cfg = samplers[i].clone().with_seed(seed);
                let denoiser = oracle.fork();
                let start = Instant::now();
                let record = run_trajectory(&cfg, &denoiser, length)
                    .map_err(|e| CliError::Runtime(format!("{} seed {seed}: {e}", cfg.label())))?;
                let ms = start.elapsed().as_secs_f64() * 1e3;
                check_record(&record)?;
                Ok((record, ms))
            })
            .collect()
    });
    let mut runs: Vec<SamplerRuns> = samplers
        .iter()
        .map(|c| SamplerRuns {
            config: c.clone(),
            records: vec![],
            wall_ms: vec![],
        })
        .collect();
    for ((i, _), r) in cells.iter().zip(results) {
        let (record, ms) = r?;
        runs[*i].records.push(record);
        runs[*i].wall_ms.push(ms);
    }
    Ok(runs)
}

fn result_rows(task: &TaskSpec, runs: &[SamplerRuns]) -> Vec<ResultRow> {
    let mut rows = vec![];
    for run in runs {
        let c = &run.config;
        for (r, ms) in run.records.iter().zip(&run.wall_ms) {
            rows.push(ResultRow {
                run_id: rows.len(),
                task: task.name.clone(),
                policy: c.label(),
                seed: r.seed,
                k: schedule_label(&c.schedule),
                tau_token: c.tau_token,
                tau_pos: c.tau_pos,
                n: c.candidates,
                gamma: c.gamma.to_string(),
                beam: beam_width(&c.policy),
                steps: r.steps.len(),
                cumulative_entropy_nats: r.cumulative_entropy,
                final_state_uncertainty_nats: r
                    .steps
                    .last()
                    .map_or(0.0, |s| s.score.state_uncertainty_after),
                correct: task.is_correct(&r.final_sequence),
                first_group: task.classify_path(r).unwrap_or("").to_string(),
                off_manifold: r.off_manifold(),
                denoiser_calls: r.denoiser_calls(),
                wall_ms: (ms * 1e3).round() / 1e3,
            });
        }
    }
    rows
}

fn write_results(dir: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    if rows.is_empty() {
        w.write_record(RESULT_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_curves(dir: &Path, runs: &[SamplerRuns]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join("trajectories.csv"))?;
    w.write_record(["policy", "seed", "step", "cumulative_entropy_nats"])?;
    for run in runs {
        let label = run.config.label();
        for r in &run.records {
            let seed = r.seed.to_string();
            w.write_record([label.as_str(), &seed, "0", "0"])?;
            for (i, v) in r.cumulative_curve().iter().enumerate() {
                w.write_record([
                    label.clone(),
                    seed.clone(),
                    (i + 1).to_string(),
                    v.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_traces(dir: &Path, runs: &[SamplerRuns]) -> Result<(), CliError> {
    let traces = dir.join("traces");
    fs::create_dir_all(&traces)?;
    for run in runs {
        let stem = file_stem(&run.config.label());
        for r in &run.records {
            let json =
                serde_json::to_string_pretty(r).map_err(|e| CliError::Runtime(e.to_string()))?;
            fs::write(traces.join(format!("{stem}_seed{}.json", r.seed)), json)?;
        }
    }
    Ok(())
}

/// Summary columns for a task: fixed leading columns, one `path_<group>`
/// column per task group, then the trailing metrics.
pub fn summary_header(task: &TaskSpec) -> Vec<String> {
    let mut h: Vec<String> = [
        "policy",
        "K",
        "tau_token",
        "tau_pos",
        "N",
        "gamma",
        "beam",
        "runs",
        "mean_cumulative_entropy_nats",
        "std_cumulative_entropy_nats",
        "accuracy",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(task.groups.keys().map(|g| format!("path_{g}")));
    h.extend(["off_manifold_rate", "calls_per_step", "wall_ms"].map(String::from));
    h
}

fn write_summary(
    dir: &Path,
    task: &TaskSpec,
    runs: &[SamplerRuns],
    summaries: &[RunSummary],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(summary_header(task))?;
    for (run, s) in runs.iter().zip(summaries) {
        let c = &run.config;
        let mut row = vec![
            s.label.clone(),
            schedule_label(&c.schedule),
            c.tau_token.to_string(),
            c.tau_pos.to_string(),
            c.candidates.to_string(),
            c.gamma.to_string(),
            beam_width(&c.policy).to_string(),
            s.runs.to_string(),
            s.mean_cumulative_entropy.to_string(),
            s.std_cumulative_entropy.to_string(),
            s.accuracy.to_string(),
        ];
        row.extend(task.groups.keys().map(|g| {
            s.path_frequencies
                .get(g)
                .copied()
                .unwrap_or(0.0)
                .to_string()
        }));
        row.push(s.off_manifold_rate.to_string());
        row.push(s.mean_calls_per_step.to_string());
        row.push(format!("{:.3}", s.wall_ms));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable comparison table.
pub fn format_table(task: &TaskSpec, summaries: &[RunSummary], bits: bool) -> String {
    let unit = if bits { "bits" } else { "nats" };
    let scale = if bits {
        std::f64::consts::LN_2.recip()
    } else {
        1.0
    };
    let width = summaries
        .iter()
        .map(|s| s.label.len())
        .max()
        .unwrap_or(0)
        .max(7);
    let mut out = String::new();
    let _ = write!(
        out,
        "{:<width$}  {:>16}  {:>8}",
        "sampler",
        format!("H~ ({unit})"),
        "acc"
    );
    for g in task.groups.keys() {
        let _ = write!(out, "  {:>10}", g);
    }
    let _ = writeln!(out, "  {:>8}  {:>10}", "off-man", "calls/step");
    for s in summaries {
        let h = format!(
            "{:.4} ± {:.4}",
            s.mean_cumulative_entropy * scale,
            s.std_cumulative_entropy * scale
        );
        let _ = write!(out, "{:<width$}  {:>16}  {:>8.3}", s.label, h, s.accuracy);
        for g in task.groups.keys() {
            let _ = write!(
                out,
                "  {:>10.3}",
                s.path_frequencies.get(g).copied().unwrap_or(0.0)
            );
        }
        let _ = writeln!(
            out,
            "  {:>8.3}  {:>10.3}",
            s.off_manifold_rate, s.mean_calls_per_step
        );
    }
    out
}

fn seeds_of(config: &ExperimentConfig) -> impl Iterator<Item = u64> + Clone {
    let base = config.seeds.base;
    (0..config.seeds.count as u64).map(move |i| base + i)
}

fn report(p: &Prepared, samplers: &[SamplerConfig], jobs: usize) -> Result<Report, CliError> {
    let runs = execute(samplers, seeds_of(&p.config), &p.oracle, &p.task, jobs)?;
    let rows = result_rows(&p.task, &runs);
    let summaries = runs.iter().map(|r| r.summary(&p.task)).collect();
    Ok(Report {
        output_dir: p.output_dir.clone(),
        task: p.task.clone(),
        runs,
        rows,
        summaries,
    })
}

fn write_common(p: &Prepared, r: &Report) -> Result<(), CliError> {
    fs::create_dir_all(&r.output_dir)?;
    if p.config.emit.csv {
        write_results(&r.output_dir, &r.rows)?;
        write_curves(&r.output_dir, &r.runs)?;
    }
    if p.config.emit.json_traces {
        write_traces(&r.output_dir, &r.runs)?;
    }
    if p.config.emit.svg {
        let curves = plot::mean_curves(&r.runs);
        fs::write(
            r.output_dir.join("trajectory.svg"),
            plot::trajectory_svg(&curves),
        )?;
    }
    Ok(())
}

/// Executes all (sampler, seed) cells and writes `results.csv`.
pub fn cmd_run(opts: &RunOptions) -> Result<Report, CliError> {
    let p = prepare(opts)?;
    let r = report(&p, &p.config.samplers, opts.jobs)?;
    write_common(&p, &r)?;
    Ok(r)
}

/// Side-by-side comparison of at least two samplers: `summary.csv` and a
/// table on stdout.
pub fn cmd_compare(opts: &RunOptions) -> Result<Report, CliError> {
    let p = prepare(opts)?;
    if p.config.samplers.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two samplers".into(),
        ));
    }
    let r = report(&p, &p.config.samplers, opts.jobs)?;
    write_common(&p, &r)?;
    write_summary(&r.output_dir, &r.task, &r.runs, &r.summaries)?;
    if p.config.emit.svg {
        fs::write(
            r.output_dir.join("scatter.svg"),
            plot::scatter_svg(&r.summaries),
        )?;
    }
    let _ = write!(
        std::io::stdout(),
        "{}",
        format_table(&r.task, &r.summaries, opts.bits)
    );
    Ok(r)
}

/// One summary row per cell of the `[sweep]` grid.
pub fn cmd_sweep(opts: &RunOptions) -> Result<Report, CliError> {
    let p = prepare(opts)?;
    let cells = p.config.sweep_cells()?;
    for c in &cells {
        c.blocks(p.task.length())
            .map_err(|e| CliError::Config(format!("sweep cell `{}`: {e}", c.label())))?;
    }
    let r = report(&p, &cells, opts.jobs)?;
    fs::create_dir_all(&r.output_dir)?;
    write_summary(&r.output_dir, &r.task, &r.runs, &r.summaries)?;
    if p.config.emit.svg {
        let x = sweep_axis(&p.config);
        let svg = plot::sweep_svg_from_csv(
            &r.output_dir.join("summary.csv"),
            x,
            "mean_cumulative_entropy_nats",
        )?;
        fs::write(r.output_dir.join("sweep.svg"), svg)?;
    }
    let _ = write!(
        std::io::stdout(),
        "{}",
        format_table(&r.task, &r.summaries, opts.bits)
    );
    Ok(r)
}

fn sweep_axis(c: &ExperimentConfig) -> &'static str {
    let g = c.sweep.as_ref();
    match g {
        Some(g) if g.tau_pos.is_some() => "tau_pos",
        Some(g) if g.tau_token.is_some() => "tau_token",
        Some(g) if g.k.is_some() => "K",
        Some(g) if g.candidates.is_some() => "N",
        Some(g) if g.beam.is_some() => "beam",
        _ => "gamma",
    }
}

/// Runs one trajectory and returns it as pretty JSON. Writes
/// `trace_<policy>_seed<seed>.json` too when `--out` is given.
pub fn cmd_trace(
    opts: &RunOptions,
    sampler: Option<&str>,
    seed: Option<u64>,
) -> Result<String, CliError> {
    let p = prepare(opts)?;
    let cfg = match sampler {
        None => p.config.samplers[0].clone(),
        Some(key) => p
            .config
            .samplers
            .iter()
            .find(|s| s.label() == key)
            .or_else(|| {
                key.parse::<usize>()
                    .ok()
                    .and_then(|i| p.config.samplers.get(i))
            })
            .cloned()
            .ok_or_else(|| CliError::Config(format!("no sampler `{key}`")))?,
    };
    let seed = seed.unwrap_or(p.config.seeds.base);
    let cfg = cfg.with_seed(seed);
    let record = run_trajectory(&cfg, &p.oracle, p.task.length())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    check_record(&record)?;
    let json =
        serde_json::to_string_pretty(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(dir) = &opts.out {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join(format!("trace_{}_seed{seed}.json", file_stem(&cfg.label()))),
            &json,
        )?;
    }
    Ok(json)
}
