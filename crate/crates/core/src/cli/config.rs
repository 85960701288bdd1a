//! Experiment configuration files.
//!
//! A config is a TOML document:
//!
//! ```toml
//! config_version = 1
//! output_dir = "out/mult"
//!
//! [task]
//! kind = "multiplication"     # or reasoning_verdict, coupled_pair, joint
//! lo = 2
//! hi = 9
//! bits = 7
//!
//! [oracle]
//! kind = "exact"              # or kind = "smoothed", eta = 0.1
//!
//! [seeds]
//! count = 100
//! base = 0
//!
//! [emit]
//! csv = true
//! json_traces = false
//! svg = true
//!
//! [[sampler]]
//! name = "greedy"
//! policy = "greedy_certainty"
//! certainty = { kind = "neg_entropy" }
//! k = 2
//!
//! [[sampler]]
//! policy = "info_gain"
//! k = 2
//! candidates = 8
//! gamma = "off"
//!
//! [sweep]                     # only read by `sweep`
//! tau_pos = [0.1, 0.5, 1.0]
//! k = [1, 2]
//! max_cells = 4096
//! ```
//!
//! Sampler tables accept the [`SamplerConfig`] fields plus `k` as shorthand
//! for `schedule = { kind = "constant", k = .. }`. Unknown keys are rejected.
//! Sweep dimensions: `tau_token`, `tau_pos`, `k`, `candidates`, `gamma`,
//! `beam`; each present dimension must be non-empty. `beam` only changes
//! beam-search samplers.
//!
//! Task kinds:
//!
//! | kind | keys |
//! |---|---|
//! | `multiplication` | `lo` (2), `hi` (9), `bits` (7) |
//! | `reasoning_verdict` | `prompt` |
//! | `coupled_pair` | |
//! | `joint` | `path`, optional `metadata` (JSON sidecar); relative to the config file |

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::denoiser::{OracleDenoiser, OracleKind};
use crate::samplers::{Bypass, Policy, SamplerConfig};
use crate::schedule::StepSchedule;
use crate::tasks::{self, TaskSpec};

use super::CliError;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_MAX_CELLS: usize = 4096;

const SAMPLER_KEYS: &[&str] = &[
    "name",
    "policy",
    "certainty",
    "beam",
    "trajectories",
    "tau_token",
    "tau_pos",
    "candidates",
    "gamma",
    "schedule",
    "block_size",
    "seed",
    "k",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskRef {
    Multiplication {
        #[serde(default = "default_lo")]
        lo: u32,
        #[serde(default = "default_hi")]
        hi: u32,
        #[serde(default = "default_bits")]
        bits: usize,
    },
    ReasoningVerdict {
        prompt: u32,
    },
    CoupledPair,
    Joint {
        path: PathBuf,
        #[serde(default)]
        metadata: Option<PathBuf>,
    },
}

fn default_lo() -> u32 {
    2
}
fn default_hi() -> u32 {
    9
}
fn default_bits() -> usize {
    7
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleRef {
    #[default]
    Exact,
    Smoothed {
        eta: f64,
    },
}

impl From<OracleRef> for OracleKind {
    fn from(o: OracleRef) -> Self {
        match o {
            OracleRef::Exact => OracleKind::Exact,
            OracleRef::Smoothed { eta } => OracleKind::Smoothed { eta },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub count: usize,
    #[serde(default)]
    pub base: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { count: 1, base: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emit {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default)]
    pub json_traces: bool,
    #[serde(default)]
    pub svg: bool,
}

fn yes() -> bool {
    true
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            csv: true,
            json_traces: false,
            svg: false,
        }
    }
}

/// Parameter grid for `sweep`. `None` leaves the sampler's own value.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub tau_token: Option<Vec<f64>>,
    pub tau_pos: Option<Vec<f64>>,
    pub k: Option<Vec<usize>>,
    pub candidates: Option<Vec<usize>>,
    pub gamma: Option<Vec<Bypass>>,
    pub beam: Option<Vec<usize>>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    config_version: u32,
    task: TaskRef,
    #[serde(default)]
    oracle: OracleRef,
    #[serde(default)]
    seeds: Seeds,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    emit: Emit,
    #[serde(default)]
    sampler: Vec<toml::Table>,
    #[serde(default)]
    sweep: Option<SweepGrid>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A parsed and validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub task: TaskRef,
    pub oracle: OracleRef,
    pub seeds: Seeds,
    pub output_dir: PathBuf,
    pub emit: Emit,
    pub samplers: Vec<SamplerConfig>,
    pub sweep: Option<SweepGrid>,
    /// Directory that relative task paths resolve against.
    pub base_dir: PathBuf,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn sampler_from_table(index: usize, mut table: toml::Table) -> Result<SamplerConfig, CliError> {
    if let Some(key) = table.keys().find(|k| !SAMPLER_KEYS.contains(&k.as_str())) {
        return Err(config_err(format!("sampler {index}: unknown key `{key}`")));
    }
    let k = table.remove("k");
    if k.is_some() && table.contains_key("schedule") {
        return Err(config_err(format!(
            "sampler {index}: give either `k` or `schedule`"
        )));
    }
    let mut cfg: SamplerConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| config_err(format!("sampler {index}: {e}")))?;
    if let Some(k) = k {
        let k = k.as_integer().filter(|k| *k >= 1).ok_or_else(|| {
            config_err(format!("sampler {index}: `k` must be a positive integer"))
        })?;
        cfg.schedule = StepSchedule::constant(k as usize);
    }
    cfg.validate()
        .map_err(|e| config_err(format!("sampler {index} ({}): {e}", cfg.label())))?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        if raw.config_version != CONFIG_VERSION {
            return Err(config_err(format!(
                "config_version {} is not supported (expected {CONFIG_VERSION})",
                raw.config_version
            )));
        }
        if raw.seeds.count == 0 {
            return Err(config_err("seeds.count must be >= 1"));
        }
        if raw.sampler.is_empty() {
            return Err(config_err("at least one [[sampler]] is required"));
        }
        let samplers = raw
            .sampler
            .into_iter()
            .enumerate()
            .map(|(i, t)| sampler_from_table(i, t))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, s) in samplers.iter().enumerate() {
            if samplers[..i].iter().any(|o| o.label() == s.label()) {
                return Err(config_err(format!(
                    "duplicate sampler label `{}`; give each sampler a distinct `name`",
                    s.label()
                )));
            }
        }
        if let OracleRef::Smoothed { eta } = raw.oracle {
            if !(0.0..=1.0).contains(&eta) {
                return Err(config_err(format!("oracle eta {eta} outside [0, 1]")));
            }
        }
        Ok(ExperimentConfig {
            task: raw.task,
            oracle: raw.oracle,
            seeds: raw.seeds,
            output_dir: raw.output_dir,
            emit: raw.emit,
            samplers,
            sweep: raw.sweep,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn build_task(&self) -> Result<TaskSpec, CliError> {
        let task = match &self.task {
            TaskRef::Multiplication { lo, hi, bits } => tasks::multiplication_task(*lo, *hi, *bits),
            TaskRef::ReasoningVerdict { prompt } => tasks::reasoning_verdict_task(*prompt),
            TaskRef::CoupledPair => Ok(tasks::coupled_pair_task()),
            TaskRef::Joint { path, metadata } => {
                let joint = self.base_dir.join(path);
                let meta = metadata.as_ref().map(|m| self.base_dir.join(m));
                TaskSpec::load(&joint, meta.as_deref())
            }
        };
        task.map_err(|e| config_err(format!("task: {e}")))
    }

    pub fn build_oracle(&self, task: &TaskSpec) -> Result<OracleDenoiser, CliError> {
        OracleDenoiser::with_kind(task.joint.clone(), self.oracle.into())
            .map_err(|e| config_err(format!("oracle: {e}")))
    }

    /// Checks every sampler against the task length.
    pub fn check_against(&self, task: &TaskSpec) -> Result<(), CliError> {
        for s in &self.samplers {
            s.blocks(task.length())
                .map_err(|e| config_err(format!("sampler `{}`: {e}", s.label())))?;
            if let Policy::InfoGainBeam { beam: 0 } | Policy::BestOfN { trajectories: 0 } = s.policy
            {
                return Err(config_err(format!(
                    "sampler `{}`: width must be >= 1",
                    s.label()
                )));
            }
        }
        Ok(())
    }

    /// Expands the sweep grid into one sampler config per cell, in
    /// sampler-major order with later dimensions varying fastest.
    pub fn sweep_cells(&self) -> Result<Vec<SamplerConfig>, CliError> {
        let grid = self
            .sweep
            .as_ref()
            .ok_or_else(|| config_err("sweep needs a [sweep] table"))?;
        fn dim<T: Clone>(name: &str, d: &Option<Vec<T>>) -> Result<Option<Vec<T>>, CliError> {
            match d {
                Some(v) if v.is_empty() => {
                    Err(config_err(format!("sweep dimension `{name}` is empty")))
                }
                other => Ok(other.clone()),
            }
        }
        let tau_token = dim("tau_token", &grid.tau_token)?;
        let tau_pos = dim("tau_pos", &grid.tau_pos)?;
        let k = dim("k", &grid.k)?;
        let candidates = dim("candidates", &grid.candidates)?;
        let gamma = dim("gamma", &grid.gamma)?;
        let beam = dim("beam", &grid.beam)?;
        fn n<T>(d: &Option<Vec<T>>) -> usize {
            d.as_ref().map_or(1, Vec::len)
        }
        let total = self.samplers.len()
            * n(&tau_token)
            * n(&tau_pos)
            * n(&k)
            * n(&candidates)
            * n(&gamma)
            * n(&beam);
        if total > grid.max_cells {
            return Err(config_err(format!(
                "sweep has {total} cells, above the cap of {} (raise sweep.max_cells)",
                grid.max_cells
            )));
        }
        let mut cells = vec![];
        for base in &self.samplers {
            let mut acc = vec![base.clone()];
            if let Some(v) = &tau_token {
                acc = expand(acc, v, |c, x| c.tau_token = *x);
            }
            if let Some(v) = &tau_pos {
                acc = expand(acc, v, |c, x| c.tau_pos = *x);
            }
            if let Some(v) = &k {
                acc = expand(acc, v, |c, x| c.schedule = StepSchedule::constant(*x));
            }
            if let Some(v) = &candidates {
                acc = expand(acc, v, |c, x| c.candidates = *x);
            }
            if let Some(v) = &gamma {
                acc = expand(acc, v, |c, x| c.gamma = *x);
            }
            if let Some(v) = &beam {
                acc = expand(acc, v, |c, x| {
                    if let Policy::InfoGainBeam { beam } = &mut c.policy {
                        *beam = *x;
                    }
                });
            }
            cells.extend(acc);
        }
        for c in &cells {
            c.validate()
                .map_err(|e| config_err(format!("sweep cell `{}`: {e}", c.label())))?;
        }
        Ok(cells)
    }
}

fn expand<T>(
    acc: Vec<SamplerConfig>,
    values: &[T],
    set: impl Fn(&mut SamplerConfig, &T),
) -> Vec<SamplerConfig> {
    let mut out = Vec::with_capacity(acc.len() * values.len());
    for c in acc {
        for x in values {
            let mut c = c.clone();
            set(&mut c, x);
            out.push(c);
        }
    }
    out
}
