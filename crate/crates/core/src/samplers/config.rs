use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::schedule::{BlockSchedule, StepSchedule};
use crate::scoring::CertaintyKind;

pub const DEFAULT_TAU_TOKEN: f64 = 0.7;
pub const DEFAULT_TAU_POS: f64 = 0.1;
pub const DEFAULT_CANDIDATES: usize = 8;
pub const DEFAULT_GAMMA: f64 = 0.8;

/// Which decoding policy to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Policy {
    /// Random positions.
    Uniform,
    /// Top-K (or softmax-sampled) positions by a certainty score.
    GreedyCertainty { certainty: CertaintyKind },
    /// Candidate actions ranked by the successor's mean negative entropy.
    Lookum,
    /// Candidate actions ranked by information gain minus immediate cost.
    InfoGain,
    /// Beam search over Info-Gain expansions.
    InfoGainBeam { beam: usize },
    /// Best of several single-candidate Info-Gain trajectories.
    BestOfN { trajectories: usize },
}

impl Policy {
    pub fn name(&self) -> String {
        match self {
            Policy::Uniform => "uniform".into(),
            Policy::GreedyCertainty { certainty } => certainty.name().into(),
            Policy::Lookum => "lookum".into(),
            Policy::InfoGain => "info_gain".into(),
            Policy::InfoGainBeam { beam } => format!("info_gain_beam{beam}"),
            Policy::BestOfN { trajectories } => format!("best_of_{trajectories}"),
        }
    }
}

/// High-confidence bypass threshold. `None` disables the bypass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bypass(pub Option<f64>);

impl Bypass {
    pub const OFF: Bypass = Bypass(None);

    pub fn threshold(t: f64) -> Self {
        Bypass(Some(t))
    }
}

impl Default for Bypass {
    fn default() -> Self {
        Bypass(Some(DEFAULT_GAMMA))
    }
}

impl fmt::Display for Bypass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(t) => write!(f, "{t}"),
            None => f.write_str("off"),
        }
    }
}

impl Serialize for Bypass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(t) => s.serialize_f64(t),
            None => s.serialize_str("off"),
        }
    }
}

impl<'de> Deserialize<'de> for Bypass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BypassVisitor;
        impl Visitor<'_> for BypassVisitor {
            type Value = Bypass;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a threshold in [0, 1] or \"off\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Bypass, E> {
                Ok(Bypass(Some(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Bypass, E> {
                Ok(Bypass(Some(v as f64)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Bypass, E> {
                Ok(Bypass(Some(v as f64)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Bypass, E> {
                match v {
                    "off" | "none" | "disabled" => Ok(Bypass(None)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(BypassVisitor)
    }
}

/// Everything a sampler needs besides the denoiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Display label; defaults to the policy name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub policy: Policy,
    #[serde(default = "default_tau_token")]
    pub tau_token: f64,
    #[serde(default = "default_tau_pos")]
    pub tau_pos: f64,
    /// Candidate actions per step (N).
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default)]
    pub gamma: Bypass,
    #[serde(default)]
    pub schedule: StepSchedule,
    /// Block size; `None` decodes the whole sequence as one block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_tau_token() -> f64 {
    DEFAULT_TAU_TOKEN
}

fn default_tau_pos() -> f64 {
    DEFAULT_TAU_POS
}

fn default_candidates() -> usize {
    DEFAULT_CANDIDATES
}

impl SamplerConfig {
    pub fn new(policy: Policy) -> Self {
        Self {
            name: None,
            policy,
            tau_token: DEFAULT_TAU_TOKEN,
            tau_pos: DEFAULT_TAU_POS,
            candidates: DEFAULT_CANDIDATES,
            gamma: Bypass::default(),
            schedule: StepSchedule::default(),
            block_size: None,
            seed: 0,
        }
    }

    /// Greedy top-K by `certainty`, argmax tokens.
    pub fn greedy(certainty: CertaintyKind) -> Self {
        Self::new(Policy::GreedyCertainty { certainty }).with_temperatures(0.0, 0.0)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Constant budget of `k` positions per step.
    pub fn with_k(mut self, k: usize) -> Self {
        self.schedule = StepSchedule::constant(k);
        self
    }

    pub fn with_schedule(mut self, schedule: StepSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_temperatures(mut self, tau_token: f64, tau_pos: f64) -> Self {
        self.tau_token = tau_token;
        self.tau_pos = tau_pos;
        self
    }

    pub fn with_candidates(mut self, n: usize) -> Self {
        self.candidates = n;
        self
    }

    pub fn with_gamma(mut self, gamma: Bypass) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = Some(block_size);
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.policy.name())
    }

    pub fn blocks(&self, length: usize) -> Result<BlockSchedule> {
        match self.block_size {
            Some(b) if b > length => Err(Error::InvalidConfig(format!(
                "block size {b} exceeds length {length}"
            ))),
            Some(b) => BlockSchedule::new(b),
            None => Ok(BlockSchedule::global(length)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tau_token >= 0.0) || !self.tau_token.is_finite() {
            return bad(format!("tau_token {} must be >= 0", self.tau_token));
        }
        if !(self.tau_pos >= 0.0) || !self.tau_pos.is_finite() {
            return bad(format!("tau_pos {} must be >= 0", self.tau_pos));
        }
        if self.candidates == 0 {
            return bad("candidates must be >= 1".into());
        }
        if let Some(g) = self.gamma.0 {
            if !(0.0..=1.0).contains(&g) {
                return bad(format!("gamma {g} outside [0, 1]"));
            }
        }
        if self.block_size == Some(0) {
            return bad("block size must be >= 1".into());
        }
        match self.policy {
            Policy::GreedyCertainty { certainty } => certainty.validate()?,
            Policy::InfoGainBeam { beam: 0 } => return bad("beam width must be >= 1".into()),
            Policy::BestOfN { trajectories: 0 } => {
                return bad("best-of-N needs at least one trajectory".into())
            }
            _ => {}
        }
        self.schedule.validate()
    }
}
