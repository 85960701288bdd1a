//! Toy tasks with exact joints: a one-way multiplication equation and a
//! reasoning-then-verdict template, plus helpers to label decoding paths.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::denoiser::TabularJoint;
use crate::error::{Error, Result};
use crate::metrics::TrajectoryRecord;

/// Shared token ids. Digits `0..=9` are tokens `1..=10`.
pub mod vocab {
    pub const BIT0: u32 = 11;
    pub const BIT1: u32 = 12;
    pub const YES: u32 = 13;
    pub const NO: u32 = 14;
    pub const VOCAB_SIZE: u32 = 14;

    pub fn digit(d: u32) -> u32 {
        debug_assert!(d <= 9);
        d + 1
    }

    pub fn decode_digit(token: u32) -> Option<u32> {
        (1..=10).contains(&token).then(|| token - 1)
    }

    pub fn bit(b: bool) -> u32 {
        if b {
            BIT1
        } else {
            BIT0
        }
    }

    pub fn decode_bit(token: u32) -> Option<u32> {
        match token {
            BIT0 => Some(0),
            BIT1 => Some(1),
            _ => None,
        }
    }
}

/// How a decoded sequence is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    /// `[a, b, bits of c]` with `c == a * b`, most significant bit first.
    Multiplication { product_bits: usize },
    /// `[r, v]` with `v == YES` exactly when `prompt + r` is even.
    ReasoningVerdict { prompt: u32 },
    /// The sequence has positive probability under the joint.
    InSupport,
}

/// A joint plus the labels used to score decodings of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub joint: TabularJoint,
    /// Named position groups; they partition `0..L`.
    pub groups: BTreeMap<String, Vec<usize>>,
    pub predicate: Predicate,
}

/// Everything in a [`TaskSpec`] except the joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetadata {
    pub name: String,
    pub groups: BTreeMap<String, Vec<usize>>,
    pub predicate: Predicate,
}

impl TaskSpec {
    pub fn new(
        name: impl Into<String>,
        joint: TabularJoint,
        groups: BTreeMap<String, Vec<usize>>,
        predicate: Predicate,
    ) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            joint,
            groups,
            predicate,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Groups every position on its own (`p0`, `p1`, ...).
    pub fn from_joint(name: impl Into<String>, joint: TabularJoint) -> Self {
        let groups = (0..joint.length())
            .map(|p| (format!("p{p}"), vec![p]))
            .collect();
        Self {
            name: name.into(),
            joint,
            groups,
            predicate: Predicate::InSupport,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.joint.length()];
        for positions in self.groups.values() {
            for &p in positions {
                match seen.get_mut(p) {
                    Some(s) if !*s => *s = true,
                    Some(_) => {
                        return Err(Error::InvalidTask(format!("position {p} in two groups")))
                    }
                    None => return Err(Error::InvalidTask(format!("position {p} out of range"))),
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTask(
                "groups do not cover every position".into(),
            ));
        }
        Ok(())
    }

    pub fn length(&self) -> usize {
        self.joint.length()
    }

    pub fn group_of(&self, position: usize) -> Option<&str> {
        self.groups
            .iter()
            .find(|(_, ps)| ps.contains(&position))
            .map(|(g, _)| g.as_str())
    }

    pub fn is_correct(&self, sequence: &[u32]) -> bool {
        if sequence.len() != self.joint.length() {
            return false;
        }
        match self.predicate {
            Predicate::Multiplication { product_bits } => {
                let (Some(a), Some(b)) = (
                    vocab::decode_digit(sequence[0]),
                    vocab::decode_digit(sequence[1]),
                ) else {
                    return false;
                };
                let mut c = 0u32;
                for &t in &sequence[2..2 + product_bits] {
                    match vocab::decode_bit(t) {
                        Some(bit) => c = (c << 1) | bit,
                        None => return false,
                    }
                }
                c == a * b
            }
            Predicate::ReasoningVerdict { prompt } => {
                let Some(r) = vocab::decode_digit(sequence[0]) else {
                    return false;
                };
                let expected = if (prompt + r).is_multiple_of(2) {
                    vocab::YES
                } else {
                    vocab::NO
                };
                sequence[1] == expected
            }
            Predicate::InSupport => self.joint.probability(sequence) > 0.0,
        }
    }

    /// Group holding the first decoded position: the first step's action,
    /// lowest position first.
    pub fn classify_path(&self, traj: &TrajectoryRecord) -> Option<&str> {
        let first = traj.steps.first()?.action.positions().next()?;
        self.group_of(first)
    }

    pub fn metadata(&self) -> TaskMetadata {
        TaskMetadata {
            name: self.name.clone(),
            groups: self.groups.clone(),
            predicate: self.predicate,
        }
    }

    /// Writes `<stem>.joint` (text joint format) and `<stem>.task.json`.
    pub fn export(&self, dir: &Path, stem: &str) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{stem}.joint")), self.joint.to_text())?;
        let meta = serde_json::to_string_pretty(&self.metadata()).map_err(std::io::Error::other)?;
        fs::write(dir.join(format!("{stem}.task.json")), meta)
    }

    /// Loads a joint file, with an optional metadata sidecar.
    pub fn load(joint_path: &Path, metadata_path: Option<&Path>) -> Result<Self> {
        let text = fs::read_to_string(joint_path)
            .map_err(|e| Error::InvalidTask(format!("{}: {e}", joint_path.display())))?;
        let joint = TabularJoint::from_text(&text)?;
        let name = joint_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "joint".into());
        match metadata_path {
            None => Ok(Self::from_joint(name, joint)),
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::InvalidTask(format!("{}: {e}", path.display())))?;
                let meta: TaskMetadata = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidTask(format!("{}: {e}", path.display())))?;
                Self::new(meta.name, joint, meta.groups, meta.predicate)
            }
        }
    }
}

/// Equations `a x b = c` with `a, b` uniform over `lo..=hi` (decimal digit
/// tokens) and `c` written in `product_bits` binary tokens.
pub fn multiplication_task(lo: u32, hi: u32, product_bits: usize) -> Result<TaskSpec> {
    if lo > hi || hi > 9 {
        return Err(Error::InvalidTask(format!(
            "factor range {lo}..={hi} must lie in 0..=9"
        )));
    }
    let max = hi * hi;
    let needed = (u32::BITS - max.leading_zeros()).max(1) as usize;
    if product_bits < needed || product_bits > 31 {
        return Err(Error::InvalidTask(format!(
            "{product_bits} product bits cannot hold {max} (need {needed})"
        )));
    }
    let mut sequences = Vec::new();
    for a in lo..=hi {
        for b in lo..=hi {
            let c = a * b;
            let mut seq = vec![vocab::digit(a), vocab::digit(b)];
            seq.extend(
                (0..product_bits)
                    .rev()
                    .map(|i| vocab::bit((c >> i) & 1 == 1)),
            );
            sequences.push(seq);
        }
    }
    let length = 2 + product_bits;
    let joint = TabularJoint::uniform(length, vocab::VOCAB_SIZE, sequences)?;
    let groups = BTreeMap::from([
        ("factors".to_string(), vec![0, 1]),
        ("product".to_string(), (2..length).collect()),
    ]);
    TaskSpec::new(
        format!("multiplication_{lo}_{hi}_{product_bits}"),
        joint,
        groups,
        Predicate::Multiplication { product_bits },
    )
}

/// `[reasoning, verdict]` for a fixed prompt digit: the reasoning token is
/// a uniform digit and the verdict is YES exactly when `prompt + r` is even.
pub fn reasoning_verdict_task(prompt: u32) -> Result<TaskSpec> {
    if prompt > 9 {
        return Err(Error::InvalidTask(format!(
            "prompt digit {prompt} outside 0..=9"
        )));
    }
    let sequences = (0..=9)
        .map(|r| {
            let v = if (prompt + r).is_multiple_of(2) {
                vocab::YES
            } else {
                vocab::NO
            };
            vec![vocab::digit(r), v]
        })
        .collect();
    let joint = TabularJoint::uniform(2, vocab::VOCAB_SIZE, sequences)?;
    let groups = BTreeMap::from([
        ("reasoning".to_string(), vec![0]),
        ("verdict".to_string(), vec![1]),
    ]);
    TaskSpec::new(
        format!("reasoning_verdict_{prompt}"),
        joint,
        groups,
        Predicate::ReasoningVerdict { prompt },
    )
}

/// Three binary positions: `x0` uniform, `x1 = x0`, and `x2` independent
/// with `P(1) = 0.7`. Greedy entropy decodes `x2` first; decoding the
/// coupled pair first is what pays off.
pub fn coupled_pair_task() -> TaskSpec {
    let joint = TabularJoint::new(
        3,
        2,
        vec![
            (vec![1, 1, 1], 0.35),
            (vec![1, 1, 2], 0.15),
            (vec![2, 2, 1], 0.35),
            (vec![2, 2, 2], 0.15),
        ],
    )
    .expect("valid joint");
    let groups = BTreeMap::from([
        ("coupled".to_string(), vec![0, 1]),
        ("independent".to_string(), vec![2]),
    ]);
    TaskSpec::new("coupled_pair", joint, groups, Predicate::InSupport).expect("valid task")
}
