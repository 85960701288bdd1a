use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MASS_TOLERANCE;
use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::state::MASK;

/// An explicit distribution over complete sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularJoint {
    length: usize,
    vocab_size: u32,
    support: Vec<(Vec<u32>, f64)>,
}

impl TabularJoint {
    pub fn new(length: usize, vocab_size: u32, support: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidJoint("length must be >= 1".into()));
        }
        if vocab_size < 2 {
            return Err(Error::InvalidJoint("vocab size must be >= 2".into()));
        }
        if support.is_empty() {
            return Err(Error::InvalidJoint("empty support".into()));
        }
        let mut seen = HashSet::with_capacity(support.len());
        let mut total = 0.0;
        for (seq, p) in &support {
            if seq.len() != length {
                return Err(Error::InvalidJoint(format!(
                    "sequence {seq:?} has length {}, expected {length}",
                    seq.len()
                )));
            }
            if seq.iter().any(|&t| t == MASK || t > vocab_size) {
                return Err(Error::InvalidJoint(format!(
                    "sequence {seq:?} has a token outside 1..={vocab_size}"
                )));
            }
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidJoint(format!("bad probability {p}")));
            }
            if !seen.insert(seq.as_slice()) {
                return Err(Error::InvalidJoint(format!("duplicate sequence {seq:?}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidJoint(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            length,
            vocab_size,
            support,
        })
    }

    /// Uniform distribution over the given sequences.
    pub fn uniform(length: usize, vocab_size: u32, sequences: Vec<Vec<u32>>) -> Result<Self> {
        let p = 1.0 / sequences.len().max(1) as f64;
        Self::new(
            length,
            vocab_size,
            sequences.into_iter().map(|s| (s, p)).collect(),
        )
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn support(&self) -> &[(Vec<u32>, f64)] {
        &self.support
    }

    pub fn probability(&self, sequence: &[u32]) -> f64 {
        self.support
            .iter()
            .find(|(s, _)| s.as_slice() == sequence)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .support
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(_, p)| p * p.ln())
            .sum::<f64>()
    }

    /// Marginal of one position, summed directly over the support.
    pub fn marginal(&self, position: usize) -> Vec<f64> {
        let mut dist = vec![0.0; self.vocab_size as usize];
        for (seq, p) in &self.support {
            dist[seq[position] as usize - 1] += p;
        }
        dist
    }

    /// Parses the `L V` header plus one `tokens... probability` line per
    /// support element. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidJoint("missing header".into()))?;
        let mut fields = header.split_whitespace();
        let (length, vocab_size) = match (fields.next(), fields.next(), fields.next()) {
            (Some(l), Some(v), None) => (
                l.parse::<usize>()
                    .map_err(|e| Error::InvalidJoint(format!("header length: {e}")))?,
                v.parse::<u32>()
                    .map_err(|e| Error::InvalidJoint(format!("header vocab: {e}")))?,
            ),
            _ => return Err(Error::InvalidJoint(format!("bad header {header:?}"))),
        };
        let mut support = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != length + 1 {
                return Err(Error::InvalidJoint(format!(
                    "expected {} fields, got {} in {line:?}",
                    length + 1,
                    fields.len()
                )));
            }
            let seq = fields[..length]
                .iter()
                .map(|f| f.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidJoint(format!("token in {line:?}: {e}")))?;
            let p = fields[length]
                .parse::<f64>()
                .map_err(|e| Error::InvalidJoint(format!("probability in {line:?}: {e}")))?;
            support.push((seq, p));
        }
        Self::new(length, vocab_size, support)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.length, self.vocab_size);
        for (seq, p) in &self.support {
            for t in seq {
                let _ = write!(out, "{t} ");
            }
            let _ = writeln!(out, "{p}");
        }
        out
    }
}

/// Draws `support_size` distinct sequences with positive random weights.
pub fn random_joint(
    rng: RngHandle,
    length: usize,
    vocab_size: u32,
    support_size: usize,
) -> Result<TabularJoint> {
    if length == 0 || vocab_size < 2 {
        return Err(Error::InvalidJoint(
            "need length >= 1 and vocab >= 2".into(),
        ));
    }
    let universe = (vocab_size as usize)
        .checked_pow(length as u32)
        .ok_or_else(|| Error::InvalidJoint("V^L overflows".into()))?;
    if support_size == 0 || support_size > universe {
        return Err(Error::InvalidJoint(format!(
            "support size {support_size} outside 1..={universe}"
        )));
    }
    let mut gen = rng.generator();
    let picked = index::sample(&mut gen, universe, support_size);
    let weights: Vec<f64> = (0..support_size).map(|_| 1.0 - gen.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let support = picked
        .into_iter()
        .zip(weights)
        .map(|(mut code, w)| {
            let mut seq = vec![0u32; length];
            for slot in seq.iter_mut().rev() {
                *slot = (code % vocab_size as usize) as u32 + 1;
                code /= vocab_size as usize;
            }
            (seq, w / total)
        })
        .collect();
    TabularJoint::new(length, vocab_size, support)
}
