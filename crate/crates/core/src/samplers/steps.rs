//! Single decoding steps for each policy.

use std::collections::HashSet;
use std::ops::Range;

use rand::Rng;

use super::config::SamplerConfig;
use super::sampling::{select_positions, token_sample};
use crate::denoiser::{Denoiser, MarginalSet};
use crate::error::{Error, Result};
use crate::scoring::{
    certainty, entropy, info_gain_objective, state_uncertainty, CertaintyKind, StepScore,
};
use crate::state::{Action, SeqState};

/// What a policy sees at one step.
#[derive(Debug, Clone)]
pub struct StepInput<'a> {
    pub state: &'a SeqState,
    /// Denoiser output for `state`.
    pub marginals: &'a MarginalSet,
    /// Denoiser output for the previous state, if any.
    pub prev: Option<&'a MarginalSet>,
    /// Active block; actions stay inside it.
    pub block: Range<usize>,
    /// Positions to commit this step.
    pub k: usize,
}

impl StepInput<'_> {
    /// Masked positions inside the active block, ascending.
    pub fn eligible(&self) -> Vec<usize> {
        self.block
            .clone()
            .filter(|&p| self.state.is_masked(p))
            .collect()
    }

    fn check(&self) -> Result<Vec<usize>> {
        let eligible = self.eligible();
        if self.k == 0 || self.k > eligible.len() {
            return Err(Error::InvalidConfig(format!(
                "budget {} exceeds {} masked positions in block {:?}",
                self.k,
                eligible.len(),
                self.block
            )));
        }
        Ok(eligible)
    }
}

fn draw_tokens<R: Rng + ?Sized>(
    positions: &[usize],
    marginals: &MarginalSet,
    tau: f64,
    rng: &mut R,
) -> Result<Vec<u32>> {
    positions
        .iter()
        .map(|&p| token_sample(marginals.require(p)?, tau, rng))
        .collect()
}

fn pair_up(positions: &[usize], tokens: &[u32], chosen: &[usize]) -> Vec<(usize, u32)> {
    chosen
        .iter()
        .map(|c| {
            let i = positions
                .binary_search(c)
                .expect("chosen position is eligible");
            (*c, tokens[i])
        })
        .collect()
}

fn scored<F>(positions: &[usize], mut score: F) -> Result<Vec<(usize, f64)>>
where
    F: FnMut(usize) -> Result<f64>,
{
    positions.iter().map(|&p| Ok((p, score(p)?))).collect()
}

/// Greedy certainty step: sample a token everywhere in the block, then
/// keep the `k` positions chosen by `kind`.
pub fn greedy_certainty_step<R: Rng + ?Sized>(
    input: &StepInput<'_>,
    kind: &CertaintyKind,
    tau_token: f64,
    tau_pos: f64,
    rng: &mut R,
) -> Result<Action> {
    let eligible = input.check()?;
    let tokens = draw_tokens(&eligible, input.marginals, tau_token, rng)?;
    let scores = scored(&eligible, |p| {
        certainty(kind, p, input.marginals, input.prev)
    })?;
    let chosen = select_positions(&scores, input.k, tau_pos, rng)?;
    Action::new(pair_up(&eligible, &tokens, &chosen))
}

/// Uniformly random positions, sampled tokens.
pub fn uniform_step<R: Rng + ?Sized>(
    input: &StepInput<'_>,
    tau_token: f64,
    rng: &mut R,
) -> Result<Action> {
    let eligible = input.check()?;
    let tokens = draw_tokens(&eligible, input.marginals, tau_token, rng)?;
    let scores: Vec<(usize, f64)> = eligible.iter().map(|&p| (p, rng.gen::<f64>())).collect();
    let chosen = select_positions(&scores, input.k, 0.0, rng)?;
    Action::new(pair_up(&eligible, &tokens, &chosen))
}

/// Up to `config.candidates` distinct actions, each pairing one token draw
/// per position with a softmax position draw over negative entropy.
/// `fixed` pairs are added to every candidate and only `k` further
/// positions are sampled.
fn propose_with_fixed<R: Rng + ?Sized>(
    input: &StepInput<'_>,
    fixed: &[(usize, u32)],
    k: usize,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<Action>> {
    let eligible: Vec<usize> = input
        .eligible()
        .into_iter()
        .filter(|p| !fixed.iter().any(|(f, _)| f == p))
        .collect();
    let scores = scored(&eligible, |p| Ok(-entropy(input.marginals.require(p)?)))?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..config.candidates {
        let tokens = draw_tokens(&eligible, input.marginals, config.tau_token, rng)?;
        let chosen = select_positions(&scores, k, config.tau_pos, rng)?;
        let mut pairs = fixed.to_vec();
        pairs.extend(pair_up(&eligible, &tokens, &chosen));
        let action = Action::new(pairs)?;
        if seen.insert(action.clone()) {
            out.push(action);
        }
    }
    Ok(out)
}

/// Candidate actions from the two-stage action sampler, deduplicated,
/// in proposal order.
pub fn propose_candidates<R: Rng + ?Sized>(
    input: &StepInput<'_>,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<Action>> {
    input.check()?;
    propose_with_fixed(input, &[], input.k, config, rng)
}

fn evaluate_successors<D: Denoiser + ?Sized>(
    input: &StepInput<'_>,
    actions: &[Action],
    denoiser: &D,
) -> Result<Vec<(SeqState, MarginalSet)>> {
    let successors = actions
        .iter()
        .map(|a| input.state.apply(a))
        .collect::<Result<Vec<_>>>()?;
    let evals = denoiser.batch_evaluate(&successors)?;
    Ok(successors
        .into_iter()
        .zip(evals)
        .map(|(s, e)| (s, e.marginals.restrict(&input.block)))
        .collect())
}

/// LookUM step: pick the candidate whose successor has the highest mean
/// negative entropy over the block. Returns the action and the number of
/// candidates considered.
pub fn lookum_step<R: Rng + ?Sized, D: Denoiser + ?Sized>(
    input: &StepInput<'_>,
    config: &SamplerConfig,
    rng: &mut R,
    denoiser: &D,
) -> Result<(Action, usize)> {
    let mut candidates = propose_candidates(input, config, rng)?;
    let n = candidates.len();
    if n == 1 {
        return Ok((candidates.remove(0), 1));
    }
    let successors = evaluate_successors(input, &candidates, denoiser)?;
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (_, after)) in successors.iter().enumerate() {
        let score = -state_uncertainty(after);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok((candidates.swap_remove(best), n))
}

/// One child of an Info-Gain expansion.
#[derive(Debug, Clone)]
pub(crate) struct Child {
    pub action: Action,
    /// Present when the successor was evaluated while expanding.
    pub score: Option<StepScore>,
}

#[derive(Debug, Clone)]
pub(crate) struct Expansion {
    pub children: Vec<Child>,
    pub bypass: bool,
}

/// Positions whose top probability exceeds `gamma`, with argmax tokens,
/// most confident first.
fn confident_pairs(input: &StepInput<'_>, gamma: f64) -> Result<Vec<(usize, u32)>> {
    let mut hits = Vec::new();
    for p in input.eligible() {
        let dist = input.marginals.require(p)?;
        let (arg, top) = dist
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        if top > gamma {
            hits.push((p, arg as u32 + 1, top));
        }
    }
    hits.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    Ok(hits.into_iter().map(|(p, t, _)| (p, t)).collect())
}

pub(crate) fn expand_info_gain<R: Rng + ?Sized, D: Denoiser + ?Sized>(
    input: &StepInput<'_>,
    config: &SamplerConfig,
    rng: &mut R,
    denoiser: &D,
) -> Result<Expansion> {
    input.check()?;
    let mut fixed = match config.gamma.0 {
        Some(gamma) => confident_pairs(input, gamma)?,
        None => Vec::new(),
    };
    if fixed.len() >= input.k {
        fixed.truncate(input.k);
        return Ok(Expansion {
            children: vec![Child {
                action: Action::new(fixed)?,
                score: None,
            }],
            bypass: true,
        });
    }
    let residual = input.k - fixed.len();
    let candidates = propose_with_fixed(input, &fixed, residual, config, rng)?;
    if candidates.len() == 1 {
        return Ok(Expansion {
            children: candidates
                .into_iter()
                .map(|action| Child {
                    action,
                    score: None,
                })
                .collect(),
            bypass: false,
        });
    }
    let before = input.marginals.restrict(&input.block);
    let successors = evaluate_successors(input, &candidates, denoiser)?;
    let children = candidates
        .into_iter()
        .zip(successors)
        .map(|(action, (_, after))| {
            let score = info_gain_objective(&before, &after, &action)?;
            Ok(Child {
                action,
                score: Some(score),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Expansion {
        children,
        bypass: false,
    })
}

/// Result of one Info-Gain step.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoGainStep {
    pub action: Action,
    /// Score of the chosen action; absent when no successor was evaluated
    /// (bypass, or a single candidate).
    pub score: Option<StepScore>,
    pub bypass: bool,
    pub candidates: usize,
}

/// Index of the child with the lowest lookahead cost; ties to the first.
pub(crate) fn best_child(children: &[Child]) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, child) in children.iter().enumerate() {
        let cost = child.score.map_or(f64::INFINITY, |s| s.lookahead_cost());
        if cost < best_cost {
            best = i;
            best_cost = cost;
        }
    }
    best
}

/// Info-Gain step: bypass confident positions, otherwise evaluate the
/// candidates in one batch and keep the one maximizing
/// `info_gain - immediate_cost`.
///
/// The maximizer is found as the minimizer of `immediate_cost +
/// state_uncertainty_after`, which differs from the objective only by
/// the candidate-independent `state_uncertainty_before`.
pub fn info_gain_step<R: Rng + ?Sized, D: Denoiser + ?Sized>(
    input: &StepInput<'_>,
    config: &SamplerConfig,
    rng: &mut R,
    denoiser: &D,
) -> Result<InfoGainStep> {
    let mut expansion = expand_info_gain(input, config, rng, denoiser)?;
    let candidates = expansion.children.len();
    let chosen = expansion
        .children
        .swap_remove(best_child(&expansion.children));
    Ok(InfoGainStep {
        action: chosen.action,
        score: chosen.score,
        bypass: expansion.bypass,
        candidates,
    })
}
