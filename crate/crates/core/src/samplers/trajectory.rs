//! Full decoding runs: single trajectories, beam search, best-of-N.

use std::collections::VecDeque;
use std::ops::Range;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Policy, SamplerConfig};
use super::steps::{
    expand_info_gain, greedy_certainty_step, info_gain_step, lookum_step, uniform_step, Child,
    StepInput,
};
use crate::denoiser::{Denoiser, Evaluation, MarginalSet};
use crate::error::{Error, Result};
use crate::metrics::{StepRecord, TrajectoryRecord};
use crate::rng::RngHandle;
use crate::schedule::BlockSchedule;
use crate::scoring::{info_gain_objective, StepScore};
use crate::state::{Action, SeqState};

/// A partial decoding and the immediate cost accumulated to reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamEntry {
    pub state: SeqState,
    /// Sum of immediate costs so far, in nats.
    pub g: f64,
}

/// An in-progress trajectory.
#[derive(Debug, Clone)]
struct Cursor {
    entry: BeamEntry,
    eval: Evaluation,
    /// Calls spent evaluating `entry.state`; charged to the next step.
    eval_calls: u64,
    budgets: VecDeque<usize>,
    steps: Vec<StepRecord>,
    prev: Option<MarginalSet>,
}

fn evaluate_or_close<D: Denoiser + ?Sized>(
    state: &SeqState,
    denoiser: &D,
) -> Result<(Evaluation, u64)> {
    if state.is_complete() {
        let on = denoiser.on_manifold(state).unwrap_or(true);
        return Ok((
            Evaluation {
                marginals: MarginalSet::default(),
                off_manifold: !on,
            },
            0,
        ));
    }
    let before = denoiser.calls();
    let eval = denoiser.evaluate(state)?;
    Ok((eval, denoiser.calls() - before))
}

impl Cursor {
    fn start<D: Denoiser + ?Sized>(
        denoiser: &D,
        length: usize,
        budgets: Vec<usize>,
    ) -> Result<Self> {
        let state = SeqState::all_masked(length, denoiser.vocab_size())?;
        let (eval, eval_calls) = evaluate_or_close(&state, denoiser)?;
        Ok(Self {
            entry: BeamEntry { state, g: 0.0 },
            eval,
            eval_calls,
            budgets: budgets.into(),
            steps: Vec::new(),
            prev: None,
        })
    }

    fn is_complete(&self) -> bool {
        self.entry.state.is_complete()
    }

    /// Active block and this step's budget. A budget larger than the masks
    /// left in the block is split and the remainder carried forward.
    fn plan(&mut self, blocks: &BlockSchedule) -> Result<(Range<usize>, usize)> {
        let block = blocks.active_block(&self.entry.state)?;
        let in_block = block
            .clone()
            .filter(|&p| self.entry.state.is_masked(p))
            .count();
        let budget = self
            .budgets
            .pop_front()
            .ok_or(Error::ScheduleExhausted(self.entry.state.masked_count()))?;
        if budget > in_block {
            self.budgets.push_front(budget - in_block);
            return Ok((block, in_block));
        }
        Ok((block, budget))
    }

    fn input(&self, block: Range<usize>, k: usize) -> StepInput<'_> {
        StepInput {
            state: &self.entry.state,
            marginals: &self.eval.marginals,
            prev: self.prev.as_ref(),
            block,
            k,
        }
    }

    /// Applies `action`, evaluates the successor and records the step.
    fn advance<D: Denoiser + ?Sized>(
        &self,
        action: Action,
        block: &Range<usize>,
        bypass: bool,
        candidates: usize,
        spent: u64,
        denoiser: &D,
    ) -> Result<Cursor> {
        let state = self.entry.state.apply(&action)?;
        let (eval, eval_calls) = evaluate_or_close(&state, denoiser)?;
        let score = info_gain_objective(
            &self.eval.marginals.restrict(block),
            &eval.marginals.restrict(block),
            &action,
        )?;
        let mut steps = self.steps.clone();
        steps.push(StepRecord {
            action,
            score,
            bypass,
            off_manifold: self.eval.off_manifold,
            candidates,
            denoiser_calls: self.eval_calls + spent,
        });
        Ok(Cursor {
            entry: BeamEntry {
                state,
                g: self.entry.g + score.immediate_cost,
            },
            eval,
            eval_calls,
            budgets: self.budgets.clone(),
            steps,
            prev: Some(self.eval.marginals.clone()),
        })
    }

    fn finish(self, config: &SamplerConfig) -> TrajectoryRecord {
        TrajectoryRecord {
            final_on_manifold: !self.eval.off_manifold,
            final_sequence: self.entry.state.tokens().to_vec(),
            cumulative_entropy: self.entry.g,
            steps: self.steps,
            config: config.clone(),
            seed: config.seed,
        }
    }
}

fn prepare<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    denoiser: &D,
    length: usize,
) -> Result<(BlockSchedule, Vec<usize>)> {
    config.validate()?;
    if denoiser.length() != length {
        return Err(Error::ShapeMismatch(format!(
            "task length {length} vs denoiser length {}",
            denoiser.length()
        )));
    }
    Ok((config.blocks(length)?, config.schedule.budgets(length)?))
}

fn run_single<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    denoiser: &D,
    length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrajectoryRecord> {
    let (blocks, budgets) = prepare(config, denoiser, length)?;
    let mut cursor = Cursor::start(denoiser, length, budgets)?;
    while !cursor.is_complete() {
        let (block, k) = cursor.plan(&blocks)?;
        let before = denoiser.calls();
        let input = cursor.input(block.clone(), k);
        let (action, bypass, candidates) = match config.policy {
            Policy::Uniform => (uniform_step(&input, config.tau_token, rng)?, false, 1),
            Policy::GreedyCertainty { certainty } => (
                greedy_certainty_step(&input, &certainty, config.tau_token, config.tau_pos, rng)?,
                false,
                1,
            ),
            Policy::Lookum => {
                let (action, n) = lookum_step(&input, config, rng, denoiser)?;
                (action, false, n)
            }
            Policy::InfoGain | Policy::InfoGainBeam { .. } | Policy::BestOfN { .. } => {
                let step = info_gain_step(&input, config, rng, denoiser)?;
                (step.action, step.bypass, step.candidates)
            }
        };
        let spent = denoiser.calls() - before;
        cursor = cursor.advance(action, &block, bypass, candidates, spent, denoiser)?;
    }
    Ok(cursor.finish(config))
}

/// Runs one trajectory on random stream `stream` of `config.seed`.
///
/// The denoiser's call counter is read before and after each step, so it
/// must not be shared with concurrent runs.
pub fn run_trajectory_on_stream<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    denoiser: &D,
    length: usize,
    stream: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = RngHandle::new(config.seed, stream).generator();
    match config.policy {
        Policy::InfoGainBeam { beam } => beam_search_with(config, beam, denoiser, length, &mut rng),
        Policy::BestOfN { trajectories } => {
            best_of_n_from(config, trajectories, denoiser, length, stream)
        }
        _ => run_single(config, denoiser, length, &mut rng),
    }
}

/// Decodes a fully masked sequence of `length` positions with `config`.
pub fn run_trajectory<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    denoiser: &D,
    length: usize,
) -> Result<TrajectoryRecord> {
    run_trajectory_on_stream(config, denoiser, length, 0)
}

struct Pooled {
    parent: usize,
    /// `None` keeps a finished parent as is.
    child: Option<(Child, Range<usize>, bool, usize, u64)>,
    f: f64,
    local: f64,
}

fn score_child<D: Denoiser + ?Sized>(
    cursor: &Cursor,
    action: &Action,
    block: &Range<usize>,
    denoiser: &D,
) -> Result<(StepScore, u64)> {
    let successor = cursor.entry.state.apply(action)?;
    let (eval, calls) = evaluate_or_close(&successor, denoiser)?;
    let score = info_gain_objective(
        &cursor.eval.marginals.restrict(block),
        &eval.marginals.restrict(block),
        action,
    )?;
    Ok((score, calls))
}

fn beam_search_with<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    width: usize,
    denoiser: &D,
    length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrajectoryRecord> {
    let (blocks, budgets) = prepare(config, denoiser, length)?;
    let mut beam = vec![Cursor::start(denoiser, length, budgets)?];
    while beam.iter().any(|c| !c.is_complete()) {
        let mut pool: Vec<Pooled> = Vec::new();
        for (i, cursor) in beam.iter_mut().enumerate() {
            if cursor.is_complete() {
                pool.push(Pooled {
                    parent: i,
                    child: None,
                    f: cursor.entry.g,
                    local: 0.0,
                });
                continue;
            }
            let (block, k) = cursor.plan(&blocks)?;
            let before = denoiser.calls();
            let expansion =
                expand_info_gain(&cursor.input(block.clone(), k), config, rng, denoiser)?;
            let spent = denoiser.calls() - before;
            let n = expansion.children.len();
            for child in expansion.children {
                pool.push(Pooled {
                    parent: i,
                    child: Some((child, block.clone(), expansion.bypass, n, spent)),
                    f: 0.0,
                    local: 0.0,
                });
            }
        }

        if pool.len() > width {
            for item in pool.iter_mut() {
                let Some((child, block, _, _, spent)) = item.child.as_mut() else {
                    continue;
                };
                if child.score.is_none() {
                    let (score, calls) =
                        score_child(&beam[item.parent], &child.action, block, denoiser)?;
                    child.score = Some(score);
                    *spent += calls;
                }
                let local = child.score.map_or(0.0, |s| s.lookahead_cost());
                item.local = local;
                item.f = beam[item.parent].entry.g + local;
            }
        }
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&a, &b| {
            pool[a]
                .f
                .total_cmp(&pool[b].f)
                .then(pool[a].local.total_cmp(&pool[b].local))
                .then(a.cmp(&b))
        });
        order.truncate(width);
        order.sort_unstable();

        let mut next = Vec::with_capacity(order.len());
        for idx in order {
            let item = &pool[idx];
            let parent = &beam[item.parent];
            next.push(match &item.child {
                None => parent.clone(),
                Some((child, block, bypass, n, spent)) => {
                    parent.advance(child.action.clone(), block, *bypass, *n, *spent, denoiser)?
                }
            });
        }
        beam = next;
    }
    let best = beam
        .into_iter()
        .reduce(|best, c| if c.entry.g < best.entry.g { c } else { best })
        .expect("beam is never empty");
    Ok(best.finish(config))
}

/// Info-Gain beam search of width `beam` (taken from the policy).
///
/// Every live entry is expanded with the Info-Gain candidate generator;
/// children are ranked by `g + immediate_cost + state_uncertainty(successor)`
/// and the `beam` lowest survive. Returns the finished entry with the
/// lowest accumulated cost.
pub fn beam_search<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    denoiser: &D,
    length: usize,
) -> Result<TrajectoryRecord> {
    let width = match config.policy {
        Policy::InfoGainBeam { beam } => beam,
        _ => 1,
    };
    let mut rng = RngHandle::new(config.seed, 0).generator();
    beam_search_with(config, width, denoiser, length, &mut rng)
}

fn best_of_n_from<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    trajectories: usize,
    denoiser: &D,
    length: usize,
    first_stream: u64,
) -> Result<TrajectoryRecord> {
    if trajectories == 0 {
        return Err(Error::InvalidConfig(
            "best-of-N needs at least one trajectory".into(),
        ));
    }
    let mut single = config.clone();
    single.policy = Policy::InfoGain;
    single.candidates = 1;
    let mut best: Option<TrajectoryRecord> = None;
    for i in 0..trajectories as u64 {
        let mut rng = RngHandle::new(config.seed, first_stream + i).generator();
        let record = run_single(&single, denoiser, length, &mut rng)?;
        if best
            .as_ref()
            .is_none_or(|b| record.cumulative_entropy < b.cumulative_entropy)
        {
            best = Some(record);
        }
    }
    let mut best = best.expect("at least one trajectory");
    best.config = config.clone();
    Ok(best)
}

/// Best of `trajectories` (from the policy) single-candidate Info-Gain runs
/// on consecutive random streams; lowest cumulative entropy wins.
pub fn best_of_n<D: Denoiser + ?Sized>(
    config: &SamplerConfig,
    denoiser: &D,
    length: usize,
) -> Result<TrajectoryRecord> {
    let trajectories = match config.policy {
        Policy::BestOfN { trajectories } => trajectories,
        _ => 1,
    };
    best_of_n_from(config, trajectories, denoiser, length, 0)
}
