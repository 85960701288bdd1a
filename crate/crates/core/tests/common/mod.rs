//! Brute-force reference computations, written against the raw support
//! list only.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub type Support = Vec<(Vec<u32>, f64)>;

pub fn h(dist: &[f64]) -> f64 {
    dist.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

pub fn consistent(seq: &[u32], state: &[u32]) -> bool {
    seq.iter().zip(state).all(|(s, z)| *z == 0 || s == z)
}

/// Conditional marginals at the masked positions; `None` off the support.
pub fn marginals(
    support: &Support,
    vocab: u32,
    state: &[u32],
) -> Option<BTreeMap<usize, Vec<f64>>> {
    let mass: f64 = support
        .iter()
        .filter(|(s, _)| consistent(s, state))
        .map(|(_, p)| p)
        .sum();
    if mass <= 0.0 {
        return None;
    }
    let mut out = BTreeMap::new();
    for (pos, _) in state.iter().enumerate().filter(|(_, z)| **z == 0) {
        let mut d = vec![0.0; vocab as usize];
        for (s, p) in support.iter().filter(|(s, _)| consistent(s, state)) {
            d[s[pos] as usize - 1] += p / mass;
        }
        out.insert(pos, d);
    }
    Some(out)
}

pub fn mean_h(m: &BTreeMap<usize, Vec<f64>>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.values().map(|d| h(d)).sum::<f64>() / m.len() as f64
    }
}

pub fn joint_entropy(support: &Support) -> f64 {
    support
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(_, p)| -p * p.ln())
        .sum()
}

/// Objective `IG - C` of committing `pairs` in `state`.
pub fn objective(support: &Support, vocab: u32, state: &[u32], pairs: &[(usize, u32)]) -> f64 {
    let before = marginals(support, vocab, state).expect("state on support");
    let mut next = state.to_vec();
    for &(p, t) in pairs {
        next[p] = t;
    }
    let after = marginals(support, vocab, &next).unwrap_or_else(|| {
        next.iter()
            .enumerate()
            .filter(|(_, z)| **z == 0)
            .map(|(i, _)| (i, vec![1.0 / vocab as f64; vocab as usize]))
            .collect()
    });
    let c: f64 = pairs.iter().map(|(p, _)| h(&before[p])).sum();
    (mean_h(&before) - mean_h(&after)) - c
}

/// `E_y[C - IG]` for committing `positions` with `y` drawn from the
/// conditional joint of those positions.
pub fn expected_c_minus_ig(
    support: &Support,
    vocab: u32,
    state: &[u32],
    positions: &[usize],
) -> f64 {
    let mass: f64 = support
        .iter()
        .filter(|(s, _)| consistent(s, state))
        .map(|(_, p)| p)
        .sum();
    let mut by_y: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (s, p) in support.iter().filter(|(s, _)| consistent(s, state)) {
        *by_y
            .entry(positions.iter().map(|&i| s[i]).collect())
            .or_default() += p / mass;
    }
    by_y.iter()
        .map(|(y, py)| {
            let pairs: Vec<(usize, u32)> =
                positions.iter().copied().zip(y.iter().copied()).collect();
            -py * objective(support, vocab, state, &pairs)
        })
        .sum()
}

pub fn pair_support(seqs: &[&[u32]]) -> Support {
    let p = 1.0 / seqs.len() as f64;
    seqs.iter().map(|s| (s.to_vec(), p)).collect()
}

pub fn coupled_support() -> Support {
    vec![
        (vec![1, 1, 1], 0.35),
        (vec![1, 1, 2], 0.15),
        (vec![2, 2, 1], 0.35),
        (vec![2, 2, 2], 0.15),
    ]
}
