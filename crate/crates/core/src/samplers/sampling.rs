//! Temperature-controlled token draws and position selection.

use std::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};

/// The distribution `token_sample` draws from at temperature `tau`:
/// `p^(1/tau)` renormalized. `tau = 0` puts all mass on the argmax.
pub fn sampling_distribution(dist: &[f64], tau: f64) -> Result<Vec<f64>> {
    let total: f64 = dist.iter().filter(|p| **p > 0.0).sum();
    if dist.is_empty() || !(total > 0.0) {
        return Err(Error::InvalidDistribution("no positive mass".into()));
    }
    if tau == 0.0 {
        let best = argmax(dist);
        return Ok((0..dist.len())
            .map(|i| if i == best { 1.0 } else { 0.0 })
            .collect());
    }
    if tau == 1.0 {
        return Ok(dist.iter().map(|&p| p.max(0.0) / total).collect());
    }
    let max_log = dist
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = dist
        .iter()
        .map(|&p| {
            if p > 0.0 {
                ((p.ln() - max_log) / tau).exp()
            } else {
                0.0
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}

/// Index of the largest entry; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Draws a token (`1..=V`) from `dist` at temperature `tau`.
pub fn token_sample<R: Rng + ?Sized>(dist: &[f64], tau: f64, rng: &mut R) -> Result<u32> {
    if tau == 0.0 {
        sampling_distribution(dist, tau)?;
        return Ok(argmax(dist) as u32 + 1);
    }
    let weights = sampling_distribution(dist, tau)?;
    Ok(draw_index(&weights, rng) as u32 + 1)
}

/// Picks `k` positions from `(position, score)` pairs.
///
/// At `tau = 0` this is top-k by score with ties to the lower position.
/// Otherwise positions are drawn one at a time without replacement from a
/// softmax over `score / tau`. Selecting every position consumes no
/// randomness. Returned in selection order.
pub fn select_positions<R: Rng + ?Sized>(
    scores: &[(usize, f64)],
    k: usize,
    tau: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::InvalidDistribution(
            "no positions to select from".into(),
        ));
    }
    if k == 0 || k > scores.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot select {k} of {} positions",
            scores.len()
        )));
    }
    let mut ranked: Vec<(usize, f64)> = scores.to_vec();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    if tau == 0.0 || k == scores.len() {
        return Ok(ranked.into_iter().take(k).map(|(p, _)| p).collect());
    }
    let mut remaining: Vec<(usize, f64)> = scores.to_vec();
    remaining.sort_by_key(|&(p, _)| p);
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let max = remaining
            .iter()
            .map(|&(_, s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = remaining
            .iter()
            .map(|&(_, s)| ((s - max) / tau).exp())
            .collect();
        let i = draw_index(&weights, rng);
        chosen.push(remaining.remove(i).0);
    }
    Ok(chosen)
}
