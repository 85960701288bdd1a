//! The scoring primitives on hand-built marginals: token entropy, state
//! uncertainty, immediate cost and the Info-Gain objective.

use std::collections::BTreeMap;

use infogain::scoring::{info_gain_objective, state_uncertainty, token_entropy};
use infogain::{Action, MarginalSet};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let before = MarginalSet::new(BTreeMap::from([
        (0, vec![0.5, 0.5]),
        (1, vec![0.5, 0.5]),
        (2, vec![0.7, 0.3]),
    ]))?;
    println!("H(0.5, 0.5) = {:.6}", token_entropy(&[0.5, 0.5])?);
    println!("H(0.7, 0.3) = {:.6}", token_entropy(&[0.7, 0.3])?);
    println!("state uncertainty = {:.6}", state_uncertainty(&before));

    // Committing x0 = 1 pins x1; x2 stays open.
    let after_x0 = MarginalSet::new(BTreeMap::from([(1, vec![1.0, 0.0]), (2, vec![0.7, 0.3])]))?;
    let s = info_gain_objective(&before, &after_x0, &Action::new(vec![(0, 1)])?)?;
    println!("commit x0: {s:?}");

    // Committing x2 leaves the coupled pair untouched.
    let after_x2 = MarginalSet::new(BTreeMap::from([(0, vec![0.5, 0.5]), (1, vec![0.5, 0.5])]))?;
    let s = info_gain_objective(&before, &after_x2, &Action::new(vec![(2, 1)])?)?;
    println!("commit x2: {s:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
