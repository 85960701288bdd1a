//! Partially masked sequences and unmasking actions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The mask symbol. Content tokens are `1..=vocab_size`.
pub const MASK: u32 = 0;

/// A partially masked token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeqState {
    tokens: Vec<u32>,
    vocab_size: u32,
}

impl SeqState {
    pub fn new(tokens: Vec<u32>, vocab_size: u32) -> Result<Self> {
        if vocab_size < 2 {
            return Err(Error::ShapeMismatch(format!("vocab size {vocab_size} < 2")));
        }
        if tokens.is_empty() {
            return Err(Error::ShapeMismatch("empty sequence".into()));
        }
        if let Some(&token) = tokens.iter().find(|&&t| t > vocab_size) {
            return Err(Error::TokenOutOfRange { token, vocab_size });
        }
        Ok(Self { tokens, vocab_size })
    }

    /// Fully masked state of the given length.
    pub fn all_masked(length: usize, vocab_size: u32) -> Result<Self> {
        Self::new(vec![MASK; length], vocab_size)
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn is_masked(&self, position: usize) -> bool {
        self.tokens.get(position) == Some(&MASK)
    }

    pub fn masked_positions(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == MASK)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn masked_count(&self) -> usize {
        self.tokens.iter().filter(|&&t| t == MASK).count()
    }

    pub fn is_complete(&self) -> bool {
        self.masked_count() == 0
    }

    /// Checks that `action` can be applied to this state.
    pub fn validate(&self, action: &Action) -> Result<()> {
        for &(position, token) in action.pairs() {
            if position >= self.tokens.len() {
                return Err(Error::PositionOutOfRange {
                    position,
                    length: self.tokens.len(),
                });
            }
            if token == MASK || token > self.vocab_size {
                return Err(Error::TokenOutOfRange {
                    token,
                    vocab_size: self.vocab_size,
                });
            }
            if self.tokens[position] != MASK {
                return Err(Error::PositionNotMasked(position));
            }
        }
        Ok(())
    }

    /// Writes the action's tokens into a copy of this state.
    pub fn apply(&self, action: &Action) -> Result<SeqState> {
        self.validate(action)?;
        let mut tokens = self.tokens.clone();
        for &(position, token) in action.pairs() {
            tokens[position] = token;
        }
        Ok(SeqState {
            tokens,
            vocab_size: self.vocab_size,
        })
    }
}

/// A set of `(position, token)` pairs committed in one step.
///
/// Pairs are kept sorted by position, so two actions with the same pairs
/// compare equal regardless of the order they were proposed in.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action {
    pairs: Vec<(usize, u32)>,
}

impl Action {
    pub fn new(mut pairs: Vec<(usize, u32)>) -> Result<Self> {
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicatePosition(w[0].0));
        }
        if let Some(&(_, token)) = pairs.iter().find(|(_, t)| *t == MASK) {
            return Err(Error::TokenOutOfRange {
                token,
                vocab_size: 0,
            });
        }
        Ok(Self { pairs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &[(usize, u32)] {
        &self.pairs
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(tokens: &[u32]) -> SeqState {
        SeqState::new(tokens.to_vec(), 3).unwrap()
    }

    #[test]
    fn single_write() {
        let next = state(&[0, 0, 3])
            .apply(&Action::new(vec![(0, 1)]).unwrap())
            .unwrap();
        assert_eq!(next.tokens(), &[1, 0, 3]);
        assert_eq!(next.masked_positions(), vec![1]);
    }

    #[test]
    fn empty_action_is_identity() {
        let s = state(&[0, 0]);
        assert_eq!(s.apply(&Action::empty()).unwrap(), s);
    }

    #[test]
    fn full_unmask() {
        let next = state(&[0, 0])
            .apply(&Action::new(vec![(1, 1), (0, 2)]).unwrap())
            .unwrap();
        assert_eq!(next.tokens(), &[2, 1]);
        assert!(next.is_complete());
    }

    #[test]
    fn reapplying_errors() {
        let action = Action::new(vec![(0, 1)]).unwrap();
        let once = state(&[0, 0]).apply(&action).unwrap();
        assert_eq!(once.apply(&action), Err(Error::PositionNotMasked(0)));
    }

    #[test]
    fn rejects_bad_actions() {
        assert_eq!(
            Action::new(vec![(1, 1), (1, 2)]),
            Err(Error::DuplicatePosition(1))
        );
        assert!(Action::new(vec![(0, MASK)]).is_err());
        let s = state(&[0, 0]);
        assert!(matches!(
            s.apply(&Action::new(vec![(0, 4)]).unwrap()),
            Err(Error::TokenOutOfRange { token: 4, .. })
        ));
        assert!(matches!(
            s.apply(&Action::new(vec![(5, 1)]).unwrap()),
            Err(Error::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_bad_states() {
        assert!(SeqState::new(vec![0, 4], 3).is_err());
        assert!(SeqState::new(vec![], 3).is_err());
        assert!(SeqState::new(vec![0], 1).is_err());
    }
}
