//! FIFO: age-ordered queue, no rejuvenation on hit.

use super::AccessOutcome;
use crate::cfg::BlockId;
use std::fmt;

/// FIFO cache-set state: a word of at most N pairwise-distinct blocks,
/// oldest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FifoState {
    word: Vec<BlockId>,
}

impl FifoState {
    pub fn empty() -> Self {
        FifoState { word: Vec::new() }
    }

    pub fn from_blocks(blocks: &[BlockId]) -> Self {
        let state = FifoState { word: blocks.to_vec() };
        assert!(state.distinct(), "FIFO word must have pairwise distinct blocks");
        state
    }

    pub fn word(&self) -> &[BlockId] {
        &self.word
    }

    pub fn contains(&self, block: BlockId) -> bool {
        self.word.contains(&block)
    }

    pub(crate) fn distinct(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.word.iter().all(|b| seen.insert(*b))
    }
}

impl fmt::Display for FifoState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.word.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// One access. A hit leaves the state unchanged; a miss appends, discarding
/// the oldest block if the word is full.
pub fn fifo_access(state: &FifoState, ways: usize, block: BlockId) -> (FifoState, AccessOutcome) {
    if state.word.contains(&block) {
        return (state.clone(), AccessOutcome::Hit);
    }
    let mut word = state.word.clone();
    if word.len() == ways {
        word.remove(0);
    }
    word.push(block);
    (FifoState { word }, AccessOutcome::Miss)
}
