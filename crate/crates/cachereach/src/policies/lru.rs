//! LRU: age-ordered queue with rejuvenation on hit.

use super::AccessOutcome;
use crate::cfg::BlockId;
use std::fmt;

/// LRU cache-set state: a word of at most N pairwise-distinct blocks,
/// oldest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LruState {
    word: Vec<BlockId>,
}

impl LruState {
    pub fn empty() -> Self {
        LruState { word: Vec::new() }
    }

    /// Builds a state from an oldest-first word; panics on duplicates.
    pub fn from_blocks(blocks: &[BlockId]) -> Self {
        let state = LruState { word: blocks.to_vec() };
        assert!(state.distinct(), "LRU word must have pairwise distinct blocks");
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

impl fmt::Display for LruState {
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

/// One access. On a hit the block is moved to the youngest position; on a
/// miss it is appended, discarding the oldest block if the word is full.
pub fn lru_access(state: &LruState, ways: usize, block: BlockId) -> (LruState, AccessOutcome) {
    let mut word = state.word.clone();
    if let Some(pos) = word.iter().position(|&b| b == block) {
        word.remove(pos);
        word.push(block);
        (LruState { word }, AccessOutcome::Hit)
    } else {
        if word.len() == ways {
            word.remove(0);
        }
        word.push(block);
        (LruState { word }, AccessOutcome::Miss)
    }
}

/// Independent membership criterion: after a trace from an empty cache,
/// `block` is cached iff it was accessed and the suffix after its last
/// access contains at most N−1 distinct blocks.
pub fn lru_membership_oracle(trace: &[BlockId], ways: usize, block: BlockId) -> bool {
    let Some(last) = trace.iter().rposition(|&b| b == block) else {
        return false;
    };
    let distinct: std::collections::HashSet<_> = trace[last + 1..].iter().collect();
    distinct.len() <= ways.saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::BlockId;

    fn blk(s: &str) -> BlockId {
        BlockId::new(s).unwrap()
    }

    fn run(trace: &str, ways: usize) -> LruState {
        let mut state = LruState::empty();
        for c in trace.chars() {
            state = lru_access(&state, ways, blk(&c.to_string())).0;
        }
        state
    }

    #[test]
    fn worked_example_retains_a() {
        // bcabdcdb: the suffix after the access to a has 3 distinct blocks.
        let state = run("bcabdcdb", 4);
        assert!(state.contains(blk("a")));
        assert!(lru_membership_oracle(
            &"bcabdcdb".chars().map(|c| blk(&c.to_string())).collect::<Vec<_>>(),
            4,
            blk("a")
        ));
    }

    #[test]
    fn worked_example_evicts_a() {
        let state = run("bcabdceb", 4);
        assert!(!state.contains(blk("a")));
        assert!(!lru_membership_oracle(
            &"bcabdceb".chars().map(|c| blk(&c.to_string())).collect::<Vec<_>>(),
            4,
            blk("a")
        ));
    }

    #[test]
    fn singleton_rejuvenation() {
        let state = LruState::from_blocks(&[blk("a")]);
        let (next, outcome) = lru_access(&state, 4, blk("a"));
        assert_eq!(outcome, AccessOutcome::Hit);
        assert_eq!(next.word(), &[blk("a")]);
    }

    #[test]
    fn oracle_on_empty_trace() {
        assert!(!lru_membership_oracle(&[], 4, blk("a")));
    }
}
