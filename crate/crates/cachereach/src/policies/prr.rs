//! Pseudo-round-robin: FIFO-like sets coupled by one global eviction index.
//!
//! Every set is an array of N slots; a miss writes the block at the shared
//! `next` index of its set (whether or not that slot was occupied) and then
//! advances `next` for all sets. A hit changes nothing.
//!
//! Blocks address their set through their name: a label `k:name` lives in
//! set k, any other label in set 0.

use super::{AccessOutcome, PolicyError};
use crate::cfg::BlockId;
use std::fmt;

/// Pseudo-RR cache state: per-set slot arrays plus the global index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrrState {
    slots: Vec<Vec<Option<BlockId>>>,
    next: usize,
}

impl PrrState {
    pub fn empty(sets: usize, ways: usize) -> Self {
        PrrState { slots: vec![vec![None; ways]; sets], next: 0 }
    }

    pub fn new(slots: Vec<Vec<Option<BlockId>>>, next: usize) -> Self {
        let state = PrrState { slots, next };
        assert!(state.distinct_within_sets(), "PRR slots must be distinct within a set");
        state
    }

    pub fn sets(&self) -> usize {
        self.slots.len()
    }

    pub fn set_slots(&self, set: usize) -> &[Option<BlockId>] {
        &self.slots[set]
    }

    pub fn next(&self) -> usize {
        self.next
    }

    pub fn set_contains(&self, set: usize, block: BlockId) -> bool {
        self.slots[set].contains(&Some(block))
    }

    pub(crate) fn distinct_within_sets(&self) -> bool {
        self.slots.iter().all(|set| {
            let mut seen = std::collections::HashSet::new();
            set.iter().flatten().all(|b| seen.insert(*b))
        })
    }
}

impl fmt::Display for PrrState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, set) in self.slots.iter().enumerate() {
            write!(f, "set{s}=[")?;
            for (i, slot) in set.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                match slot {
                    Some(b) => write!(f, "{b}")?,
                    None => write!(f, "_")?,
                }
            }
            write!(f, "] ")?;
        }
        write!(f, "next={}", self.next)
    }
}

/// The set a block name addresses: a leading `<digits>:` prefix selects the
/// set; names without one live in set 0.
pub fn block_set_index(block: BlockId, sets: usize) -> Result<usize, PolicyError> {
    let name = block.as_str();
    let set = match name.split_once(':') {
        Some((prefix, _)) if !prefix.is_empty() && prefix.bytes().all(|b| b.is_ascii_digit()) => {
            prefix.parse::<usize>().map_err(|_| PolicyError::SetIndexOutOfRange {
                block: name.to_owned(),
                set: usize::MAX,
                sets,
            })?
        }
        _ => 0,
    };
    if set >= sets {
        return Err(PolicyError::SetIndexOutOfRange { block: name.to_owned(), set, sets });
    }
    Ok(set)
}

/// One access in an explicit set. On a miss the block overwrites slot
/// `next` of that set and the shared index advances; hits change nothing.
pub fn prr_access(
    state: &PrrState,
    ways: usize,
    set_index: usize,
    block: BlockId,
) -> (PrrState, AccessOutcome) {
    if state.set_contains(set_index, block) {
        return (state.clone(), AccessOutcome::Hit);
    }
    let mut next_state = state.clone();
    next_state.slots[set_index][state.next] = Some(block);
    next_state.next = (state.next + 1) % ways;
    (next_state, AccessOutcome::Miss)
}
