//! Tree-based pseudo-LRU.
//!
//! The N lines are the leaves of a complete binary tree (N a power of two).
//! Each internal node carries a tag bit drawn as an arrow to one child; the
//! leaf reached by following arrows from the root is the eviction victim.
//! Accessing a line "adjusts tags away" from it: every tag on the root path
//! is set to point at the sibling subtree.
//!
//! Heap layout: internal node k has children 2k+1 and 2k+2; leaf j sits at
//! heap index (N-1)+j, so leaves are lines 0..N-1 left to right.

use super::AccessOutcome;
use crate::cfg::BlockId;
use std::fmt;

/// PLRU cache-set state: line contents plus the N−1 tag bits
/// (`false` = arrow points left, `true` = right).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlruState {
    lines: Vec<Option<BlockId>>,
    tags: Vec<bool>,
}

impl PlruState {
    /// All lines empty, all tags pointing left.
    pub fn empty(ways: usize) -> Self {
        assert!(ways.is_power_of_two(), "PLRU ways must be a power of two");
        PlruState { lines: vec![None; ways], tags: vec![false; ways - 1] }
    }

    pub fn new(lines: Vec<Option<BlockId>>, tags: Vec<bool>) -> Self {
        let ways = lines.len();
        assert!(ways.is_power_of_two() && tags.len() == ways - 1);
        let state = PlruState { lines, tags };
        assert!(state.distinct(), "PLRU lines must hold pairwise distinct blocks");
        state
    }

    pub fn ways(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[Option<BlockId>] {
        &self.lines
    }

    pub fn tags(&self) -> &[bool] {
        &self.tags
    }

    pub fn contains(&self, block: BlockId) -> bool {
        self.lines.contains(&Some(block))
    }

    pub fn line_of(&self, block: BlockId) -> Option<usize> {
        self.lines.iter().position(|&l| l == Some(block))
    }

    /// The line reached by following the tag arrows from the root.
    pub fn pointed_line(&self) -> usize {
        let ways = self.ways();
        let mut k = 0;
        while k < ways - 1 {
            k = if self.tags[k] { 2 * k + 2 } else { 2 * k + 1 };
        }
        k - (ways - 1)
    }

    pub(crate) fn distinct(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.lines.iter().flatten().all(|b| seen.insert(*b))
    }

    fn adjust_away(&mut self, line: usize) {
        let ways = self.ways();
        let mut k = (ways - 1) + line;
        while k > 0 {
            let parent = (k - 1) / 2;
            // Point at the sibling: left child means the arrow goes right.
            self.tags[parent] = k == 2 * parent + 1;
            k = parent;
        }
    }
}

impl fmt::Display for PlruState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lines=[")?;
        for (i, l) in self.lines.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match l {
                Some(b) => write!(f, "{b}")?,
                None => write!(f, "_")?,
            }
        }
        write!(f, "] tags=")?;
        for &t in &self.tags {
            write!(f, "{}", if t { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// One access: hit adjusts tags away from the block's line; a miss fills the
/// leftmost empty line, or evicts the pointed-at line when the set is full.
pub fn plru_access(state: &PlruState, ways: usize, block: BlockId) -> (PlruState, AccessOutcome) {
    debug_assert_eq!(state.ways(), ways);
    let mut next = state.clone();
    if let Some(line) = next.line_of(block) {
        next.adjust_away(line);
        return (next, AccessOutcome::Hit);
    }
    let line = match next.lines.iter().position(Option::is_none) {
        Some(empty) => empty,
        None => next.pointed_line(),
    };
    next.lines[line] = Some(block);
    next.adjust_away(line);
    (next, AccessOutcome::Miss)
}
