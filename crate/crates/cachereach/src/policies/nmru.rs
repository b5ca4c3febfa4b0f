//! NMRU ("not most recently used", PLRU-m): per-line MRU bits.
//!
//! The victim on a full miss is the leftmost line whose MRU bit is 0. The
//! defining invariant is that a full cache always keeps at least one zero
//! bit: whenever an access would leave a full cache all-ones, every bit
//! except the accessed block's is reset to 0.

use super::AccessOutcome;
use crate::cfg::BlockId;
use std::fmt;

/// NMRU cache-set state: a sequence of at most N (block, MRU-bit) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NmruState {
    entries: Vec<(BlockId, bool)>,
}

impl NmruState {
    pub fn empty() -> Self {
        NmruState { entries: Vec::new() }
    }

    pub fn from_entries(entries: &[(BlockId, bool)]) -> Self {
        let state = NmruState { entries: entries.to_vec() };
        assert!(state.distinct(), "NMRU entries must hold pairwise distinct blocks");
        state
    }

    pub fn entries(&self) -> &[(BlockId, bool)] {
        &self.entries
    }

    pub fn contains(&self, block: BlockId) -> bool {
        self.entries.iter().any(|&(b, _)| b == block)
    }

    pub(crate) fn distinct(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.entries.iter().all(|&(b, _)| seen.insert(b))
    }

    /// The stated invariant: a full cache keeps at least one zero bit.
    pub fn invariant_holds(&self, ways: usize) -> bool {
        self.entries.len() < ways || self.entries.iter().any(|&(_, bit)| !bit)
    }
}

impl fmt::Display for NmruState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (b, bit)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}^{}", b, u8::from(*bit))?;
        }
        if self.entries.is_empty() {
            write!(f, "[]")?;
        }
        Ok(())
    }
}

/// One access. Hit: set the block's bit. Miss: append when not full, else
/// replace the leftmost zero-bit entry. If the cache is then full with all
/// bits set, every bit except the accessed block's resets to 0.
pub fn nmru_access(state: &NmruState, ways: usize, block: BlockId) -> (NmruState, AccessOutcome) {
    let mut entries = state.entries.clone();
    let outcome;
    let accessed;
    if let Some(pos) = entries.iter().position(|&(b, _)| b == block) {
        entries[pos].1 = true;
        accessed = pos;
        outcome = AccessOutcome::Hit;
    } else if entries.len() < ways {
        entries.push((block, true));
        accessed = entries.len() - 1;
        outcome = AccessOutcome::Miss;
    } else {
        let pos = entries
            .iter()
            .position(|&(_, bit)| !bit)
            .expect("full NMRU cache must keep a zero MRU-bit");
        entries[pos] = (block, true);
        accessed = pos;
        outcome = AccessOutcome::Miss;
    }
    if entries.len() == ways && entries.iter().all(|&(_, bit)| bit) {
        // A 1-way set has no "other" bits: its only bit stays 0 so the
        // invariant (a full cache keeps a zero bit) still holds.
        for (i, entry) in entries.iter_mut().enumerate() {
            if i != accessed || ways == 1 {
                entry.1 = false;
            }
        }
    }
    (NmruState { entries }, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(s: &str) -> BlockId {
        BlockId::new(s).unwrap()
    }

    fn state(spec: &[(&str, u8)]) -> NmruState {
        NmruState::from_entries(
            &spec.iter().map(|&(b, bit)| (blk(b), bit == 1)).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn worked_example() {
        // a0 b0 c0 --d--> a0 b0 c0 d1 --a--> a1 b0 c0 d1
        //          --e--> a1 e1 c0 d1 --f--> a0 e0 f1 d0
        let s0 = state(&[("a", 0), ("b", 0), ("c", 0)]);
        let (s1, o1) = nmru_access(&s0, 4, blk("d"));
        assert_eq!(o1, AccessOutcome::Miss);
        assert_eq!(s1, state(&[("a", 0), ("b", 0), ("c", 0), ("d", 1)]));
        let (s2, o2) = nmru_access(&s1, 4, blk("a"));
        assert_eq!(o2, AccessOutcome::Hit);
        assert_eq!(s2, state(&[("a", 1), ("b", 0), ("c", 0), ("d", 1)]));
        let (s3, _) = nmru_access(&s2, 4, blk("e"));
        assert_eq!(s3, state(&[("a", 1), ("e", 1), ("c", 0), ("d", 1)]));
        let (s4, _) = nmru_access(&s3, 4, blk("f"));
        assert_eq!(s4, state(&[("a", 0), ("e", 0), ("f", 1), ("d", 0)]));
        assert!(s4.contains(blk("d")));
    }

    #[test]
    fn fill_to_full_triggers_reset() {
        let mut s = NmruState::empty();
        for b in ["x", "y", "z"] {
            s = nmru_access(&s, 3, blk(b)).0;
        }
        assert_eq!(s, state(&[("x", 0), ("y", 0), ("z", 1)]));
        assert!(s.invariant_holds(3));
    }

    #[test]
    fn hit_on_set_bit_is_stable_when_not_all_ones() {
        let s = state(&[("a", 1), ("b", 0), ("c", 0), ("d", 1)]);
        let (next, outcome) = nmru_access(&s, 4, blk("a"));
        assert_eq!(outcome, AccessOutcome::Hit);
        assert_eq!(next, s);
    }

    #[test]
    fn no_reset_while_the_cache_is_not_full() {
        // Bits reset only when a full cache would go all-ones; a non-full
        // all-ones cache keeps its bits (the invariant constrains full
        // caches only).
        let s = state(&[("a", 1), ("b", 1)]);
        let (next, outcome) = nmru_access(&s, 4, blk("a"));
        assert_eq!(outcome, AccessOutcome::Hit);
        assert_eq!(next, s);
        let (next, outcome) = nmru_access(&s, 4, blk("c"));
        assert_eq!(outcome, AccessOutcome::Miss);
        assert_eq!(next, state(&[("a", 1), ("b", 1), ("c", 1)]));
    }

    #[test]
    fn one_way_set_degenerates_to_always_replace() {
        let mut s = NmruState::empty();
        for b in ["x", "y", "x"] {
            let (next, outcome) = nmru_access(&s, 1, blk(b));
            assert_eq!(outcome, AccessOutcome::Miss);
            assert_eq!(next, state(&[(b, 0)]));
            assert!(next.invariant_holds(1));
            s = next;
        }
        let (next, outcome) = nmru_access(&s, 1, blk("x"));
        assert_eq!(outcome, AccessOutcome::Hit);
        assert_eq!(next, state(&[("x", 0)]));
    }

    #[test]
    fn display_matches_exponent_notation() {
        assert_eq!(
            state(&[("a", 0), ("e", 0), ("f", 1), ("d", 0)]).to_string(),
            "a^0 e^0 f^1 d^0"
        );
    }
}
