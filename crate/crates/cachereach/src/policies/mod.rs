//! Exact single-set cache semantics for LRU, FIFO, PLRU, NMRU and the
//! multi-set pseudo-RR model: trace evaluation, canonical state encoding and
//! legal-initial-state enumeration.
//!
//! All state values are immutable and the access operations are pure
//! (state in, state out), so everything here is safe to share across
//! concurrent analyses.

mod fifo;
mod lru;
mod nmru;
mod plru;
mod prr;

pub use fifo::{fifo_access, FifoState};
pub use lru::{lru_access, lru_membership_oracle, LruState};
pub use nmru::{nmru_access, NmruState};
pub use plru::{plru_access, PlruState};
pub use prr::{block_set_index, prr_access, PrrState};

use crate::cfg::BlockId;
use std::fmt;
use thiserror::Error;

/// Replacement policy selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    Lru,
    Fifo,
    Plru,
    Nmru,
    Prr,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Lru => "lru",
            Policy::Fifo => "fifo",
            Policy::Plru => "plru",
            Policy::Nmru => "nmru",
            Policy::Prr => "prr",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Policy {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lru" => Ok(Policy::Lru),
            "fifo" => Ok(Policy::Fifo),
            "plru" => Ok(Policy::Plru),
            "nmru" => Ok(Policy::Nmru),
            "prr" => Ok(Policy::Prr),
            other => Err(PolicyError::UnknownPolicy(other.to_owned())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
    #[error("ways must be at least 1")]
    ZeroWays,
    #[error("PLRU ways must be a power of two, got {0}")]
    PlruWaysNotPowerOfTwo(usize),
    #[error("sets must be at least 1")]
    ZeroSets,
    #[error("policy {0} models a single cache set")]
    SetsOnNonPrr(Policy),
    #[error("block {block:?} addresses set {set} but the cache has {sets} sets")]
    SetIndexOutOfRange { block: String, set: usize, sets: usize },
}

/// Cache configuration: policy, associativity, and (for pseudo-RR) set count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheConfig {
    pub policy: Policy,
    pub ways: usize,
    pub sets: usize,
}

impl CacheConfig {
    pub fn new(policy: Policy, ways: usize) -> Result<Self, PolicyError> {
        Self::with_sets(policy, ways, 1)
    }

    pub fn with_sets(policy: Policy, ways: usize, sets: usize) -> Result<Self, PolicyError> {
        if ways == 0 {
            return Err(PolicyError::ZeroWays);
        }
        if policy == Policy::Plru && !ways.is_power_of_two() {
            return Err(PolicyError::PlruWaysNotPowerOfTwo(ways));
        }
        if sets == 0 {
            return Err(PolicyError::ZeroSets);
        }
        if sets > 1 && policy != Policy::Prr {
            return Err(PolicyError::SetsOnNonPrr(policy));
        }
        Ok(CacheConfig { policy, ways, sets })
    }
}

/// Hit or miss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessOutcome {
    Hit,
    Miss,
}

/// State of one cache under any of the five policies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CacheState {
    Lru(LruState),
    Fifo(FifoState),
    Plru(PlruState),
    Nmru(NmruState),
    Prr(PrrState),
}

/// The empty cache for `config`: empty words, all-left PLRU tags, all slots
/// empty with the pseudo-RR index at 0.
pub fn empty_state(config: &CacheConfig) -> CacheState {
    match config.policy {
        Policy::Lru => CacheState::Lru(LruState::empty()),
        Policy::Fifo => CacheState::Fifo(FifoState::empty()),
        Policy::Plru => CacheState::Plru(PlruState::empty(config.ways)),
        Policy::Nmru => CacheState::Nmru(NmruState::empty()),
        Policy::Prr => CacheState::Prr(PrrState::empty(config.sets, config.ways)),
    }
}

impl CacheState {
    /// Applies one access; the set index for pseudo-RR comes from the block
    /// name (`k:name`).
    pub fn access(&self, config: &CacheConfig, block: BlockId) -> Result<(CacheState, AccessOutcome), PolicyError> {
        let set = match self {
            CacheState::Prr(_) => block_set_index(block, config.sets)?,
            _ => 0,
        };
        self.access_in_set(config, set, block)
    }

    /// Applies one access with an explicit set index (ignored except for
    /// pseudo-RR).
    pub fn access_in_set(
        &self,
        config: &CacheConfig,
        set: usize,
        block: BlockId,
    ) -> Result<(CacheState, AccessOutcome), PolicyError> {
        Ok(match self {
            CacheState::Lru(s) => {
                let (s, o) = lru_access(s, config.ways, block);
                (CacheState::Lru(s), o)
            }
            CacheState::Fifo(s) => {
                let (s, o) = fifo_access(s, config.ways, block);
                (CacheState::Fifo(s), o)
            }
            CacheState::Plru(s) => {
                let (s, o) = plru_access(s, config.ways, block);
                (CacheState::Plru(s), o)
            }
            CacheState::Nmru(s) => {
                let (s, o) = nmru_access(s, config.ways, block);
                (CacheState::Nmru(s), o)
            }
            CacheState::Prr(s) => {
                if set >= config.sets {
                    return Err(PolicyError::SetIndexOutOfRange {
                        block: block.as_str().to_owned(),
                        set,
                        sets: config.sets,
                    });
                }
                let (s, o) = prr_access(s, config.ways, set, block);
                (CacheState::Prr(s), o)
            }
        })
    }

    /// Membership; for pseudo-RR the block's own name designates the set.
    pub fn contains(&self, block: BlockId) -> bool {
        match self {
            CacheState::Lru(s) => s.contains(block),
            CacheState::Fifo(s) => s.contains(block),
            CacheState::Plru(s) => s.contains(block),
            CacheState::Nmru(s) => s.contains(block),
            CacheState::Prr(s) => match block_set_index(block, s.sets()) {
                Ok(set) => s.set_contains(set, block),
                Err(_) => false,
            },
        }
    }

    /// Injective byte encoding of the state (for a fixed config), used to
    /// deduplicate product states during search.
    pub fn canonical_key(&self) -> Vec<u8> {
        fn push_block(out: &mut Vec<u8>, b: Option<BlockId>) {
            let id = b.map_or(u32::MAX, |b| b.symbol().id());
            out.extend_from_slice(&id.to_le_bytes());
        }
        let mut out = Vec::new();
        match self {
            CacheState::Lru(s) => {
                out.push(0);
                for &b in s.word() {
                    push_block(&mut out, Some(b));
                }
            }
            CacheState::Fifo(s) => {
                out.push(1);
                for &b in s.word() {
                    push_block(&mut out, Some(b));
                }
            }
            CacheState::Plru(s) => {
                out.push(2);
                for &l in s.lines() {
                    push_block(&mut out, l);
                }
                out.extend(s.tags().iter().map(|&t| u8::from(t)));
            }
            CacheState::Nmru(s) => {
                out.push(3);
                for &(b, bit) in s.entries() {
                    push_block(&mut out, Some(b));
                    out.push(u8::from(bit));
                }
            }
            CacheState::Prr(s) => {
                out.push(4);
                out.extend_from_slice(&(s.next() as u32).to_le_bytes());
                for set in 0..s.sets() {
                    for &slot in s.set_slots(set) {
                        push_block(&mut out, slot);
                    }
                }
            }
        }
        out
    }

    /// Checks the state's type invariants under `config` (test support).
    pub fn invariants_hold(&self, config: &CacheConfig) -> bool {
        match self {
            CacheState::Lru(s) => s.distinct() && s.word().len() <= config.ways,
            CacheState::Fifo(s) => s.distinct() && s.word().len() <= config.ways,
            CacheState::Plru(s) => {
                s.distinct() && s.ways() == config.ways && config.ways.is_power_of_two()
            }
            CacheState::Nmru(s) => {
                s.distinct() && s.entries().len() <= config.ways && s.invariant_holds(config.ways)
            }
            CacheState::Prr(s) => {
                s.distinct_within_sets() && s.sets() == config.sets && s.next() < config.ways
            }
        }
    }
}

impl fmt::Display for CacheState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CacheState::Lru(s) => write!(f, "{s}"),
            CacheState::Fifo(s) => write!(f, "{s}"),
            CacheState::Plru(s) => write!(f, "{s}"),
            CacheState::Nmru(s) => write!(f, "{s}"),
            CacheState::Prr(s) => write!(f, "{s}"),
        }
    }
}

/// Left fold of accesses over a state; the set index is ignored for
/// single-set policies.
pub fn run_trace(
    config: &CacheConfig,
    state: &CacheState,
    accesses: &[(usize, BlockId)],
) -> Result<(CacheState, Vec<AccessOutcome>), PolicyError> {
    let mut current = state.clone();
    let mut outcomes = Vec::with_capacity(accesses.len());
    for &(set, block) in accesses {
        let (next, outcome) = current.access_in_set(config, set, block)?;
        current = next;
        outcomes.push(outcome);
    }
    Ok((current, outcomes))
}

/// Enumeration of the legal initial cache states whose blocks come from
/// `universe` ∪ `extra` plus canonical placeholder blocks standing for
/// arbitrary unknown residents.
///
/// Placeholders are interchangeable fresh blocks, so symmetry is broken by
/// requiring them to appear in index order when the state is scanned left to
/// right (set-major for pseudo-RR). The enumeration is graded: small states
/// come first, and states are produced lazily level by level.
pub fn enumerate_initial_states(
    config: &CacheConfig,
    universe: &[BlockId],
    extra: &[BlockId],
) -> Box<dyn Iterator<Item = CacheState>> {
    let mut alphabet: Vec<BlockId> = Vec::new();
    for &b in universe.iter().chain(extra) {
        if !alphabet.contains(&b) {
            alphabet.push(b);
        }
    }
    let ph_count = match config.policy {
        Policy::Prr => config.ways * config.sets,
        _ => config.ways,
    };
    let placeholders = placeholder_blocks(ph_count, &alphabet);
    let ways = config.ways;
    match config.policy {
        Policy::Lru => Box::new(
            InjectiveWords::new(alphabet, placeholders, ways)
                .map(|w| CacheState::Lru(LruState::from_blocks(&w))),
        ),
        Policy::Fifo => Box::new(
            InjectiveWords::new(alphabet, placeholders, ways)
                .map(|w| CacheState::Fifo(FifoState::from_blocks(&w))),
        ),
        Policy::Nmru => Box::new(
            InjectiveWords::new(alphabet, placeholders, ways).flat_map(move |w| {
                let len = w.len();
                (0..1u32 << len)
                    .filter(move |bits| len < ways || *bits != (1 << len) - 1)
                    .map(move |bits| {
                        let entries: Vec<_> =
                            w.iter().enumerate().map(|(i, &b)| (b, bits >> i & 1 == 1)).collect();
                        CacheState::Nmru(NmruState::from_entries(&entries))
                    })
                    .collect::<Vec<_>>()
            }),
        ),
        Policy::Plru => Box::new((0..=ways).flat_map(move |k| {
            let words = injective_words_exact(&alphabet, &placeholders, k);
            let mut level = Vec::new();
            for combo in combinations(ways, k) {
                for word in &words {
                    for tagbits in 0..1u32 << (ways - 1) {
                        let mut lines = vec![None; ways];
                        for (slot, &b) in combo.iter().zip(word) {
                            lines[*slot] = Some(b);
                        }
                        let tags = (0..ways - 1).map(|i| tagbits >> i & 1 == 1).collect();
                        level.push(CacheState::Plru(PlruState::new(lines, tags)));
                    }
                }
            }
            level
        })),
        Policy::Prr => {
            let sets = config.sets;
            let contents = prr_slot_assignments(sets, ways, &alphabet, &placeholders);
            Box::new(contents.into_iter().flat_map(move |slots| {
                (0..ways)
                    .map(move |next| CacheState::Prr(PrrState::new(slots.clone(), next)))
                    .collect::<Vec<_>>()
            }))
        }
    }
}

/// Canonical placeholder blocks `_bot_1`, `_bot_2`, … skipping any name the
/// instance already uses.
fn placeholder_blocks(count: usize, taken: &[BlockId]) -> Vec<BlockId> {
    let mut out = Vec::with_capacity(count);
    let mut k = 1usize;
    while out.len() < count {
        let candidate = BlockId::new(&format!("_bot_{k}")).expect("placeholder name is valid");
        if !taken.contains(&candidate) {
            out.push(candidate);
        }
        k += 1;
    }
    out
}

/// All injective words over `alpha` plus order-disciplined placeholders, in
/// level order: every word of length k before any word of length k+1.
struct InjectiveWords {
    alpha: Vec<BlockId>,
    placeholders: Vec<BlockId>,
    max_len: usize,
    level: Vec<Vec<BlockId>>,
    len: usize,
    idx: usize,
}

impl InjectiveWords {
    fn new(alpha: Vec<BlockId>, placeholders: Vec<BlockId>, max_len: usize) -> Self {
        InjectiveWords { alpha, placeholders, max_len, level: vec![Vec::new()], len: 0, idx: 0 }
    }

    fn extensions(&self, word: &[BlockId]) -> Vec<Vec<BlockId>> {
        let ph_used = word.iter().filter(|b| self.placeholders.contains(b)).count();
        let mut out = Vec::new();
        for &a in &self.alpha {
            if !word.contains(&a) {
                let mut next = word.to_vec();
                next.push(a);
                out.push(next);
            }
        }
        if ph_used < self.placeholders.len() {
            let mut next = word.to_vec();
            next.push(self.placeholders[ph_used]);
            out.push(next);
        }
        out
    }
}

impl Iterator for InjectiveWords {
    type Item = Vec<BlockId>;

    fn next(&mut self) -> Option<Vec<BlockId>> {
        loop {
            if self.idx < self.level.len() {
                self.idx += 1;
                return Some(self.level[self.idx - 1].clone());
            }
            if self.len >= self.max_len {
                return None;
            }
            let next: Vec<Vec<BlockId>> =
                self.level.iter().flat_map(|w| self.extensions(w)).collect();
            if next.is_empty() {
                return None;
            }
            self.level = next;
            self.len += 1;
            self.idx = 0;
        }
    }
}

fn injective_words_exact(alpha: &[BlockId], placeholders: &[BlockId], len: usize) -> Vec<Vec<BlockId>> {
    let mut level = vec![Vec::new()];
    let words = InjectiveWords::new(alpha.to_vec(), placeholders.to_vec(), len);
    for _ in 0..len {
        level = level.iter().flat_map(|w| words.extensions(w)).collect();
    }
    level
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Per-set slot assignments for pseudo-RR: within each set, slots hold
/// pairwise-distinct blocks that address that set; placeholders are shared
/// across sets in global scan order.
fn prr_slot_assignments(
    sets: usize,
    ways: usize,
    alphabet: &[BlockId],
    placeholders: &[BlockId],
) -> Vec<Vec<Vec<Option<BlockId>>>> {
    let alpha_by_set: Vec<Vec<BlockId>> = (0..sets)
        .map(|s| {
            alphabet
                .iter()
                .copied()
                .filter(|&b| block_set_index(b, sets) == Ok(s))
                .collect()
        })
        .collect();
    struct Search<'a> {
        sets: usize,
        ways: usize,
        alpha_by_set: &'a [Vec<BlockId>],
        placeholders: &'a [BlockId],
        results: Vec<Vec<Vec<Option<BlockId>>>>,
    }
    impl Search<'_> {
        fn rec(&mut self, pos: usize, ph_used: usize, slots: &mut Vec<Vec<Option<BlockId>>>) {
            if pos == self.sets * self.ways {
                self.results.push(slots.clone());
                return;
            }
            let (set, slot) = (pos / self.ways, pos % self.ways);
            slots[set][slot] = None;
            self.rec(pos + 1, ph_used, slots);
            for i in 0..self.alpha_by_set[set].len() {
                let b = self.alpha_by_set[set][i];
                if !slots[set][..slot].contains(&Some(b)) {
                    slots[set][slot] = Some(b);
                    self.rec(pos + 1, ph_used, slots);
                }
            }
            if ph_used < self.placeholders.len() {
                slots[set][slot] = Some(self.placeholders[ph_used]);
                self.rec(pos + 1, ph_used + 1, slots);
            }
            slots[set][slot] = None;
        }
    }
    let mut search =
        Search { sets, ways, alpha_by_set: &alpha_by_set, placeholders, results: Vec::new() };
    let mut slots = vec![vec![None; ways]; sets];
    search.rec(0, 0, &mut slots);
    search.results
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(s: &str) -> BlockId {
        BlockId::new(s).unwrap()
    }

    #[test]
    fn empty_states_per_policy() {
        let lru = empty_state(&CacheConfig::new(Policy::Lru, 4).unwrap());
        assert!(matches!(&lru, CacheState::Lru(s) if s.word().is_empty()));
        let plru = empty_state(&CacheConfig::new(Policy::Plru, 8).unwrap());
        match &plru {
            CacheState::Plru(s) => {
                assert_eq!(s.lines().len(), 8);
                assert!(s.lines().iter().all(Option::is_none));
                assert_eq!(s.tags(), &[false; 7]);
            }
            _ => unreachable!(),
        }
        assert_eq!(
            CacheConfig::new(Policy::Plru, 6).unwrap_err(),
            PolicyError::PlruWaysNotPowerOfTwo(6)
        );
    }

    #[test]
    fn canonical_keys_distinguish_order_and_tags() {
        let ab = CacheState::Lru(LruState::from_blocks(&[blk("a"), blk("b")]));
        let ba = CacheState::Lru(LruState::from_blocks(&[blk("b"), blk("a")]));
        assert_eq!(ab.canonical_key(), ab.clone().canonical_key());
        assert_ne!(ab.canonical_key(), ba.canonical_key());

        let lines = vec![Some(blk("a")), Some(blk("b"))];
        let left = CacheState::Plru(PlruState::new(lines.clone(), vec![false]));
        let right = CacheState::Plru(PlruState::new(lines, vec![true]));
        assert_ne!(left.canonical_key(), right.canonical_key());
    }

    #[test]
    fn run_trace_folds() {
        let config = CacheConfig::new(Policy::Lru, 4).unwrap();
        let state = empty_state(&config);
        let (same, outcomes) = run_trace(&config, &state, &[]).unwrap();
        assert_eq!(same, state);
        assert!(outcomes.is_empty());
        let trace: Vec<_> = "bcabdcdb".chars().map(|c| (0, blk(&c.to_string()))).collect();
        let (end, _) = run_trace(&config, &state, &trace).unwrap();
        assert!(end.contains(blk("a")));
    }

    #[test]
    fn nmru_worked_example_via_trace() {
        let config = CacheConfig::new(Policy::Nmru, 4).unwrap();
        let start = CacheState::Nmru(NmruState::from_entries(&[
            (blk("a"), false),
            (blk("b"), false),
            (blk("c"), false),
        ]));
        let trace: Vec<_> = ["d", "a", "e", "f"].iter().map(|s| (0, blk(s))).collect();
        let (end, _) = run_trace(&config, &start, &trace).unwrap();
        assert_eq!(end.to_string(), "a^0 e^0 f^1 d^0");
        assert!(end.contains(blk("d")));
    }

    #[test]
    fn enumerate_lru_one_way() {
        let config = CacheConfig::new(Policy::Lru, 1).unwrap();
        let states: Vec<_> = enumerate_initial_states(&config, &[blk("a")], &[]).collect();
        let rendered: Vec<_> = states.iter().map(|s| s.to_string()).collect();
        assert_eq!(rendered, vec!["[]", "[a]", "[_bot_1]"]);
    }

    #[test]
    fn enumerate_fifo_two_ways_with_placeholder_discipline() {
        let config = CacheConfig::new(Policy::Fifo, 2).unwrap();
        let states: Vec<_> = enumerate_initial_states(&config, &[blk("a")], &[]).collect();
        let rendered: Vec<_> = states.iter().map(|s| s.to_string()).collect();
        assert_eq!(rendered, vec!["[]", "[a]", "[_bot_1]", "[a _bot_1]", "[_bot_1 a]", "[_bot_1 _bot_2]"]);
    }

    #[test]
    fn enumerate_respects_symmetry_quotient() {
        // Unrestricted enumeration over k named fresh blocks, quotiented by
        // placeholder renaming, must have exactly as many classes as the
        // disciplined enumeration has states.
        let config = CacheConfig::new(Policy::Fifo, 2).unwrap();
        let a = blk("a");
        let disciplined = enumerate_initial_states(&config, &[a], &[]).count();

        let ph = [blk("p1"), blk("p2")];
        let mut classes = std::collections::HashSet::new();
        let alpha = [a, ph[0], ph[1]];
        for len in 0..=2usize {
            let mut words = vec![Vec::new()];
            for _ in 0..len {
                words = words
                    .into_iter()
                    .flat_map(|w: Vec<BlockId>| {
                        alpha
                            .iter()
                            .filter(|b| !w.contains(b))
                            .map(|&b| {
                                let mut next = w.clone();
                                next.push(b);
                                next
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect();
            }
            for w in words {
                // Canonicalize: placeholders renamed by first occurrence.
                let mut order = Vec::new();
                let canon: Vec<String> = w
                    .iter()
                    .map(|&b| {
                        if b == a {
                            "a".to_owned()
                        } else {
                            let idx = match order.iter().position(|&x| x == b) {
                                Some(i) => i,
                                None => {
                                    order.push(b);
                                    order.len() - 1
                                }
                            };
                            format!("ph{idx}")
                        }
                    })
                    .collect();
                classes.insert(canon);
            }
        }
        assert_eq!(classes.len(), disciplined);
    }

    #[test]
    fn enumerate_plru_counts_tag_vectors() {
        let config = CacheConfig::new(Policy::Plru, 2).unwrap();
        let states: Vec<_> = enumerate_initial_states(&config, &[blk("a")], &[]).collect();
        // Content patterns: empty; singletons a/_bot_1 in either of 2
        // positions (4); ordered pairs (a,_bot_1),(_bot_1,a),(_bot_1,_bot_2)
        // (3). 8 patterns × 2 tag vectors.
        assert_eq!(states.len(), 16);
        assert!(states.iter().all(|s| s.invariants_hold(&config)));
    }

    #[test]
    fn enumerate_nmru_filters_full_all_ones() {
        let config = CacheConfig::new(Policy::Nmru, 2).unwrap();
        let states: Vec<_> = enumerate_initial_states(&config, &[blk("a")], &[]).collect();
        assert!(states.iter().all(|s| s.invariants_hold(&config)));
        // Words: [], 2 of length 1, 3 of length 2. Bits: length-1 words get
        // 2 vectors, full length-2 words get 3 (all-ones excluded).
        assert_eq!(states.len(), 1 + 2 * 2 + 3 * 3);
    }

    #[test]
    fn enumerate_prr_tracks_next_and_sets() {
        let config = CacheConfig::with_sets(Policy::Prr, 2, 1).unwrap();
        let states: Vec<_> = enumerate_initial_states(&config, &[blk("a")], &[]).collect();
        assert!(states.iter().all(|s| s.invariants_hold(&config)));
        // Slot patterns ×2 next values; all states distinct.
        let keys: std::collections::HashSet<_> = states.iter().map(|s| s.canonical_key()).collect();
        assert_eq!(keys.len(), states.len());
    }

    #[test]
    fn enumerate_seeds_query_block() {
        // extra blocks (e.g. the query) participate even when absent from
        // the universe.
        let config = CacheConfig::new(Policy::Lru, 1).unwrap();
        let g = blk("g");
        let states: Vec<_> = enumerate_initial_states(&config, &[], &[g]).collect();
        assert!(states.iter().any(|s| s.contains(g)));
    }
}
