//! Exist-hit / exist-miss decision by breadth-first search over the product
//! of the control-flow graph and the cache-state space.
//!
//! The search deduplicates on (node, cache state), so it terminates on
//! cyclic graphs, and being breadth-first it returns shortest witnesses in
//! the product graph. For arbitrary-start problems the legal initial states
//! are tried lazily in enumeration order and the first true verdict wins;
//! the dedup set is shared across initial states (a product state that
//! failed to reach the target once cannot reach it later either), which also
//! keeps the explored-states bound structural.

use crate::cfg::{block_universe, validate, BlockId, Cfg, Edge, NodeId, Violation};
use crate::policies::{
    empty_state, enumerate_initial_states, run_trace, AccessOutcome, CacheConfig, CacheState,
    Policy, PolicyError,
};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Which terminal cache condition is asked about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    ExistHit,
    ExistMiss,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::ExistHit => "exist-hit",
            ProblemKind::ExistMiss => "exist-miss",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exist-hit" => Ok(ProblemKind::ExistHit),
            "exist-miss" => Ok(ProblemKind::ExistMiss),
            other => Err(format!("unknown problem kind {other:?}")),
        }
    }
}

/// Initial cache contents: known empty, or existentially quantified over all
/// legal states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialMode {
    Empty,
    Arbitrary,
}

impl InitialMode {
    pub fn name(self) -> &'static str {
        match self {
            InitialMode::Empty => "empty",
            InitialMode::Arbitrary => "arbitrary",
        }
    }
}

impl fmt::Display for InitialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InitialMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "empty" => Ok(InitialMode::Empty),
            "arbitrary" => Ok(InitialMode::Arbitrary),
            other => Err(format!("unknown initial mode {other:?}")),
        }
    }
}

/// One decision problem instance (the graph and cache config come separately).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub query: BlockId,
    pub initial: InitialMode,
}

/// Search instrumentation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Product states inserted into the dedup set.
    pub product_states_explored: usize,
    /// Initial cache states tried (1 for empty-start problems).
    pub initial_states_tried: usize,
    /// Peak BFS queue length.
    pub max_frontier: usize,
    /// Distinct cache states inserted into the dedup set, over all nodes.
    pub distinct_cache_states: usize,
}

/// Decision result. When `answer` is true, `witness` replays from
/// `initial_state` to the claimed terminal condition at the final node.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub answer: bool,
    pub witness: Option<Vec<Edge>>,
    pub initial_state: Option<CacheState>,
    pub stats: SearchStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReachError {
    #[error("invalid control-flow graph: {0}")]
    InvalidCfg(Violation),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("path does not start at the start node")]
    NotAtStart,
    #[error("path edge {0} does not chain with its predecessor")]
    BrokenChain(usize),
    #[error("path edge {0} is not an edge of the graph")]
    NotAnEdge(usize),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinimizeError {
    #[error("input path is not a witness: {0}")]
    NotAWitness(String),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

struct ProductEntry {
    node: NodeId,
    state: CacheState,
    parent: Option<(usize, Edge)>,
}

struct Search<'a> {
    cfg: &'a Cfg,
    config: &'a CacheConfig,
    problem: &'a Problem,
    visited: HashMap<(NodeId, CacheState), usize>,
    entries: Vec<ProductEntry>,
    state_keys: HashSet<Vec<u8>>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn target(&self, node: NodeId, state: &CacheState) -> bool {
        node == self.cfg.final_node()
            && match self.problem.kind {
                ProblemKind::ExistHit => state.contains(self.problem.query),
                ProblemKind::ExistMiss => !state.contains(self.problem.query),
            }
    }

    fn insert(&mut self, node: NodeId, state: CacheState, parent: Option<(usize, Edge)>) -> Option<usize> {
        use std::collections::hash_map::Entry as MapEntry;
        match self.visited.entry((node, state.clone())) {
            MapEntry::Occupied(_) => None,
            MapEntry::Vacant(slot) => {
                let idx = self.entries.len();
                slot.insert(idx);
                self.state_keys.insert(state.canonical_key());
                self.entries.push(ProductEntry { node, state, parent });
                self.stats.product_states_explored = self.entries.len();
                self.stats.distinct_cache_states = self.state_keys.len();
                Some(idx)
            }
        }
    }

    /// Runs one BFS from (start, init); returns the index of a target entry
    /// if the terminal condition is reachable from this initial state.
    fn run(&mut self, init: CacheState) -> Result<Option<usize>, ReachError> {
        let start = self.cfg.start();
        let Some(root) = self.insert(start, init, None) else {
            return Ok(None); // already explored from an earlier initial state
        };
        if self.target(start, &self.entries[root].state) {
            return Ok(Some(root));
        }
        let mut queue = VecDeque::from([root]);
        while let Some(idx) = queue.pop_front() {
            self.stats.max_frontier = self.stats.max_frontier.max(queue.len() + 1);
            let node = self.entries[idx].node;
            for &ei in self.cfg.out_edges(node) {
                let edge = *self.cfg.edge(ei);
                let next_state = match edge.label {
                    None => self.entries[idx].state.clone(),
                    Some(block) => self.entries[idx].state.access(self.config, block)?.0,
                };
                if let Some(new_idx) = self.insert(edge.dst, next_state, Some((idx, edge))) {
                    if self.target(edge.dst, &self.entries[new_idx].state) {
                        return Ok(Some(new_idx));
                    }
                    queue.push_back(new_idx);
                }
            }
        }
        Ok(None)
    }

    fn witness(&self, mut idx: usize) -> (Vec<Edge>, CacheState) {
        let mut edges = Vec::new();
        while let Some((parent, edge)) = self.entries[idx].parent {
            edges.push(edge);
            idx = parent;
        }
        edges.reverse();
        (edges, self.entries[idx].state.clone())
    }
}

/// Decides an exist-hit or exist-miss problem over `cfg`.
pub fn decide(cfg: &Cfg, config: &CacheConfig, problem: &Problem) -> Result<Verdict, ReachError> {
    let report = validate(cfg);
    if let Some(v) = report.violations.into_iter().next() {
        return Err(ReachError::InvalidCfg(v));
    }
    // Re-validate the config invariants (the struct fields are public).
    CacheConfig::with_sets(config.policy, config.ways, config.sets)?;

    let mut search = Search {
        cfg,
        config,
        problem,
        visited: HashMap::new(),
        entries: Vec::new(),
        state_keys: HashSet::new(),
        stats: SearchStats::default(),
    };

    let initials: Box<dyn Iterator<Item = CacheState>> = match problem.initial {
        InitialMode::Empty => Box::new(std::iter::once(empty_state(config))),
        InitialMode::Arbitrary => {
            let universe: Vec<BlockId> = block_universe(cfg).into_iter().collect();
            enumerate_initial_states(config, &universe, &[problem.query])
        }
    };

    let mut found_entry = None;
    for init in initials {
        search.stats.initial_states_tried += 1;
        if let Some(found) = search.run(init)? {
            found_entry = Some(found);
            break;
        }
    }
    // The dedup map bounds the product size: every explored entry is one
    // (node, state) pair, so at most |V| entries share a cache state.
    debug_assert!(
        search.stats.product_states_explored
            <= cfg.nodes().len() * search.stats.distinct_cache_states.max(1)
    );
    match found_entry {
        Some(found) => {
            let (edges, initial_state) = search.witness(found);
            Ok(Verdict {
                answer: true,
                witness: Some(edges),
                initial_state: Some(initial_state),
                stats: search.stats,
            })
        }
        None => Ok(Verdict { answer: false, witness: None, initial_state: None, stats: search.stats }),
    }
}

/// Replays a chained path from `initial`, returning the final cache state
/// and the hit/miss outcome of each labeled access (ε edges contribute no
/// outcome).
pub fn replay(
    cfg: &Cfg,
    config: &CacheConfig,
    initial: &CacheState,
    path: &[Edge],
) -> Result<(CacheState, Vec<AccessOutcome>), ReplayError> {
    let edge_set: HashSet<Edge> = cfg.edges().iter().copied().collect();
    let mut at = cfg.start();
    let mut state = initial.clone();
    let mut outcomes = Vec::new();
    for (i, e) in path.iter().enumerate() {
        if e.src != at {
            return Err(if i == 0 { ReplayError::NotAtStart } else { ReplayError::BrokenChain(i) });
        }
        if !edge_set.contains(e) {
            return Err(ReplayError::NotAnEdge(i));
        }
        if let Some(block) = e.label {
            let (next, outcome) = state.access(config, block)?;
            state = next;
            outcomes.push(outcome);
        }
        at = e.dst;
    }
    Ok((state, outcomes))
}

/// Greedy cycle removal: the returned path is node-simple with the same
/// endpoints.
fn simple_compress(edges: &[Edge]) -> Vec<Edge> {
    let Some(first) = edges.first() else {
        return Vec::new();
    };
    let mut stack: Vec<Edge> = Vec::new();
    let mut position: HashMap<NodeId, usize> = HashMap::new();
    position.insert(first.src, 0);
    for &e in edges {
        if let Some(&p) = position.get(&e.dst) {
            while stack.len() > p {
                let removed = stack.pop().expect("stack nonempty");
                position.remove(&removed.dst);
            }
        } else {
            stack.push(e);
            position.insert(e.dst, stack.len());
        }
    }
    stack
}

/// Block-set-preserving compression: the path is segmented at the first
/// occurrence of each new label; each segment keeps its leading edge and has
/// cycles removed from the remainder, so every prefix union of accessed
/// blocks is preserved and each segment shrinks to at most |V| edges.
fn compress_preserving_blocks(edges: &[Edge]) -> Vec<Edge> {
    if edges.is_empty() {
        return Vec::new();
    }
    let mut seen: HashSet<BlockId> = HashSet::new();
    let mut boundaries: Vec<usize> = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if let Some(b) = e.label {
            if seen.insert(b) {
                boundaries.push(i);
            }
        }
    }
    let mut out = Vec::new();
    let mut cursor = 0;
    for (k, &b) in boundaries.iter().enumerate() {
        if b > cursor || (k == 0 && b > 0) {
            // Label-free prefix before the first new label of this segment.
            out.extend(simple_compress(&edges[cursor..b]));
        }
        let end = boundaries.get(k + 1).copied().unwrap_or(edges.len());
        out.push(edges[b]);
        out.extend(simple_compress(&edges[b + 1..end]));
        cursor = end;
    }
    if boundaries.is_empty() {
        out.extend(simple_compress(edges));
    }
    out
}

fn check_lru_witness(
    cfg: &Cfg,
    ways: usize,
    query: BlockId,
    path: &[Edge],
    want_hit: bool,
) -> Result<(), MinimizeError> {
    let config = CacheConfig::new(Policy::Lru, ways).map_err(ReplayError::Policy)?;
    let (end, _) = replay(cfg, &config, &empty_state(&config), path)?;
    let at = path.last().map_or(cfg.start(), |e| e.dst);
    if at != cfg.final_node() {
        return Err(MinimizeError::NotAWitness(format!("path ends at {at}, not the final node")));
    }
    if end.contains(query) != want_hit {
        return Err(MinimizeError::NotAWitness(format!(
            "replay ends with {query} {} the cache",
            if end.contains(query) { "in" } else { "not in" }
        )));
    }
    Ok(())
}

/// Shortens an LRU empty-start exist-hit witness to at most 2|V| edges:
/// split at the last access to the query, remove cycles from both halves,
/// keep the query edge between them.
pub fn minimize_hit_witness_lru(
    cfg: &Cfg,
    ways: usize,
    query: BlockId,
    path: &[Edge],
) -> Result<Vec<Edge>, MinimizeError> {
    check_lru_witness(cfg, ways, query, path, true)?;
    let last = path
        .iter()
        .rposition(|e| e.label == Some(query))
        .expect("an empty-start hit witness accesses the query");
    let mut out = simple_compress(&path[..last]);
    out.push(path[last]);
    out.extend(simple_compress(&path[last + 1..]));
    debug_assert!(check_lru_witness(cfg, ways, query, &out, true).is_ok());
    Ok(out)
}

/// Shortens an LRU empty-start exist-miss witness to at most 2|V||B| edges
/// while preserving, per split half, the set of blocks accessed (so the
/// suffix after the last query access still evicts it).
pub fn minimize_miss_witness_lru(
    cfg: &Cfg,
    ways: usize,
    query: BlockId,
    path: &[Edge],
) -> Result<Vec<Edge>, MinimizeError> {
    check_lru_witness(cfg, ways, query, path, false)?;
    let out = match path.iter().rposition(|e| e.label == Some(query)) {
        Some(last) => {
            let mut head = compress_preserving_blocks(&path[..=last]);
            head.extend(compress_preserving_blocks(&path[last + 1..]));
            head
        }
        None => compress_preserving_blocks(path),
    };
    debug_assert!(check_lru_witness(cfg, ways, query, &out, false).is_ok());
    Ok(out)
}

/// Exact access classification in the abstract-interpretation vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    AlwaysHit,
    AlwaysMiss,
    DefinitelyUnknown,
    Unreachable,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::AlwaysHit => "always-hit",
            Classification::AlwaysMiss => "always-miss",
            Classification::DefinitelyUnknown => "definitely-unknown",
            Classification::Unreachable => "unreachable",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("cannot classify an ε edge (no memory access)")]
    EpsilonEdge,
    #[error(transparent)]
    Reach(#[from] ReachError),
}

/// Classifies a labeled access exactly, by deciding exist-hit and exist-miss
/// for its block with the edge's source as final node (empty initial cache).
pub fn classify_access(
    cfg: &Cfg,
    config: &CacheConfig,
    edge: &Edge,
) -> Result<Classification, ClassifyError> {
    let Some(block) = edge.label else {
        return Err(ClassifyError::EpsilonEdge);
    };
    if !cfg.reachable_from_start().contains(&edge.src) {
        return Ok(Classification::Unreachable);
    }
    let at_src = cfg.with_final(edge.src);
    let hit = decide(
        &at_src,
        config,
        &Problem { kind: ProblemKind::ExistHit, query: block, initial: InitialMode::Empty },
    )?;
    let miss = decide(
        &at_src,
        config,
        &Problem { kind: ProblemKind::ExistMiss, query: block, initial: InitialMode::Empty },
    )?;
    Ok(match (hit.answer, miss.answer) {
        (true, true) => Classification::DefinitelyUnknown,
        (true, false) => Classification::AlwaysHit,
        (false, true) => Classification::AlwaysMiss,
        (false, false) => unreachable!("a reachable source admits at least one execution"),
    })
}

/// Replays an access trace (ignoring graph structure) — convenience used by
/// gadget-lemma tests and eviction-sequence certification. Pseudo-RR set
/// indices come from the block names.
pub fn fold_blocks(
    config: &CacheConfig,
    state: &CacheState,
    blocks: &[BlockId],
) -> Result<(CacheState, Vec<AccessOutcome>), PolicyError> {
    let trace: Vec<(usize, BlockId)> = blocks
        .iter()
        .map(|&b| match config.policy {
            Policy::Prr => crate::policies::block_set_index(b, config.sets).map(|s| (s, b)),
            _ => Ok((0usize, b)),
        })
        .collect::<Result<_, _>>()?;
    run_trace(config, state, &trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::parse_cfg;

    fn blk(s: &str) -> BlockId {
        BlockId::new(s).unwrap()
    }

    fn lru(ways: usize) -> CacheConfig {
        CacheConfig::new(Policy::Lru, ways).unwrap()
    }

    fn problem(kind: ProblemKind, query: &str, initial: InitialMode) -> Problem {
        Problem { kind, query: blk(query), initial }
    }

    #[test]
    fn single_edge_hit_and_miss() {
        let cfg = parse_cfg("node S\nnode F\nedge S F a\nstart S\nfinal F").unwrap();
        for policy in [Policy::Lru, Policy::Fifo, Policy::Nmru, Policy::Prr] {
            let config = CacheConfig::new(policy, 1).unwrap();
            let hit =
                decide(&cfg, &config, &problem(ProblemKind::ExistHit, "a", InitialMode::Empty)).unwrap();
            assert!(hit.answer, "{policy}");
            assert_eq!(hit.witness.as_ref().map(Vec::len), Some(1));
            let miss =
                decide(&cfg, &config, &problem(ProblemKind::ExistMiss, "a", InitialMode::Empty)).unwrap();
            assert!(!miss.answer, "{policy}");
        }
        let plru = CacheConfig::new(Policy::Plru, 2).unwrap();
        assert!(decide(&cfg, &plru, &problem(ProblemKind::ExistHit, "a", InitialMode::Empty))
            .unwrap()
            .answer);
    }

    #[test]
    fn epsilon_only_path_is_a_miss_witness() {
        let cfg = parse_cfg("node S\nnode F\nedge S F\nstart S\nfinal F").unwrap();
        let verdict =
            decide(&cfg, &lru(2), &problem(ProblemKind::ExistMiss, "a", InitialMode::Empty)).unwrap();
        assert!(verdict.answer);
        assert_eq!(verdict.witness.as_ref().map(Vec::len), Some(1));
    }

    #[test]
    fn empty_path_qualifies_when_start_is_final() {
        let cfg = parse_cfg("node S\nedge S S a\nstart S\nfinal S").unwrap();
        let verdict =
            decide(&cfg, &lru(2), &problem(ProblemKind::ExistMiss, "a", InitialMode::Empty)).unwrap();
        assert!(verdict.answer);
        assert_eq!(verdict.witness.as_ref().map(Vec::len), Some(0));
    }

    #[test]
    fn witness_replays_to_claimed_property() {
        let cfg = parse_cfg(
            "node S\nnode M\nnode F\nedge S M a\nedge M M b\nedge M F c\nstart S\nfinal F",
        )
        .unwrap();
        let config = lru(2);
        let verdict =
            decide(&cfg, &config, &problem(ProblemKind::ExistMiss, "a", InitialMode::Empty)).unwrap();
        assert!(verdict.answer);
        let witness = verdict.witness.unwrap();
        let (end, _) = replay(&cfg, &config, &verdict.initial_state.unwrap(), &witness).unwrap();
        assert!(!end.contains(blk("a")));
    }

    #[test]
    fn arbitrary_start_finds_resident_query() {
        // g is never on an edge; an initial state containing it witnesses
        // exist-hit.
        let cfg = parse_cfg("node S\nedge S S a\nstart S\nfinal S").unwrap();
        let verdict =
            decide(&cfg, &lru(2), &problem(ProblemKind::ExistHit, "g", InitialMode::Arbitrary))
                .unwrap();
        assert!(verdict.answer);
        assert!(verdict.initial_state.unwrap().contains(blk("g")));
        assert_eq!(verdict.witness.unwrap().len(), 0);
    }

    #[test]
    fn replay_rejects_broken_chains() {
        let cfg = parse_cfg("node S\nnode M\nnode F\nedge S M a\nedge M F b\nstart S\nfinal F").unwrap();
        let config = lru(2);
        let edges = cfg.edges().to_vec();
        let err = replay(&cfg, &config, &empty_state(&config), &[edges[1]]).unwrap_err();
        assert_eq!(err, ReplayError::NotAtStart);
        let err = replay(&cfg, &config, &empty_state(&config), &[edges[0], edges[0]]).unwrap_err();
        assert_eq!(err, ReplayError::BrokenChain(1));
    }

    #[test]
    fn minimize_hit_collapses_pumped_cycles() {
        // S -x-> A, A: cycle A->B->C->A with labels b,c,(ε), A -d-> F.
        let cfg = parse_cfg(
            "node S\nnode A\nnode B\nnode C\nnode F\n\
             edge S A x\nedge A B b\nedge B C c\nedge C A\nedge A F d\n\
             start S\nfinal F",
        )
        .unwrap();
        let config = lru(4);
        let cycle: Vec<Edge> = vec![*cfg.edge(1), *cfg.edge(2), *cfg.edge(3)];
        let mut path = vec![*cfg.edge(0)];
        for _ in 0..100 {
            path.extend(cycle.iter().copied());
        }
        path.push(*cfg.edge(4));
        let (end, _) = replay(&cfg, &config, &empty_state(&config), &path).unwrap();
        assert!(end.contains(blk("x")));
        let minimized = minimize_hit_witness_lru(&cfg, 4, blk("x"), &path).unwrap();
        assert!(minimized.len() <= 2 * cfg.nodes().len());
        let (end, _) = replay(&cfg, &config, &empty_state(&config), &minimized).unwrap();
        assert!(end.contains(blk("x")));
    }

    #[test]
    fn minimize_hit_is_stable_on_simple_witnesses() {
        let cfg = parse_cfg("node S\nnode F\nedge S F a\nstart S\nfinal F").unwrap();
        let path = vec![*cfg.edge(0)];
        let minimized = minimize_hit_witness_lru(&cfg, 1, blk("a"), &path).unwrap();
        assert_eq!(minimized, path);
    }

    #[test]
    fn minimize_rejects_non_witnesses() {
        let cfg = parse_cfg("node S\nnode F\nedge S F a\nstart S\nfinal F").unwrap();
        let path = vec![*cfg.edge(0)];
        assert!(matches!(
            minimize_miss_witness_lru(&cfg, 1, blk("a"), &path),
            Err(MinimizeError::NotAWitness(_))
        ));
        assert!(matches!(
            minimize_hit_witness_lru(&cfg, 1, blk("zz"), &path),
            Err(MinimizeError::NotAWitness(_))
        ));
    }

    #[test]
    fn minimize_miss_preserves_eviction_power() {
        // Looping gathers blocks that evict x; compression must keep them.
        let cfg = parse_cfg(
            "node S\nnode A\nnode B\nnode F\n\
             edge S A x\nedge A B b\nedge B A c\nedge A F d\n\
             start S\nfinal F",
        )
        .unwrap();
        let config = lru(2);
        let mut path = vec![*cfg.edge(0)];
        for _ in 0..50 {
            path.push(*cfg.edge(1));
            path.push(*cfg.edge(2));
        }
        path.push(*cfg.edge(3));
        let (end, _) = replay(&cfg, &config, &empty_state(&config), &path).unwrap();
        assert!(!end.contains(blk("x")));
        let minimized = minimize_miss_witness_lru(&cfg, 2, blk("x"), &path).unwrap();
        let bound = 2 * cfg.nodes().len() * block_universe(&cfg).len();
        assert!(minimized.len() <= bound);
        let (end, _) = replay(&cfg, &config, &empty_state(&config), &minimized).unwrap();
        assert!(!end.contains(blk("x")));
    }

    #[test]
    fn minimize_miss_without_query_access() {
        let cfg = parse_cfg(
            "node S\nnode A\nnode F\nedge S A b\nedge A S c\nedge A F d\nstart S\nfinal F",
        )
        .unwrap();
        let mut path = Vec::new();
        for _ in 0..10 {
            path.push(*cfg.edge(0));
            path.push(*cfg.edge(1));
        }
        path.push(*cfg.edge(0));
        path.push(*cfg.edge(2));
        let minimized = minimize_miss_witness_lru(&cfg, 2, blk("x"), &path).unwrap();
        let (end, _) = replay(
            &cfg,
            &lru(2),
            &empty_state(&lru(2)),
            &minimized,
        )
        .unwrap();
        assert!(!end.contains(blk("x")));
    }

    #[test]
    fn classify_chain_accesses() {
        // S -a-> M -a-> F: the second access to a is always-hit; the first
        // is always-miss.
        let cfg = parse_cfg("node S\nnode M\nnode F\nedge S M a\nedge M F a\nstart S\nfinal F").unwrap();
        let config = lru(2);
        assert_eq!(classify_access(&cfg, &config, cfg.edge(1)).unwrap(), Classification::AlwaysHit);
        assert_eq!(classify_access(&cfg, &config, cfg.edge(0)).unwrap(), Classification::AlwaysMiss);
    }

    #[test]
    fn classify_definitely_unknown_on_worked_reduction() {
        // The worked satisfiable formula admits both a model path (x still
        // cached at the final node) and a non-model path (x evicted), so an
        // access to x there is definitely unknown.
        let formula = crate::reductions::CnfFormula::new(
            3,
            vec![vec![-3, 2, 1], vec![-3, -2, -1], vec![3, 2, -1]],
        )
        .unwrap();
        let red = crate::reductions::sat_to_lru_hit(&formula);
        let finish = red.cfg.final_node();
        let extra = NodeId::new("F2").unwrap();
        let mut nodes = red.cfg.nodes().to_vec();
        nodes.push(extra);
        let mut edges = red.cfg.edges().to_vec();
        edges.push(Edge { src: finish, dst: extra, label: Some(blk("x")) });
        let cfg = crate::cfg::Cfg::new_unchecked(nodes, edges, red.cfg.start(), extra);
        let config = lru(4);
        let probe = *cfg.edges().last().unwrap();
        assert_eq!(
            classify_access(&cfg, &config, &probe).unwrap(),
            Classification::DefinitelyUnknown
        );
    }

    #[test]
    fn minimize_miss_preserves_accessed_block_sets() {
        let cfg = parse_cfg(
            "node S\nnode A\nnode B\nnode F\n\
             edge S A x\nedge A B b\nedge B A c\nedge A F d\n\
             start S\nfinal F",
        )
        .unwrap();
        let mut path = vec![*cfg.edge(0)];
        for _ in 0..20 {
            path.push(*cfg.edge(1));
            path.push(*cfg.edge(2));
        }
        path.push(*cfg.edge(3));
        let minimized = minimize_miss_witness_lru(&cfg, 2, blk("x"), &path).unwrap();
        let blocks = |p: &[Edge]| -> std::collections::HashSet<BlockId> {
            p.iter().filter_map(|e| e.label).collect()
        };
        assert_eq!(blocks(&minimized), blocks(&path));
    }

    #[test]
    fn classify_unreachable_and_epsilon() {
        let cfg = parse_cfg(
            "node S\nnode F\nnode U\nedge S F a\nedge U F b\nedge S F\nstart S\nfinal F",
        )
        .unwrap();
        let config = lru(2);
        assert_eq!(classify_access(&cfg, &config, cfg.edge(1)).unwrap(), Classification::Unreachable);
        assert!(matches!(
            classify_access(&cfg, &config, cfg.edge(2)),
            Err(ClassifyError::EpsilonEdge)
        ));
    }

    #[test]
    fn determinism_of_verdicts() {
        let cfg = parse_cfg(
            "node S\nnode A\nnode B\nnode F\n\
             edge S A a\nedge S B b\nedge A F c\nedge B F c\nedge F S\n\
             start S\nfinal F",
        )
        .unwrap();
        let config = lru(2);
        let p = problem(ProblemKind::ExistMiss, "a", InitialMode::Arbitrary);
        let v1 = decide(&cfg, &config, &p).unwrap();
        let v2 = decide(&cfg, &config, &p).unwrap();
        assert_eq!(v1.answer, v2.answer);
        assert_eq!(v1.witness, v2.witness);
        assert_eq!(v1.stats, v2.stats);
    }

    #[test]
    fn stats_respect_product_bound() {
        let cfg = parse_cfg(
            "node S\nnode A\nnode F\nedge S A a\nedge A S b\nedge A F c\nstart S\nfinal F",
        )
        .unwrap();
        let config = lru(2);
        let v = decide(&cfg, &config, &problem(ProblemKind::ExistMiss, "q", InitialMode::Empty)).unwrap();
        assert!(v.stats.product_states_explored <= cfg.nodes().len() * v.stats.distinct_cache_states);
    }

    #[test]
    fn decide_routes_prr_accesses_by_set_prefix() {
        // The miss in set 1 advances the shared index, so the wrapped-around
        // miss on 0:c overwrites 0:a — set 0 loses a block after only two
        // accesses of its own, which independent FIFO sets would retain.
        let cfg = parse_cfg(
            "node S\nnode A\nnode B\nnode F\n\
             edge S A 0:a\nedge A B 1:b\nedge B F 0:c\n\
             start S\nfinal F",
        )
        .unwrap();
        let config = CacheConfig::with_sets(Policy::Prr, 2, 2).unwrap();
        let evicted =
            decide(&cfg, &config, &problem(ProblemKind::ExistMiss, "0:a", InitialMode::Empty))
                .unwrap();
        assert!(evicted.answer);
        let (end, _) =
            replay(&cfg, &config, &empty_state(&config), &evicted.witness.unwrap()).unwrap();
        assert!(!end.contains(blk("0:a")));
        assert!(end.contains(blk("1:b")) && end.contains(blk("0:c")));

        // A label addressing a missing set is a config error, not a panic.
        let bad = parse_cfg("node S\nnode F\nedge S F 7:x\nstart S\nfinal F").unwrap();
        let err = decide(&bad, &config, &problem(ProblemKind::ExistHit, "7:x", InitialMode::Empty))
            .unwrap_err();
        assert!(matches!(err, ReachError::Policy(PolicyError::SetIndexOutOfRange { .. })));
    }

    #[test]
    fn decide_rejects_invalid_graphs() {
        let s = NodeId::new("S").unwrap();
        let f = NodeId::new("F").unwrap();
        let cfg = crate::cfg::Cfg::new_unchecked(vec![s], vec![], s, f);
        let err = decide(&cfg, &lru(1), &problem(ProblemKind::ExistHit, "a", InitialMode::Empty))
            .unwrap_err();
        assert!(matches!(err, ReachError::InvalidCfg(_)));
    }
}
