//! Independent brute-force deciders and randomized instance generators: the
//! cross-validation harness that executes every reduction's iff-theorem on
//! small instances.

use crate::brm::{brm_reachable, BrmEdge, BrmInstr, BrmMachine};
use crate::cfg::{BlockId, Cfg, Edge, NodeId};
use crate::policies::{empty_state, enumerate_initial_states, CacheConfig, CacheState, Policy};
use crate::reach::{decide, InitialMode, Problem, ProblemKind, ReachError};
use crate::reductions::{
    brm_to_fifo, brm_to_nmru, brm_to_plru, fifo_to_prr, ham_to_lru_miss,
    limit_literal_occurrences, sat_to_lru_hit, CnfFormula, ReductionOutput, UndirectedGraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute-force SAT is capped at 24 variables, got {0}")]
    TooManyVariables(usize),
    #[error("brute-force Hamiltonian search is capped at 10 vertices, got {0}")]
    TooManyVertices(usize),
}

/// Brute-force satisfiability over all 2^numVars assignments.
pub fn sat_brute(cnf: &CnfFormula) -> Result<bool, OracleError> {
    if cnf.num_vars > 24 {
        return Err(OracleError::TooManyVariables(cnf.num_vars));
    }
    'assignment: for bits in 0u64..(1 << cnf.num_vars) {
        for clause in &cnf.clauses {
            let satisfied = clause.iter().any(|&lit| {
                let value = bits >> (lit.unsigned_abs() - 1) & 1 == 1;
                (lit > 0) == value
            });
            if !satisfied {
                continue 'assignment;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// Brute-force Hamiltonian circuit search by permutation enumeration.
/// A circuit is a closed spanning walk visiting every other vertex once;
/// under this reading the 2-vertex graph with one edge has a circuit, which
/// is exactly the criterion realized by the layered-graph reduction.
pub fn ham_brute(g: &UndirectedGraph) -> Result<bool, OracleError> {
    if g.n > 10 {
        return Err(OracleError::TooManyVertices(g.n));
    }
    if g.n < 2 {
        return Ok(false);
    }
    fn extend(g: &UndirectedGraph, path: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        if path.len() == g.n {
            return g.has_edge(*path.last().unwrap(), 0);
        }
        let at = *path.last().unwrap();
        for v in 1..g.n {
            if !used[v] && g.has_edge(at, v) {
                used[v] = true;
                path.push(v);
                if extend(g, path, used) {
                    return true;
                }
                path.pop();
                used[v] = false;
            }
        }
        false
    }
    let mut used = vec![false; g.n];
    used[0] = true;
    Ok(extend(g, &mut vec![0], &mut used))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic random CNF within the given bounds.
pub fn random_cnf(seed: u64, max_vars: usize, max_clauses: usize) -> CnfFormula {
    let mut rng = rng(seed);
    let num_vars = rng.gen_range(1..=max_vars);
    let num_clauses = rng.gen_range(1..=max_clauses);
    let clauses = (0..num_clauses)
        .map(|_| {
            let len = rng.gen_range(1..=3usize.min(num_vars));
            (0..len)
                .map(|_| {
                    let var = rng.gen_range(1..=num_vars) as i32;
                    if rng.gen_bool(0.5) {
                        var
                    } else {
                        -var
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(num_vars, clauses).expect("generated CNF is valid")
}

/// Deterministic random undirected graph on 2..=maxNodes vertices.
pub fn random_graph(seed: u64, max_nodes: usize) -> UndirectedGraph {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=max_nodes);
    let p = rng.gen_range(0.3..0.8);
    let mut g = UndirectedGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).expect("in-range edge");
            }
        }
    }
    g
}

/// Deterministic random register machine; with `allow_cycles` edges may go
/// backwards, otherwise they respect the node order (acyclic).
pub fn random_brm(seed: u64, max_regs: usize, max_edges: usize, allow_cycles: bool) -> BrmMachine {
    let mut rng = rng(seed);
    let registers = rng.gen_range(1..=max_regs);
    let node_count = rng.gen_range(2..=5usize);
    let nodes: Vec<NodeId> =
        (0..node_count).map(|i| NodeId::new(&format!("q{i}")).unwrap()).collect();
    let edge_count = rng.gen_range(1..=max_edges);
    let edges = (0..edge_count)
        .map(|_| {
            let (src, dst) = if allow_cycles {
                (rng.gen_range(0..node_count), rng.gen_range(0..node_count))
            } else {
                let src = rng.gen_range(0..node_count - 1);
                (src, rng.gen_range(src + 1..node_count))
            };
            let register = rng.gen_range(1..=registers);
            let value = rng.gen_bool(0.5);
            let instr = if rng.gen_bool(0.5) {
                BrmInstr::Guard { register, value }
            } else {
                BrmInstr::Assign { register, value }
            };
            BrmEdge { src: nodes[src], dst: nodes[dst], instr }
        })
        .collect();
    BrmMachine::new(registers, nodes.clone(), edges, nodes[0], nodes[node_count - 1])
        .expect("generated machine is valid")
}

/// Deterministic random CFG: every node reachable-by-construction from the
/// start, fully labeled edges unless `epsilon_prob > 0`.
pub fn random_cfg(
    seed: u64,
    max_nodes: usize,
    max_blocks: usize,
    epsilon_prob: f64,
    allow_cycles: bool,
) -> Cfg {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=max_nodes);
    let blocks = rng.gen_range(1..=max_blocks);
    let mut cb = crate::cfg::CfgBuilder::new();
    let nodes: Vec<NodeId> =
        (0..n).map(|i| cb.node(NodeId::new(&format!("n{i}")).unwrap())).collect();
    let label = |rng: &mut ChaCha8Rng| -> Option<BlockId> {
        if epsilon_prob > 0.0 && rng.gen_bool(epsilon_prob) {
            None
        } else {
            Some(BlockId::new(&format!("b{}", rng.gen_range(0..blocks))).unwrap())
        }
    };
    // A spine guaranteeing reachability of every node from n0.
    for i in 1..n {
        let src = rng.gen_range(0..i);
        let lbl = label(&mut rng);
        cb.edge(nodes[src], nodes[i], lbl);
    }
    let extra = rng.gen_range(0..=2 * n);
    for _ in 0..extra {
        let (src, dst) = if allow_cycles {
            (rng.gen_range(0..n), rng.gen_range(0..n))
        } else {
            let src = rng.gen_range(0..n - 1);
            (src, rng.gen_range(src + 1..n))
        };
        let lbl = label(&mut rng);
        cb.edge(nodes[src], nodes[dst], lbl);
    }
    cb.start(nodes[0]);
    cb.finish(nodes[n - 1]);
    cb.build().expect("generated graph is valid")
}

/// Bounded unrolling: is the terminal condition realizable by some path of
/// at most `max_len` edges? Layer-by-layer image computation with no
/// cross-layer deduplication — an implementation of the decision problem
/// independent of the reachability search in `reach`.
pub fn decide_by_unrolling(
    cfg: &Cfg,
    config: &CacheConfig,
    problem: &Problem,
    max_len: usize,
) -> Result<bool, ReachError> {
    let target = |node: NodeId, state: &CacheState| {
        node == cfg.final_node()
            && match problem.kind {
                ProblemKind::ExistHit => state.contains(problem.query),
                ProblemKind::ExistMiss => !state.contains(problem.query),
            }
    };
    let mut layer: HashSet<(NodeId, CacheState)> = HashSet::new();
    match problem.initial {
        InitialMode::Empty => {
            layer.insert((cfg.start(), empty_state(config)));
        }
        InitialMode::Arbitrary => {
            let universe: Vec<BlockId> = crate::cfg::block_universe(cfg).into_iter().collect();
            for init in enumerate_initial_states(config, &universe, &[problem.query]) {
                layer.insert((cfg.start(), init));
            }
        }
    }
    for _ in 0..=max_len {
        if layer.iter().any(|(n, s)| target(*n, s)) {
            return Ok(true);
        }
        let mut next = HashSet::new();
        for (n, s) in &layer {
            for &ei in cfg.out_edges(*n) {
                let edge = cfg.edge(ei);
                let state = match edge.label {
                    None => s.clone(),
                    Some(b) => s.access(config, b)?.0,
                };
                next.insert((edge.dst, state));
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    Ok(false)
}

/// The reduction families the harness can cross-validate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossCheckKind {
    SatLru,
    HamLru,
    BrmFifoHit,
    BrmFifoMiss,
    BrmPlruHit,
    BrmPlruMiss,
    BrmNmruHit,
    BrmNmruMiss,
    FifoPrr,
}

impl CrossCheckKind {
    pub const ALL: [CrossCheckKind; 9] = [
        CrossCheckKind::SatLru,
        CrossCheckKind::HamLru,
        CrossCheckKind::BrmFifoHit,
        CrossCheckKind::BrmFifoMiss,
        CrossCheckKind::BrmPlruHit,
        CrossCheckKind::BrmPlruMiss,
        CrossCheckKind::BrmNmruHit,
        CrossCheckKind::BrmNmruMiss,
        CrossCheckKind::FifoPrr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CrossCheckKind::SatLru => "sat-lru",
            CrossCheckKind::HamLru => "ham-lru",
            CrossCheckKind::BrmFifoHit => "brm-fifo-hit",
            CrossCheckKind::BrmFifoMiss => "brm-fifo-miss",
            CrossCheckKind::BrmPlruHit => "brm-plru-hit",
            CrossCheckKind::BrmPlruMiss => "brm-plru-miss",
            CrossCheckKind::BrmNmruHit => "brm-nmru-hit",
            CrossCheckKind::BrmNmruMiss => "brm-nmru-miss",
            CrossCheckKind::FifoPrr => "fifo-prr",
        }
    }
}

impl fmt::Display for CrossCheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CrossCheckKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CrossCheckKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown crosscheck kind {s:?}"))
    }
}

/// One seed's instance: a summary, the independent oracle's answer, and the
/// reduction whose decision must match it.
fn instance(kind: CrossCheckKind, seed: u64) -> (String, bool, ReductionOutput) {
    match kind {
        CrossCheckKind::SatLru => {
            // Odd seeds route a smaller formula through the
            // occurrence-limiting rewrite (renaming multiplies the variable
            // count and hence the associativity, so the base stays tiny).
            let limited = seed % 2 == 1;
            let cnf = if limited { random_cnf(seed, 3, 3) } else { random_cnf(seed, 6, 8) };
            let oracle = sat_brute(&cnf).expect("within oracle bounds");
            let red = if limited {
                sat_to_lru_hit(&limit_literal_occurrences(&cnf))
            } else {
                sat_to_lru_hit(&cnf)
            };
            let summary =
                format!("cnf vars={} clauses={} limited={}", cnf.num_vars, cnf.clauses.len(), limited);
            (summary, oracle, red)
        }
        CrossCheckKind::HamLru => {
            let g = random_graph(seed, 7);
            let oracle = ham_brute(&g).expect("within oracle bounds");
            let summary = format!("graph n={} edges={}", g.n, g.edges().count());
            (summary, oracle, ham_to_lru_miss(&g))
        }
        CrossCheckKind::BrmFifoHit | CrossCheckKind::BrmFifoMiss => {
            let machine = random_brm(seed, 3, 10, true);
            let oracle = brm_reachable(&machine).reachable;
            let problem = if kind == CrossCheckKind::BrmFifoHit {
                ProblemKind::ExistHit
            } else {
                ProblemKind::ExistMiss
            };
            let even = seed % 2 == 1;
            let summary = format!(
                "brm r={} edges={} cyclic={} parity={}",
                machine.registers,
                machine.edges().len(),
                machine.is_cyclic(),
                if even { "even" } else { "odd" }
            );
            (summary, oracle, brm_to_fifo(&machine, problem, even))
        }
        CrossCheckKind::BrmPlruHit | CrossCheckKind::BrmPlruMiss => {
            let machine = random_brm(seed, 3, 8, true);
            let oracle = brm_reachable(&machine).reachable;
            let problem = if kind == CrossCheckKind::BrmPlruHit {
                ProblemKind::ExistHit
            } else {
                ProblemKind::ExistMiss
            };
            let summary = format!(
                "brm r={} edges={} cyclic={}",
                machine.registers,
                machine.edges().len(),
                machine.is_cyclic()
            );
            (summary, oracle, brm_to_plru(&machine, problem))
        }
        CrossCheckKind::BrmNmruHit | CrossCheckKind::BrmNmruMiss => {
            let machine = random_brm(seed, 2, 6, true);
            let oracle = brm_reachable(&machine).reachable;
            let problem = if kind == CrossCheckKind::BrmNmruHit {
                ProblemKind::ExistHit
            } else {
                ProblemKind::ExistMiss
            };
            let summary = format!(
                "brm r={} edges={} cyclic={}",
                machine.registers,
                machine.edges().len(),
                machine.is_cyclic()
            );
            (summary, oracle, brm_to_nmru(&machine, problem))
        }
        CrossCheckKind::FifoPrr => {
            let cfg = random_cfg(seed, 5, 4, 0.2, true);
            let ways = 1 + (seed % 3) as usize;
            let kind_pick = if seed.is_multiple_of(2) { ProblemKind::ExistHit } else { ProblemKind::ExistMiss };
            let universe: Vec<BlockId> = crate::cfg::block_universe(&cfg).into_iter().collect();
            let query = if universe.is_empty() {
                BlockId::new("q").unwrap()
            } else {
                universe[seed as usize % universe.len()]
            };
            let fifo = ReductionOutput {
                cfg,
                policy: Policy::Fifo,
                ways,
                sets: 1,
                problem: kind_pick,
                initial: InitialMode::Empty,
                query,
                notes: Default::default(),
            };
            let oracle = decide(&fifo.cfg, &fifo.config(), &fifo.problem())
                .expect("FIFO side decides")
                .answer;
            let sets = 1 + (seed % 3) as usize;
            let summary = format!("fifo n={} ways={} {} sets={}", fifo.cfg.nodes().len(), ways, kind_pick, sets);
            (summary, oracle, fifo_to_prr(&fifo, sets))
        }
    }
}

/// One disagreement between the oracle and the decision procedure.
#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub seed: u64,
    #[serde(skip)]
    pub summary: String,
    pub oracle: bool,
    pub checker: bool,
}

/// Outcome of a crosscheck run; serializes to the documented JSON schema
/// `{kind, instances, agreements, disagreements: [{seed, oracle, checker}]}`.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub kind: String,
    pub instances: usize,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
}

impl CrossCheckReport {
    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("CACHEREACH_THREADS").ok().and_then(|v| v.parse().ok()) {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

fn crosscheck_with(
    kind: CrossCheckKind,
    seeds: std::ops::Range<u64>,
    mutation: Option<&(dyn Fn(&mut ReductionOutput) + Sync)>,
) -> CrossCheckReport {
    use rayon::prelude::*;
    let seeds: Vec<u64> = seeds.collect();
    let results: Vec<(u64, String, bool, bool)> = thread_pool().install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let (summary, oracle, mut red) = instance(kind, seed);
                if let Some(mutate) = mutation {
                    mutate(&mut red);
                }
                let checker = decide(&red.cfg, &red.config(), &red.problem())
                    .expect("reduction instance decides")
                    .answer;
                (seed, summary, oracle, checker)
            })
            .collect()
    });
    // Report in seed order regardless of completion order.
    let mut results = results;
    results.sort_by_key(|r| r.0);
    let instances = results.len();
    let disagreements: Vec<Disagreement> = results
        .into_iter()
        .filter(|&(_, _, oracle, checker)| oracle != checker)
        .map(|(seed, summary, oracle, checker)| Disagreement { seed, summary, oracle, checker })
        .collect();
    CrossCheckReport {
        kind: kind.name().to_owned(),
        instances,
        agreements: instances - disagreements.len(),
        disagreements,
    }
}

/// Generates, reduces, decides and compares against the oracle for every
/// seed. Seeds are independent and fan out across worker threads
/// (`CACHEREACH_THREADS` bounds the pool).
pub fn crosscheck(kind: CrossCheckKind, seeds: std::ops::Range<u64>) -> CrossCheckReport {
    crosscheck_with(kind, seeds, None)
}

/// Crosscheck with a fault injected into every reduction before deciding —
/// the harness must be able to fail.
pub fn crosscheck_mutated(
    kind: CrossCheckKind,
    seeds: std::ops::Range<u64>,
    mutation: &(dyn Fn(&mut ReductionOutput) + Sync),
) -> CrossCheckReport {
    crosscheck_with(kind, seeds, Some(mutation))
}

/// Mutation used by the sensitivity tests: drop the first edge of the
/// generated graph.
pub fn drop_first_edge(red: &mut ReductionOutput) {
    let nodes = red.cfg.nodes().to_vec();
    let edges: Vec<Edge> = red.cfg.edges().iter().skip(1).copied().collect();
    red.cfg = Cfg::new_unchecked(nodes, edges, red.cfg.start(), red.cfg.final_node());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(num_vars: usize, clauses: &[&[i32]]) -> CnfFormula {
        CnfFormula::new(num_vars, clauses.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn sat_brute_basics() {
        assert!(sat_brute(&cnf(1, &[&[1]])).unwrap());
        assert!(!sat_brute(&cnf(1, &[&[1], &[-1]])).unwrap());
        // The worked three-variable formula has a model.
        assert!(sat_brute(&cnf(3, &[&[-3, 2, 1], &[-3, -2, -1], &[3, 2, -1]])).unwrap());
        assert!(sat_brute(&cnf(25, &[&[1]])).is_err());
    }

    #[test]
    fn ham_brute_basics() {
        let mut triangle = UndirectedGraph::new(3);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            triangle.add_edge(u, v).unwrap();
        }
        assert!(ham_brute(&triangle).unwrap());
        let mut path = UndirectedGraph::new(3);
        path.add_edge(0, 1).unwrap();
        path.add_edge(1, 2).unwrap();
        assert!(!ham_brute(&path).unwrap());
        assert!(ham_brute(&UndirectedGraph::new(11)).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_cnf(7, 6, 8), random_cnf(7, 6, 8));
        assert_eq!(random_graph(7, 7), random_graph(7, 7));
        let a = random_brm(7, 3, 10, true);
        let b = random_brm(7, 3, 10, true);
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.edges(), b.edges());
        let g1 = random_cfg(7, 5, 4, 0.2, true);
        let g2 = random_cfg(7, 5, 4, 0.2, true);
        assert_eq!(g1.edges(), g2.edges());
    }

    #[test]
    fn random_brm_produces_cycles_sometimes() {
        let cyclic = (0..100).filter(|&s| random_brm(s, 3, 10, true).is_cyclic()).count();
        assert!(cyclic > 0);
        assert!((0..100).all(|s| !random_brm(s, 3, 10, false).is_cyclic()));
    }

    #[test]
    fn random_cnf_respects_bounds() {
        for seed in 0..50 {
            let f = random_cnf(seed, 6, 8);
            assert!(f.num_vars <= 6 && !f.clauses.is_empty() && f.clauses.len() <= 8);
        }
    }

    #[test]
    fn small_crosschecks_agree() {
        for kind in CrossCheckKind::ALL {
            let report = crosscheck(kind, 0..8);
            assert!(report.all_agree(), "{kind}: {:?}", report.disagreements);
        }
    }

    #[test]
    fn mutation_is_detected() {
        let report = crosscheck_mutated(CrossCheckKind::SatLru, 0..20, &drop_first_edge);
        assert!(!report.all_agree(), "harness must detect a corrupted reduction");
    }

    #[test]
    fn report_serializes_to_documented_schema() {
        let report = crosscheck(CrossCheckKind::SatLru, 0..2);
        let json = serde_json::to_value(&report).unwrap();
        let obj = json.as_object().unwrap();
        let keys: std::collections::BTreeSet<_> = obj.keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            ["kind", "instances", "agreements", "disagreements"].into_iter().collect()
        );
    }
}
