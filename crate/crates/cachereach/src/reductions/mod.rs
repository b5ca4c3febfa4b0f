//! Gadget constructions reducing SAT, Hamiltonian circuits and Boolean
//! register machine reachability to cache analysis problems, plus the
//! arbitrary-start transforms and the structural state predicates
//! (well-formed / well-phased) their correctness arguments rest on.

mod fifo;
mod lru;
mod nmru;
mod plru;

pub use fifo::{
    brm_to_fifo, fifo_evict_all_prologue, fifo_fresh_prologue, fifo_to_prr, fifo_wellformed,
    fifo_wellphased,
};
pub use lru::{
    ham_to_lru_miss, limit_literal_occurrences, lru_fresh_prologue, lru_loader_gadget,
    sat_to_lru_hit,
};
pub use nmru::{brm_to_nmru, nmru_wellformed, nmru_wellphased};
pub use plru::{
    brm_to_plru, plru_evict_all_sequence, plru_fresh_prologue, plru_pi_sequence, plru_wellformed,
    plru_wellphased,
};

use crate::cfg::{block_universe, parse_cfg, BlockId, Cfg, CfgBuilder, NodeId};
use crate::policies::{CacheConfig, Policy};
use crate::reach::{InitialMode, Problem, ProblemKind};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// CNF formula over `num_vars` variables; literals are signed 1-based
/// indices, DIMACS style.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("literal 0 is not allowed")]
    ZeroLiteral,
    #[error("literal {0} exceeds the declared {1} variables")]
    LiteralOutOfRange(i32, usize),
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, CnfError> {
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 {
                    return Err(CnfError::ZeroLiteral);
                }
                if lit.unsigned_abs() as usize > num_vars {
                    return Err(CnfError::LiteralOutOfRange(lit, num_vars));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Parses DIMACS CNF (`c` comments, `p cnf <vars> <clauses>`,
    /// zero-terminated clauses possibly spanning lines).
    pub fn parse_dimacs(text: &str) -> Result<Self, DimacsError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('p') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let ["cnf", vars, count] = fields[..] else {
                    return Err(DimacsError { line, message: "malformed problem line".into() });
                };
                let vars = vars
                    .parse()
                    .map_err(|_| DimacsError { line, message: "bad variable count".into() })?;
                let count = count
                    .parse()
                    .map_err(|_| DimacsError { line, message: "bad clause count".into() })?;
                if header.replace((vars, count)).is_some() {
                    return Err(DimacsError { line, message: "duplicate problem line".into() });
                }
                continue;
            }
            if header.is_none() {
                return Err(DimacsError { line, message: "clause before problem line".into() });
            }
            for tok in trimmed.split_whitespace() {
                let lit: i32 = tok
                    .parse()
                    .map_err(|_| DimacsError { line, message: format!("bad literal {tok:?}") })?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        let last = text.lines().count();
        let (num_vars, declared) =
            header.ok_or(DimacsError { line: last, message: "missing problem line".into() })?;
        if !current.is_empty() {
            return Err(DimacsError { line: last, message: "unterminated clause".into() });
        }
        if clauses.len() != declared {
            return Err(DimacsError {
                line: last,
                message: format!("declared {declared} clauses, found {}", clauses.len()),
            });
        }
        CnfFormula::new(num_vars, clauses)
            .map_err(|e| DimacsError { line: last, message: e.to_string() })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(out, "{lit} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct DimacsError {
    pub line: usize,
    pub message: String,
}

/// Simple undirected graph without self-loops, vertices 0..n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    pub n: usize,
    edges: std::collections::BTreeSet<(usize, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loops are not allowed (vertex {0})")]
    SelfLoop(usize),
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(usize, usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph { n, edges: Default::default() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange(w, self.n));
            }
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Parses the edge-list format: `n <count>` then `e <u> <v>` lines.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut graph: Option<UndirectedGraph> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let words: Vec<&str> = content.split_whitespace().collect();
            let Some((&directive, args)) = words.split_first() else { continue };
            match directive {
                "n" => {
                    let [count] = args else {
                        return Err(GraphError::Parse { line, message: "expected n <count>".into() });
                    };
                    let n = count.parse().map_err(|_| GraphError::Parse {
                        line,
                        message: "bad vertex count".into(),
                    })?;
                    if graph.replace(UndirectedGraph::new(n)).is_some() {
                        return Err(GraphError::Parse { line, message: "duplicate n line".into() });
                    }
                }
                "e" => {
                    let [u, v] = args else {
                        return Err(GraphError::Parse { line, message: "expected e <u> <v>".into() });
                    };
                    let g = graph.as_mut().ok_or(GraphError::Parse {
                        line,
                        message: "edge before n line".into(),
                    })?;
                    let u = u.parse().map_err(|_| GraphError::Parse { line, message: "bad vertex".into() })?;
                    let v = v.parse().map_err(|_| GraphError::Parse { line, message: "bad vertex".into() })?;
                    g.add_edge(u, v).map_err(|e| GraphError::Parse { line, message: e.to_string() })?;
                }
                other => {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("unknown directive {other:?}"),
                    })
                }
            }
        }
        graph.ok_or(GraphError::Parse { line: text.lines().count(), message: "missing n line".into() })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "e {u} {v}");
        }
        out
    }
}

/// A generated cache-analysis instance: the graph plus everything needed to
/// decide it, and provenance notes (register counts, naming scheme, applied
/// transforms).
#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub cfg: Cfg,
    pub policy: Policy,
    pub ways: usize,
    pub sets: usize,
    pub problem: ProblemKind,
    pub initial: InitialMode,
    pub query: BlockId,
    pub notes: BTreeMap<String, String>,
}

impl ReductionOutput {
    pub fn config(&self) -> CacheConfig {
        CacheConfig::with_sets(self.policy, self.ways, self.sets)
            .expect("reduction produced a valid configuration")
    }

    pub fn problem(&self) -> Problem {
        Problem { kind: self.problem, query: self.query, initial: self.initial }
    }

    /// Serializes as a CFG document preceded by a `#` metadata header.
    pub fn to_document(&self) -> String {
        let mut out = format!(
            "# policy={} ways={} sets={} problem={} query={} initial={}\n",
            self.policy, self.ways, self.sets, self.problem, self.query, self.initial
        );
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# note:{k}={v}");
        }
        out.push_str(&crate::cfg::to_text(&self.cfg));
        out
    }

    /// Parses a document produced by `to_document` (header line required).
    pub fn parse_document(text: &str) -> Result<Self, DocumentError> {
        let header = parse_document_header(text)?
            .ok_or_else(|| DocumentError::new(0, "missing metadata header"))?;
        let cfg = parse_cfg(text).map_err(|e| DocumentError::new(e.line, e.to_string()))?;
        Ok(ReductionOutput {
            cfg,
            policy: header.policy,
            ways: header.ways,
            sets: header.sets,
            problem: header.problem,
            initial: header.initial,
            query: header.query,
            notes: header.notes,
        })
    }
}

/// Metadata parsed from `#` comment lines of a CFG document.
#[derive(Clone, Debug)]
pub struct DocumentHeader {
    pub policy: Policy,
    pub ways: usize,
    pub sets: usize,
    pub problem: ProblemKind,
    pub query: BlockId,
    pub initial: InitialMode,
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct DocumentError {
    pub line: usize,
    pub message: String,
}

impl DocumentError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        DocumentError { line, message: message.into() }
    }
}

/// Scans `#` comments for a `policy=… ways=… …` header and `note:` entries.
/// Returns None when the document carries no header.
pub fn parse_document_header(text: &str) -> Result<Option<DocumentHeader>, DocumentError> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut notes: BTreeMap<String, String> = BTreeMap::new();
    let mut header_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(comment) = raw.trim_start().strip_prefix('#') else { continue };
        let comment = comment.trim();
        if let Some(note) = comment.strip_prefix("note:") {
            if let Some((k, v)) = note.split_once('=') {
                notes.insert(k.trim().to_owned(), v.trim().to_owned());
            }
            continue;
        }
        if comment.starts_with("policy=") {
            header_line = line;
            for tok in comment.split_whitespace() {
                let Some((k, v)) = tok.split_once('=') else {
                    return Err(DocumentError::new(line, format!("malformed header token {tok:?}")));
                };
                fields.insert(k.to_owned(), v.to_owned());
            }
        }
    }
    if fields.is_empty() {
        return Ok(None);
    }
    let get = |key: &str| {
        fields
            .get(key)
            .ok_or_else(|| DocumentError::new(header_line, format!("header missing {key}=")))
    };
    let policy: Policy =
        get("policy")?.parse().map_err(|e| DocumentError::new(header_line, format!("{e}")))?;
    let ways: usize = get("ways")?
        .parse()
        .map_err(|_| DocumentError::new(header_line, "bad ways value"))?;
    let sets: usize = match fields.get("sets") {
        Some(v) => v.parse().map_err(|_| DocumentError::new(header_line, "bad sets value"))?,
        None => 1,
    };
    let problem: ProblemKind =
        get("problem")?.parse().map_err(|e| DocumentError::new(header_line, e))?;
    let query = BlockId::new(get("query")?)
        .map_err(|e| DocumentError::new(header_line, e.to_string()))?;
    let initial: InitialMode = match fields.get("initial") {
        Some(v) => v.parse().map_err(|e: String| DocumentError::new(header_line, e))?,
        None => InitialMode::Empty,
    };
    Ok(Some(DocumentHeader { policy, ways, sets, problem, query, initial, notes }))
}

// --- shared construction helpers -------------------------------------------

pub(crate) fn blk(name: &str) -> BlockId {
    BlockId::new(name).expect("generated block name is valid")
}

pub(crate) fn node(name: &str) -> NodeId {
    NodeId::new(name).expect("generated node name is valid")
}

/// Block pair for register i: `a_<i>_f` / `a_<i>_t`.
pub(crate) fn a_block(i: usize, value: bool) -> BlockId {
    blk(&format!("a_{i}_{}", if value { 't' } else { 'f' }))
}

pub(crate) fn e_block(i: usize) -> BlockId {
    blk(&format!("e_{i}"))
}

/// A straight-line access sequence from `from` to `to`; interior nodes are
/// named `<prefix>/<k>`. An empty sequence becomes one ε edge.
pub(crate) fn chain(cb: &mut CfgBuilder, from: NodeId, to: NodeId, prefix: &str, blocks: &[BlockId]) {
    if blocks.is_empty() {
        cb.edge(from, to, None);
        return;
    }
    let mut cur = from;
    for (k, &b) in blocks.iter().enumerate() {
        let next = if k + 1 == blocks.len() {
            to
        } else {
            cb.node(node(&format!("{prefix}/{}", k + 1)))
        };
        cb.edge(cur, next, Some(b));
        cur = next;
    }
}

/// A switch between alternative access sequences from `from` to `to`.
pub(crate) fn switch(cb: &mut CfgBuilder, from: NodeId, to: NodeId, prefix: &str, options: &[Vec<BlockId>]) {
    for (oi, option) in options.iter().enumerate() {
        chain(cb, from, to, &format!("{prefix}/o{oi}"), option);
    }
}

/// Fresh block names `<stem>_1`, `<stem>_2`, … avoiding `taken`.
pub(crate) fn fresh_blocks(stem: &str, count: usize, taken: &[BlockId]) -> Vec<BlockId> {
    let mut out = Vec::with_capacity(count);
    let mut k = 1usize;
    while out.len() < count {
        let candidate = blk(&format!("{stem}_{k}"));
        if !taken.contains(&candidate) && !out.contains(&candidate) {
            out.push(candidate);
        }
        k += 1;
    }
    out
}

/// Prepends a straight-line access prologue in front of a problem's start
/// node, flipping the initial mode to `arbitrary` (the prologue forces the
/// cache into prologue-only content from any legal initial state).
pub(crate) fn prepend_prologue(red: &ReductionOutput, blocks: &[BlockId], note: &str) -> ReductionOutput {
    let cfg = &red.cfg;
    let mut cb = CfgBuilder::new();
    let new_start = cb.node(node("fp/0"));
    for n in cfg.nodes() {
        cb.node(*n);
    }
    // Interior chain nodes fp/1.. must not collide with existing nodes.
    debug_assert!(cfg.nodes().iter().all(|n| !n.as_str().starts_with("fp/")));
    chain(&mut cb, new_start, cfg.start(), "fp", blocks);
    for e in cfg.edges() {
        cb.edge(e.src, e.dst, e.label);
    }
    cb.start(new_start);
    cb.finish(cfg.final_node());
    let mut notes = red.notes.clone();
    notes.insert("transform".into(), note.to_owned());
    ReductionOutput {
        cfg: cb.build().expect("prologue transform preserves validity"),
        policy: red.policy,
        ways: red.ways,
        sets: red.sets,
        problem: red.problem,
        initial: InitialMode::Arbitrary,
        query: red.query,
        notes,
    }
}

/// The problem's block alphabet: every edge label plus the query block.
pub(crate) fn problem_alphabet(red: &ReductionOutput) -> Vec<BlockId> {
    let mut alphabet: Vec<BlockId> = block_universe(&red.cfg).into_iter().collect();
    if !alphabet.contains(&red.query) {
        alphabet.push(red.query);
    }
    alphabet
}
