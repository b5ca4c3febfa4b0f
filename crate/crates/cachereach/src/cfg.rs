//! Control-flow-graph data model, text format, validation and DOT export.
//!
//! A `Cfg` is a directed multigraph whose edges carry an optional memory-block
//! label (`None` is an ε-transition: no memory access), plus a start and a
//! final node. Parallel edges and self-loops are allowed; node and edge
//! iteration order is insertion order so that witnesses and exports are
//! deterministic.

use crate::intern::{intern, Symbol};
use indexmap::IndexSet;
use std::collections::{HashMap, HashSet};
use std::fmt;
use thiserror::Error;

/// A memory-block name appearing on CFG edges.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(Symbol);

/// A CFG node name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(Symbol);

fn valid_block_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '-'))
}

fn valid_node_name(s: &str) -> bool {
    // Nodes additionally allow '/': reduction gadgets name their internal
    // nodes `<edge>/<gadget>/<position>`.
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '-' | '/'))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentError {
    #[error("invalid block name {0:?} (allowed: [A-Za-z0-9_.:-], nonempty)")]
    Block(String),
    #[error("invalid node name {0:?} (allowed: [A-Za-z0-9_.:/-], nonempty)")]
    Node(String),
}

impl BlockId {
    pub fn new(name: &str) -> Result<Self, IdentError> {
        if valid_block_name(name) {
            Ok(BlockId(intern(name)))
        } else {
            Err(IdentError::Block(name.to_owned()))
        }
    }

    pub fn as_str(self) -> &'static str {
        self.0.as_str()
    }

    pub(crate) fn symbol(self) -> Symbol {
        self.0
    }
}

impl NodeId {
    pub fn new(name: &str) -> Result<Self, IdentError> {
        if valid_node_name(name) {
            Ok(NodeId(intern(name)))
        } else {
            Err(IdentError::Node(name.to_owned()))
        }
    }

    pub fn as_str(self) -> &'static str {
        self.0.as_str()
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A directed edge. `label: None` is an ε-transition.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub label: Option<BlockId>,
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label {
            Some(b) => write!(f, "{} -{}-> {}", self.src, b, self.dst),
            None => write!(f, "{} -ε-> {}", self.src, self.dst),
        }
    }
}

/// Control-flow graph. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Cfg {
    nodes: Vec<NodeId>,
    node_index: HashMap<NodeId, usize>,
    edges: Vec<Edge>,
    /// Outgoing edge indices per node, in insertion order.
    out: Vec<Vec<usize>>,
    start: NodeId,
    finish: NodeId,
}

impl Cfg {
    /// Builds a graph without enforcing invariants; `validate` reports any
    /// violations. Duplicate node declarations are kept (and reported).
    pub fn new_unchecked(nodes: Vec<NodeId>, edges: Vec<Edge>, start: NodeId, finish: NodeId) -> Self {
        let mut node_index = HashMap::new();
        for (i, &n) in nodes.iter().enumerate() {
            node_index.entry(n).or_insert(i);
        }
        let mut out = vec![Vec::new(); nodes.len()];
        for (ei, e) in edges.iter().enumerate() {
            if let Some(&si) = node_index.get(&e.src) {
                out[si].push(ei);
            }
        }
        Cfg { nodes, node_index, edges, out, start, finish }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn final_node(&self) -> NodeId {
        self.finish
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        self.node_index.contains_key(&n)
    }

    /// Outgoing edge indices of `n`, in insertion order.
    pub fn out_edges(&self, n: NodeId) -> &[usize] {
        match self.node_index.get(&n) {
            Some(&i) => &self.out[i],
            None => &[],
        }
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    /// Same graph with a different final node (used by access classification).
    pub fn with_final(&self, finish: NodeId) -> Cfg {
        let mut cfg = self.clone();
        cfg.finish = finish;
        cfg
    }

    /// Nodes reachable from `start` by graph edges (labels ignored).
    pub fn reachable_from_start(&self) -> HashSet<NodeId> {
        let mut seen = HashSet::new();
        if !self.contains_node(self.start) {
            return seen;
        }
        let mut stack = vec![self.start];
        seen.insert(self.start);
        while let Some(n) = stack.pop() {
            for &ei in self.out_edges(n) {
                let d = self.edges[ei].dst;
                if self.contains_node(d) && seen.insert(d) {
                    stack.push(d);
                }
            }
        }
        seen
    }

    /// True if the graph contains a directed cycle.
    pub fn is_cyclic(&self) -> bool {
        // Iterative three-color DFS over declared nodes.
        const WHITE: u8 = 0;
        const GRAY: u8 = 1;
        const BLACK: u8 = 2;
        let mut color = vec![WHITE; self.nodes.len()];
        for root in 0..self.nodes.len() {
            if color[root] != WHITE {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            color[root] = GRAY;
            while let Some(&mut (n, ref mut next)) = stack.last_mut() {
                let node = self.nodes[n];
                let outs = self.out_edges(node);
                if *next < outs.len() {
                    let e = &self.edges[outs[*next]];
                    *next += 1;
                    if let Some(&d) = self.node_index.get(&e.dst) {
                        match color[d] {
                            GRAY => return true,
                            WHITE => {
                                color[d] = GRAY;
                                stack.push((d, 0));
                            }
                            _ => {}
                        }
                    }
                } else {
                    color[n] = BLACK;
                    stack.pop();
                }
            }
        }
        false
    }
}

/// Incremental construction used by parsers and reductions.
#[derive(Default, Clone)]
pub struct CfgBuilder {
    nodes: Vec<NodeId>,
    declared: HashSet<NodeId>,
    edges: Vec<Edge>,
    start: Option<NodeId>,
    finish: Option<NodeId>,
}

impl CfgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a node; redeclaring is a no-op (parsers reject duplicates
    /// themselves, generated graphs reuse junction nodes freely).
    pub fn node(&mut self, n: NodeId) -> NodeId {
        if self.declared.insert(n) {
            self.nodes.push(n);
        }
        n
    }

    pub fn edge(&mut self, src: NodeId, dst: NodeId, label: Option<BlockId>) {
        self.edges.push(Edge { src, dst, label });
    }

    pub fn start(&mut self, n: NodeId) {
        self.start = Some(n);
    }

    pub fn finish(&mut self, n: NodeId) {
        self.finish = Some(n);
    }

    pub fn build(self) -> Result<Cfg, CfgError> {
        let start = self.start.ok_or(CfgError::MissingStart)?;
        let finish = self.finish.ok_or(CfgError::MissingFinal)?;
        let cfg = Cfg::new_unchecked(self.nodes, self.edges, start, finish);
        let report = validate(&cfg);
        match report.violations.into_iter().next() {
            None => Ok(cfg),
            Some(v) => Err(CfgError::Invalid(v)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfgError {
    #[error("no start node declared")]
    MissingStart,
    #[error("no final node declared")]
    MissingFinal,
    #[error("invalid graph: {0}")]
    Invalid(Violation),
}

/// One invariant violation found by `validate`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("start node {0} undeclared")]
    StartUndeclared(NodeId),
    #[error("final node {0} undeclared")]
    FinalUndeclared(NodeId),
    #[error("edge {index} ({edge:?}) references undeclared node {node}")]
    EdgeEndpointUndeclared { index: usize, edge: Edge, node: NodeId },
    #[error("node {0} declared more than once")]
    DuplicateNode(NodeId),
}

/// Non-fatal observations about a valid graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoFlag {
    /// The final node cannot be reached from start; both analysis problems
    /// are vacuously false.
    FinalUnreachable,
    /// The graph contains a directed cycle.
    Cyclic,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub infos: Vec<InfoFlag>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every type invariant; violations are data, not errors.
/// Cyclicity and final-unreachability are informational flags.
pub fn validate(cfg: &Cfg) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for &n in cfg.nodes() {
        if !seen.insert(n) {
            report.violations.push(Violation::DuplicateNode(n));
        }
    }
    if !cfg.contains_node(cfg.start()) {
        report.violations.push(Violation::StartUndeclared(cfg.start()));
    }
    if !cfg.contains_node(cfg.final_node()) {
        report.violations.push(Violation::FinalUndeclared(cfg.final_node()));
    }
    for (i, e) in cfg.edges().iter().enumerate() {
        for node in [e.src, e.dst] {
            if !cfg.contains_node(node) {
                report
                    .violations
                    .push(Violation::EdgeEndpointUndeclared { index: i, edge: *e, node });
            }
        }
    }
    if report.is_valid() {
        if !cfg.reachable_from_start().contains(&cfg.final_node()) {
            report.infos.push(InfoFlag::FinalUnreachable);
        }
        if cfg.is_cyclic() {
            report.infos.push(InfoFlag::Cyclic);
        }
    }
    report
}

/// The set of block labels appearing on edges, in first-occurrence order.
pub fn block_universe(cfg: &Cfg) -> IndexSet<BlockId> {
    cfg.edges().iter().filter_map(|e| e.label).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unknown directive {0:?}")]
    UnknownDirective(String),
    #[error("expected {expected}, got {got} arguments")]
    Arity { expected: &'static str, got: usize },
    #[error(transparent)]
    Ident(#[from] IdentError),
    #[error("duplicate declaration of node {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate {0} directive")]
    DuplicateMarker(&'static str),
    #[error("edge references undeclared node {0}")]
    UndeclaredNode(NodeId),
    #[error("missing start directive")]
    MissingStart,
    #[error("missing final directive")]
    MissingFinal,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses the line-oriented CFG text format:
///
/// ```text
/// # comment
/// node <id>
/// edge <src> <dst> [<block>]    (no block = ε-transition)
/// start <id>
/// final <id>
/// ```
pub fn parse_cfg(text: &str) -> Result<Cfg, ParseError> {
    struct RawEdge {
        line: usize,
        src: NodeId,
        dst: NodeId,
        label: Option<BlockId>,
    }
    let mut nodes: Vec<NodeId> = Vec::new();
    let mut declared: HashSet<NodeId> = HashSet::new();
    let mut edges: Vec<RawEdge> = Vec::new();
    let mut start: Option<NodeId> = None;
    let mut finish: Option<NodeId> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut words = content.split_whitespace();
        let Some(directive) = words.next() else { continue };
        let args: Vec<&str> = words.collect();
        match directive {
            "node" => {
                let [name] = args[..] else {
                    return Err(err(line, ParseErrorKind::Arity { expected: "1 (node <id>)", got: args.len() }));
                };
                let n = NodeId::new(name).map_err(|e| err(line, e.into()))?;
                if !declared.insert(n) {
                    return Err(err(line, ParseErrorKind::DuplicateNode(n)));
                }
                nodes.push(n);
            }
            "edge" => {
                let (src, dst, label) = match args[..] {
                    [s, d] => (s, d, None),
                    [s, d, b] => (s, d, Some(b)),
                    _ => {
                        return Err(err(
                            line,
                            ParseErrorKind::Arity { expected: "2 or 3 (edge <src> <dst> [<block>])", got: args.len() },
                        ))
                    }
                };
                let src = NodeId::new(src).map_err(|e| err(line, e.into()))?;
                let dst = NodeId::new(dst).map_err(|e| err(line, e.into()))?;
                let label = match label {
                    Some(b) => Some(BlockId::new(b).map_err(|e| err(line, e.into()))?),
                    None => None,
                };
                edges.push(RawEdge { line, src, dst, label });
            }
            "start" => {
                let [name] = args[..] else {
                    return Err(err(line, ParseErrorKind::Arity { expected: "1 (start <id>)", got: args.len() }));
                };
                let n = NodeId::new(name).map_err(|e| err(line, e.into()))?;
                if start.replace(n).is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateMarker("start")));
                }
            }
            "final" => {
                let [name] = args[..] else {
                    return Err(err(line, ParseErrorKind::Arity { expected: "1 (final <id>)", got: args.len() }));
                };
                let n = NodeId::new(name).map_err(|e| err(line, e.into()))?;
                if finish.replace(n).is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateMarker("final")));
                }
            }
            other => return Err(err(line, ParseErrorKind::UnknownDirective(other.to_owned()))),
        }
    }

    let last = text.lines().count();
    for e in &edges {
        for node in [e.src, e.dst] {
            if !declared.contains(&node) {
                return Err(err(e.line, ParseErrorKind::UndeclaredNode(node)));
            }
        }
    }
    let start = start.ok_or_else(|| err(last, ParseErrorKind::MissingStart))?;
    let finish = finish.ok_or_else(|| err(last, ParseErrorKind::MissingFinal))?;
    for n in [start, finish] {
        if !declared.contains(&n) {
            return Err(err(last, ParseErrorKind::UndeclaredNode(n)));
        }
    }

    let edges = edges
        .into_iter()
        .map(|e| Edge { src: e.src, dst: e.dst, label: e.label })
        .collect();
    Ok(Cfg::new_unchecked(nodes, edges, start, finish))
}

/// Serializes back to the text format. `parse_cfg(to_text(g))` reproduces `g`.
pub fn to_text(cfg: &Cfg) -> String {
    let mut out = String::new();
    for n in cfg.nodes() {
        out.push_str(&format!("node {n}\n"));
    }
    for e in cfg.edges() {
        match e.label {
            Some(b) => out.push_str(&format!("edge {} {} {}\n", e.src, e.dst, b)),
            None => out.push_str(&format!("edge {} {}\n", e.src, e.dst)),
        }
    }
    out.push_str(&format!("start {}\n", cfg.start()));
    out.push_str(&format!("final {}\n", cfg.final_node()));
    out
}

/// Deterministic DOT export. ε edges are labeled "ε"; the start node gets an
/// entry arrow and the final node a double circle.
pub fn emit_dot(cfg: &Cfg) -> String {
    let mut out = String::from("digraph cfg {\n  rankdir=LR;\n  __start [shape=point];\n");
    for n in cfg.nodes() {
        let shape = if *n == cfg.final_node() { "doublecircle" } else { "ellipse" };
        out.push_str(&format!("  \"{n}\" [shape={shape}];\n"));
    }
    out.push_str(&format!("  __start -> \"{}\";\n", cfg.start()));
    for e in cfg.edges() {
        let label = e.label.map_or("ε".to_owned(), |b| b.to_string());
        out.push_str(&format!("  \"{}\" -> \"{}\" [label=\"{}\"];\n", e.src, e.dst, label));
    }
    out.push_str("}\n");
    out
}
