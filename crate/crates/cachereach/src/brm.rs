//! Boolean register machines: r Boolean registers and a directed multigraph
//! whose edges carry guards (`v_i = b`) or assignments (`v_i := b`).
//! Reachability from the all-false register state is the source problem of
//! the cache-hardness reductions.

use crate::cfg::NodeId;
use crate::reductions::CnfFormula;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// A guard or assignment over register `register` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BrmInstr {
    Guard { register: usize, value: bool },
    Assign { register: usize, value: bool },
}

impl BrmInstr {
    pub fn register(self) -> usize {
        match self {
            BrmInstr::Guard { register, .. } | BrmInstr::Assign { register, .. } => register,
        }
    }

    pub fn value(self) -> bool {
        match self {
            BrmInstr::Guard { value, .. } | BrmInstr::Assign { value, .. } => value,
        }
    }
}

impl fmt::Display for BrmInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BrmInstr::Guard { register, value } => {
                write!(f, "v{register}={}", if *value { 't' } else { 'f' })
            }
            BrmInstr::Assign { register, value } => {
                write!(f, "v{register}:={}", if *value { 't' } else { 'f' })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BrmEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub instr: BrmInstr,
}

/// Vector of r Booleans; all-false initially.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RegState {
    bits: Vec<bool>,
}

impl RegState {
    pub fn all_false(registers: usize) -> Self {
        RegState { bits: vec![false; registers] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        RegState { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Register value, 1-based.
    pub fn get(&self, register: usize) -> bool {
        self.bits[register - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    fn mask(&self) -> u64 {
        self.bits.iter().enumerate().fold(0, |m, (i, &b)| m | (u64::from(b) << i))
    }
}

impl fmt::Display for RegState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", if *b { 't' } else { 'f' })?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct BrmMachine {
    pub registers: usize,
    nodes: Vec<NodeId>,
    node_index: HashMap<NodeId, usize>,
    edges: Vec<BrmEdge>,
    out: Vec<Vec<usize>>,
    initial: NodeId,
    finish: NodeId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrmError {
    #[error("machine must have at least one register")]
    NoRegisters,
    #[error("node {0} undeclared")]
    UndeclaredNode(NodeId),
    #[error("instruction references register {register} of a {registers}-register machine")]
    RegisterOutOfRange { register: usize, registers: usize },
}

impl BrmMachine {
    pub fn new(
        registers: usize,
        nodes: Vec<NodeId>,
        edges: Vec<BrmEdge>,
        initial: NodeId,
        finish: NodeId,
    ) -> Result<Self, BrmError> {
        if registers == 0 {
            return Err(BrmError::NoRegisters);
        }
        let mut node_index = HashMap::new();
        for (i, &n) in nodes.iter().enumerate() {
            node_index.entry(n).or_insert(i);
        }
        for &n in [initial, finish].iter() {
            if !node_index.contains_key(&n) {
                return Err(BrmError::UndeclaredNode(n));
            }
        }
        let mut out = vec![Vec::new(); nodes.len()];
        for (ei, e) in edges.iter().enumerate() {
            for n in [e.src, e.dst] {
                if !node_index.contains_key(&n) {
                    return Err(BrmError::UndeclaredNode(n));
                }
            }
            let reg = e.instr.register();
            if reg == 0 || reg > registers {
                return Err(BrmError::RegisterOutOfRange { register: reg, registers });
            }
            out[node_index[&e.src]].push(ei);
        }
        Ok(BrmMachine { registers, nodes, node_index, edges, out, initial, finish })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[BrmEdge] {
        &self.edges
    }

    pub fn initial(&self) -> NodeId {
        self.initial
    }

    pub fn final_node(&self) -> NodeId {
        self.finish
    }

    /// True if the machine's graph contains a directed cycle.
    pub fn is_cyclic(&self) -> bool {
        const WHITE: u8 = 0;
        const GRAY: u8 = 1;
        let mut color = vec![WHITE; self.nodes.len()];
        for root in 0..self.nodes.len() {
            if color[root] != WHITE {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            color[root] = GRAY;
            while let Some(&mut (n, ref mut next)) = stack.last_mut() {
                if *next < self.out[n].len() {
                    let e = &self.edges[self.out[n][*next]];
                    *next += 1;
                    let d = self.node_index[&e.dst];
                    match color[d] {
                        GRAY => return true,
                        WHITE => {
                            color[d] = GRAY;
                            stack.push((d, 0));
                        }
                        _ => {}
                    }
                } else {
                    color[n] = 2;
                    stack.pop();
                }
            }
        }
        false
    }
}

/// Executes one instruction: a failed guard blocks the edge (`None`).
pub fn brm_step(state: &RegState, instr: &BrmInstr) -> Option<RegState> {
    match *instr {
        BrmInstr::Guard { register, value } => {
            if state.get(register) == value {
                Some(state.clone())
            } else {
                None
            }
        }
        BrmInstr::Assign { register, value } => {
            let mut bits = state.bits.clone();
            bits[register - 1] = value;
            Some(RegState { bits })
        }
    }
}

/// One step of a reachability witness: the edge taken and the register
/// state after it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrmWitnessStep {
    pub edge_index: usize,
    pub state_after: RegState,
}

#[derive(Clone, Debug)]
pub struct BrmReachability {
    pub reachable: bool,
    pub witness: Option<Vec<BrmWitnessStep>>,
    /// Product states (node, register state) inserted; at most |nodes|·2^r.
    pub states_explored: usize,
}

/// BFS over (node, register state) from (initial, all-false); decides
/// whether the final node is reachable.
pub fn brm_reachable(machine: &BrmMachine) -> BrmReachability {
    struct Entry {
        node: usize,
        state: RegState,
        parent: Option<(usize, usize)>, // (entry, edge index)
    }
    let init = RegState::all_false(machine.registers);
    let start = machine.node_index[&machine.initial];
    let target = machine.node_index[&machine.finish];
    let mut visited = std::collections::HashSet::new();
    visited.insert((start, init.mask()));
    let mut entries = vec![Entry { node: start, state: init, parent: None }];
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut found = if start == target { Some(0) } else { None };
    while found.is_none() {
        let Some(idx) = queue.pop_front() else { break };
        for &ei in &machine.out[entries[idx].node] {
            let edge = &machine.edges[ei];
            let Some(next) = brm_step(&entries[idx].state, &edge.instr) else {
                continue;
            };
            let dst = machine.node_index[&edge.dst];
            if visited.insert((dst, next.mask())) {
                entries.push(Entry { node: dst, state: next, parent: Some((idx, ei)) });
                let new_idx = entries.len() - 1;
                if dst == target {
                    found = Some(new_idx);
                    break;
                }
                queue.push_back(new_idx);
            }
        }
    }
    let witness = found.map(|mut idx| {
        let mut steps = Vec::new();
        while let Some((parent, edge_index)) = entries[idx].parent {
            steps.push(BrmWitnessStep { edge_index, state_after: entries[idx].state.clone() });
            idx = parent;
        }
        steps.reverse();
        steps
    });
    BrmReachability { reachable: found.is_some(), witness, states_explored: entries.len() }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct BrmParseError {
    pub line: usize,
    pub message: String,
}

fn perr(line: usize, message: impl Into<String>) -> BrmParseError {
    BrmParseError { line, message: message.into() }
}

fn parse_bit(line: usize, s: &str) -> Result<bool, BrmParseError> {
    match s {
        "t" => Ok(true),
        "f" => Ok(false),
        other => Err(perr(line, format!("expected t or f, got {other:?}"))),
    }
}

/// Parses the BRM text format:
///
/// ```text
/// registers <r>
/// node <id>
/// edge <src> <dst> guard <i> <t|f>
/// edge <src> <dst> assign <i> <t|f>
/// init <id>
/// final <id>
/// ```
pub fn parse_brm(text: &str) -> Result<BrmMachine, BrmParseError> {
    let mut registers: Option<usize> = None;
    let mut nodes: Vec<NodeId> = Vec::new();
    let mut declared = std::collections::HashSet::new();
    let mut edges: Vec<(usize, BrmEdge)> = Vec::new();
    let mut initial: Option<NodeId> = None;
    let mut finish: Option<NodeId> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let words: Vec<&str> = content.split_whitespace().collect();
        let Some((&directive, args)) = words.split_first() else { continue };
        let node_arg = |line: usize, args: &[&str]| -> Result<NodeId, BrmParseError> {
            let [name] = args else {
                return Err(perr(line, "expected one node name"));
            };
            NodeId::new(name).map_err(|e| perr(line, e.to_string()))
        };
        match directive {
            "registers" => {
                let [count] = args else {
                    return Err(perr(line, "expected registers <r>"));
                };
                let r: usize = count.parse().map_err(|_| perr(line, "register count must be a number"))?;
                if registers.replace(r).is_some() {
                    return Err(perr(line, "duplicate registers directive"));
                }
            }
            "node" => {
                let n = node_arg(line, args)?;
                if !declared.insert(n) {
                    return Err(perr(line, format!("duplicate declaration of node {n}")));
                }
                nodes.push(n);
            }
            "edge" => {
                let [src, dst, kind, reg, bit] = args else {
                    return Err(perr(line, "expected edge <src> <dst> guard|assign <i> <t|f>"));
                };
                let src = NodeId::new(src).map_err(|e| perr(line, e.to_string()))?;
                let dst = NodeId::new(dst).map_err(|e| perr(line, e.to_string()))?;
                let register: usize =
                    reg.parse().map_err(|_| perr(line, "register index must be a number"))?;
                let value = parse_bit(line, bit)?;
                let instr = match *kind {
                    "guard" => BrmInstr::Guard { register, value },
                    "assign" => BrmInstr::Assign { register, value },
                    other => return Err(perr(line, format!("unknown instruction kind {other:?}"))),
                };
                edges.push((line, BrmEdge { src, dst, instr }));
            }
            "init" => {
                let n = node_arg(line, args)?;
                if initial.replace(n).is_some() {
                    return Err(perr(line, "duplicate init directive"));
                }
            }
            "final" => {
                let n = node_arg(line, args)?;
                if finish.replace(n).is_some() {
                    return Err(perr(line, "duplicate final directive"));
                }
            }
            other => return Err(perr(line, format!("unknown directive {other:?}"))),
        }
    }

    let last = text.lines().count();
    let registers = registers.ok_or_else(|| perr(last, "missing registers directive"))?;
    let initial = initial.ok_or_else(|| perr(last, "missing init directive"))?;
    let finish = finish.ok_or_else(|| perr(last, "missing final directive"))?;
    for (line, e) in &edges {
        let reg = e.instr.register();
        if reg == 0 || reg > registers {
            return Err(perr(
                *line,
                format!("instruction references register {reg} of a {registers}-register machine"),
            ));
        }
        for n in [e.src, e.dst] {
            if !declared.contains(&n) {
                return Err(perr(*line, format!("edge references undeclared node {n}")));
            }
        }
    }
    BrmMachine::new(registers, nodes, edges.into_iter().map(|(_, e)| e).collect(), initial, finish)
        .map_err(|e| perr(last, e.to_string()))
}

/// Serializes to the BRM text format.
pub fn to_text(machine: &BrmMachine) -> String {
    let mut out = format!("registers {}\n", machine.registers);
    for n in machine.nodes() {
        out.push_str(&format!("node {n}\n"));
    }
    for e in machine.edges() {
        let (kind, register, value) = match e.instr {
            BrmInstr::Guard { register, value } => ("guard", register, value),
            BrmInstr::Assign { register, value } => ("assign", register, value),
        };
        out.push_str(&format!(
            "edge {} {} {} {} {}\n",
            e.src,
            e.dst,
            kind,
            register,
            if value { 't' } else { 'f' }
        ));
    }
    out.push_str(&format!("init {}\n", machine.initial));
    out.push_str(&format!("final {}\n", machine.finish));
    out
}

/// Encodes CNF-SAT as register-machine reachability: one assignment switch
/// per variable in index order, then one guard switch per clause. The result
/// is acyclic with r + #clauses + 1 nodes, and reachable iff the formula is
/// satisfiable. An empty clause yields a stage with no outgoing edges.
pub fn sat_to_brm(cnf: &CnfFormula) -> BrmMachine {
    let node = |name: String| NodeId::new(&name).expect("generated node name is valid");
    let mut nodes = vec![node("n0".into())];
    let mut edges = Vec::new();
    for i in 1..=cnf.num_vars {
        let cur = node(format!("n{i}"));
        for value in [false, true] {
            edges.push(BrmEdge {
                src: nodes[i - 1],
                dst: cur,
                instr: BrmInstr::Assign { register: i, value },
            });
        }
        nodes.push(cur);
    }
    let mut prev = nodes[cnf.num_vars];
    for (j, clause) in cnf.clauses.iter().enumerate() {
        let cur = node(format!("c{}", j + 1));
        for &lit in clause {
            edges.push(BrmEdge {
                src: prev,
                dst: cur,
                instr: BrmInstr::Guard { register: lit.unsigned_abs() as usize, value: lit > 0 },
            });
        }
        nodes.push(cur);
        prev = cur;
    }
    let initial = nodes[0];
    BrmMachine::new(cnf.num_vars.max(1), nodes, edges, initial, prev)
        .expect("generated machine is well-formed")
}
