//! Register machine → FIFO cache analysis.
//!
//! The register state v_1..v_r is encoded as the FIFO word
//! `a_1_{v1} e_2 a_2_{v2} … e_r a_r_{vr}` (a delay line). Gadgets rotate the
//! word one full turn per simulated instruction; a failed guard leaves the
//! word permanently "well-phased but not well-formed", and the epilogue
//! turns well-formedness into presence of `a_r_f` (the query block).
//!
//! With the `even_ways` variant the word is padded by a block `p` and every
//! gadget body runs twice, wrapped in accesses to `pp` and `p`.

use super::{
    a_block, blk, chain, e_block, fresh_blocks, node, prepend_prologue, problem_alphabet, switch,
    ReductionOutput,
};
use crate::brm::{BrmInstr, BrmMachine, RegState};
use crate::cfg::{BlockId, CfgBuilder, NodeId};
use crate::policies::{FifoState, Policy};
use crate::reach::{InitialMode, ProblemKind};
use std::collections::BTreeMap;

/// Guard probe: accesses `a_i_b  e_i  a_i_b`.
pub(crate) fn phi(i: usize, b: bool) -> Vec<BlockId> {
    vec![a_block(i, b), e_block(i), a_block(i, b)]
}

/// Assignment write: accesses `e_i  a_i_b  e_i`.
pub(crate) fn psi(i: usize, b: bool) -> Vec<BlockId> {
    vec![e_block(i), a_block(i, b), e_block(i)]
}

fn g_block(i: usize) -> BlockId {
    blk(&format!("g_{i}"))
}

fn f_block(i: usize) -> BlockId {
    blk(&format!("f_{i}"))
}

/// One gadget body: stages 1..r where stage j is a φ-switch except at the
/// instruction's register, which gets the fixed φ (guard) or ψ (assignment).
fn gadget_body(cb: &mut CfgBuilder, from: NodeId, to: NodeId, prefix: &str, r: usize, instr: BrmInstr) {
    let mut cur = from;
    for j in 1..=r {
        let next = if j == r { to } else { cb.node(node(&format!("{prefix}/j{j}"))) };
        if j == instr.register() {
            let seq = match instr {
                BrmInstr::Guard { value, .. } => phi(j, value),
                BrmInstr::Assign { value, .. } => psi(j, value),
            };
            chain(cb, cur, next, &format!("{prefix}/s{j}"), &seq);
        } else {
            switch(cb, cur, next, &format!("{prefix}/s{j}"), &[phi(j, false), phi(j, true)]);
        }
        cur = next;
    }
}

fn gadget(cb: &mut CfgBuilder, from: NodeId, to: NodeId, prefix: &str, r: usize, instr: BrmInstr, even: bool) {
    if !even {
        gadget_body(cb, from, to, prefix, r, instr);
        return;
    }
    let c1 = cb.node(node(&format!("{prefix}/c1")));
    let mid = cb.node(node(&format!("{prefix}/mid")));
    let c2 = cb.node(node(&format!("{prefix}/c2")));
    cb.edge(from, c1, Some(blk("pp")));
    gadget_body(cb, c1, mid, &format!("{prefix}/g1"), r, instr);
    cb.edge(mid, c2, Some(blk("p")));
    gadget_body(cb, c2, to, &format!("{prefix}/g2"), r, instr);
}

/// Reduces register-machine reachability to FIFO exist-hit or exist-miss
/// with N = 2r−1 ways (N = 2r with `even_ways`). Machines with a single
/// register are padded with an untouched dummy register: the word encoding
/// needs r ≥ 2 to carry phase information.
pub fn brm_to_fifo(machine: &BrmMachine, problem: ProblemKind, even_ways: bool) -> ReductionOutput {
    let r = machine.registers.max(2);
    let ways = if even_ways { 2 * r } else { 2 * r - 1 };
    let query = a_block(r, false);
    let mut cb = CfgBuilder::new();
    let start = cb.node(node("S"));
    let m_node = |n: NodeId| node(&format!("m/{n}"));
    for n in machine.nodes() {
        cb.node(m_node(*n));
    }

    let mut prologue: Vec<BlockId> = Vec::new();
    if even_ways {
        prologue.push(blk("p"));
    }
    prologue.push(a_block(1, false));
    for i in 2..=r {
        prologue.push(e_block(i));
        prologue.push(a_block(i, false));
    }
    chain(&mut cb, start, m_node(machine.initial()), "pro", &prologue);

    for (k, edge) in machine.edges().iter().enumerate() {
        gadget(&mut cb, m_node(edge.src), m_node(edge.dst), &format!("e{k}"), r, edge.instr, even_ways);
    }

    // Epilogue 1: reset every register to f.
    let fa = cb.node(node("Fa"));
    let reset: Vec<BlockId> = (1..=r).flat_map(|i| psi(i, false)).collect();
    let ep1: Vec<BlockId> = if even_ways {
        let mut seq = vec![blk("pp")];
        seq.extend(reset.iter().copied());
        seq.push(blk("p"));
        seq.extend(reset.iter().copied());
        seq
    } else {
        reset
    };
    chain(&mut cb, m_node(machine.final_node()), fa, "ep1", &ep1);

    // Epilogue 2: exactly 2r−2 misses keep the query cached iff the word is
    // the all-false well-formed one.
    let fh = cb.node(node("Fh"));
    let mut ep2: Vec<BlockId> = Vec::new();
    if even_ways {
        ep2.push(blk("pp"));
    }
    ep2.push(a_block(1, false));
    ep2.push(g_block(1));
    for i in 2..r {
        ep2.extend([e_block(i), f_block(i), a_block(i, false), g_block(i)]);
    }
    ep2.extend([e_block(r), f_block(r)]);
    chain(&mut cb, fa, fh, "ep2", &ep2);

    // Epilogue 3 (miss variant): access the query once, then N−1 fresh
    // blocks. A word containing the query keeps it older than the fresh
    // suffix and flushes it; a query-free word re-admits it as the youngest
    // entry, which the N−1 fresh misses cannot evict.
    let finish = match problem {
        ProblemKind::ExistHit => fh,
        ProblemKind::ExistMiss => {
            let ff = cb.node(node("F"));
            let mut ep3 = vec![query];
            ep3.extend(fresh_blocks("h", ways - 1, &[]));
            chain(&mut cb, fh, ff, "ep3", &ep3);
            ff
        }
    };
    cb.start(start);
    cb.finish(finish);

    let mut notes = BTreeMap::new();
    notes.insert("source".into(), "brm".into());
    notes.insert("registers".into(), machine.registers.to_string());
    if machine.registers < r {
        notes.insert("padded_registers".into(), r.to_string());
    }
    notes.insert("parity".into(), if even_ways { "even" } else { "odd" }.into());
    notes.insert("blocks".into(), "a_<i>_<b>, e_<i>, f_<i>, g_<i>, p, pp, h_<k>".into());
    ReductionOutput {
        cfg: cb.build().expect("FIFO reduction is well-formed"),
        policy: Policy::Fifo,
        ways,
        sets: 1,
        problem,
        initial: InitialMode::Empty,
        query,
        notes,
    }
}

fn parse_indexed(name: &str, stem: &str) -> Option<usize> {
    name.strip_prefix(stem)?.strip_prefix('_')?.parse().ok()
}

pub(crate) fn parse_a_block(b: BlockId) -> Option<(usize, bool)> {
    let rest = b.as_str().strip_prefix("a_")?;
    let (idx, val) = rest.split_once('_')?;
    let value = match val {
        "t" => true,
        "f" => false,
        _ => return None,
    };
    Some((idx.parse().ok()?, value))
}

pub(crate) fn parse_e_block(b: BlockId) -> Option<usize> {
    parse_indexed(b.as_str(), "e")
}

/// Recognizes `a_i e_{i+1} a_{i+1} … e_{i-1} a_{i-1}` (cyclically): returns
/// the shift i and the encoded register state.
pub fn fifo_wellformed(state: &FifoState, r: usize) -> Option<(usize, RegState)> {
    let w = state.word();
    if r < 1 || w.len() != 2 * r - 1 {
        return None;
    }
    let (shift, first) = parse_a_block(w[0])?;
    if shift == 0 || shift > r {
        return None;
    }
    let mut bits = vec![false; r];
    bits[shift - 1] = first;
    let mut pos = 1;
    let mut j = shift % r + 1;
    while j != shift {
        if parse_e_block(w[pos]) != Some(j) {
            return None;
        }
        let (reg, value) = parse_a_block(w[pos + 1])?;
        if reg != j {
            return None;
        }
        bits[j - 1] = value;
        pos += 2;
        j = j % r + 1;
    }
    Some((shift, RegState::from_bits(bits)))
}

/// Recognizes the phase pattern: `β_i α_{i+1} β_{i+1} … α_{i-1} β_{i-1}`
/// where each (α_j, β_j) is {e_j, a_j_·} in either order; returns the shift.
pub fn fifo_wellphased(state: &FifoState, r: usize) -> Option<usize> {
    let w = state.word();
    if r < 1 || w.len() != 2 * r - 1 {
        return None;
    }
    let shift = match (parse_e_block(w[0]), parse_a_block(w[0])) {
        (Some(i), _) => i,
        (None, Some((i, _))) => i,
        _ => return None,
    };
    if shift == 0 || shift > r {
        return None;
    }
    let mut pos = 1;
    let mut j = shift % r + 1;
    while j != shift {
        let pair = (w[pos], w[pos + 1]);
        let e_first = parse_e_block(pair.0) == Some(j)
            && matches!(parse_a_block(pair.1), Some((reg, _)) if reg == j);
        let a_first = matches!(parse_a_block(pair.0), Some((reg, _)) if reg == j)
            && parse_e_block(pair.1) == Some(j);
        if !e_first && !a_first {
            return None;
        }
        pos += 2;
        j = j % r + 1;
    }
    Some(shift)
}

/// 2N−1 pairwise-distinct fresh blocks: accessing them in sequence removes
/// every foreign block from any legal N-way FIFO state (at most N−1 of them
/// can hit, leaving at least N evicting misses).
pub fn fifo_evict_all_prologue(ways: usize) -> Vec<BlockId> {
    assert!(ways >= 1);
    fresh_blocks("_fresh", 2 * ways - 1, &[])
}

/// Empty-start → arbitrary-start for FIFO, by the 2N−1 eviction prologue.
pub fn fifo_fresh_prologue(red: &ReductionOutput) -> ReductionOutput {
    assert_eq!(red.policy, Policy::Fifo);
    assert_eq!(red.initial, InitialMode::Empty);
    let taken = problem_alphabet(red);
    let fresh = fresh_blocks("_fresh", 2 * red.ways - 1, &taken);
    prepend_prologue(red, &fresh, "fifo-fresh-prologue")
}

/// Embeds a FIFO problem into a pseudo-RR cache with `sets` sets by mapping
/// every block into the distinguished set 0. Pure label renaming: the
/// verdict is preserved and the other sets are never touched.
pub fn fifo_to_prr(red: &ReductionOutput, sets: usize) -> ReductionOutput {
    assert_eq!(red.policy, Policy::Fifo);
    assert!(sets >= 1);
    let relabel = |b: BlockId| blk(&format!("0:{b}"));
    let cfg = &red.cfg;
    let mut cb = CfgBuilder::new();
    for n in cfg.nodes() {
        cb.node(*n);
    }
    for e in cfg.edges() {
        cb.edge(e.src, e.dst, e.label.map(relabel));
    }
    cb.start(cfg.start());
    cb.finish(cfg.final_node());
    let mut notes = red.notes.clone();
    notes.insert("transform".into(), "fifo-to-prr".into());
    ReductionOutput {
        cfg: cb.build().expect("relabeling preserves validity"),
        policy: Policy::Prr,
        ways: red.ways,
        sets,
        problem: red.problem,
        initial: red.initial,
        query: relabel(red.query),
        notes,
    }
}
