//! Register machine → NMRU cache analysis with N = 2r+3 ways.
//!
//! The register state lives in the NMRU word as
//! `e_1^0 … e_r^0 d^0 a_1_{v1}^0 … a_r_{vr}^0 g_0^0 g_1^1`: the e-zone
//! before `d` and the a-zone between `d` and the g-blocks. Probe gadgets
//! drive every MRU bit to one and release it through g_0/g_1; a violated
//! guard forces an a-block into the e-zone, which no later gadget can undo,
//! and the epilogue converts zone integrity into presence of `d`.

use super::{a_block, blk, chain, e_block, node, switch, ReductionOutput};
use crate::brm::{BrmInstr, BrmMachine, RegState};
use crate::cfg::{BlockId, CfgBuilder, NodeId};
use crate::policies::{NmruState, Policy};
use crate::reach::{InitialMode, ProblemKind};
use std::collections::BTreeMap;

fn c_block(i: usize) -> BlockId {
    blk(&format!("c_{i}"))
}

fn g_block(s: usize) -> BlockId {
    blk(&format!("g_{s}"))
}

/// One probe body: access d, walk the a-zone (switching freely except at
/// the instruction's register), then freshen the e-zone; assignments skip
/// their register in the walk and write it after the e-chain.
fn probe_body(cb: &mut CfgBuilder, from: NodeId, to: NodeId, prefix: &str, r: usize, instr: BrmInstr) {
    let d_node = cb.node(node(&format!("{prefix}/d")));
    cb.edge(from, d_node, Some(blk("d")));
    let mut cur = d_node;
    let trailing_write = matches!(instr, BrmInstr::Assign { .. });
    for j in (1..=r).filter(|&j| !(trailing_write && j == instr.register())) {
        let next = cb.node(node(&format!("{prefix}/a{j}")));
        let stage_prefix = format!("{prefix}/s{j}");
        if !trailing_write && j == instr.register() {
            chain(cb, cur, next, &stage_prefix, &[a_block(j, instr.value())]);
        } else {
            switch(cb, cur, next, &stage_prefix, &[vec![a_block(j, false)], vec![a_block(j, true)]]);
        }
        cur = next;
    }
    let e_blocks: Vec<BlockId> = (1..=r).map(e_block).collect();
    if trailing_write {
        let before_write = cb.node(node(&format!("{prefix}/w")));
        chain(cb, cur, before_write, &format!("{prefix}/e"), &e_blocks);
        cb.edge(before_write, to, Some(a_block(instr.register(), instr.value())));
    } else {
        chain(cb, cur, to, &format!("{prefix}/e"), &e_blocks);
    }
}

/// Full gadget: probe, g_0, probe again, g_1.
fn gadget(cb: &mut CfgBuilder, from: NodeId, to: NodeId, prefix: &str, r: usize, instr: BrmInstr) {
    let after_first = cb.node(node(&format!("{prefix}/p1")));
    let after_g0 = cb.node(node(&format!("{prefix}/g0")));
    let after_second = cb.node(node(&format!("{prefix}/p2")));
    probe_body(cb, from, after_first, &format!("{prefix}/b1"), r, instr);
    cb.edge(after_first, after_g0, Some(g_block(0)));
    probe_body(cb, after_g0, after_second, &format!("{prefix}/b2"), r, instr);
    cb.edge(after_second, to, Some(g_block(1)));
}

/// Reduces register-machine reachability to NMRU exist-hit or exist-miss
/// with N = 2r+3 ways; the query block is `d`.
pub fn brm_to_nmru(machine: &BrmMachine, problem: ProblemKind) -> ReductionOutput {
    let r = machine.registers;
    let ways = 2 * r + 3;
    let query = blk("d");
    let mut cb = CfgBuilder::new();
    let start = cb.node(node("S"));
    let m_node = |n: NodeId| node(&format!("m/{n}"));
    for n in machine.nodes() {
        cb.node(m_node(*n));
    }

    let mut prologue: Vec<BlockId> = (1..=r).map(e_block).collect();
    prologue.push(blk("d"));
    prologue.extend((1..=r).map(|i| a_block(i, false)));
    prologue.push(g_block(0));
    prologue.push(g_block(1));
    chain(&mut cb, start, m_node(machine.initial()), "pro", &prologue);

    for (k, edge) in machine.edges().iter().enumerate() {
        gadget(&mut cb, m_node(edge.src), m_node(edge.dst), &format!("e{k}"), r, edge.instr);
    }

    // Epilogue 1: assignment gadgets resetting every register to f.
    let mut cur = m_node(machine.final_node());
    for i in 1..=r {
        let next = cb.node(node(&format!("ep1/{i}")));
        gadget(&mut cb, cur, next, &format!("ep1g{i}"), r, BrmInstr::Assign { register: i, value: false });
        cur = next;
    }

    // Epilogue 2: freshen the a-zone, overwrite the e-zone with c-blocks.
    let fh = cb.node(node("Fh"));
    let mut ep2: Vec<BlockId> = (1..=r).map(|i| a_block(i, false)).collect();
    ep2.extend((1..=r).map(c_block));
    chain(&mut cb, cur, fh, "ep2", &ep2);

    let finish = match problem {
        ProblemKind::ExistHit => fh,
        ProblemKind::ExistMiss => {
            let ff = cb.node(node("F"));
            let mut ep3 = vec![blk("d"), g_block(0)];
            ep3.extend((1..=r).map(c_block));
            ep3.push(a_block(1, true));
            chain(&mut cb, fh, ff, "ep3", &ep3);
            ff
        }
    };
    cb.start(start);
    cb.finish(finish);

    let mut notes = BTreeMap::new();
    notes.insert("source".into(), "brm".into());
    notes.insert("registers".into(), r.to_string());
    notes.insert("blocks".into(), "d query; e_<i>, a_<i>_<b>, c_<i>, g_0, g_1".into());
    ReductionOutput {
        cfg: cb.build().expect("NMRU reduction is well-formed"),
        policy: Policy::Nmru,
        ways,
        sets: 1,
        problem,
        initial: InitialMode::Empty,
        query,
        notes,
    }
}

fn zone_bits_zero(entries: &[(BlockId, bool)]) -> bool {
    entries.iter().all(|&(_, bit)| !bit)
}

fn g_suffix_ok(entries: &[(BlockId, bool)], step: usize) -> bool {
    let n = entries.len();
    entries[n - 2] == (g_block(0), step == 1) && entries[n - 1] == (g_block(1), step == 0)
}

/// Recognizes `e-perm^0 d^0 a-perm^0 g_0^s g_1^{1-s}` where the e-zone holds
/// each of e_1..e_r once and the a-zone one a-block per register; returns
/// the encoded register state.
pub fn nmru_wellformed(state: &NmruState, r: usize, step: usize) -> Option<RegState> {
    let entries = state.entries();
    if entries.len() != 2 * r + 3 || !g_suffix_ok(entries, step) {
        return None;
    }
    if entries[r] != (blk("d"), false) {
        return None;
    }
    let e_zone = &entries[..r];
    let a_zone = &entries[r + 1..2 * r + 1];
    if !zone_bits_zero(e_zone) || !zone_bits_zero(a_zone) {
        return None;
    }
    let mut e_seen = vec![false; r];
    for &(b, _) in e_zone {
        let i = super::fifo::parse_e_block(b)?;
        if i == 0 || i > r || e_seen[i - 1] {
            return None;
        }
        e_seen[i - 1] = true;
    }
    let mut bits = vec![None; r];
    for &(b, _) in a_zone {
        let (i, value) = super::fifo::parse_a_block(b)?;
        if i == 0 || i > r || bits[i - 1].is_some() {
            return None;
        }
        bits[i - 1] = Some(value);
    }
    Some(RegState::from_bits(bits.into_iter().collect::<Option<Vec<_>>>()?))
}

/// Well-phased: d fixed at position r with the g-suffix, and the 2r zone
/// slots holding each e-block and one a-block per register in any order.
pub fn nmru_wellphased(state: &NmruState, r: usize, step: usize) -> bool {
    let entries = state.entries();
    if entries.len() != 2 * r + 3 || !g_suffix_ok(entries, step) {
        return false;
    }
    if entries[r] != (blk("d"), false) {
        return false;
    }
    let zone: Vec<(BlockId, bool)> =
        entries[..r].iter().chain(&entries[r + 1..2 * r + 1]).copied().collect();
    if !zone_bits_zero(&zone) {
        return false;
    }
    let mut e_seen = vec![false; r];
    let mut a_seen = vec![false; r];
    for (b, _) in zone {
        if let Some(i) = super::fifo::parse_e_block(b) {
            if i == 0 || i > r || e_seen[i - 1] {
                return false;
            }
            e_seen[i - 1] = true;
        } else if let Some((i, _)) = super::fifo::parse_a_block(b) {
            if i == 0 || i > r || a_seen[i - 1] {
                return false;
            }
            a_seen[i - 1] = true;
        } else {
            return false;
        }
    }
    true
}
