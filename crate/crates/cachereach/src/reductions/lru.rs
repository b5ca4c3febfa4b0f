//! LRU reductions: CNF-SAT to exist-hit, Hamiltonian circuit to exist-miss,
//! and the two arbitrary-start transforms (fresh-access prologue and the
//! loader gadget).

use super::{
    blk, fresh_blocks, node, prepend_prologue, problem_alphabet, switch, CnfFormula,
    ReductionOutput, UndirectedGraph,
};
use crate::cfg::CfgBuilder;
use crate::policies::Policy;
use crate::reach::{InitialMode, ProblemKind};
use std::collections::BTreeMap;

fn literal_block(lit: i32) -> crate::cfg::BlockId {
    super::a_block(lit.unsigned_abs() as usize, lit > 0)
}

/// CNF-SAT → LRU exist-hit with N = numVars + 1: load a fresh block x, then
/// one switch per variable between the two literal blocks, then one switch
/// per clause over its literals' blocks. A path keeps x cached iff it uses
/// at most numVars distinct labels, i.e. iff its variable choices satisfy
/// every clause.
pub fn sat_to_lru_hit(cnf: &CnfFormula) -> ReductionOutput {
    let x = blk("x");
    let mut cb = CfgBuilder::new();
    let start = cb.node(node("S"));
    let mut prev = cb.node(node("q0"));
    cb.edge(start, prev, Some(x));
    for i in 1..=cnf.num_vars {
        let cur = cb.node(node(&format!("v{i}")));
        switch(
            &mut cb,
            prev,
            cur,
            &format!("var{i}"),
            &[vec![super::a_block(i, false)], vec![super::a_block(i, true)]],
        );
        prev = cur;
    }
    for (j, clause) in cnf.clauses.iter().enumerate() {
        let cur = cb.node(node(&format!("c{}", j + 1)));
        let options: Vec<_> = clause.iter().map(|&lit| vec![literal_block(lit)]).collect();
        switch(&mut cb, prev, cur, &format!("cl{}", j + 1), &options);
        prev = cur;
    }
    cb.start(start);
    cb.finish(prev);
    let mut notes = BTreeMap::new();
    notes.insert("source".into(), "cnf".into());
    notes.insert("vars".into(), cnf.num_vars.to_string());
    notes.insert("clauses".into(), cnf.clauses.len().to_string());
    notes.insert("blocks".into(), "x query; a_<i>_<b> per literal".into());
    ReductionOutput {
        cfg: cb.build().expect("SAT reduction is well-formed"),
        policy: Policy::Lru,
        ways: cnf.num_vars + 1,
        sets: 1,
        problem: ProblemKind::ExistHit,
        initial: InitialMode::Empty,
        query: x,
        notes,
    }
}

/// Renames every occurrence of a multiply-occurring variable apart and ties
/// the copies together with an implication cycle, yielding an equisatisfiable
/// formula in which the same literal occurs at most twice and a renamed
/// variable exactly thrice.
pub fn limit_literal_occurrences(cnf: &CnfFormula) -> CnfFormula {
    let mut occurrences = vec![0usize; cnf.num_vars + 1];
    for clause in &cnf.clauses {
        for &lit in clause {
            occurrences[lit.unsigned_abs() as usize] += 1;
        }
    }
    // New index ranges, one block of indices per original variable.
    let mut base = vec![0usize; cnf.num_vars + 1];
    let mut next = 1usize;
    for v in 1..=cnf.num_vars {
        base[v] = next;
        next += occurrences[v].max(1);
    }
    let num_vars = next - 1;
    let mut seen = vec![0usize; cnf.num_vars + 1];
    let mut clauses: Vec<Vec<i32>> = Vec::with_capacity(cnf.clauses.len());
    for clause in &cnf.clauses {
        let mut renamed = Vec::with_capacity(clause.len());
        for &lit in clause {
            let v = lit.unsigned_abs() as usize;
            let copy = (base[v] + seen[v]) as i32;
            seen[v] += 1;
            renamed.push(if lit > 0 { copy } else { -copy });
        }
        clauses.push(renamed);
    }
    for v in 1..=cnf.num_vars {
        let n = occurrences[v];
        if n >= 2 {
            for j in 0..n {
                let from = (base[v] + j) as i32;
                let to = (base[v] + (j + 1) % n) as i32;
                clauses.push(vec![-from, to]); // copy_j ⇒ copy_{j+1}
            }
        }
    }
    CnfFormula::new(num_vars, clauses).expect("renaming preserves well-formedness")
}

/// Hamiltonian circuit → LRU exist-miss with N = n: a layered copy graph
/// in which a path from the fresh-block prologue to the sink repeats no
/// label iff it follows a Hamiltonian circuit; only such paths accumulate
/// the n distinct labels needed to evict x.
pub fn ham_to_lru_miss(g: &UndirectedGraph) -> ReductionOutput {
    assert!(g.n >= 2, "Hamiltonian reduction needs at least two vertices");
    let n = g.n;
    let x = blk("x");
    let vertex_block = |i: usize| blk(&format!("v{i}"));
    let mut cb = CfgBuilder::new();
    let start = cb.node(node("S"));
    let source = cb.node(node("v0_0"));
    cb.edge(start, source, Some(x));
    // Layers 1..n-1 hold copies of vertices 1..n-1; layer n is the sink copy
    // of vertex 0.
    let copy = |cb: &mut CfgBuilder, i: usize, j: usize| cb.node(node(&format!("v{i}_{j}")));
    for j in 1..n {
        for i in 1..n {
            copy(&mut cb, i, j);
        }
    }
    let sink = cb.node(node(&format!("v0_{n}")));
    for j in 0..n {
        let targets: Vec<usize> = if j + 1 == n { vec![0] } else { (1..n).collect() };
        let sources: Vec<usize> = if j == 0 { vec![0] } else { (1..n).collect() };
        for &i in &sources {
            for &t in &targets {
                if g.has_edge(i, t) {
                    let from = node(&format!("v{i}_{j}"));
                    let to = if j + 1 == n { sink } else { node(&format!("v{t}_{}", j + 1)) };
                    cb.edge(from, to, Some(vertex_block(t)));
                }
            }
        }
    }
    cb.start(start);
    cb.finish(sink);
    let mut notes = BTreeMap::new();
    notes.insert("source".into(), "hamiltonian".into());
    notes.insert("vertices".into(), n.to_string());
    notes.insert("blocks".into(), "x query; v<i> per vertex address".into());
    ReductionOutput {
        cfg: cb.build().expect("Hamiltonian reduction is well-formed"),
        policy: Policy::Lru,
        ways: n,
        sets: 1,
        problem: ProblemKind::ExistMiss,
        initial: InitialMode::Empty,
        query: x,
        notes,
    }
}

/// Empty-start → arbitrary-start: prepend N pairwise-distinct fresh-block
/// accesses; after them the cache holds only fresh blocks, so the rest of
/// the run behaves as if it had started empty.
pub fn lru_fresh_prologue(red: &ReductionOutput) -> ReductionOutput {
    assert_eq!(red.policy, Policy::Lru);
    assert_eq!(red.initial, InitialMode::Empty);
    let taken = problem_alphabet(red);
    let fresh = fresh_blocks("_fresh", red.ways, &taken);
    prepend_prologue(red, &fresh, "lru-fresh-prologue")
}

/// Arbitrary-start → empty-start: prepend the loader gadget, N switch stages
/// over the whole block alphabet with an ε exit after every stage, which can
/// install any combination of up to N alphabet blocks in any order.
pub fn lru_loader_gadget(red: &ReductionOutput) -> ReductionOutput {
    assert_eq!(red.policy, Policy::Lru);
    assert_eq!(red.initial, InitialMode::Arbitrary);
    let alphabet = problem_alphabet(red);
    let cfg = &red.cfg;
    let mut cb = CfgBuilder::new();
    let mut stage_nodes = Vec::with_capacity(red.ways + 1);
    for k in 0..=red.ways {
        stage_nodes.push(cb.node(node(&format!("ld/{k}"))));
    }
    for n in cfg.nodes() {
        cb.node(*n);
    }
    if alphabet.is_empty() {
        cb.edge(stage_nodes[0], cfg.start(), None);
    } else {
        for k in 1..=red.ways {
            for &b in &alphabet {
                cb.edge(stage_nodes[k - 1], stage_nodes[k], Some(b));
            }
        }
        for &stage in &stage_nodes {
            cb.edge(stage, cfg.start(), None);
        }
    }
    for e in cfg.edges() {
        cb.edge(e.src, e.dst, e.label);
    }
    cb.start(stage_nodes[0]);
    cb.finish(cfg.final_node());
    let mut notes = red.notes.clone();
    notes.insert("transform".into(), "lru-loader-gadget".into());
    ReductionOutput {
        cfg: cb.build().expect("loader transform preserves validity"),
        policy: red.policy,
        ways: red.ways,
        sets: red.sets,
        problem: red.problem,
        initial: InitialMode::Empty,
        query: red.query,
        notes,
    }
}
