//! End-to-end CLI checks: every `reduce` kind feeds `analyze` and matches
//! the corresponding oracle; outputs are deterministic and the JSON shapes
//! and exit codes hold.

use cachereach::brm::{brm_reachable, parse_brm};
use cachereach::oracles::{ham_brute, sat_brute};
use cachereach::reductions::{CnfFormula, UndirectedGraph};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cachereach")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

const SAT_CNF: &str = "c worked formula\np cnf 3 3\n-3 2 1 0\n-3 -2 -1 0\n3 2 -1 0\n";
const UNSAT_CNF: &str = "p cnf 1 2\n1 0\n-1 0\n";
const TRIANGLE: &str = "n 3\ne 0 1\ne 1 2\ne 0 2\n";
const PATH3: &str = "n 3\ne 0 1\ne 1 2\n";
const MACHINE: &str = "registers 2\nnode A\nnode B\nnode C\n\
                       edge A B assign 1 t\nedge B C guard 1 t\ninit A\nfinal C\n";
const BLOCKED: &str = "registers 1\nnode A\nnode B\nedge A B guard 1 t\ninit A\nfinal B\n";

fn analyze_answer(path: &Path, extra: &[&str]) -> bool {
    let mut args = vec!["analyze", path.to_str().unwrap(), "--format", "json"];
    args.extend(extra);
    let out = run(&args);
    assert!(out.status.success(), "analyze failed: {}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["answer", "witness", "stats"] {
        assert!(json.get(key).is_some(), "missing {key} in analyze JSON");
    }
    json["answer"].as_bool().unwrap()
}

fn reduce_to(dir: &Path, kind: &str, input: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out_path = dir.join(name);
    let mut args = vec!["reduce", kind, input.to_str().unwrap(), "-o", out_path.to_str().unwrap()];
    args.extend(extra);
    let out = run(&args);
    assert!(out.status.success(), "reduce {kind} failed: {}", String::from_utf8_lossy(&out.stderr));
    out_path
}

#[test]
fn analyze_matches_oracles_for_every_reduction_kind() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let sat = write(dir, "sat.cnf", SAT_CNF);
    let unsat = write(dir, "unsat.cnf", UNSAT_CNF);
    let triangle = write(dir, "triangle.g", TRIANGLE);
    let path3 = write(dir, "path3.g", PATH3);
    let machine = write(dir, "m.brm", MACHINE);
    let blocked = write(dir, "blocked.brm", BLOCKED);

    // SAT → LRU exist-hit.
    let sat_oracle = sat_brute(&CnfFormula::parse_dimacs(SAT_CNF).unwrap()).unwrap();
    let doc = reduce_to(dir, "sat-lru-hit", &sat, "sat.cfg", &[]);
    assert_eq!(analyze_answer(&doc, &[]), sat_oracle);
    let doc = reduce_to(dir, "sat-lru-hit", &unsat, "unsat.cfg", &[]);
    assert!(!analyze_answer(&doc, &[]));

    // Hamiltonian → LRU exist-miss.
    let ham_oracle = ham_brute(&UndirectedGraph::parse_edge_list(TRIANGLE).unwrap()).unwrap();
    let doc = reduce_to(dir, "ham-lru-miss", &triangle, "tri.cfg", &[]);
    assert_eq!(analyze_answer(&doc, &[]), ham_oracle);
    let doc = reduce_to(dir, "ham-lru-miss", &path3, "path3.cfg", &[]);
    assert!(!analyze_answer(&doc, &[]));

    // Register machine → FIFO / PLRU / NMRU, hit and miss variants.
    let reachable = brm_reachable(&parse_brm(MACHINE).unwrap()).reachable;
    assert!(reachable);
    for kind in
        ["brm-fifo-hit", "brm-fifo-miss", "brm-plru-hit", "brm-plru-miss", "brm-nmru-hit", "brm-nmru-miss"]
    {
        let doc = reduce_to(dir, kind, &machine, &format!("{kind}.cfg"), &[]);
        assert_eq!(analyze_answer(&doc, &[]), reachable, "{kind}");
        let doc = reduce_to(dir, kind, &blocked, &format!("{kind}-blocked.cfg"), &[]);
        assert!(!analyze_answer(&doc, &[]), "{kind} on blocked machine");
    }

    // Even-parity FIFO variant.
    let doc = reduce_to(dir, "brm-fifo-hit", &machine, "fifo-even.cfg", &["--even-ways"]);
    let text = std::fs::read_to_string(&doc).unwrap();
    assert!(text.contains("ways=4"), "padded parity header");
    assert_eq!(analyze_answer(&doc, &[]), reachable);

    // Pseudo-RR embedding of the FIFO instance.
    let fifo_doc = reduce_to(dir, "brm-fifo-hit", &machine, "fifo.cfg", &[]);
    let prr_doc = reduce_to(dir, "fifo-prr", &fifo_doc, "prr.cfg", &["--sets", "3"]);
    let text = std::fs::read_to_string(&prr_doc).unwrap();
    assert!(text.contains("policy=prr") && text.contains("sets=3"));
    assert_eq!(analyze_answer(&prr_doc, &[]), reachable);

    // Arbitrary-start transforms round-trip the verdict.
    let arb_doc = reduce_to(dir, "lru-fresh-prologue", &doc_path_sat(dir), "sat-arb.cfg", &[]);
    assert_eq!(analyze_answer(&arb_doc, &[]), sat_oracle);
    let back = reduce_to(dir, "lru-loader", &arb_doc, "sat-back.cfg", &[]);
    assert_eq!(analyze_answer(&back, &[]), sat_oracle);

    // CNF occurrence limiting: equisatisfiable DIMACS with an audit header.
    let out = run(&["reduce", "cnf-limit", sat.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("c occurrence audit: max literal occurrences = 2"));
    let limited = CnfFormula::parse_dimacs(&text).unwrap();
    assert_eq!(sat_brute(&limited).unwrap(), sat_oracle);

    // SAT → register machine text.
    let out = run(&["reduce", "sat-brm", sat.to_str().unwrap()]);
    assert!(out.status.success());
    let machine = parse_brm(&stdout(&out)).unwrap();
    assert_eq!(brm_reachable(&machine).reachable, sat_oracle);
    assert_eq!(machine.nodes().len(), 3 + 3 + 1);
}

fn doc_path_sat(dir: &Path) -> PathBuf {
    dir.join("sat.cfg")
}

#[test]
fn analyze_flags_override_header_and_support_arbitrary_nmru() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let doc = write(
        dir,
        "plain.cfg",
        "node S\nnode F\nedge S F a\nedge S F b\nstart S\nfinal F\n",
    );
    // No header: flags are mandatory.
    let out = run(&["analyze", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--policy required"));

    let answer = analyze_answer(
        &doc,
        &["--policy", "lru", "--ways", "2", "--problem", "exist-hit", "--query", "a"],
    );
    assert!(answer);

    // NMRU arbitrary start works by direct enumeration, with a note.
    let out = run(&[
        "analyze",
        doc.to_str().unwrap(),
        "--policy",
        "nmru",
        "--ways",
        "2",
        "--problem",
        "exist-hit",
        "--query",
        "g",
        "--initial",
        "arbitrary",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no arbitrary-start gadget transform"));
    assert!(stdout(&out).contains("answer: true"));

    // Witness rendering shows per-step cache states.
    let out = run(&[
        "analyze",
        doc.to_str().unwrap(),
        "--policy",
        "lru",
        "--ways",
        "2",
        "--problem",
        "exist-hit",
        "--query",
        "a",
        "--witness",
    ]);
    let text = stdout(&out);
    assert!(text.contains("initial state: []"));
    assert!(text.contains("S -a-> F"));
    assert!(text.contains("[a]"));
}

#[test]
fn analyze_rejects_bad_configs_and_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let doc = write(dir, "g.cfg", "node S\nnode F\nedge S F a\nstart S\nfinal F\n");
    let out = run(&[
        "analyze",
        doc.to_str().unwrap(),
        "--policy",
        "plru",
        "--ways",
        "6",
        "--problem",
        "exist-hit",
        "--query",
        "a",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));

    let bad = write(dir, "bad.cfg", "node S\nedge S F a\nstart S\nfinal F\n");
    let out = run(&[
        "analyze",
        bad.to_str().unwrap(),
        "--policy",
        "lru",
        "--ways",
        "1",
        "--problem",
        "exist-hit",
        "--query",
        "a",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = run(&["analyze", dir.join("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["reduce", "no-such-kind", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_and_exit_codes() {
    let out = run(&["verify", "sat-lru", "--seeds", "0..6"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("sat-lru: 6/6 agree"));

    let out = run(&["verify", "brm-nmru-miss", "--seeds", "0..4", "--format", "json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["kind"], "brm-nmru-miss");
    assert_eq!(json["instances"], 4);
    assert_eq!(json["agreements"], 4);
    assert_eq!(json["disagreements"].as_array().unwrap().len(), 0);

    let out = run(&["verify", "not-a-kind", "--seeds", "0..1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn export_dot_renders_epsilon_and_marks() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "g.cfg",
        "node S\nnode F\nedge S F a\nedge S F\nstart S\nfinal F\n",
    );
    let out = run(&["export-dot", doc.to_str().unwrap()]);
    assert!(out.status.success());
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("label=\"ε\""));
    assert!(dot.contains("\"F\" [shape=doublecircle];"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sat = write(dir.path(), "sat.cnf", SAT_CNF);
    let a = run(&["reduce", "sat-lru-hit", sat.to_str().unwrap()]);
    let b = run(&["reduce", "sat-lru-hit", sat.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let doc = write(dir.path(), "sat.cfg", &stdout(&a));
    let x = run(&["analyze", doc.to_str().unwrap(), "--witness"]);
    let y = run(&["analyze", doc.to_str().unwrap(), "--witness"]);
    assert_eq!(x.stdout, y.stdout);
}
