//! Command-line front end: analyze CFG cache problems, generate reduction
//! instances, and cross-validate reductions against brute-force oracles.

use cachereach::brm::{parse_brm, sat_to_brm};
use cachereach::cfg::{emit_dot, parse_cfg, BlockId, Cfg};
use cachereach::oracles::{crosscheck, CrossCheckKind, CrossCheckReport};
use cachereach::policies::{CacheConfig, Policy};
use cachereach::reach::{decide, InitialMode, Problem, ProblemKind, Verdict};
use cachereach::reductions::{
    brm_to_fifo, brm_to_nmru, brm_to_plru, fifo_to_prr, ham_to_lru_miss,
    limit_literal_occurrences, lru_fresh_prologue, lru_loader_gadget, parse_document_header,
    sat_to_lru_hit, CnfFormula, DocumentHeader, ReductionOutput, UndirectedGraph,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "cachereach",
    about = "Exist-hit / exist-miss cache analysis over control-flow graphs, \
             with hardness-reduction generators and oracle cross-validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Decide an exist-hit or exist-miss problem over a CFG document.
    Analyze {
        /// CFG document (a `# policy=…` header provides defaults).
        input: PathBuf,
        #[arg(long)]
        policy: Option<Policy>,
        #[arg(long)]
        ways: Option<usize>,
        /// Cache sets (pseudo-RR only).
        #[arg(long)]
        sets: Option<usize>,
        #[arg(long)]
        problem: Option<ProblemKind>,
        #[arg(long)]
        query: Option<String>,
        #[arg(long)]
        initial: Option<InitialMode>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        /// Print the witness path (with per-step cache states in text mode).
        #[arg(long)]
        witness: bool,
    },
    /// Generate a reduction instance.
    Reduce {
        /// One of: sat-lru-hit, cnf-limit, ham-lru-miss, sat-brm,
        /// brm-fifo-hit, brm-fifo-miss, brm-plru-hit, brm-plru-miss,
        /// brm-nmru-hit, brm-nmru-miss, fifo-prr, lru-fresh-prologue,
        /// lru-loader.
        kind: String,
        input: PathBuf,
        /// Pad the FIFO reduction to an even number of ways.
        #[arg(long)]
        even_ways: bool,
        /// Set count for the pseudo-RR embedding.
        #[arg(long)]
        sets: Option<usize>,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-validate a reduction family against its brute-force oracle.
    Verify {
        kind: CrossCheckKind,
        /// Seed range `A..B` (half-open).
        #[arg(long, default_value = "0..100")]
        seeds: SeedRange,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Emit a CFG document as Graphviz DOT.
    ExportDot { input: PathBuf },
}

#[derive(Clone, Copy, Debug)]
struct SeedRange {
    start: u64,
    end: u64,
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (start, end) = s.split_once("..").ok_or("expected a range like 0..100")?;
        let start = start.parse().map_err(|_| format!("bad range start {start:?}"))?;
        let end = end.parse().map_err(|_| format!("bad range end {end:?}"))?;
        if end < start {
            return Err("range end before start".into());
        }
        Ok(SeedRange { start, end })
    }
}

fn main() -> ExitCode {
    // Die quietly when stdout is closed early (e.g. piped into `head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Analyze { input, policy, ways, sets, problem, query, initial, format, witness } => {
            let text = read(&input)?;
            let header = parse_document_header(&text).map_err(|e| e.to_string())?;
            let cfg = parse_cfg(&text).map_err(|e| e.to_string())?;
            analyze(&cfg, header, policy, ways, sets, problem, query, initial, format, witness)
        }
        Command::Reduce { kind, input, even_ways, sets, output } => {
            let text = read(&input)?;
            let produced = reduce(&kind, &text, even_ways, sets)?;
            match output {
                Some(path) => std::fs::write(&path, produced)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => print!("{produced}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { kind, seeds, format } => {
            let report = crosscheck(kind, seeds.start..seeds.end);
            print_report(&report, format);
            Ok(if report.all_agree() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::ExportDot { input } => {
            let text = read(&input)?;
            let cfg = parse_cfg(&text).map_err(|e| e.to_string())?;
            print!("{}", emit_dot(&cfg));
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct JsonEdge {
    src: String,
    dst: String,
    label: Option<String>,
}

#[derive(Serialize)]
struct JsonStats {
    product_states_explored: usize,
    initial_states_tried: usize,
    max_frontier: usize,
    distinct_cache_states: usize,
}

#[derive(Serialize)]
struct JsonVerdict {
    answer: bool,
    witness: Option<Vec<JsonEdge>>,
    stats: JsonStats,
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    cfg: &Cfg,
    header: Option<DocumentHeader>,
    policy: Option<Policy>,
    ways: Option<usize>,
    sets: Option<usize>,
    problem: Option<ProblemKind>,
    query: Option<String>,
    initial: Option<InitialMode>,
    format: OutputFormat,
    witness: bool,
) -> Result<ExitCode, String> {
    let h = header.as_ref();
    let policy = policy.or(h.map(|h| h.policy)).ok_or("--policy required (no header)")?;
    let ways = ways.or(h.map(|h| h.ways)).ok_or("--ways required (no header)")?;
    let sets = sets.or(h.map(|h| h.sets)).unwrap_or(1);
    let kind = problem.or(h.map(|h| h.problem)).ok_or("--problem required (no header)")?;
    let query = match query {
        Some(name) => BlockId::new(&name).map_err(|e| e.to_string())?,
        None => h.map(|h| h.query).ok_or("--query required (no header)")?,
    };
    let initial = initial.or(h.map(|h| h.initial)).unwrap_or(InitialMode::Empty);
    let config = CacheConfig::with_sets(policy, ways, sets).map_err(|e| e.to_string())?;
    if policy == Policy::Nmru && initial == InitialMode::Arbitrary {
        eprintln!(
            "note: NMRU has no arbitrary-start gadget transform; \
             deciding by direct enumeration of initial states"
        );
    }
    let problem = Problem { kind, query, initial };
    let verdict = decide(cfg, &config, &problem).map_err(|e| e.to_string())?;
    match format {
        OutputFormat::Json => {
            let json = JsonVerdict {
                answer: verdict.answer,
                witness: verdict.witness.as_ref().map(|edges| {
                    edges
                        .iter()
                        .map(|e| JsonEdge {
                            src: e.src.to_string(),
                            dst: e.dst.to_string(),
                            label: e.label.map(|b| b.to_string()),
                        })
                        .collect()
                }),
                stats: JsonStats {
                    product_states_explored: verdict.stats.product_states_explored,
                    initial_states_tried: verdict.stats.initial_states_tried,
                    max_frontier: verdict.stats.max_frontier,
                    distinct_cache_states: verdict.stats.distinct_cache_states,
                },
            };
            println!("{}", serde_json::to_string_pretty(&json).expect("serializable"));
        }
        OutputFormat::Text => print_text_verdict(&config, &verdict, witness),
    }
    Ok(ExitCode::SUCCESS)
}

fn print_text_verdict(config: &CacheConfig, verdict: &Verdict, witness: bool) {
    println!("answer: {}", verdict.answer);
    if let (true, Some(path), Some(init)) = (witness, &verdict.witness, &verdict.initial_state) {
        println!("initial state: {init}");
        let mut state = init.clone();
        for (i, edge) in path.iter().enumerate() {
            let rendered = match edge.label {
                Some(b) => {
                    let (next, outcome) = state.access(config, b).expect("witness replays");
                    state = next;
                    format!("{} -{}-> {}  {outcome:?}", edge.src, b, edge.dst)
                }
                None => format!("{} -ε-> {}", edge.src, edge.dst),
            };
            println!("  {:>3}. {rendered}  [{state}]", i + 1);
        }
    }
    let s = &verdict.stats;
    println!(
        "stats: explored={} distinct_states={} initial_states_tried={} max_frontier={}",
        s.product_states_explored, s.distinct_cache_states, s.initial_states_tried, s.max_frontier
    );
}

fn print_report(report: &CrossCheckReport, format: OutputFormat) {
    match format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(report).expect("serializable"));
        }
        OutputFormat::Text => {
            println!("{}: {}/{} agree", report.kind, report.agreements, report.instances);
            for d in &report.disagreements {
                println!(
                    "  disagreement at seed {}: oracle={} checker={} ({})",
                    d.seed, d.oracle, d.checker, d.summary
                );
            }
        }
    }
}

fn reduce(kind: &str, text: &str, even_ways: bool, sets: Option<usize>) -> Result<String, String> {
    let doc = |red: ReductionOutput| red.to_document();
    let cnf = || CnfFormula::parse_dimacs(text).map_err(|e| e.to_string());
    let brm = || parse_brm(text).map_err(|e| e.to_string());
    let document = || ReductionOutput::parse_document(text).map_err(|e| e.to_string());
    Ok(match kind {
        "sat-lru-hit" => doc(sat_to_lru_hit(&cnf()?)),
        "cnf-limit" => {
            let limited = limit_literal_occurrences(&cnf()?);
            let mut counts: std::collections::BTreeMap<i32, usize> = Default::default();
            for clause in &limited.clauses {
                for &lit in clause {
                    *counts.entry(lit).or_default() += 1;
                }
            }
            let max = counts.values().copied().max().unwrap_or(0);
            let mut out = format!("c occurrence audit: max literal occurrences = {max}\n");
            for (lit, n) in counts {
                out.push_str(&format!("c occurrence audit: literal {lit} x{n}\n"));
            }
            out.push_str(&limited.to_dimacs());
            out
        }
        "ham-lru-miss" => {
            let g = UndirectedGraph::parse_edge_list(text).map_err(|e| e.to_string())?;
            doc(ham_to_lru_miss(&g))
        }
        "sat-brm" => cachereach::brm::to_text(&sat_to_brm(&cnf()?)),
        "brm-fifo-hit" => doc(brm_to_fifo(&brm()?, ProblemKind::ExistHit, even_ways)),
        "brm-fifo-miss" => doc(brm_to_fifo(&brm()?, ProblemKind::ExistMiss, even_ways)),
        "brm-plru-hit" => doc(brm_to_plru(&brm()?, ProblemKind::ExistHit)),
        "brm-plru-miss" => doc(brm_to_plru(&brm()?, ProblemKind::ExistMiss)),
        "brm-nmru-hit" => doc(brm_to_nmru(&brm()?, ProblemKind::ExistHit)),
        "brm-nmru-miss" => doc(brm_to_nmru(&brm()?, ProblemKind::ExistMiss)),
        "fifo-prr" => doc(fifo_to_prr(&document()?, sets.unwrap_or(1))),
        "lru-fresh-prologue" => doc(lru_fresh_prologue(&document()?)),
        "lru-loader" => doc(lru_loader_gadget(&document()?)),
        other => return Err(format!("unknown reduction kind {other:?}")),
    })
}
