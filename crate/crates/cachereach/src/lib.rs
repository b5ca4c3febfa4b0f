//! Exist-hit and exist-miss cache analysis over control-flow graphs.
//!
//! The library decides, by explicit-state reachability, whether some
//! execution of a control-flow graph ends with a given memory block cached
//! (or not cached) under LRU, FIFO, tree-PLRU, NMRU or pseudo-round-robin
//! replacement, from an empty or an arbitrary initial cache state. It also
//! constructs the hardness-reduction instances relating these problems to
//! SAT, Hamiltonian circuits and Boolean register machine reachability, and
//! ships brute-force oracles so every reduction can be cross-validated on
//! small instances.

pub mod brm;
pub mod cfg;
mod intern;
pub mod oracles;
pub mod policies;
pub mod reach;
pub mod reductions;

pub use cfg::{block_universe, emit_dot, parse_cfg, validate, BlockId, Cfg, Edge, NodeId};
pub use policies::{empty_state, CacheConfig, CacheState, Policy};
pub use reach::{decide, replay, InitialMode, Problem, ProblemKind, Verdict};
