//! Deterministic round-synchronous simulator and verification harness for
//! collaborative dispersion by silent robots.
//!
//! `k` robots start co-located on an anonymous port-labeled graph. Robots carry
//! unique integer labels but cannot exchange messages; the only inputs a robot
//! ever receives are whether it is alone on its node, whether more robots
//! entered than left (or left than entered) its node in the previous round, and
//! — after moving — the incoming port and the degree of the node it reached.
//! The protocol simulated here nevertheless places every robot on a distinct
//! node by encoding all coordination in movement patterns scheduled on a
//! six-round block structure.
//!
//! The crate is organized around the data flow of a verification run:
//!
//! * [`graph`] — anonymous port-labeled multigraphs, generators, text format;
//! * [`protocol`] — robot state, bit/message codecs, and the pure per-robot
//!   transition function;
//! * [`engine`] — the synchronous two-stage round loop, observation tallies,
//!   and the iteration monitor;
//! * [`trace`] — the line-oriented trace format (render + parse);
//! * [`report`] — the structured run summary consumed by the checker;
//! * [`checker`] — dispersion, iteration, chain, budget, and memory verdicts.

#![forbid(unsafe_code)]

pub mod checker;
pub mod engine;
pub mod graph;
pub mod protocol;
pub mod report;
pub mod trace;

pub use checker::{check_all, verify_trace, CheckResult};
pub use engine::{dedicated_class, init_world, IdAssignment, RunConfig, Simulation};
pub use graph::{build_graph, generate, load_graph, store_graph, Family, PortGraph};
pub use report::{Outcome, RunReport};
