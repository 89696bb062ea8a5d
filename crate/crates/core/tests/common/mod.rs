//! Shared fixtures for the integration suites: the full acceptance sweep
//! (built once per test binary and cached) and an independent election
//! oracle that predicts winners without touching any protocol code.

#![allow(dead_code)]

use std::sync::OnceLock;
use std::time::Duration;

use dispersion_core::engine::{IdAssignment, RunConfig, Simulation};
use dispersion_core::graph::{generate, Family, PortGraph};
use dispersion_core::report::RunReport;

/// Every graph family the sweep covers, with its display name.
pub const FAMILIES: [(&str, Family); 6] = [
    ("path", Family::Path),
    ("ring", Family::Ring),
    ("complete", Family::Complete),
    ("star", Family::Star),
    ("random_tree", Family::RandomTree),
    ("gnp_connected", Family::GnpConnected(0.4)),
];

/// One finished sweep cell: configuration, outcome, and whether a second
/// identical run reproduced the first trace byte for byte.
pub struct SuiteCase {
    pub family: &'static str,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub graph: PortGraph,
    pub report: RunReport,
    pub deterministic: bool,
}

struct Suite {
    cases: Vec<SuiteCase>,
    build_time: Duration,
}

fn built() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let start = std::time::Instant::now();
        let mut cases = Vec::new();
        for &(family_name, family) in &FAMILIES {
            for n in 3..=12 {
                for k in 1..=n {
                    for seed in 0..5u64 {
                        let graph = generate(family, n, seed, true)
                            .unwrap_or_else(|e| panic!("{family_name} n={n} seed={seed}: {e}"));
                        let cfg = RunConfig {
                            source: 0,
                            k,
                            ids: IdAssignment::Random {
                                l: 2 * n as u64,
                                seed: 1000 + seed,
                            },
                            max_rounds: None,
                            verbosity: 0,
                        };
                        let mut sim = Simulation::new(graph.clone(), &cfg)
                            .unwrap_or_else(|e| panic!("{family_name} n={n} k={k}: {e}"));
                        let report = sim.run();
                        let rendered = sim.trace().render(1);
                        let mut again = Simulation::new(graph.clone(), &cfg).unwrap();
                        let report_again = again.run();
                        let deterministic =
                            rendered == again.trace().render(1) && report == report_again;
                        cases.push(SuiteCase {
                            family: family_name,
                            n,
                            k,
                            seed,
                            graph,
                            report,
                            deterministic,
                        });
                    }
                }
            }
        }
        Suite {
            cases,
            build_time: start.elapsed(),
        }
    })
}

/// The acceptance sweep: 6 families x n in 3..=12 x k in 1..=n x 5 seeds,
/// every cell run twice. Built on first use, then shared.
pub fn suite() -> &'static [SuiteCase] {
    &built().cases
}

/// Wall-clock time the sweep took to build (both runs of every cell).
pub fn suite_build_time() -> Duration {
    built().build_time
}

/// Independent prediction of the election: walk label bits least significant
/// first; whenever both bit-sides of the remaining electorate are populated,
/// keep the robots whose current bit is 0; a call that starts with a single
/// robot left elects it. Returns the winner and the number of calls.
pub fn election_oracle(ids: &[u64]) -> (u64, u32) {
    let mut set: Vec<u64> = ids.to_vec();
    assert!(!set.is_empty());
    let mut calls = 1;
    while set.len() > 1 {
        let zero_side: Vec<u64> = set
            .iter()
            .copied()
            .filter(|&id| !reversed_bit(id, calls))
            .collect();
        if !zero_side.is_empty() && zero_side.len() < set.len() {
            set = zero_side;
        }
        calls += 1;
    }
    (set[0], calls)
}

/// The `index`-th bit (1-based) of the label's binary form read least
/// significant first; zero past its length. Kept free of any BitString
/// machinery on purpose.
fn reversed_bit(id: u64, index: u32) -> bool {
    format!("{id:b}")
        .bytes()
        .rev()
        .nth(index as usize - 1)
        .map(|b| b == b'1')
        .unwrap_or(false)
}
