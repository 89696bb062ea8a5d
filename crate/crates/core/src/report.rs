//! Structured run summaries consumed by the checker and serialized by the CLI.

use serde::{Deserialize, Serialize};
use std::fmt;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Every robot went idle on its own node.
    Dispersed,
    /// The round budget ran out first.
    Timeout,
    /// A robot reached a state the protocol declares unreachable.
    ProtocolViolation,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Dispersed => "Dispersed",
            Outcome::Timeout => "Timeout",
            Outcome::ProtocolViolation => "ProtocolViolation",
        })
    }
}

/// One robot's observable registers inside a boundary snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotRobot {
    pub id: u64,
    pub node: usize,
    /// Status letter: A, M, F, or I.
    pub status: char,
    /// Chain port register; -1 while a first-iteration master has not settled.
    pub child: i64,
    pub parent: Option<usize>,
    pub forward: bool,
}

/// World state shortly after an iteration boundary: captured two rounds after
/// the boundary departure (once the departing robot has finished its arrival
/// bookkeeping), or immediately at the final round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySnapshot {
    /// The boundary round itself.
    pub round: u64,
    /// Distinct occupied nodes, ascending.
    pub occupied: Vec<usize>,
    /// All robots, ascending by id.
    pub robots: Vec<SnapshotRobot>,
}

/// Everything the checker needs to pass judgment on one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub total_rounds: u64,
    /// Per dedicated class: rounds of that class containing at least one
    /// fresh move (a mover that did not move in the previous round).
    pub class_move_counts: [u64; 6],
    /// Largest serialized robot state observed in any round, in bits.
    pub peak_state_bits: u64,
    pub all_idle: bool,
    pub original_source: usize,
    pub effective_source: usize,
    pub n: usize,
    pub k: usize,
    pub l: u64,
    pub delta: usize,
    /// (node, robot id), ascending by node.
    pub final_positions: Vec<(usize, u64)>,
    /// One snapshot per detected iteration boundary, in order.
    pub iterations: Vec<BoundarySnapshot>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_through_json() {
        let report = RunReport {
            outcome: Outcome::Dispersed,
            total_rounds: 283,
            class_move_counts: [2, 16, 0, 3, 5, 3],
            peak_state_bits: 58,
            all_idle: true,
            original_source: 0,
            effective_source: 0,
            n: 3,
            k: 3,
            l: 3,
            delta: 2,
            final_positions: vec![(0, 3), (1, 1), (2, 2)],
            iterations: vec![BoundarySnapshot {
                round: 77,
                occupied: vec![0, 1],
                robots: vec![SnapshotRobot {
                    id: 2,
                    node: 1,
                    status: 'M',
                    child: 0,
                    parent: Some(0),
                    forward: false,
                }],
            }],
        };
        let text = serde_json::to_string(&report).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn outcome_displays_its_variant_name() {
        assert_eq!(Outcome::Dispersed.to_string(), "Dispersed");
        assert_eq!(Outcome::Timeout.to_string(), "Timeout");
        assert_eq!(Outcome::ProtocolViolation.to_string(), "ProtocolViolation");
    }
}
