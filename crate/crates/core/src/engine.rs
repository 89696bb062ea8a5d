//! The synchronous round loop.
//!
//! Each round runs in two stages: every robot is stepped against an
//! observation of the *same* start-of-round world, then all moves are applied
//! at once. The engine also keeps the bookkeeping that robots themselves
//! cannot: per-node movement tallies (which become next round's flags), the
//! per-class fresh-move counters, an iteration-boundary monitor watching the
//! effective source node, per-boundary world snapshots, and the peak
//! serialized robot state.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::PortGraph;
use crate::protocol::{
    bitlen, decoder_cap, robot_step, Action, Observation, ProtocolViolation, RobotEvent,
    RobotState, StepContext,
};
use crate::report::{BoundarySnapshot, Outcome, RunReport, SnapshotRobot};
use crate::trace::{RobotLine, RoundLine, Trace, TraceFooter, TraceHeader, TraceLine};

/// Dedicated class of a round: rounds are scheduled on a six-round cycle.
pub fn dedicated_class(round: u64) -> u8 {
    (round % 6) as u8
}

/// Where robot labels come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdAssignment {
    /// Use these labels, in order.
    Explicit(Vec<u64>),
    /// Draw `k` distinct labels from `0..=l` with the given seed.
    Random { l: u64, seed: u64 },
}

/// Per-run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Node all robots start on.
    pub source: usize,
    pub k: usize,
    pub ids: IdAssignment,
    /// Round budget; `None` picks a bound comfortably above the protocol's
    /// worst case for the instance.
    pub max_rounds: Option<u64>,
    /// 0/1: round and boundary lines only; 2: robot event notes too.
    pub verbosity: u8,
}

/// Rejected configurations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("source node {node} does not exist (n={n})")]
    SourceOutOfRange { node: usize, n: usize },
    #[error("need at least one robot")]
    NoRobots,
    #[error("{k} robots cannot disperse over {n} nodes")]
    TooManyRobots { k: usize, n: usize },
    #[error("robot ids must be distinct")]
    DuplicateIds,
    #[error("expected {k} ids, got {got}")]
    WrongIdCount { k: usize, got: usize },
    #[error("label range 0..={l} cannot supply {k} distinct ids")]
    LabelRangeTooSmall { l: u64, k: usize },
    #[error("a single-edge graph cannot host more than one robot")]
    SingleEdge,
    #[error("robot placed on node {node}, but n={n}")]
    PlacementOutOfRange { node: usize, n: usize },
}

/// A protocol violation pinned to the robot and round that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("robot {robot} in round {round}: {violation}")]
pub struct ViolationReport {
    pub round: u64,
    pub robot: u64,
    pub violation: ProtocolViolation,
}

/// A robot event annotated with when and who.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub round: u64,
    pub robot: u64,
    pub event: RobotEvent,
}

/// Build a simulation from a graph and a run configuration.
pub fn init_world(graph: PortGraph, cfg: &RunConfig) -> Result<Simulation, EngineError> {
    Simulation::new(graph, cfg)
}

#[derive(Debug)]
pub struct Simulation {
    graph: PortGraph,
    ids: Vec<u64>,
    /// Robot indices ordered by ascending id, for rendering.
    by_id: Vec<usize>,
    l: u64,
    original_source: usize,
    effective_source: usize,
    max_rounds: u64,
    verbosity: u8,
    ctx: StepContext,

    round: u64,
    robots: Vec<RobotState>,
    pos: Vec<usize>,
    obs: Vec<Observation>,

    class_moves: [u64; 6],
    last4_src: bool,
    boundaries: Vec<u64>,
    pending_snapshot: Option<u64>,
    snapshots: Vec<BoundarySnapshot>,
    peak_bits: u64,
    trace: Trace,
    events: Vec<TraceEvent>,
    outcome: Option<Outcome>,
    total_rounds: u64,
    violation: Option<ViolationReport>,
}

impl Simulation {
    pub fn new(graph: PortGraph, cfg: &RunConfig) -> Result<Self, EngineError> {
        let n = graph.node_count();
        if cfg.source >= n {
            return Err(EngineError::SourceOutOfRange {
                node: cfg.source,
                n,
            });
        }
        if cfg.k == 0 {
            return Err(EngineError::NoRobots);
        }
        if cfg.k > n {
            return Err(EngineError::TooManyRobots { k: cfg.k, n });
        }
        let ids = resolve_ids(cfg.k, &cfg.ids)?;
        let l = match &cfg.ids {
            IdAssignment::Explicit(_) => ids
                .iter()
                .copied()
                .max()
                .unwrap_or(0)
                .max(cfg.k as u64 - 1),
            IdAssignment::Random { l, .. } => *l,
        };

        // A degree-1 source cannot run elections; robots behave identically up
        // to their first observation, so start them one hop in instead.
        let mut effective = cfg.source;
        if graph.degree(cfg.source) == 1 {
            let (next, _) = graph.neighbor(cfg.source, 0).expect("degree checked");
            if graph.degree(next) >= 2 {
                effective = next;
            } else if cfg.k > 1 {
                // Two degree-1 nodes joined by one edge: no room to signal.
                return Err(EngineError::SingleEdge);
            }
        }

        let placements: Vec<(RobotState, usize)> = ids
            .iter()
            .map(|&id| (RobotState::fresh(id), effective))
            .collect();
        Ok(Self::assemble(
            graph,
            placements,
            l,
            cfg.source,
            effective,
            cfg.max_rounds,
            cfg.verbosity,
        ))
    }

    /// Harness constructor: place arbitrary robot states on arbitrary nodes.
    /// The iteration monitor watches the first robot's start node.
    pub fn from_parts(
        graph: PortGraph,
        placements: Vec<(RobotState, usize)>,
    ) -> Result<Self, EngineError> {
        if placements.is_empty() {
            return Err(EngineError::NoRobots);
        }
        let n = graph.node_count();
        for (_, node) in &placements {
            if *node >= n {
                return Err(EngineError::PlacementOutOfRange { node: *node, n });
            }
        }
        let mut seen: Vec<u64> = placements.iter().map(|(r, _)| r.id).collect();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != placements.len() {
            return Err(EngineError::DuplicateIds);
        }
        let l = placements
            .iter()
            .map(|(r, _)| r.id)
            .max()
            .unwrap_or(0)
            .max(placements.len() as u64 - 1);
        let source = placements[0].1;
        Ok(Self::assemble(graph, placements, l, source, source, None, 0))
    }

    fn assemble(
        graph: PortGraph,
        placements: Vec<(RobotState, usize)>,
        l: u64,
        original_source: usize,
        effective_source: usize,
        max_rounds: Option<u64>,
        verbosity: u8,
    ) -> Self {
        let k = placements.len();
        let delta = graph.max_degree();
        let ids: Vec<u64> = placements.iter().map(|(r, _)| r.id).collect();
        let mut by_id: Vec<usize> = (0..k).collect();
        by_id.sort_by_key(|&i| ids[i]);
        let pos: Vec<usize> = placements.iter().map(|(_, node)| *node).collect();
        let robots: Vec<RobotState> = placements.into_iter().map(|(r, _)| r).collect();

        let mut occ = vec![0u32; graph.node_count()];
        for &p in &pos {
            occ[p] += 1;
        }
        let obs = (0..k)
            .map(|i| Observation {
                round: 1,
                alone: occ[pos[i]] == 1,
                increase: false,
                decrease: false,
                degree: graph.degree(pos[i]),
                arrived_via: None,
            })
            .collect();

        let max_rounds = max_rounds.unwrap_or_else(|| default_round_budget(k, l, delta));
        let peak_bits = robots.iter().map(|r| r.serialized_bits()).max().unwrap_or(0);
        let header = TraceHeader {
            n: graph.node_count(),
            m: graph.edge_count(),
            delta,
            source: original_source,
            effective: effective_source,
            k,
            l,
            ids: ids.clone(),
        };
        Self {
            ctx: StepContext {
                decoder_cap: decoder_cap(delta),
            },
            graph,
            ids,
            by_id,
            l,
            original_source,
            effective_source,
            max_rounds,
            verbosity,
            round: 1,
            robots,
            pos,
            obs,
            class_moves: [0; 6],
            last4_src: false,
            boundaries: Vec::new(),
            pending_snapshot: None,
            snapshots: Vec::new(),
            peak_bits,
            trace: Trace {
                header,
                lines: Vec::new(),
                footer: None,
            },
            events: Vec::new(),
            outcome: None,
            total_rounds: 0,
            violation: None,
        }
    }

    /// Execute one round. After the run has ended this keeps stepping robots
    /// (useful to confirm quiescence) but records nothing further.
    pub fn step(&mut self) -> Result<(), ViolationReport> {
        let t = self.round;
        let k = self.robots.len();
        let n = self.graph.node_count();
        let finished = self.outcome.is_some();

        let mut actions: Vec<Action> = Vec::with_capacity(k);
        let mut round_events: Vec<TraceEvent> = Vec::new();
        for i in 0..k {
            let (action, events) = robot_step(&mut self.robots[i], &self.obs[i], &self.ctx)
                .map_err(|violation| {
                    let report = ViolationReport {
                        round: t,
                        robot: self.ids[i],
                        violation,
                    };
                    self.fail(report);
                    report
                })?;
            if let Action::Move(port) = action {
                let degree = self.graph.degree(self.pos[i]);
                if port >= degree {
                    let report = ViolationReport {
                        round: t,
                        robot: self.ids[i],
                        violation: ProtocolViolation::PortOutOfRange { port, degree },
                    };
                    self.fail(report);
                    return Err(report);
                }
            }
            for event in events {
                round_events.push(TraceEvent {
                    round: t,
                    robot: self.ids[i],
                    event,
                });
            }
            actions.push(action);
        }

        // All steps succeeded: apply moves against the start-of-round world.
        let mut entered = vec![0u32; n];
        let mut left = vec![0u32; n];
        let mut via: Vec<Option<usize>> = vec![None; k];
        let mut any_fresh = false;
        let start_pos = self.pos.clone();
        for i in 0..k {
            if let Action::Move(port) = actions[i] {
                let (dest, back) = self
                    .graph
                    .neighbor(start_pos[i], port)
                    .expect("port range checked");
                left[start_pos[i]] += 1;
                entered[dest] += 1;
                // since_move was just reset by the step; a fresh mover is one
                // that was not already moving in the previous round.
                if self.obs[i].arrived_via.is_none() {
                    any_fresh = true;
                }
                self.pos[i] = dest;
                via[i] = Some(back);
            }
        }

        if !finished {
            if any_fresh {
                self.class_moves[dedicated_class(t) as usize] += 1;
            }
            let robot_lines = self
                .by_id
                .iter()
                .map(|&i| RobotLine {
                    id: self.ids[i],
                    node: start_pos[i],
                    action: actions[i],
                    status: self.robots[i].status.as_char(),
                })
                .collect();
            let tallies = (0..n)
                .filter(|&v| entered[v] + left[v] > 0)
                .map(|v| (v, entered[v], left[v]))
                .collect();
            self.trace.lines.push(TraceLine::Round(RoundLine {
                round: t,
                class: dedicated_class(t),
                robots: robot_lines,
                tallies,
            }));
            if self.verbosity >= 2 {
                for ev in &round_events {
                    self.trace.lines.push(TraceLine::Note {
                        round: t,
                        text: describe_event(ev),
                    });
                }
            }
            self.events.extend(round_events);

            let peak = self
                .robots
                .iter()
                .map(|r| r.serialized_bits())
                .max()
                .unwrap_or(0);
            self.peak_bits = self.peak_bits.max(peak);

            // Snapshot due: the boundary departer finished its arrival
            // bookkeeping during this round.
            if let Some(b) = self.pending_snapshot {
                if t > b {
                    let snap = self.capture(b);
                    self.snapshots.push(snap);
                    self.pending_snapshot = None;
                }
            }

            // Iteration monitor at the effective source: a 5-dedicated net
            // departure not preceded by a 4-dedicated signal bit.
            let s = self.effective_source;
            if dedicated_class(t) == 5 && left[s] > entered[s] && !self.last4_src {
                self.boundaries.push(t);
                self.trace.lines.push(TraceLine::Boundary {
                    round: t,
                    iter: self.boundaries.len(),
                });
                self.pending_snapshot = Some(t);
            }
            if dedicated_class(t) == 4 {
                self.last4_src = entered[s] > left[s];
            }

            if self.robots.iter().all(|r| r.is_idle()) {
                self.boundaries.push(t);
                self.trace.lines.push(TraceLine::Boundary {
                    round: t,
                    iter: self.boundaries.len(),
                });
                if let Some(b) = self.pending_snapshot.take() {
                    // Termination raced an unfinished capture; take it now.
                    let snap = self.capture(b);
                    self.snapshots.push(snap);
                }
                let snap = self.capture(t);
                self.snapshots.push(snap);
                self.outcome = Some(Outcome::Dispersed);
                self.total_rounds = t;
            }
        }

        // Observations for the next round.
        let mut occ = vec![0u32; n];
        for &p in &self.pos {
            occ[p] += 1;
        }
        for (i, &arrival) in via.iter().enumerate() {
            let v = self.pos[i];
            let (inc, dec) = if arrival.is_some() {
                (false, false)
            } else {
                (entered[v] > left[v], left[v] > entered[v])
            };
            self.obs[i] = Observation {
                round: t + 1,
                alone: occ[v] == 1,
                increase: inc,
                decrease: dec,
                degree: self.graph.degree(v),
                arrived_via: arrival,
            };
        }
        self.round = t + 1;
        Ok(())
    }

    fn fail(&mut self, report: ViolationReport) {
        self.outcome = Some(Outcome::ProtocolViolation);
        self.total_rounds = self.round.saturating_sub(1);
        self.violation = Some(report);
    }

    fn capture(&self, boundary: u64) -> BoundarySnapshot {
        let mut occupied: Vec<usize> = self.pos.clone();
        occupied.sort_unstable();
        occupied.dedup();
        let robots = self
            .by_id
            .iter()
            .map(|&i| {
                let r = &self.robots[i];
                SnapshotRobot {
                    id: r.id,
                    node: self.pos[i],
                    status: r.status.as_char(),
                    child: i64::from(r.child),
                    parent: r.parent,
                    forward: r.forward,
                }
            })
            .collect();
        BoundarySnapshot {
            round: boundary,
            occupied,
            robots,
        }
    }

    /// Drive the run to its end and summarize it.
    pub fn run(&mut self) -> RunReport {
        while self.outcome.is_none() {
            if self.round > self.max_rounds {
                self.outcome = Some(Outcome::Timeout);
                self.total_rounds = self.round - 1;
                break;
            }
            // A violation already set the outcome; the loop exits next check.
            let _ = self.step();
        }
        let report = self.build_report();
        self.trace.footer = Some(TraceFooter {
            outcome: report.outcome.to_string(),
            rounds: report.total_rounds,
            class_moves: report.class_move_counts,
            final_positions: report.final_positions.clone(),
        });
        report
    }

    fn build_report(&self) -> RunReport {
        let mut final_positions: Vec<(usize, u64)> = self
            .pos
            .iter()
            .zip(&self.ids)
            .map(|(&node, &id)| (node, id))
            .collect();
        final_positions.sort_unstable();
        RunReport {
            outcome: self.outcome.unwrap_or(Outcome::Timeout),
            total_rounds: self.total_rounds,
            class_move_counts: self.class_moves,
            peak_state_bits: self.peak_bits,
            all_idle: self.robots.iter().all(|r| r.is_idle()),
            original_source: self.original_source,
            effective_source: self.effective_source,
            n: self.graph.node_count(),
            k: self.robots.len(),
            l: self.l,
            delta: self.graph.max_degree(),
            final_positions,
            iterations: self.snapshots.clone(),
        }
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn violation(&self) -> Option<&ViolationReport> {
        self.violation.as_ref()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn positions(&self) -> &[usize] {
        &self.pos
    }

    pub fn robot_states(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn graph(&self) -> &PortGraph {
        &self.graph
    }
}

/// Default round budget: a constant factor above the worst-case round count
/// of the protocol's three activity kinds (elections, probe/report blocks,
/// shifts), scaled by the six-round block length.
fn default_round_budget(k: usize, l: u64, delta: usize) -> u64 {
    let k = k as u64;
    let blocks = k * (u64::from(bitlen(l)) + 2)
        + k * k * (u64::from(bitlen(delta as u64)) + 4)
        + k * k;
    200 * blocks * 6
}

fn resolve_ids(k: usize, assignment: &IdAssignment) -> Result<Vec<u64>, EngineError> {
    match assignment {
        IdAssignment::Explicit(ids) => {
            if ids.len() != k {
                return Err(EngineError::WrongIdCount { k, got: ids.len() });
            }
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != k {
                return Err(EngineError::DuplicateIds);
            }
            Ok(ids.clone())
        }
        IdAssignment::Random { l, seed } => {
            if *l < k as u64 - 1 {
                return Err(EngineError::LabelRangeTooSmall { l: *l, k });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut ids = Vec::with_capacity(k);
            while ids.len() < k {
                let candidate = rng.gen_range(0..=*l);
                if !ids.contains(&candidate) {
                    ids.push(candidate);
                }
            }
            Ok(ids)
        }
    }
}

fn describe_event(ev: &TraceEvent) -> String {
    match ev.event {
        RobotEvent::Elected { master, calls } => format!(
            "robot {} elected {} after {} calls",
            ev.robot,
            if master { "master" } else { "follower" },
            calls
        ),
        RobotEvent::Decoded(kind) => {
            use crate::protocol::MessageKind;
            let text = match kind {
                MessageKind::NoEmpty => "no-empty".to_string(),
                MessageKind::FoundEmpty(p) => format!("found-empty {p}"),
                MessageKind::Forward(p) => format!("forward {p}"),
                MessageKind::Malformed => "malformed".to_string(),
            };
            format!("robot {} decoded {}", ev.robot, text)
        }
        RobotEvent::IterationDetected => {
            format!("robot {} detected an iteration boundary", ev.robot)
        }
        RobotEvent::WentIdle => format!("robot {} went idle", ev.robot),
    }
}
