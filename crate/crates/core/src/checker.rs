//! Validation of finished runs against the protocol's structural claims.
//!
//! Two entry points. [`check_all`] inspects a [`RunReport`] together with the
//! graph it ran on: final positions, boundary bookkeeping, the follower chain
//! at each boundary, dedicated-round budgets, and the per-robot memory
//! envelope. [`verify_trace`] trusts nothing but a rendered trace: it
//! re-derives positions, movement tallies, fresh-move class counts, and
//! boundary spacing line by line and compares them with the trace's own
//! footer. Every check reports one `CHECK <name> PASS|FAIL <detail>` line so
//! results stay grep-friendly.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::PortGraph;
use crate::protocol::bitlen;
use crate::report::{BoundarySnapshot, Outcome, RunReport, SnapshotRobot};
use crate::trace::{RoundLine, Trace, TraceFooter, TraceLine};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            passed: false,
            detail: detail.into(),
        }
    }

    /// Machine-readable single-line form.
    pub fn render(&self) -> String {
        format!(
            "CHECK {} {} {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// Upper bounds on the number of j-dedicated rounds that may contain a fresh
/// movement, indexed by class. The constants are engineering envelopes sized
/// to dominate the counting arguments including one extra block per delayed
/// departure, not tight values.
pub fn class_budgets(k: u64, l: u64, delta: u64) -> [u64; 6] {
    [
        k,
        6 * k * (u64::from(bitlen(l)) + 2),
        k * k,
        (k * delta).min(k * (k + 1)),
        k * k * (2 * u64::from(bitlen(delta)) + 8),
        k * k,
    ]
}

/// Admissible peak footprint in bits for the mutable part of a robot state.
pub fn memory_threshold(l: u64, delta: u64) -> u64 {
    2 * u64::from(bitlen(l)) + 8 * u64::from(bitlen(delta)) + 64
}

/// Run every report-level check in a fixed order.
pub fn check_all(report: &RunReport, graph: &PortGraph) -> Vec<CheckResult> {
    vec![
        check_dispersed(report, graph),
        check_iterations(report),
        check_chain(report, graph),
        check_budgets(report),
        measure_memory(report),
    ]
}

/// Final configuration is a dispersion: k robots, k distinct nodes, all idle.
pub fn check_dispersed(report: &RunReport, graph: &PortGraph) -> CheckResult {
    const NAME: &str = "dispersed";
    if report.outcome != Outcome::Dispersed {
        return CheckResult::fail(NAME, format!("outcome is {}", report.outcome));
    }
    if !report.all_idle {
        return CheckResult::fail(NAME, "robots still busy after the last round");
    }
    if report.final_positions.len() != report.k {
        return CheckResult::fail(
            NAME,
            format!(
                "{} final positions for k={}",
                report.final_positions.len(),
                report.k
            ),
        );
    }
    let mut nodes = BTreeSet::new();
    let mut ids = BTreeSet::new();
    for &(node, id) in &report.final_positions {
        if node >= graph.node_count() {
            return CheckResult::fail(NAME, format!("node {node} is outside the graph"));
        }
        if !nodes.insert(node) {
            return CheckResult::fail(NAME, format!("two robots share node {node}"));
        }
        if !ids.insert(id) {
            return CheckResult::fail(NAME, format!("robot {id} listed twice"));
        }
    }
    CheckResult::pass(
        NAME,
        format!("{} robots idle on {} distinct nodes", report.k, report.k),
    )
}

/// Exactly k boundaries; each of the first k-1 settles one previously empty
/// node without losing an occupied one; the last pair of snapshots agree.
pub fn check_iterations(report: &RunReport) -> CheckResult {
    const NAME: &str = "iterations";
    if report.outcome != Outcome::Dispersed {
        return CheckResult::fail(NAME, format!("outcome is {}", report.outcome));
    }
    let k = report.k;
    if report.iterations.len() != k {
        return CheckResult::fail(
            NAME,
            format!("{} boundaries recorded for k={k}", report.iterations.len()),
        );
    }
    let mut prev_round = 0u64;
    let mut prev_occ: Option<&[usize]> = None;
    for (idx, snap) in report.iterations.iter().enumerate() {
        let boundary = idx + 1;
        if snap.round <= prev_round {
            return CheckResult::fail(
                NAME,
                format!("boundary {boundary} at round {} is out of order", snap.round),
            );
        }
        prev_round = snap.round;
        if snap.robots.len() != k {
            return CheckResult::fail(
                NAME,
                format!("boundary {boundary} records {} robots", snap.robots.len()),
            );
        }
        let derived: BTreeSet<usize> = snap.robots.iter().map(|r| r.node).collect();
        if derived.iter().copied().collect::<Vec<_>>() != snap.occupied {
            return CheckResult::fail(
                NAME,
                format!("boundary {boundary} occupancy disagrees with robot positions"),
            );
        }
        let expected = if boundary < k { boundary + 1 } else { k };
        if snap.occupied.len() != expected {
            return CheckResult::fail(
                NAME,
                format!(
                    "boundary {boundary} occupies {} nodes, expected {expected}",
                    snap.occupied.len()
                ),
            );
        }
        if let Some(prev) = prev_occ {
            if !prev.iter().all(|v| snap.occupied.contains(v)) {
                return CheckResult::fail(
                    NAME,
                    format!("boundary {boundary} lost a previously occupied node"),
                );
            }
        } else if !snap.occupied.contains(&report.effective_source) {
            return CheckResult::fail(NAME, "first boundary does not cover the source");
        }
        prev_occ = Some(&snap.occupied);
    }
    CheckResult::pass(NAME, format!("{k} boundaries, one new node per departure"))
}

/// At every boundary before the last, child ports trace a simple path from
/// the source through follower-held nodes to the unique master, and every
/// robot off that path is either in the source crowd or idle.
pub fn check_chain(report: &RunReport, graph: &PortGraph) -> CheckResult {
    const NAME: &str = "chain";
    let s = report.effective_source;
    let k = report.k;
    let mut walked = 0usize;
    for (idx, snap) in report.iterations.iter().enumerate() {
        let boundary = idx + 1;
        if boundary == k {
            break;
        }
        if let Err(detail) = walk_chain(snap, graph, s, boundary) {
            return CheckResult::fail(NAME, detail);
        }
        walked += 1;
    }
    if walked == 0 {
        CheckResult::pass(NAME, "no inner boundaries to inspect")
    } else {
        CheckResult::pass(
            NAME,
            format!("{walked} boundary chains reach the master over distinct nodes"),
        )
    }
}

fn walk_chain(
    snap: &BoundarySnapshot,
    graph: &PortGraph,
    s: usize,
    boundary: usize,
) -> Result<(), String> {
    let mut at: BTreeMap<usize, &SnapshotRobot> = BTreeMap::new();
    for r in &snap.robots {
        if r.node == s {
            continue;
        }
        if at.insert(r.node, r).is_some() {
            return Err(format!("boundary {boundary}: two robots on node {}", r.node));
        }
    }
    let masters = snap.robots.iter().filter(|r| r.status == 'M').count();
    if masters != 1 {
        return Err(format!("boundary {boundary}: {masters} master robots"));
    }
    let mut start = None;
    for r in &snap.robots {
        if r.status != 'F' && r.status != 'M' {
            continue;
        }
        let Some(p) = r.parent else {
            return Err(format!(
                "boundary {boundary}: settled robot {} has no parent port",
                r.id
            ));
        };
        let Some((back, _)) = graph.neighbor(r.node, p) else {
            return Err(format!(
                "boundary {boundary}: parent port {p} is invalid at node {}",
                r.node
            ));
        };
        if back == s && start.replace(r).is_some() {
            return Err(format!("boundary {boundary}: two chain anchors next to the source"));
        }
    }
    let Some(mut cur) = start else {
        return Err(format!(
            "boundary {boundary}: no chain robot adjacent to the source"
        ));
    };
    let mut path = vec![cur.node];
    while cur.status == 'F' {
        if cur.child < 0 {
            return Err(format!(
                "boundary {boundary}: follower {} has no chain port",
                cur.id
            ));
        }
        let Some((next, _)) = graph.neighbor(cur.node, cur.child as usize) else {
            return Err(format!(
                "boundary {boundary}: chain port {} is invalid at node {}",
                cur.child, cur.node
            ));
        };
        if next == s || path.contains(&next) {
            return Err(format!("boundary {boundary}: chain revisits node {next}"));
        }
        let Some(r) = at.get(&next) else {
            return Err(format!(
                "boundary {boundary}: chain port leads to the empty node {next}"
            ));
        };
        if r.status != 'F' && r.status != 'M' {
            return Err(format!(
                "boundary {boundary}: chain interrupted by an inactive robot at node {next}"
            ));
        }
        path.push(next);
        cur = r;
    }
    for r in &snap.robots {
        let on_path = path.contains(&r.node);
        match r.status {
            'F' if !on_path => {
                return Err(format!(
                    "boundary {boundary}: follower {} off the chain at node {}",
                    r.id, r.node
                ));
            }
            'F' | 'M' => {}
            _ if r.node != s && !on_path && r.status != 'I' => {
                return Err(format!(
                    "boundary {boundary}: busy robot {} stranded at node {}",
                    r.id, r.node
                ));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Every class count stays inside its explicit budget and never exceeds the
/// number of rounds of that class that actually elapsed.
pub fn check_budgets(report: &RunReport) -> CheckResult {
    const NAME: &str = "budgets";
    let bounds = class_budgets(report.k as u64, report.l, report.delta as u64);
    let supply = report.total_rounds / 6 + 1;
    for (class, (&count, &bound)) in report
        .class_move_counts
        .iter()
        .zip(bounds.iter())
        .enumerate()
    {
        if count > bound {
            return CheckResult::fail(
                NAME,
                format!("class {class} used {count} moving rounds, budget {bound}"),
            );
        }
        if count > supply {
            return CheckResult::fail(
                NAME,
                format!("class {class} count {count} exceeds the {supply} rounds available"),
            );
        }
    }
    CheckResult::pass(
        NAME,
        format!(
            "counts {:?} within budgets {:?}",
            report.class_move_counts, bounds
        ),
    )
}

/// Peak serialized robot state stays within the logarithmic envelope.
pub fn measure_memory(report: &RunReport) -> CheckResult {
    const NAME: &str = "memory";
    let threshold = memory_threshold(report.l, report.delta as u64);
    if report.peak_state_bits <= threshold {
        CheckResult::pass(
            NAME,
            format!(
                "peak {} bits within {threshold} (L={}, delta={})",
                report.peak_state_bits, report.l, report.delta
            ),
        )
    } else {
        CheckResult::fail(
            NAME,
            format!(
                "peak {} bits exceeds {threshold} (L={}, delta={})",
                report.peak_state_bits, report.l, report.delta
            ),
        )
    }
}

/// Re-derive everything checkable from a rendered trace and compare it with
/// the trace's own footer.
pub fn verify_trace(trace: &Trace) -> Vec<CheckResult> {
    let Some(footer) = &trace.footer else {
        return vec![CheckResult::fail("shape", "trace has no footer")];
    };
    let mut rounds: Vec<&RoundLine> = Vec::new();
    // (round, iteration, directly after its own round line)
    let mut boundaries: Vec<(u64, usize, bool)> = Vec::new();
    let mut last_round = None;
    for line in &trace.lines {
        match line {
            TraceLine::Round(r) => {
                last_round = Some(r.round);
                rounds.push(r);
            }
            TraceLine::Boundary { round, iter } => {
                boundaries.push((*round, *iter, last_round == Some(*round)));
            }
            TraceLine::Note { .. } => {}
        }
    }
    vec![
        shape_check(trace, footer, &rounds),
        continuity_check(trace, footer, &rounds),
        tally_check(footer, &rounds),
        boundary_check(trace, footer, &boundaries, &rounds),
        class_move_check(footer, &rounds),
        budget_check(trace, footer),
        final_check(trace, footer),
        outcome_check(footer),
    ]
}

fn sorted_ids(trace: &Trace) -> Vec<u64> {
    let mut ids = trace.header.ids.clone();
    ids.sort_unstable();
    ids
}

fn shape_check(trace: &Trace, footer: &TraceFooter, rounds: &[&RoundLine]) -> CheckResult {
    const NAME: &str = "shape";
    let k = trace.header.k;
    if k == 0 || trace.header.ids.len() != k {
        return CheckResult::fail(
            NAME,
            format!("header lists {} ids for k={k}", trace.header.ids.len()),
        );
    }
    let ids = sorted_ids(trace);
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return CheckResult::fail(NAME, "duplicate robot ids in the header");
    }
    if rounds.is_empty() {
        return CheckResult::fail(NAME, "trace has no rounds");
    }
    for (i, line) in rounds.iter().enumerate() {
        let expected = i as u64 + 1;
        if line.round != expected {
            return CheckResult::fail(
                NAME,
                format!("round {} appears where {expected} belongs", line.round),
            );
        }
        if u64::from(line.class) != line.round % 6 {
            return CheckResult::fail(
                NAME,
                format!("round {} labeled class {}", line.round, line.class),
            );
        }
        let line_ids: Vec<u64> = line.robots.iter().map(|r| r.id).collect();
        if line_ids != ids {
            return CheckResult::fail(
                NAME,
                format!("round {} does not list every robot in id order", line.round),
            );
        }
    }
    if footer.rounds != rounds.len() as u64 {
        return CheckResult::fail(
            NAME,
            format!(
                "footer claims {} rounds, trace holds {}",
                footer.rounds,
                rounds.len()
            ),
        );
    }
    CheckResult::pass(NAME, format!("{} rounds, {k} robots per line", rounds.len()))
}

fn footer_positions(footer: &TraceFooter) -> BTreeMap<u64, usize> {
    footer
        .final_positions
        .iter()
        .map(|&(node, id)| (id, node))
        .collect()
}

fn continuity_check(trace: &Trace, footer: &TraceFooter, rounds: &[&RoundLine]) -> CheckResult {
    const NAME: &str = "continuity";
    let Some(first) = rounds.first() else {
        return CheckResult::fail(NAME, "trace has no rounds");
    };
    for r in &first.robots {
        if r.node != trace.header.effective {
            return CheckResult::fail(
                NAME,
                format!(
                    "robot {} starts at node {} instead of the source {}",
                    r.id, r.node, trace.header.effective
                ),
            );
        }
    }
    for pair in rounds.windows(2) {
        let (now, next) = (pair[0], pair[1]);
        let after: BTreeMap<u64, usize> = next.robots.iter().map(|r| (r.id, r.node)).collect();
        if let Err(detail) = positions_follow(now, &after) {
            return CheckResult::fail(NAME, detail);
        }
    }
    let last = rounds[rounds.len() - 1];
    if let Err(detail) = positions_follow(last, &footer_positions(footer)) {
        return CheckResult::fail(NAME, detail);
    }
    CheckResult::pass(NAME, "stayers hold their nodes and movers change them")
}

fn positions_follow(line: &RoundLine, after: &BTreeMap<u64, usize>) -> Result<(), String> {
    for r in &line.robots {
        let Some(&dest) = after.get(&r.id) else {
            return Err(format!("robot {} vanishes after round {}", r.id, line.round));
        };
        if r.action.is_move() && dest == r.node {
            return Err(format!(
                "robot {} moves in round {} but stays on node {}",
                r.id, line.round, r.node
            ));
        }
        if !r.action.is_move() && dest != r.node {
            return Err(format!(
                "robot {} stays in round {} yet lands on node {dest}",
                r.id, line.round
            ));
        }
    }
    Ok(())
}

fn tally_check(footer: &TraceFooter, rounds: &[&RoundLine]) -> CheckResult {
    const NAME: &str = "tallies";
    for (i, line) in rounds.iter().enumerate() {
        let after: BTreeMap<u64, usize> = match rounds.get(i + 1) {
            Some(next) => next.robots.iter().map(|r| (r.id, r.node)).collect(),
            None => footer_positions(footer),
        };
        let mut expected: BTreeMap<usize, (u32, u32)> = BTreeMap::new();
        for r in &line.robots {
            if !r.action.is_move() {
                continue;
            }
            expected.entry(r.node).or_default().1 += 1;
            if let Some(&dest) = after.get(&r.id) {
                expected.entry(dest).or_default().0 += 1;
            }
        }
        let expected: Vec<(usize, u32, u32)> = expected
            .into_iter()
            .map(|(v, (entered, left))| (v, entered, left))
            .collect();
        if line.tallies != expected {
            return CheckResult::fail(
                NAME,
                format!("round {} tallies disagree with the movements", line.round),
            );
        }
    }
    CheckResult::pass(NAME, "entered and left counts match the movements")
}

fn boundary_check(
    trace: &Trace,
    footer: &TraceFooter,
    boundaries: &[(u64, usize, bool)],
    rounds: &[&RoundLine],
) -> CheckResult {
    const NAME: &str = "boundaries";
    let k = trace.header.k;
    let mut prev = 0u64;
    for (i, &(round, iter, adjacent)) in boundaries.iter().enumerate() {
        if iter != i + 1 {
            return CheckResult::fail(
                NAME,
                format!("boundary at round {round} numbered {iter}, expected {}", i + 1),
            );
        }
        if !adjacent {
            return CheckResult::fail(
                NAME,
                format!("boundary {iter} does not follow round {round}"),
            );
        }
        if round <= prev {
            return CheckResult::fail(NAME, format!("boundary {iter} is out of order"));
        }
        prev = round;
    }
    if footer.outcome == "Dispersed" {
        if boundaries.len() != k {
            return CheckResult::fail(
                NAME,
                format!("{} boundaries for k={k}", boundaries.len()),
            );
        }
        if let Some(&(round, _, _)) = boundaries.last() {
            if round != footer.rounds {
                return CheckResult::fail(
                    NAME,
                    format!("last boundary at round {round}, run ends at {}", footer.rounds),
                );
            }
        }
    }
    for (i, &(round, iter, _)) in boundaries.iter().enumerate() {
        if i + 1 >= k {
            break;
        }
        for offset in [1u64, 2] {
            let Some(line) = rounds.get((round + offset) as usize - 1) else {
                return CheckResult::fail(
                    NAME,
                    format!("trace ends before round {}", round + offset),
                );
            };
            let occupied: BTreeSet<usize> = line.robots.iter().map(|r| r.node).collect();
            if occupied.len() != i + 2 {
                return CheckResult::fail(
                    NAME,
                    format!(
                        "{} nodes occupied after boundary {iter}, expected {}",
                        occupied.len(),
                        i + 2
                    ),
                );
            }
        }
    }
    CheckResult::pass(NAME, format!("{} boundaries in order", boundaries.len()))
}

fn class_move_check(footer: &TraceFooter, rounds: &[&RoundLine]) -> CheckResult {
    const NAME: &str = "class-moves";
    let mut counts = [0u64; 6];
    let mut moved_before: BTreeMap<u64, bool> = BTreeMap::new();
    for line in rounds {
        let fresh = line
            .robots
            .iter()
            .any(|r| r.action.is_move() && !moved_before.get(&r.id).copied().unwrap_or(false));
        if fresh {
            counts[(line.round % 6) as usize] += 1;
        }
        for r in &line.robots {
            moved_before.insert(r.id, r.action.is_move());
        }
    }
    if counts != footer.class_moves {
        return CheckResult::fail(
            NAME,
            format!(
                "recounted {:?}, footer claims {:?}",
                counts, footer.class_moves
            ),
        );
    }
    CheckResult::pass(NAME, format!("fresh-move counts {counts:?} confirmed"))
}

fn budget_check(trace: &Trace, footer: &TraceFooter) -> CheckResult {
    const NAME: &str = "budgets";
    let bounds = class_budgets(
        trace.header.k as u64,
        trace.header.l,
        trace.header.delta as u64,
    );
    let supply = footer.rounds / 6 + 1;
    for (class, (&count, &bound)) in footer.class_moves.iter().zip(bounds.iter()).enumerate() {
        if count > bound {
            return CheckResult::fail(
                NAME,
                format!("class {class} used {count} moving rounds, budget {bound}"),
            );
        }
        if count > supply {
            return CheckResult::fail(
                NAME,
                format!("class {class} count {count} exceeds the {supply} rounds available"),
            );
        }
    }
    CheckResult::pass(
        NAME,
        format!("counts {:?} within budgets {:?}", footer.class_moves, bounds),
    )
}

fn final_check(trace: &Trace, footer: &TraceFooter) -> CheckResult {
    const NAME: &str = "final";
    let k = trace.header.k;
    if footer.final_positions.len() != k {
        return CheckResult::fail(
            NAME,
            format!("{} final positions for k={k}", footer.final_positions.len()),
        );
    }
    let mut nodes = BTreeSet::new();
    let mut ids = BTreeSet::new();
    for &(node, id) in &footer.final_positions {
        if node >= trace.header.n {
            return CheckResult::fail(NAME, format!("node {node} is outside the graph"));
        }
        if !nodes.insert(node) {
            return CheckResult::fail(NAME, format!("two robots share node {node}"));
        }
        ids.insert(id);
    }
    if ids.into_iter().collect::<Vec<_>>() != sorted_ids(trace) {
        return CheckResult::fail(NAME, "footer robots differ from the header ids");
    }
    CheckResult::pass(NAME, format!("{k} distinct final nodes"))
}

fn outcome_check(footer: &TraceFooter) -> CheckResult {
    const NAME: &str = "outcome";
    if footer.outcome == "Dispersed" {
        CheckResult::pass(NAME, "run dispersed")
    } else {
        CheckResult::fail(NAME, format!("outcome is {}", footer.outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{IdAssignment, RunConfig, Simulation};
    use crate::graph::{build_graph, generate, Family};

    fn finished(graph: PortGraph, ids: &[u64]) -> (RunReport, Simulation) {
        let cfg = RunConfig {
            source: 0,
            k: ids.len(),
            ids: IdAssignment::Explicit(ids.to_vec()),
            max_rounds: None,
            verbosity: 0,
        };
        let mut sim = Simulation::new(graph, &cfg).unwrap();
        let report = sim.run();
        (report, sim)
    }

    fn triangle() -> PortGraph {
        build_graph(3, &[(0, 0, 1, 0), (0, 1, 2, 0), (1, 1, 2, 1)]).unwrap()
    }

    fn golden(name: &str) -> String {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name);
        std::fs::read_to_string(path).unwrap()
    }

    fn result<'a>(results: &'a [CheckResult], name: &str) -> &'a CheckResult {
        results.iter().find(|r| r.name == name).unwrap()
    }

    #[test]
    fn every_check_passes_on_the_triangle_run() {
        let (report, sim) = finished(triangle(), &[1, 2, 3]);
        for check in check_all(&report, sim.graph()) {
            assert!(check.passed, "{}", check.render());
        }
    }

    #[test]
    fn every_check_passes_on_the_path_run() {
        let (report, sim) = finished(generate(Family::Path, 4, 0, false).unwrap(), &[1, 2, 3, 4]);
        for check in check_all(&report, sim.graph()) {
            assert!(check.passed, "{}", check.render());
        }
    }

    #[test]
    fn a_lone_robot_passes_with_nothing_to_walk() {
        let (report, sim) = finished(generate(Family::Ring, 4, 0, false).unwrap(), &[7]);
        let results = check_all(&report, sim.graph());
        for check in &results {
            assert!(check.passed, "{}", check.render());
        }
        assert_eq!(result(&results, "chain").detail, "no inner boundaries to inspect");
    }

    #[test]
    fn duplicate_final_nodes_fail_the_dispersal_check() {
        let (mut report, sim) = finished(triangle(), &[1, 2, 3]);
        report.final_positions[1].0 = report.final_positions[0].0;
        let check = check_dispersed(&report, sim.graph());
        assert!(!check.passed);
        assert!(check.render().contains("share node"));
    }

    #[test]
    fn a_missing_boundary_fails_the_iteration_check() {
        let (mut report, _) = finished(triangle(), &[1, 2, 3]);
        report.iterations.pop();
        assert!(!check_iterations(&report).passed);
    }

    #[test]
    fn a_lost_node_fails_the_iteration_check() {
        let (mut report, _) = finished(generate(Family::Path, 4, 0, false).unwrap(), &[1, 2, 3, 4]);
        // Teleport the robot that settled first, so boundary 2 keeps its size
        // but drops a node that boundary 1 had already covered.
        let snap = &mut report.iterations[1];
        let settled = snap.robots.iter_mut().find(|r| r.node == 0).unwrap();
        settled.node = 3;
        snap.occupied = snap.robots.iter().map(|r| r.node).collect();
        snap.occupied.sort_unstable();
        snap.occupied.dedup();
        let check = check_iterations(&report);
        assert!(!check.passed);
        assert!(check.render().contains("lost a previously occupied node"));
    }

    #[test]
    fn an_off_path_follower_fails_the_chain_check() {
        let (mut report, sim) = finished(generate(Family::Path, 4, 0, false).unwrap(), &[1, 2, 3, 4]);
        // Boundary 3 holds a genuine chain; recast the crowd robot at the
        // source as a follower that no chain walk can reach.
        let snap = &mut report.iterations[2];
        let s = report.effective_source;
        let crowd = snap.robots.iter_mut().find(|r| r.node == s).unwrap();
        crowd.status = 'F';
        crowd.parent = Some(0);
        let check = check_chain(&report, sim.graph());
        assert!(!check.passed);
        assert!(check.render().contains("off the chain"));
    }

    #[test]
    fn an_interrupted_chain_fails_the_chain_check() {
        let (mut report, sim) = finished(generate(Family::Path, 4, 0, false).unwrap(), &[1, 2, 3, 4]);
        let snap = &mut report.iterations[2];
        let follower = snap.robots.iter_mut().find(|r| r.status == 'F').unwrap();
        follower.status = 'I';
        let check = check_chain(&report, sim.graph());
        assert!(!check.passed);
        assert!(check.render().contains("no chain robot adjacent"));
    }

    #[test]
    fn an_inflated_class_count_fails_the_budget_check() {
        let (mut report, _) = finished(triangle(), &[1, 2, 3]);
        report.class_move_counts[0] = report.k as u64 + 1;
        let check = check_budgets(&report);
        assert!(!check.passed);
        assert!(check.render().contains("class 0"));
    }

    #[test]
    fn an_oversized_state_fails_the_memory_check() {
        let (mut report, _) = finished(triangle(), &[1, 2, 3]);
        report.peak_state_bits = 10_000;
        assert!(!measure_memory(&report).passed);
    }

    #[test]
    fn verify_accepts_both_frozen_traces() {
        for name in ["triangle_k3.trace", "p4_k4.trace"] {
            let trace = Trace::parse(&golden(name)).unwrap();
            for check in verify_trace(&trace) {
                assert!(check.passed, "{name}: {}", check.render());
            }
        }
    }

    #[test]
    fn verify_flags_a_tampered_move_count() {
        let mut trace = Trace::parse(&golden("triangle_k3.trace")).unwrap();
        trace.footer.as_mut().unwrap().class_moves[1] += 1;
        let results = verify_trace(&trace);
        assert!(!result(&results, "class-moves").passed);
    }

    #[test]
    fn verify_flags_a_teleporting_robot() {
        let mut trace = Trace::parse(&golden("triangle_k3.trace")).unwrap();
        let line = trace
            .lines
            .iter_mut()
            .find_map(|l| match l {
                TraceLine::Round(r) if r.round == 50 => Some(r),
                _ => None,
            })
            .unwrap();
        line.robots[0].node = (line.robots[0].node + 1) % 3;
        let results = verify_trace(&trace);
        assert!(!result(&results, "continuity").passed);
    }

    #[test]
    fn check_lines_render_for_grep() {
        let good = CheckResult::pass("outcome", "run dispersed");
        assert_eq!(good.render(), "CHECK outcome PASS run dispersed");
        let bad = CheckResult::fail("outcome", "outcome is Timeout");
        assert_eq!(bad.render(), "CHECK outcome FAIL outcome is Timeout");
    }
}
