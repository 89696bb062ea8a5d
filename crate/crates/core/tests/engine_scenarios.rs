//! Hand-picked end-to-end scenarios with behavior pinned down to exact
//! nodes, ports, and register values.

use dispersion_core::checker::check_all;
use dispersion_core::engine::{IdAssignment, RunConfig, Simulation};
use dispersion_core::graph::{build_graph, generate, Family};
use dispersion_core::protocol::RobotEvent;
use dispersion_core::report::{Outcome, RunReport};

fn run(family: Family, n: usize, ids: &[u64]) -> (RunReport, Simulation) {
    let graph = generate(family, n, 0, false).unwrap();
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

#[test]
fn a_leaf_source_hops_to_its_neighbor_before_round_one() {
    let (report, _) = run(Family::Path, 4, &[1, 2, 3, 4]);
    assert_eq!(report.original_source, 0);
    assert_eq!(report.effective_source, 1);

    let triangle = build_graph(3, &[(0, 0, 1, 0), (0, 1, 2, 0), (1, 1, 2, 1)]).unwrap();
    let cfg = RunConfig {
        source: 0,
        k: 3,
        ids: IdAssignment::Explicit(vec![1, 2, 3]),
        max_rounds: None,
        verbosity: 0,
    };
    let report = Simulation::new(triangle, &cfg).unwrap().run();
    assert_eq!(report.effective_source, report.original_source);
}

#[test]
fn labels_three_and_five_need_three_calls() {
    let (report, sim) = run(Family::Star, 4, &[3, 5]);
    assert_eq!(report.outcome, Outcome::Dispersed);
    let first = sim
        .events()
        .iter()
        .find(|e| matches!(e.event, RobotEvent::Elected { .. }))
        .unwrap();
    assert_eq!(first.robot, 5);
    assert_eq!(first.event, RobotEvent::Elected { master: true, calls: 3 });
}

#[test]
fn star_collapse_settles_leaves_in_port_order() {
    let (report, sim) = run(Family::Star, 4, &[1, 2, 3, 4]);
    assert_eq!(report.outcome, Outcome::Dispersed);
    assert_eq!(report.iterations.len(), 4);
    for (i, snap) in report.iterations.iter().enumerate().take(3) {
        let iter = i + 1;
        let masters: Vec<_> = snap.robots.iter().filter(|r| r.status == 'M').collect();
        assert_eq!(masters.len(), 1, "iteration {iter}");
        let expected = sim.graph().neighbor(0, iter - 1).unwrap().0;
        assert_eq!(masters[0].node, expected, "iteration {iter}");
        for observer in snap.robots.iter().filter(|r| r.status == 'A') {
            assert_eq!(observer.child, iter as i64 - 1, "iteration {iter}");
        }
    }
    assert!(report.iterations[3].robots.iter().all(|r| r.status == 'I'));
    for check in check_all(&report, sim.graph()) {
        assert!(check.passed, "{}", check.render());
    }
}

#[test]
fn a_full_ring_stays_inside_the_relay_budget() {
    let (report, _) = run(Family::Ring, 8, &[1, 2, 3, 4, 5, 6, 7, 8]);
    assert_eq!(report.outcome, Outcome::Dispersed);
    assert!(
        report.class_move_counts[2] <= 64,
        "{} relay rounds on a full 8-ring",
        report.class_move_counts[2]
    );
}

#[test]
fn single_edge_with_one_robot_is_fine() {
    let (report, _) = run(Family::Path, 2, &[9]);
    assert_eq!(report.outcome, Outcome::Dispersed);
    assert_eq!(report.final_positions.len(), 1);
}
