//! Whole-engine properties on random configurations: bit-identical replay,
//! quiescence after termination, and round-trip agreement between the live
//! run, its rendered trace, and the checks.

mod common;

use common::FAMILIES;
use dispersion_core::checker::{check_all, verify_trace};
use dispersion_core::engine::{IdAssignment, RunConfig, Simulation};
use dispersion_core::graph::{generate, Family};
use dispersion_core::report::Outcome;
use dispersion_core::trace::Trace;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Cfg {
    family: Family,
    n: usize,
    k: usize,
    seed: u64,
}

fn cfg_strategy() -> impl Strategy<Value = Cfg> {
    (0..FAMILIES.len(), 3usize..=8, 0u64..1000)
        .prop_flat_map(|(f, n, seed)| {
            (Just(FAMILIES[f].1), Just(n), 1..=n, Just(seed))
        })
        .prop_map(|(family, n, k, seed)| Cfg { family, n, k, seed })
}

fn run_once(cfg: &Cfg) -> Simulation {
    let graph = generate(cfg.family, cfg.n, cfg.seed, true).unwrap();
    let rc = RunConfig {
        source: 0,
        k: cfg.k,
        ids: IdAssignment::Random {
            l: 2 * cfg.n as u64,
            seed: cfg.seed.wrapping_add(1000),
        },
        max_rounds: None,
        verbosity: 1,
    };
    let mut sim = Simulation::new(graph, &rc).unwrap();
    sim.run();
    sim
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_replay_bit_identically(cfg in cfg_strategy()) {
        let mut a = run_once(&cfg);
        let mut b = run_once(&cfg);
        prop_assert_eq!(a.run(), b.run());
        prop_assert_eq!(a.trace().render(1), b.trace().render(1));
    }

    #[test]
    fn finished_runs_are_quiescent(cfg in cfg_strategy()) {
        let mut sim = run_once(&cfg);
        prop_assert_eq!(sim.outcome(), Some(Outcome::Dispersed));
        let positions = sim.positions().to_vec();
        let rendered = sim.trace().render(1);
        for _ in 0..12 {
            sim.step().unwrap();
        }
        prop_assert_eq!(sim.positions(), positions.as_slice());
        prop_assert_eq!(sim.trace().render(1), rendered);
    }

    #[test]
    fn live_runs_agree_with_their_rendered_traces(cfg in cfg_strategy()) {
        let mut sim = run_once(&cfg);
        let report = sim.run();
        prop_assert_eq!(report.outcome, Outcome::Dispersed);
        for check in check_all(&report, sim.graph()) {
            prop_assert!(check.passed, "{}", check.render());
        }
        let parsed = Trace::parse(&sim.trace().render(1)).unwrap();
        for check in verify_trace(&parsed) {
            prop_assert!(check.passed, "{}", check.render());
        }
    }
}

#[test]
fn full_rings_take_longer_as_they_grow() {
    let mut last = 0;
    for n in 4..=10 {
        let cfg = Cfg {
            family: Family::Ring,
            n,
            k: n,
            seed: 0,
        };
        let mut sim = run_once(&cfg);
        let report = sim.run();
        assert_eq!(report.outcome, Outcome::Dispersed, "ring n={n}");
        assert!(
            report.total_rounds >= last,
            "ring n={n} finished in {} rounds, n={} took {last}",
            report.total_rounds,
            n - 1
        );
        last = report.total_rounds;
    }
}
