//! Command-line front end for the dispersion simulator.
//!
//! Four subcommands: `generate` writes a graph file, `run` simulates one
//! dispersion and optionally checks it, `verify` re-derives a stored trace's
//! claims without re-running it, and `bench` sweeps a seeded grid and prints
//! one summary row per cell. Exit codes are part of the interface: 0 for
//! success, 1 when a check fails, 2 on timeout, 3 on a protocol violation,
//! and 64 for configuration errors. Every run is fully determined by its
//! flags — no environment variables, no OS entropy.

use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use dispersion_core::checker::{check_all, verify_trace};
use dispersion_core::trace::Trace;
use dispersion_core::{
    generate, load_graph, store_graph, Family, IdAssignment, Outcome, PortGraph, RunConfig,
    RunReport, Simulation,
};

const EXIT_OK: i32 = 0;
const EXIT_CHECK_FAILED: i32 = 1;
const EXIT_TIMEOUT: i32 = 2;
const EXIT_VIOLATION: i32 = 3;
const EXIT_CONFIG: i32 = 64;

/// `println!` that treats a closed stdout (`disperse ... | head`) as a normal
/// early exit instead of a panic.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(EXIT_OK);
        }
    }};
}

#[derive(Parser)]
#[command(
    name = "disperse",
    version,
    about = "Simulate and verify dispersion of silent robots on anonymous graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated graph to a file.
    Generate(GenerateArgs),
    /// Simulate one dispersion run.
    Run(RunArgs),
    /// Re-check a stored trace without re-running it.
    Verify(VerifyArgs),
    /// Sweep a grid of seeded runs and print a summary table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Graph family: path, ring, complete, star, random-tree, gnp.
    #[arg(long)]
    family: String,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// Seed driving random families and port shuffles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge probability for the gnp family.
    #[arg(long, default_value_t = 0.4)]
    p: f64,
    /// Relabel every node's ports with a seeded shuffle.
    #[arg(long)]
    shuffle_ports: bool,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Load the graph from a file written by `generate`.
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    /// Graph family: path, ring, complete, star, random-tree, gnp.
    #[arg(long, requires = "n")]
    family: Option<String>,
    /// Number of nodes for a generated graph.
    #[arg(long)]
    n: Option<usize>,
    /// Seed for graph generation; robot labels default to seed+1000.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge probability for the gnp family.
    #[arg(long, default_value_t = 0.4)]
    p: f64,
    /// Relabel every node's ports with a seeded shuffle.
    #[arg(long)]
    shuffle_ports: bool,
    /// Number of robots.
    #[arg(long)]
    k: usize,
    /// Robot labels: a comma-separated list, or random:L:SEED.
    #[arg(long)]
    ids: Option<String>,
    /// Node where every robot starts.
    #[arg(long, default_value_t = 0)]
    source: usize,
    /// Round cap overriding the built-in budget.
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Write the rendered trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON run report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Check the finished run and print one CHECK line per verdict.
    #[arg(long)]
    check: bool,
    /// Record per-robot event commentary in the trace.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Trace file to re-check.
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated families to sweep.
    #[arg(long, default_value = "path,ring,complete,star,random-tree,gnp")]
    families: String,
    /// Smallest node count.
    #[arg(long, default_value_t = 4)]
    n_min: usize,
    /// Largest node count.
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Robots per cell: a number, "n", or "half".
    #[arg(long, default_value = "n")]
    k: String,
    /// Seeds per cell.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    /// Base seed; cell s uses seed+s for the graph and seed+1000+s for ids.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge probability for the gnp family.
    #[arg(long, default_value_t = 0.4)]
    p: f64,
    /// Relabel every node's ports with a seeded shuffle.
    #[arg(long)]
    shuffle_ports: bool,
}

fn main() {
    std::process::exit(run_cli());
}

fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = err.print();
            return code;
        }
    };
    match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Bench(args) => cmd_bench(args),
    }
}

fn config_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_CONFIG
}

fn parse_family(name: &str, p: f64) -> Result<Family, String> {
    match name {
        "path" => Ok(Family::Path),
        "ring" => Ok(Family::Ring),
        "complete" => Ok(Family::Complete),
        "star" => Ok(Family::Star),
        "random-tree" | "random_tree" => Ok(Family::RandomTree),
        "gnp" | "gnp_connected" => Ok(Family::GnpConnected(p)),
        other => Err(format!("unknown family '{other}'")),
    }
}

fn parse_ids(spec: &str) -> Result<IdAssignment, String> {
    if let Some(rest) = spec.strip_prefix("random:") {
        let (l, seed) = rest
            .split_once(':')
            .ok_or("random labels need the form random:L:SEED")?;
        let l = l.parse().map_err(|_| format!("bad label bound '{l}'"))?;
        let seed = seed.parse().map_err(|_| format!("bad label seed '{seed}'"))?;
        Ok(IdAssignment::Random { l, seed })
    } else {
        let ids = spec
            .split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<Vec<u64>, _>>()
            .map_err(|_| format!("labels must be integers, got '{spec}'"))?;
        Ok(IdAssignment::Explicit(ids))
    }
}

fn cmd_generate(args: GenerateArgs) -> i32 {
    let family = match parse_family(&args.family, args.p) {
        Ok(f) => f,
        Err(e) => return config_error(e),
    };
    let graph = match generate(family, args.n, args.seed, args.shuffle_ports) {
        Ok(g) => g,
        Err(e) => return config_error(e),
    };
    if let Err(e) = fs::write(&args.out, store_graph(&graph)) {
        return config_error(format!("cannot write {}: {e}", args.out.display()));
    }
    outln!(
        "wrote {} ({} nodes, {} edges) to {}",
        family.name(),
        graph.node_count(),
        graph.edge_count(),
        args.out.display()
    );
    EXIT_OK
}

fn resolve_graph(args: &RunArgs) -> Result<PortGraph, String> {
    if let Some(path) = &args.graph {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        return load_graph(&text).map_err(|e| e.to_string());
    }
    let Some(name) = &args.family else {
        return Err("pass either --graph FILE or --family NAME --n COUNT".into());
    };
    let family = parse_family(name, args.p)?;
    let n = args.n.expect("clap enforces --n with --family");
    generate(family, n, args.seed, args.shuffle_ports).map_err(|e| e.to_string())
}

fn print_summary(report: &RunReport) {
    outln!("outcome {} after {} rounds", report.outcome, report.total_rounds);
    outln!(
        "class moves {:?}, peak state {} bits",
        report.class_move_counts, report.peak_state_bits
    );
    let places: Vec<String> = report
        .final_positions
        .iter()
        .map(|(node, id)| format!("{node}:{id}"))
        .collect();
    outln!("final {}", places.join(" "));
}

fn cmd_run(args: RunArgs) -> i32 {
    let graph = match resolve_graph(&args) {
        Ok(g) => g,
        Err(e) => return config_error(e),
    };
    let ids = match &args.ids {
        Some(spec) => match parse_ids(spec) {
            Ok(ids) => ids,
            Err(e) => return config_error(e),
        },
        None => IdAssignment::Random {
            l: 2 * graph.node_count() as u64,
            seed: args.seed + 1000,
        },
    };
    let cfg = RunConfig {
        source: args.source,
        k: args.k,
        ids,
        max_rounds: args.max_rounds,
        verbosity: if args.verbose { 2 } else { 1 },
    };
    let mut sim = match Simulation::new(graph, &cfg) {
        Ok(sim) => sim,
        Err(e) => return config_error(e),
    };
    let report = sim.run();
    if let Some(path) = &args.trace {
        if let Err(e) = fs::write(path, sim.trace().render(cfg.verbosity)) {
            return config_error(format!("cannot write {}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = fs::write(path, json) {
            return config_error(format!("cannot write {}: {e}", path.display()));
        }
    }
    print_summary(&report);
    let mut code = match report.outcome {
        Outcome::Dispersed => EXIT_OK,
        Outcome::Timeout => EXIT_TIMEOUT,
        Outcome::ProtocolViolation => {
            if let Some(v) = sim.violation() {
                eprintln!("{v}");
            }
            EXIT_VIOLATION
        }
    };
    if args.check {
        let results = check_all(&report, sim.graph());
        for check in &results {
            outln!("{}", check.render());
        }
        if code == EXIT_OK && results.iter().any(|c| !c.passed) {
            code = EXIT_CHECK_FAILED;
        }
    }
    code
}

fn cmd_verify(args: VerifyArgs) -> i32 {
    let text = match fs::read_to_string(&args.trace) {
        Ok(t) => t,
        Err(e) => return config_error(format!("cannot read {}: {e}", args.trace.display())),
    };
    let trace = match Trace::parse(&text) {
        Ok(t) => t,
        Err(e) => {
            outln!("CHECK parse FAIL {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    let results = verify_trace(&trace);
    for check in &results {
        outln!("{}", check.render());
    }
    if results.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

enum KMode {
    PerNode,
    Half,
    Fixed(usize),
}

impl KMode {
    fn parse(spec: &str) -> Result<KMode, String> {
        match spec {
            "n" => Ok(KMode::PerNode),
            "half" => Ok(KMode::Half),
            other => other
                .parse()
                .map(KMode::Fixed)
                .map_err(|_| format!("robots per cell must be a number, \"n\", or \"half\", got '{other}'")),
        }
    }

    fn apply(&self, n: usize) -> usize {
        match self {
            KMode::PerNode => n,
            KMode::Half => n.div_ceil(2),
            KMode::Fixed(k) => *k,
        }
    }
}

fn cmd_bench(args: BenchArgs) -> i32 {
    let mut families = Vec::new();
    for name in args.families.split(',') {
        match parse_family(name.trim(), args.p) {
            Ok(f) => families.push(f),
            Err(e) => return config_error(e),
        }
    }
    families.sort_by_key(|f| f.name());
    families.dedup_by_key(|f| f.name());
    let mode = match KMode::parse(&args.k) {
        Ok(m) => m,
        Err(e) => return config_error(e),
    };
    if args.n_min == 0 || args.n_min > args.n_max {
        return config_error(format!("bad node range {}..{}", args.n_min, args.n_max));
    }
    outln!("family n k seed rounds c0 c1 c2 c3 c4 c5 peak outcome");
    for family in &families {
        for n in args.n_min..=args.n_max {
            let k = mode.apply(n);
            if k == 0 || k > n {
                return config_error(format!("{} robots do not fit on {n} nodes", k));
            }
            for s in 0..args.seeds {
                let graph = match generate(*family, n, args.seed + s, args.shuffle_ports) {
                    Ok(g) => g,
                    Err(e) => return config_error(e),
                };
                let cfg = RunConfig {
                    source: 0,
                    k,
                    ids: IdAssignment::Random {
                        l: 2 * n as u64,
                        seed: args.seed + 1000 + s,
                    },
                    max_rounds: None,
                    verbosity: 0,
                };
                let mut sim = match Simulation::new(graph, &cfg) {
                    Ok(sim) => sim,
                    Err(e) => return config_error(e),
                };
                let report = sim.run();
                let c = report.class_move_counts;
                outln!(
                    "{} {n} {k} {} {} {} {} {} {} {} {} {} {}",
                    family.name(),
                    args.seed + s,
                    report.total_rounds,
                    c[0],
                    c[1],
                    c[2],
                    c[3],
                    c[4],
                    c[5],
                    report.peak_state_bits,
                    report.outcome
                );
            }
        }
    }
    EXIT_OK
}
