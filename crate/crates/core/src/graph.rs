//! Anonymous port-labeled multigraphs.
//!
//! A node of degree `d` numbers its incident edge ends with ports `0..d-1`.
//! The two ends of an edge carry independent port numbers, so the structure is
//! a port involution: if port `i` of `u` leads to `(v, j)` then port `j` of `v`
//! leads back to `(u, i)`. Nodes carry no identifiers visible to robots; the
//! `usize` indices used here exist only for the simulator and its traces.
//!
//! Graphs are connected and free of self-loops. Parallel edges are allowed and
//! occupy one port pair per copy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Edge description used by [`build_graph`]: `(u, pu, v, pv)` connects port
/// `pu` of `u` with port `pv` of `v`.
pub type EdgeSpec = (usize, usize, usize, usize);

/// An anonymous port-labeled multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortGraph {
    /// `ports[v][i]` is the `(neighbor, neighbor_port)` reached through port
    /// `i` of node `v`.
    ports: Vec<Vec<(usize, usize)>>,
}

/// Errors raised while validating, generating, or parsing graphs.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge {index} references node {node} out of range (n = {n})")]
    NodeOutOfRange { index: usize, node: usize, n: usize },
    #[error("self-loop at node {node} (edge {index})")]
    SelfLoop { index: usize, node: usize },
    #[error("duplicate port {port} at node {node}")]
    DuplicatePort { node: usize, port: usize },
    #[error("port gap at node {node}: port {missing} unused but higher ports are")]
    PortGap { node: usize, missing: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("family {family} requires n >= {min}, got {n}")]
    TooSmall { family: &'static str, min: usize, n: usize },
    #[error("gnp edge probability {p} outside (0, 1]")]
    BadProbability { p: f64 },
    #[error("no connected G(n,p) sample found in {attempts} attempts")]
    GnpExhausted { attempts: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl PortGraph {
    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.ports.len()
    }

    /// Number of edges (each parallel copy counted once).
    pub fn edge_count(&self) -> usize {
        self.ports.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Degree of node `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.ports[v].len()
    }

    /// Largest degree in the graph (0 only for the single-node graph).
    pub fn max_degree(&self) -> usize {
        self.ports.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The `(neighbor, incoming_port)` pair reached through port `p` of `v`.
    ///
    /// `incoming_port` is the port by which the walker arrives at the
    /// neighbor, i.e. the reverse port of the traversed edge end.
    pub fn neighbor(&self, v: usize, p: usize) -> Option<(usize, usize)> {
        self.ports.get(v).and_then(|row| row.get(p)).copied()
    }
}

/// Builds and validates a port graph from explicit edge descriptions.
///
/// Rejects out-of-range nodes, self-loops, duplicate `(node, port)` pairs,
/// port tables with gaps (ports at a node must be exactly `0..degree`), and
/// disconnected graphs. The single-node graph (`n = 1`, no edges) is accepted
/// as trivially connected.
pub fn build_graph(n: usize, edges: &[EdgeSpec]) -> Result<PortGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut slots: Vec<Vec<Option<(usize, usize)>>> = vec![Vec::new(); n];
    let mut place = |node: usize, port: usize, dest: (usize, usize)| -> Result<(), GraphError> {
        let row = &mut slots[node];
        if row.len() <= port {
            row.resize(port + 1, None);
        }
        if row[port].is_some() {
            return Err(GraphError::DuplicatePort { node, port });
        }
        row[port] = Some(dest);
        Ok(())
    };
    for (index, &(u, pu, v, pv)) in edges.iter().enumerate() {
        for node in [u, v] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { index, node, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop { index, node: u });
        }
        place(u, pu, (v, pv))?;
        place(v, pv, (u, pu))?;
    }
    let mut ports = Vec::with_capacity(n);
    for (node, row) in slots.into_iter().enumerate() {
        let mut table = Vec::with_capacity(row.len());
        for (port, slot) in row.into_iter().enumerate() {
            match slot {
                Some(dest) => table.push(dest),
                None => return Err(GraphError::PortGap { node, missing: port }),
            }
        }
        ports.push(table);
    }
    let graph = PortGraph { ports };
    if !connected(&graph) {
        return Err(GraphError::Disconnected);
    }
    Ok(graph)
}

fn connected(graph: &PortGraph) -> bool {
    let n = graph.node_count();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &(w, _) in &graph.ports[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Named graph families understood by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Path `0 - 1 - ... - n-1`.
    Path,
    /// Cycle on `n` nodes.
    Ring,
    /// Complete graph on `n` nodes.
    Complete,
    /// Node 0 joined to every other node.
    Star,
    /// Random recursive tree: node `i` attaches to a uniform earlier node.
    RandomTree,
    /// Erdős–Rényi `G(n, p)` resampled until connected.
    GnpConnected(f64),
}

impl Family {
    /// The canonical lowercase name used by the CLI and bench tables.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::Ring => "ring",
            Family::Complete => "complete",
            Family::Star => "star",
            Family::RandomTree => "random_tree",
            Family::GnpConnected(_) => "gnp_connected",
        }
    }
}

/// Generates a member of `family` on `n` nodes.
///
/// Construction is deterministic in `(family, n, seed)`. Ports are assigned in
/// edge-insertion order; with `shuffle_ports` every node's port table is then
/// permuted by a seed-derived shuffle, which relabels ports without changing
/// the underlying multigraph. `G(n,p)` draws are retried with `seed + attempt`
/// until connected, capped at 1000 attempts.
pub fn generate(
    family: Family,
    n: usize,
    seed: u64,
    shuffle_ports: bool,
) -> Result<PortGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let edges: Vec<EdgeSpec> = match family {
        Family::Path => assign_ports(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()),
        Family::Ring => {
            if n < 3 {
                return Err(GraphError::TooSmall { family: "ring", min: 3, n });
            }
            assign_ports(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
        }
        Family::Complete => {
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push((i, j));
                }
            }
            assign_ports(n, pairs)
        }
        Family::Star => assign_ports(n, (1..n).map(|i| (0, i)).collect()),
        Family::RandomTree => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pairs = Vec::new();
            for i in 1..n {
                pairs.push((rng.gen_range(0..i), i));
            }
            assign_ports(n, pairs)
        }
        Family::GnpConnected(p) => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(GraphError::BadProbability { p });
            }
            const ATTEMPTS: usize = 1000;
            let mut found = None;
            for attempt in 0..ATTEMPTS as u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
                let mut pairs = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if rng.gen_bool(p) {
                            pairs.push((i, j));
                        }
                    }
                }
                let edges = assign_ports(n, pairs);
                if let Ok(graph) = build_graph(n, &edges) {
                    found = Some(graph);
                    break;
                }
            }
            return match found {
                Some(graph) => Ok(maybe_shuffle(graph, seed, shuffle_ports)),
                None => Err(GraphError::GnpExhausted { attempts: ATTEMPTS }),
            };
        }
    };
    let graph = build_graph(n, &edges)?;
    Ok(maybe_shuffle(graph, seed, shuffle_ports))
}

/// Turns an unported edge list into port-numbered edge specs by handing each
/// node its ports in edge order.
fn assign_ports(n: usize, pairs: Vec<(usize, usize)>) -> Vec<EdgeSpec> {
    let mut next = vec![0usize; n];
    let mut edges = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        let pu = next[u];
        next[u] += 1;
        let pv = next[v];
        next[v] += 1;
        edges.push((u, pu, v, pv));
    }
    edges
}

fn maybe_shuffle(graph: PortGraph, seed: u64, shuffle_ports: bool) -> PortGraph {
    if !shuffle_ports {
        return graph;
    }
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    // Draw a permutation of each node's ports, then rewrite both edge ends.
    let mut perms: Vec<Vec<usize>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut perm: Vec<usize> = (0..graph.degree(v)).collect();
        perm.shuffle(&mut rng);
        perms.push(perm);
    }
    let mut ports: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|v| vec![(usize::MAX, usize::MAX); graph.degree(v)])
        .collect();
    for v in 0..n {
        for old in 0..graph.degree(v) {
            let (w, old_back) = graph.ports[v][old];
            ports[v][perms[v][old]] = (w, perms[w][old_back]);
        }
    }
    PortGraph { ports }
}

/// Serializes a graph in the interchange text format.
///
/// First line `n m`, then one line `u pu v pv` per edge with `(u, pu)` chosen
/// as the lexicographically smaller end, sorted ascending by `(u, pu)`.
pub fn store_graph(graph: &PortGraph) -> String {
    let mut lines: Vec<(usize, usize, usize, usize)> = Vec::new();
    for u in 0..graph.node_count() {
        for pu in 0..graph.degree(u) {
            let (v, pv) = graph.ports[u][pu];
            if (u, pu) < (v, pv) {
                lines.push((u, pu, v, pv));
            }
        }
    }
    lines.sort_unstable();
    let mut out = format!("{} {}\n", graph.node_count(), lines.len());
    for (u, pu, v, pv) in lines {
        out.push_str(&format!("{u} {pu} {v} {pv}\n"));
    }
    out
}

/// Parses the text format written by [`store_graph`].
///
/// Lines starting with `#` and blank lines are ignored. Errors carry
/// 1-based line numbers.
pub fn load_graph(text: &str) -> Result<PortGraph, GraphError> {
    let mut meaningful = text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    });
    let (header_no, header) = meaningful
        .next()
        .ok_or_else(|| GraphError::Parse { line: 1, message: "missing header".into() })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(GraphError::Parse {
            line: header_no,
            message: format!("header must be 'n m', got {header:?}"),
        });
    }
    let parse_num = |line: usize, s: &str| -> Result<usize, GraphError> {
        s.parse::<usize>().map_err(|_| GraphError::Parse {
            line,
            message: format!("invalid integer {s:?}"),
        })
    };
    let n = parse_num(header_no, fields[0])?;
    let m = parse_num(header_no, fields[1])?;
    let mut edges = Vec::with_capacity(m);
    for (line_no, line) in meaningful {
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != 4 {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("edge line must be 'u pu v pv', got {line:?}"),
            });
        }
        edges.push((
            parse_num(line_no, nums[0])?,
            parse_num(line_no, nums[1])?,
            parse_num(line_no, nums[2])?,
            parse_num(line_no, nums[3])?,
        ));
    }
    if edges.len() != m {
        return Err(GraphError::Parse {
            line: header_no,
            message: format!("header claims {m} edges, found {}", edges.len()),
        });
    }
    build_graph(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn involution_holds_on_build() {
        let graph = build_graph(3, &[(0, 0, 1, 0), (0, 1, 2, 0), (1, 1, 2, 1)]).unwrap();
        for v in 0..graph.node_count() {
            for p in 0..graph.degree(v) {
                let (w, q) = graph.neighbor(v, p).unwrap();
                assert_eq!(graph.neighbor(w, q), Some((v, p)), "port involution broken at ({v},{p})");
            }
        }
    }

    #[test]
    fn neighbor_reports_reverse_port() {
        let graph = build_graph(2, &[(0, 0, 1, 0)]).unwrap();
        assert_eq!(graph.neighbor(0, 0), Some((1, 0)));
    }

    #[test]
    fn duplicate_port_rejected() {
        let err = build_graph(3, &[(0, 0, 1, 0), (0, 0, 2, 0)]).unwrap_err();
        assert_eq!(err, GraphError::DuplicatePort { node: 0, port: 0 });
    }

    #[test]
    fn port_gap_rejected() {
        let err = build_graph(2, &[(0, 0, 1, 5)]).unwrap_err();
        assert!(matches!(err, GraphError::PortGap { node: 1, .. }), "got {err:?}");
    }

    #[test]
    fn self_loop_rejected() {
        let err = build_graph(2, &[(0, 0, 0, 1)]).unwrap_err();
        assert!(matches!(err, GraphError::SelfLoop { node: 0, .. }));
    }

    #[test]
    fn disconnected_rejected() {
        let err = build_graph(4, &[(0, 0, 1, 0), (2, 0, 3, 0)]).unwrap_err();
        assert_eq!(err, GraphError::Disconnected);
    }

    #[test]
    fn single_node_graph_is_trivially_connected() {
        let graph = build_graph(1, &[]).unwrap();
        assert_eq!(graph.node_count(), 1);
        assert_eq!(graph.max_degree(), 0);
    }

    #[test]
    fn parallel_edges_get_distinct_port_pairs() {
        let graph = build_graph(2, &[(0, 0, 1, 0), (0, 1, 1, 1)]).unwrap();
        assert_eq!(graph.degree(0), 2);
        assert_eq!(graph.neighbor(0, 1), Some((1, 1)));
    }

    #[test]
    fn path_degrees() {
        let graph = generate(Family::Path, 3, 0, false).unwrap();
        let degs: Vec<usize> = (0..3).map(|v| graph.degree(v)).collect();
        assert_eq!(degs, vec![1, 2, 1]);
    }

    #[test]
    fn complete_k4_all_degree_three() {
        let graph = generate(Family::Complete, 4, 0, false).unwrap();
        assert!((0..4).all(|v| graph.degree(v) == 3));
    }

    #[test]
    fn star_center_is_node_zero() {
        let graph = generate(Family::Star, 5, 0, false).unwrap();
        assert_eq!(graph.degree(0), 4);
        assert!((1..5).all(|v| graph.degree(v) == 1));
    }

    #[test]
    fn store_matches_documented_example() {
        let graph = generate(Family::Path, 3, 0, false).unwrap();
        assert_eq!(store_graph(&graph), "3 2\n0 0 1 0\n1 1 2 0\n");
    }

    #[test]
    fn load_store_round_trip_on_random_families() {
        for seed in 0..100 {
            for family in [Family::RandomTree, Family::GnpConnected(0.4)] {
                let graph = generate(family, 8, seed, seed % 2 == 0).unwrap();
                let text = store_graph(&graph);
                let reloaded = load_graph(&text).unwrap();
                assert_eq!(store_graph(&reloaded), text, "{} seed {seed}", family.name());
            }
        }
    }

    #[test]
    fn load_reports_line_numbers() {
        let err = load_graph("2 1\n0 0 1 5\n").unwrap_err();
        assert!(matches!(err, GraphError::PortGap { node: 1, .. }), "got {err:?}");
        let err = load_graph("# comment\n2 1\nbogus\n").unwrap_err();
        assert_eq!(
            err,
            GraphError::Parse { line: 3, message: "edge line must be 'u pu v pv', got \"bogus\"".into() }
        );
    }

    #[test]
    fn shuffle_preserves_multiset_of_neighbors() {
        let plain = generate(Family::Ring, 6, 7, false).unwrap();
        let shuffled = generate(Family::Ring, 6, 7, true).unwrap();
        for v in 0..6 {
            let mut a: Vec<usize> = (0..plain.degree(v)).map(|p| plain.neighbor(v, p).unwrap().0).collect();
            let mut b: Vec<usize> =
                (0..shuffled.degree(v)).map(|p| shuffled.neighbor(v, p).unwrap().0).collect();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
        // Shuffled graphs still satisfy the involution.
        for v in 0..6 {
            for p in 0..shuffled.degree(v) {
                let (w, q) = shuffled.neighbor(v, p).unwrap();
                assert_eq!(shuffled.neighbor(w, q), Some((v, p)));
            }
        }
    }

    #[test]
    fn gnp_is_deterministic_per_seed() {
        let a = generate(Family::GnpConnected(0.4), 9, 11, false).unwrap();
        let b = generate(Family::GnpConnected(0.4), 9, 11, false).unwrap();
        assert_eq!(store_graph(&a), store_graph(&b));
    }
}
