//! Undirected simple graphs over dense integer node ids.
//!
//! A [`Graph`] is treated as immutable once built: perturbations clone it and
//! edit the copy, so a clean graph can be shared read-only between sweep cells.
//! Edges are always reported in canonical order, `(min, max)` pairs sorted
//! ascending, which is what makes seeded perturbations reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// An undirected edge stored with its smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    u: NodeId,
    v: NodeId,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn u(&self) -> NodeId {
        self.u
    }

    pub fn v(&self) -> NodeId {
        self.v
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }

    /// The endpoint that is not `x`. `x` must be one of the endpoints.
    pub fn other(&self, x: NodeId) -> NodeId {
        debug_assert!(x == self.u || x == self.v);
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.u, self.v)
    }
}

impl From<(NodeId, NodeId)> for Edge {
    fn from((a, b): (NodeId, NodeId)) -> Self {
        Edge::new(a, b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<BTreeSet<NodeId>>,
    edge_count: usize,
}

/// Side information from [`from_edge_list`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// Pairs that repeated an earlier pair, in either orientation.
    pub duplicates: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeStats {
    pub degrees: Vec<usize>,
    /// Most frequent degree; ties go to the smallest value.
    pub mode: usize,
}

impl Graph {
    pub fn empty(node_count: usize) -> Self {
        Graph {
            adjacency: vec![BTreeSet::new(); node_count],
            edge_count: 0,
        }
    }

    /// Builds a graph and discards the duplicate count. Same validation as
    /// [`from_edge_list`].
    pub fn from_edges(node_count: usize, pairs: &[(NodeId, NodeId)]) -> Result<Self> {
        from_edge_list(pairs, node_count).map(|(g, _)| g)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: NodeId) -> &BTreeSet<NodeId> {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(BTreeSet::len).collect()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a < self.node_count() && self.adjacency[a].contains(&b)
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.has_edge(e.u, e.v)
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.range(u + 1..).map(move |&v| Edge { u, v }))
    }

    pub fn edge_list(&self) -> Vec<Edge> {
        self.edges().collect()
    }

    pub fn degree_stats(&self) -> Result<DegreeStats> {
        let mode = degree_mode(self)?;
        Ok(DegreeStats {
            degrees: self.degrees(),
            mode,
        })
    }

    /// Checks the structural invariants: symmetric adjacency, no self-loops,
    /// ids in range and a consistent edge count.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        let mut half_edges = 0usize;
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs {
                if v >= n {
                    return Err(Error::input(format!("node {u} has out-of-range neighbor {v}")));
                }
                if v == u {
                    return Err(Error::input(format!("self-loop at node {u}")));
                }
                if !self.adjacency[v].contains(&u) {
                    return Err(Error::input(format!("asymmetric adjacency between {u} and {v}")));
                }
            }
            half_edges += nbrs.len();
        }
        if half_edges != 2 * self.edge_count {
            return Err(Error::input(format!(
                "edge count {} disagrees with adjacency ({} half-edges)",
                self.edge_count, half_edges
            )));
        }
        Ok(())
    }

    /// Returns false if the edge was already present.
    pub(crate) fn insert_edge(&mut self, e: Edge) -> bool {
        debug_assert!(e.u != e.v && e.v < self.node_count());
        if self.adjacency[e.u].insert(e.v) {
            self.adjacency[e.v].insert(e.u);
            self.edge_count += 1;
            true
        } else {
            false
        }
    }

    /// Returns false if the edge was absent.
    pub(crate) fn remove_edge(&mut self, e: Edge) -> bool {
        if e.v < self.node_count() && self.adjacency[e.u].remove(&e.v) {
            self.adjacency[e.v].remove(&e.u);
            self.edge_count -= 1;
            true
        } else {
            false
        }
    }
}

/// Builds a graph from node-id pairs. Pairs repeated in either orientation
/// collapse to one edge and are counted in the report; self-loops and
/// out-of-range ids are input errors.
pub fn from_edge_list(pairs: &[(NodeId, NodeId)], node_count: usize) -> Result<(Graph, BuildReport)> {
    let mut g = Graph::empty(node_count);
    let mut report = BuildReport::default();
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if a >= node_count || b >= node_count {
            return Err(Error::input(format!(
                "pair {i} ({a}, {b}) has an id outside [0, {node_count})"
            )));
        }
        if a == b {
            return Err(Error::input(format!("pair {i} is a self-loop on node {a}")));
        }
        if !g.insert_edge(Edge::new(a, b)) {
            report.duplicates += 1;
        }
    }
    Ok((g, report))
}

/// The smallest most-frequent degree.
pub fn degree_mode(g: &Graph) -> Result<usize> {
    if g.node_count() == 0 {
        return Err(Error::input("degree mode of an empty graph"));
    }
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for d in g.degrees() {
        *histogram.entry(d).or_default() += 1;
    }
    // BTreeMap iterates ascending, and max_by_key keeps the last maximum, so
    // walk in reverse to land on the smallest tied degree.
    let (&mode, _) = histogram
        .iter()
        .rev()
        .max_by_key(|(_, &count)| count)
        .expect("non-empty histogram");
    Ok(mode)
}

const REJECTION_ATTEMPTS: usize = 32;

/// Draws `u` uniformly from the nodes that are neither `v` nor adjacent to `v`
/// in `current` or `original`. `None` when no such node exists.
pub fn sample_replacement_endpoint<R: Rng + ?Sized>(
    current: &Graph,
    original: &Graph,
    v: NodeId,
    rng: &mut R,
) -> Option<NodeId> {
    let n = current.node_count();
    let valid = |u: NodeId| u != v && !current.has_edge(v, u) && !original.has_edge(v, u);

    // Rejection from the uniform distribution over all nodes is uniform over
    // the valid set; the enumeration fallback handles dense neighborhoods.
    for _ in 0..REJECTION_ATTEMPTS {
        let u = rng.random_range(0..n);
        if valid(u) {
            return Some(u);
        }
    }
    let candidates: Vec<NodeId> = (0..n).filter(|&u| valid(u)).collect();
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.random_range(0..candidates.len())])
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builds_path() {
        let (g, report) = from_edge_list(&[(0, 1), (1, 2), (2, 3)], 4).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(report.duplicates, 0);
        assert_eq!(g.degrees(), vec![1, 2, 2, 1]);
        g.validate().unwrap();
    }

    #[test]
    fn collapses_reversed_duplicate() {
        let (g, report) = from_edge_list(&[(0, 1), (1, 0)], 2).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report.duplicates, 1);
    }

    #[test]
    fn rejects_self_loop_and_out_of_range() {
        assert!(matches!(from_edge_list(&[(0, 0)], 1), Err(Error::Input(_))));
        assert!(matches!(from_edge_list(&[(0, 2)], 2), Err(Error::Input(_))));
    }

    #[test]
    fn canonical_edge_order() {
        let g = Graph::from_edges(3, &[(2, 1), (2, 0), (1, 0)]).unwrap();
        let edges: Vec<_> = g.edges().map(|e| e.endpoints()).collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn mode_examples() {
        assert_eq!(degree_mode(&star4()).unwrap(), 1);
        assert_eq!(degree_mode(&path4()).unwrap(), 1);
        assert_eq!(degree_mode(&triangle()).unwrap(), 2);
        assert!(degree_mode(&Graph::empty(0)).is_err());
    }

    #[test]
    fn no_replacement_for_saturated_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = star4();
        assert_eq!(sample_replacement_endpoint(&s, &s, 0, &mut rng), None);
        let k3 = triangle();
        for v in 0..3 {
            assert_eq!(sample_replacement_endpoint(&k3, &k3, v, &mut rng), None);
        }
    }

    #[test]
    fn replacement_on_path_is_uniform() {
        // Non-neighbors of node 0 in P4 are {2, 3}.
        let p = path4();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[sample_replacement_endpoint(&p, &p, 0, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0] + counts[1], 0);
        // 5 sigma of a fair binomial with n = 10^4 is 250.
        let dev = (counts[2] as f64 - draws as f64 / 2.0).abs();
        assert!(dev < 250.0, "counts {counts:?}");
    }

    #[test]
    fn replacement_excludes_original_neighbors() {
        let original = path4();
        let mut current = original.clone();
        current.remove_edge(Edge::new(0, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = sample_replacement_endpoint(&current, &original, 0, &mut rng).unwrap();
            assert!(u == 2 || u == 3);
        }
    }

    fn brute_force_mode(degrees: &[usize]) -> usize {
        let max = *degrees.iter().max().unwrap();
        let mut best = (0usize, 0usize);
        for d in 0..=max {
            let c = degrees.iter().filter(|&&x| x == d).count();
            if c > best.1 {
                best = (d, c);
            }
        }
        best.0
    }

    fn arb_graph(max_nodes: usize) -> impl Strategy<Value = Graph> {
        (1..=max_nodes).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..(3 * n)).prop_map(move |pairs| {
                let pairs: Vec<_> = pairs.into_iter().filter(|(a, b)| a != b).collect();
                Graph::from_edges(n, &pairs).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn mode_matches_brute_force(g in arb_graph(200)) {
            prop_assert_eq!(degree_mode(&g).unwrap(), brute_force_mode(&g.degrees()));
        }

        #[test]
        fn built_graphs_validate(g in arb_graph(40)) {
            g.validate().unwrap();
            let listed = g.edge_list();
            let mut sorted = listed.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(listed, sorted);
        }

        #[test]
        fn replacement_never_adjacent(g in arb_graph(30), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in 0..g.node_count() {
                if let Some(u) = sample_replacement_endpoint(&g, &g, v, &mut rng) {
                    prop_assert!(u != v && !g.has_edge(u, v));
                } else {
                    prop_assert_eq!(g.degree(v), g.node_count() - 1);
                }
            }
        }
    }
}
