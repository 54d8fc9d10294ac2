//! Louvain modularity maximization.
//!
//! The public surface is unweighted; weights only appear internally once
//! communities are contracted into super-nodes carrying self-loops.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampling::seeded_rng;

/// Node → community assignment with dense community ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub community_count: usize,
}

impl Partition {
    /// Renumbers arbitrary labels densely in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = BTreeMap::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            community_count: remap.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            community_count: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            community_count: usize::from(n > 0),
        }
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// `Q = Σ_c [e_c / m − (d_c / 2m)²]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    modularity_with_resolution(g, p, 1.0)
}

pub fn modularity_with_resolution(g: &Graph, p: &Partition, resolution: f64) -> Result<f64> {
    let m = g.edge_count() as f64;
    if g.edge_count() == 0 {
        return Err(Error::input("modularity is undefined on an edgeless graph"));
    }
    if p.assignment.len() != g.node_count() {
        return Err(Error::input("partition does not cover the graph"));
    }
    let mut internal = vec![0.0; p.community_count];
    let mut total_degree = vec![0.0; p.community_count];
    for e in g.edges() {
        let (cu, cv) = (p.assignment[e.u()], p.assignment[e.v()]);
        if cu == cv {
            internal[cu] += 1.0;
        }
    }
    for (v, &c) in p.assignment.iter().enumerate() {
        total_degree[c] += g.degree(v) as f64;
    }
    Ok(internal
        .iter()
        .zip(&total_degree)
        .map(|(&e_c, &d_c)| e_c / m - resolution * (d_c / (2.0 * m)).powi(2))
        .sum())
}

/// Level graph of the aggregation hierarchy.
#[derive(Clone, Debug)]
struct WeightedGraph {
    /// Off-diagonal neighbors, sorted by id.
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    /// Incident weight with self-loops counted twice.
    strength: Vec<f64>,
    /// Total edge weight `m`, self-loops counted once.
    total: f64,
}

impl WeightedGraph {
    fn from_graph(g: &Graph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|v| g.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
            .collect();
        let strength = adj.iter().map(|a| a.len() as f64).collect();
        WeightedGraph {
            adj,
            self_loops: vec![0.0; g.node_count()],
            strength,
            total: g.edge_count() as f64,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Contracts each community into one node. `comm` must be dense.
    fn aggregate(&self, comm: &[usize], count: usize) -> Self {
        let mut self_loops = vec![0.0; count];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        for i in 0..self.len() {
            let ci = comm[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if j < i {
                    continue;
                }
                let cj = comm[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    *links[ci].entry(cj).or_default() += w;
                    *links[cj].entry(ci).or_default() += w;
                }
            }
        }
        let adj: Vec<Vec<(usize, f64)>> = links.into_iter().map(|l| l.into_iter().collect()).collect();
        let strength = adj
            .iter()
            .zip(&self_loops)
            .map(|(a, &s)| a.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * s)
            .collect();
        WeightedGraph {
            adj,
            self_loops,
            strength,
            total: self.total,
        }
    }
}

const MIN_GAIN: f64 = 1e-12;
const MAX_PASSES: usize = 10_000;

/// Local-move phase. Returns dense community labels and whether any node
/// moved.
fn move_nodes(wg: &WeightedGraph, order: &[usize], resolution: f64) -> (Vec<usize>, bool) {
    let n = wg.len();
    let two_m = 2.0 * wg.total;
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = wg.strength.clone();
    let mut link_weight = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;

    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for &i in order {
            let ki = wg.strength[i];
            let home = comm[i];
            for &(j, w) in &wg.adj[i] {
                let c = comm[j];
                if link_weight[c] == 0.0 {
                    touched.push(c);
                }
                link_weight[c] += w;
            }
            tot[home] -= ki;
            // Staying put is the baseline; a move needs a strictly larger gain.
            let gain = |c: usize| link_weight[c] - resolution * tot[c] * ki / two_m;
            let mut best = home;
            let mut best_gain = gain(home);
            for &c in &touched {
                let g = gain(c);
                if g > best_gain + MIN_GAIN {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += ki;
            comm[i] = best;
            if best != home {
                moved = true;
            }
            for c in touched.drain(..) {
                link_weight[c] = 0.0;
            }
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    let dense = Partition::from_labels(&comm);
    (dense.assignment, any_move)
}

/// Louvain result together with the modularity after each aggregation level.
#[derive(Clone, Debug)]
pub struct LouvainRun {
    pub partition: Partition,
    /// Modularity of the flattened partition: singletons first, then one
    /// entry per level that moved at least one node.
    pub level_modularity: Vec<f64>,
}

impl LouvainRun {
    /// Modularity of the final partition.
    pub fn modularity(&self) -> f64 {
        *self
            .level_modularity
            .last()
            .expect("trace starts with the singleton partition")
    }
}

pub fn louvain(g: &Graph, seed: u64) -> Result<Partition> {
    louvain_with_resolution(g, seed, 1.0)
}

pub fn louvain_with_resolution(g: &Graph, seed: u64, resolution: f64) -> Result<Partition> {
    louvain_run(g, seed, resolution).map(|r| r.partition)
}

/// Independent Louvain runs per call; the highest final modularity wins.
pub const LOUVAIN_RESTARTS: u64 = 10;

/// Two-phase Louvain: node visit order is a seeded shuffle per level. Runs
/// [`LOUVAIN_RESTARTS`] times from seeds derived from `seed` and keeps the
/// best run (the earliest on ties).
pub fn louvain_run(g: &Graph, seed: u64, resolution: f64) -> Result<LouvainRun> {
    if g.edge_count() == 0 {
        return Err(Error::input("louvain needs at least one edge"));
    }
    let mut best = louvain_once(g, seed, resolution)?;
    for k in 1..LOUVAIN_RESTARTS {
        let run = louvain_once(g, seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15)), resolution)?;
        if run.modularity() > best.modularity() + MIN_GAIN {
            best = run;
        }
    }
    Ok(best)
}

fn louvain_once(g: &Graph, seed: u64, resolution: f64) -> Result<LouvainRun> {
    let mut rng = seeded_rng(seed);
    let mut node_comm: Vec<usize> = (0..g.node_count()).collect();
    let mut level = WeightedGraph::from_graph(g);
    let mut trace = vec![modularity_with_resolution(
        g,
        &Partition::singletons(g.node_count()),
        resolution,
    )?];

    loop {
        let mut order: Vec<usize> = (0..level.len()).collect();
        order.shuffle(&mut rng);
        let (comm, moved) = move_nodes(&level, &order, resolution);
        if !moved {
            break;
        }
        let count = comm.iter().max().map_or(0, |&c| c + 1);
        for c in node_comm.iter_mut() {
            *c = comm[*c];
        }
        let flat = Partition::from_labels(&node_comm);
        trace.push(modularity_with_resolution(g, &flat, resolution)?);
        level = level.aggregate(&comm, count);
    }

    Ok(LouvainRun {
        partition: Partition::from_labels(&node_comm),
        level_modularity: trace,
    })
}
