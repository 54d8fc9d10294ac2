//! Node-level noise around the highest-degree nodes.

use std::cmp::Reverse;

use rand::Rng;

use super::{NoiseSpec, PerturbationReport};
use crate::error::Result;
use crate::graph::{degree_mode, sample_replacement_endpoint, Edge, Graph, NodeId};
use crate::sampling::{ceil_count, seeded_rng};

/// The first `⌈ratio · n⌉` nodes by degree descending, then id ascending.
pub fn select_targets(g: &Graph, ratio: f64) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = (0..g.node_count()).collect();
    nodes.sort_by_key(|&v| (Reverse(g.degree(v)), v));
    nodes.truncate(ceil_count(ratio, g.node_count()));
    nodes
}

fn threshold(g: &Graph, spec: &NoiseSpec) -> Result<usize> {
    match spec.threshold_override {
        Some(t) => Ok(t),
        None => degree_mode(g),
    }
}

fn prepare(g: &Graph, spec: &NoiseSpec) -> Result<(Vec<NodeId>, PerturbationReport)> {
    spec.validate()?;
    let t = threshold(g, spec)?;
    let targets = select_targets(g, spec.ratio);
    let report = PerturbationReport {
        targets: targets.clone(),
        threshold: Some(t),
        ..Default::default()
    };
    Ok((targets, report))
}

fn budget(original: &Graph, v: NodeId, t: usize) -> usize {
    original.degree(v).saturating_sub(t)
}

fn nth_neighbor(g: &Graph, v: NodeId, i: usize) -> NodeId {
    *g.neighbors(v).iter().nth(i).expect("index below degree")
}

/// Trims every target down to the threshold by deleting uniformly random
/// incident edges. Degrees are re-read per target, so a node already brought
/// to the threshold by earlier deletions is left alone.
pub fn local_delete(g: &Graph, spec: &NoiseSpec) -> Result<(Graph, PerturbationReport)> {
    let (targets, mut report) = prepare(g, spec)?;
    let t = report.threshold.unwrap_or_default();
    let mut rng = seeded_rng(spec.seed);
    let mut out = g.clone();
    for v in targets {
        while out.degree(v) > t {
            let w = nth_neighbor(&out, v, rng.random_range(0..out.degree(v)));
            let e = Edge::new(v, w);
            out.remove_edge(e);
            report.deleted.push(e);
        }
    }
    Ok((out, report))
}

/// For each target, `original_degree − t` times: delete a random incident
/// original edge and reconnect the target to a node it was never adjacent
/// to. A deletion without a valid replacement is rolled back.
pub fn local_flip(g: &Graph, spec: &NoiseSpec) -> Result<(Graph, PerturbationReport)> {
    let (targets, mut report) = prepare(g, spec)?;
    let t = report.threshold.unwrap_or_default();
    let mut rng = seeded_rng(spec.seed);
    let mut out = g.clone();
    for v in targets {
        for _ in 0..budget(g, v, t) {
            // Only original edges are eligible, so an edge this run added is
            // never taken back out.
            let removable: Vec<NodeId> = out.neighbors(v).iter().copied().filter(|&w| g.has_edge(v, w)).collect();
            if removable.is_empty() {
                report.skipped_pairs += 1;
                continue;
            }
            let old = Edge::new(v, removable[rng.random_range(0..removable.len())]);
            out.remove_edge(old);
            match sample_replacement_endpoint(&out, g, v, &mut rng) {
                Some(u) => {
                    let new = Edge::new(v, u);
                    out.insert_edge(new);
                    report.deleted.push(old);
                    report.added.push(new);
                }
                None => {
                    out.insert_edge(old);
                    report.skipped_pairs += 1;
                }
            }
        }
    }
    Ok((out, report))
}

/// For each target, adds `original_degree − t` edges to nodes it was never
/// adjacent to.
pub fn local_add(g: &Graph, spec: &NoiseSpec) -> Result<(Graph, PerturbationReport)> {
    let (targets, mut report) = prepare(g, spec)?;
    let t = report.threshold.unwrap_or_default();
    let mut rng = seeded_rng(spec.seed);
    let mut out = g.clone();
    for v in targets {
        for _ in 0..budget(g, v, t) {
            match sample_replacement_endpoint(&out, g, v, &mut rng) {
                Some(u) => {
                    let new = Edge::new(v, u);
                    out.insert_edge(new);
                    report.added.push(new);
                }
                None => report.skipped_pairs += 1,
            }
        }
    }
    Ok((out, report))
}
