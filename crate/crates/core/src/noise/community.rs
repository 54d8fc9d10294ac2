//! Community-level noise over a node partition.
//!
//! Edges fall into an intra-community class and an inter-community class.
//! Replacement intra edges stay inside the community of the edge they
//! replace; replacement inter edges may join any two distinct communities.

use super::classes::{perturb_classes, split_by_labels, CrossRule};
use super::{EdgeOp, NoiseSpec, PerturbationReport};
use crate::graph::{Edge, Graph};

/// Splits the edges into `(intra, inter)` under `assignment`, both in
/// canonical order.
pub fn classify_edges(g: &Graph, assignment: &[usize]) -> (Vec<Edge>, Vec<Edge>) {
    assert_eq!(assignment.len(), g.node_count(), "partition must cover the graph");
    split_by_labels(g, assignment)
}

fn run(g: &Graph, assignment: &[usize], spec: &NoiseSpec, op: EdgeOp) -> (Graph, PerturbationReport) {
    assert_eq!(assignment.len(), g.node_count(), "partition must cover the graph");
    let spec = NoiseSpec {
        operation: op,
        ..spec.clone()
    };
    perturb_classes(g, assignment, &spec, CrossRule::AnyDistinct)
}

/// Deletes `⌈ratio · |class|⌉` edges of each class and replaces each with a
/// new edge of the same class. Deletions with no possible replacement are
/// rolled back, so the edge count never changes.
pub fn community_flip(g: &Graph, assignment: &[usize], spec: &NoiseSpec) -> (Graph, PerturbationReport) {
    run(g, assignment, spec, EdgeOp::Flip)
}

pub fn community_delete(g: &Graph, assignment: &[usize], spec: &NoiseSpec) -> (Graph, PerturbationReport) {
    run(g, assignment, spec, EdgeOp::Delete)
}

/// Adds `⌈ratio · |class|⌉` new edges per class. Each new intra edge lands in
/// the community of a set-sampled existing intra edge.
pub fn community_add(g: &Graph, assignment: &[usize], spec: &NoiseSpec) -> (Graph, PerturbationReport) {
    run(g, assignment, spec, EdgeOp::Add)
}
