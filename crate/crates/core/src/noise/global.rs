//! Role-level noise. Edges split into within-role and between-role classes;
//! a between-role edge is replaced by a new edge joining the same pair of
//! roles, which is how "same endpoints" is read here (re-inserting the
//! literal endpoints would restore an original edge).

use super::classes::{perturb_classes, split_by_labels, CrossRule};
use super::{EdgeOp, NoiseSpec, PerturbationReport};
use crate::graph::{Edge, Graph};

/// Splits the edges into `(within, between)` role classes.
pub fn classify_edges_by_role(g: &Graph, roles: &[usize]) -> (Vec<Edge>, Vec<Edge>) {
    assert_eq!(roles.len(), g.node_count(), "role assignment must cover the graph");
    split_by_labels(g, roles)
}

fn run(g: &Graph, roles: &[usize], spec: &NoiseSpec, op: EdgeOp) -> (Graph, PerturbationReport) {
    assert_eq!(roles.len(), g.node_count(), "role assignment must cover the graph");
    let spec = NoiseSpec {
        operation: op,
        ..spec.clone()
    };
    perturb_classes(g, roles, &spec, CrossRule::SameLabelPair)
}

pub fn global_flip(g: &Graph, roles: &[usize], spec: &NoiseSpec) -> (Graph, PerturbationReport) {
    run(g, roles, spec, EdgeOp::Flip)
}

pub fn global_delete(g: &Graph, roles: &[usize], spec: &NoiseSpec) -> (Graph, PerturbationReport) {
    run(g, roles, spec, EdgeOp::Delete)
}

/// New between-role edges copy the role pair of a set-sampled existing
/// between-role edge.
pub fn global_add(g: &Graph, roles: &[usize], spec: &NoiseSpec) -> (Graph, PerturbationReport) {
    run(g, roles, spec, EdgeOp::Add)
}
