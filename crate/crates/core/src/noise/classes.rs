//! Shared machinery for noise defined over a node labelling: edges split into
//! a same-label class and a cross-label class, each perturbed independently.

use super::{EdgeOp, NoiseSpec, PerturbationReport};
use crate::graph::{Edge, Graph, NodeId};
use crate::sampling::{ceil_count, sample_new_pair, sample_without_replacement, seeded_rng, SeededRng};

/// Constraint on replacement edges for the cross-label class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum CrossRule {
    /// Endpoints carry any two different labels.
    AnyDistinct,
    /// Endpoints carry the same label pair as the sampled edge.
    SameLabelPair,
}

pub(super) fn split_by_labels(g: &Graph, labels: &[usize]) -> (Vec<Edge>, Vec<Edge>) {
    g.edges().partition(|e| labels[e.u()] == labels[e.v()])
}

fn members_by_label(labels: &[usize]) -> Vec<Vec<NodeId>> {
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); count];
    for (v, &l) in labels.iter().enumerate() {
        members[l].push(v);
    }
    members
}

struct ClassNoise<'a> {
    original: &'a Graph,
    labels: &'a [usize],
    members: Vec<Vec<NodeId>>,
    all: Vec<NodeId>,
    rule: CrossRule,
    out: Graph,
    rng: SeededRng,
    report: PerturbationReport,
}

impl<'a> ClassNoise<'a> {
    fn new(g: &'a Graph, labels: &'a [usize], rule: CrossRule, seed: u64) -> Self {
        ClassNoise {
            original: g,
            labels,
            members: members_by_label(labels),
            all: (0..g.node_count()).collect(),
            rule,
            out: g.clone(),
            rng: seeded_rng(seed),
            report: PerturbationReport::default(),
        }
    }

    /// A fresh edge of the same class as `template`.
    fn replacement_for(&mut self, template: Edge, same_class: bool) -> Option<Edge> {
        let (lu, lv) = (self.labels[template.u()], self.labels[template.v()]);
        let labels = self.labels;
        if same_class {
            let pool = &self.members[lu];
            sample_new_pair(pool, pool, &self.out, self.original, |_, _| true, &mut self.rng)
        } else {
            match self.rule {
                CrossRule::AnyDistinct => sample_new_pair(
                    &self.all,
                    &self.all,
                    &self.out,
                    self.original,
                    |a, b| labels[a] != labels[b],
                    &mut self.rng,
                ),
                CrossRule::SameLabelPair => sample_new_pair(
                    &self.members[lu],
                    &self.members[lv],
                    &self.out,
                    self.original,
                    |_, _| true,
                    &mut self.rng,
                ),
            }
        }
    }

    fn run_class(&mut self, class: &[Edge], ratio: f64, op: EdgeOp, same_class: bool) {
        let picks = sample_without_replacement(class, ceil_count(ratio, class.len()), &mut self.rng);
        for e in picks {
            match op {
                EdgeOp::Delete => {
                    self.out.remove_edge(e);
                    self.report.deleted.push(e);
                }
                EdgeOp::Flip => {
                    self.out.remove_edge(e);
                    match self.replacement_for(e, same_class) {
                        Some(new) => {
                            self.out.insert_edge(new);
                            self.report.deleted.push(e);
                            self.report.added.push(new);
                        }
                        None => {
                            self.out.insert_edge(e);
                            self.report.skipped_pairs += 1;
                        }
                    }
                }
                EdgeOp::Add => match self.replacement_for(e, same_class) {
                    Some(new) => {
                        self.out.insert_edge(new);
                        self.report.added.push(new);
                    }
                    None => self.report.skipped_pairs += 1,
                },
            }
        }
    }
}

/// Perturbs `⌈ratio · |class|⌉` set-sampled edges of each class: the
/// same-label class first, then the cross-label class, from one generator.
pub(super) fn perturb_classes(
    g: &Graph,
    labels: &[usize],
    spec: &NoiseSpec,
    rule: CrossRule,
) -> (Graph, PerturbationReport) {
    let (same, cross) = split_by_labels(g, labels);
    let mut state = ClassNoise::new(g, labels, rule, spec.seed);
    state.run_class(&same, spec.ratio, spec.operation, true);
    state.run_class(&cross, spec.ratio, spec.operation, false);
    (state.out, state.report)
}
