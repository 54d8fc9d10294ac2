mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use structnoise::graph::{Edge, Graph};
use structnoise::noise::{derive_frame, perturb, EdgeOp, NoiseLevel, NoiseSpec};
use structnoise::roles::RoleConfig;

fn edge_set(g: &Graph) -> BTreeSet<Edge> {
    g.edges().collect()
}

fn arb_spec() -> impl Strategy<Value = NoiseSpec> {
    (
        prop::sample::select(NoiseLevel::ALL.to_vec()),
        prop::sample::select(EdgeOp::ALL.to_vec()),
        1..=20u32,
        any::<u64>(),
    )
        .prop_map(|(level, op, r, seed)| NoiseSpec::new(level, op, f64::from(r) / 20.0, seed))
}

fn check(g: &Graph, spec: &NoiseSpec) -> Result<(), TestCaseError> {
    let frame = derive_frame(g, spec, &RoleConfig::default()).unwrap();
    let (noisy, report) = perturb(g, spec, frame.as_ref()).unwrap();
    prop_assert!(noisy.validate().is_ok());
    prop_assert_eq!(noisy.node_count(), g.node_count());

    let before = edge_set(g);
    let after = edge_set(&noisy);
    let removed: BTreeSet<Edge> = before.difference(&after).copied().collect();
    let new: BTreeSet<Edge> = after.difference(&before).copied().collect();
    prop_assert_eq!(&removed, &report.deleted.iter().copied().collect());
    prop_assert_eq!(&new, &report.added.iter().copied().collect());
    prop_assert_eq!(removed.len(), report.deleted.len(), "an edge was deleted twice");
    prop_assert_eq!(new.len(), report.added.len(), "an edge was added twice");

    match spec.operation {
        EdgeOp::Delete => prop_assert!(new.is_empty()),
        EdgeOp::Add => prop_assert!(removed.is_empty()),
        EdgeOp::Flip => prop_assert_eq!(noisy.edge_count(), g.edge_count()),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn perturbations_keep_graph_invariants(
        n in 4usize..30,
        p in 0.1f64..0.6,
        graph_seed in any::<u64>(),
        spec in arb_spec(),
    ) {
        let g = common::random_graph(n, p, graph_seed);
        prop_assume!(g.edge_count() > 0);
        check(&g, &spec)?;
    }

    #[test]
    fn perturbation_is_a_function_of_spec(
        graph_seed in any::<u64>(),
        spec in arb_spec(),
    ) {
        let g = common::random_graph(16, 0.3, graph_seed);
        prop_assume!(g.edge_count() > 0);
        let frame = derive_frame(&g, &spec, &RoleConfig::default()).unwrap();
        let a = perturb(&g, &spec, frame.as_ref()).unwrap();
        let b = perturb(&g, &spec, frame.as_ref()).unwrap();
        prop_assert_eq!(a.0, b.0);
        prop_assert_eq!(a.1, b.1);
    }

    #[test]
    fn local_delete_caps_target_degrees(
        n in 4usize..40,
        p in 0.1f64..0.7,
        graph_seed in any::<u64>(),
        ratio in 1..=20u32,
        threshold in prop::option::of(0usize..5),
        seed in any::<u64>(),
    ) {
        let g = common::random_graph(n, p, graph_seed);
        prop_assume!(g.edge_count() > 0);
        let mut spec = NoiseSpec::new(NoiseLevel::Local, EdgeOp::Delete, f64::from(ratio) / 20.0, seed);
        spec.threshold_override = threshold;
        let (noisy, report) = perturb(&g, &spec, None).unwrap();
        let t = report.threshold.unwrap();
        if let Some(o) = threshold {
            prop_assert_eq!(t, o);
        }
        for &v in &report.targets {
            prop_assert!(noisy.degree(v) <= t, "node {} has degree {} > {}", v, noisy.degree(v), t);
        }
    }
}
