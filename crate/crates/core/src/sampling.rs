//! Seeded sampling helpers shared by the noise generators.

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, Graph, NodeId};

/// The generator behind every seeded operation. ChaCha output is specified
/// bit-for-bit, so seeds reproduce across platforms and crate versions.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `⌈ratio · n⌉`, tolerant of binary round-off in the product (0.15 · 20 is
/// 3.0000000000000004 in f64 and must count as 3).
pub fn ceil_count(ratio: f64, n: usize) -> usize {
    let exact = ratio * n as f64;
    ((exact - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Draws `k` distinct items from `items` without replacement, in draw order.
pub fn sample_without_replacement<T: Copy, R: Rng + ?Sized>(items: &[T], k: usize, rng: &mut R) -> Vec<T> {
    let k = k.min(items.len());
    index::sample(rng, items.len(), k)
        .into_iter()
        .map(|i| items[i])
        .collect()
}

const REJECTION_ATTEMPTS: usize = 64;

/// Draws an unordered pair `{a, b}` with `a ∈ left`, `b ∈ right`, `a ≠ b`,
/// absent from both `current` and `original`, and satisfying `accept`.
///
/// Ordered pairs are drawn uniformly from `left × right`; every unordered pair
/// has the same multiplicity there whether the pools coincide or are
/// disjoint, so the result is uniform over the valid unordered pairs. After a
/// bounded number of rejections the valid set is enumerated instead.
pub fn sample_new_pair<R, F>(
    left: &[NodeId],
    right: &[NodeId],
    current: &Graph,
    original: &Graph,
    accept: F,
    rng: &mut R,
) -> Option<Edge>
where
    R: Rng + ?Sized,
    F: Fn(NodeId, NodeId) -> bool,
{
    if left.is_empty() || right.is_empty() {
        return None;
    }
    let valid = |a: NodeId, b: NodeId| a != b && !current.has_edge(a, b) && !original.has_edge(a, b) && accept(a, b);
    for _ in 0..REJECTION_ATTEMPTS {
        let a = left[rng.random_range(0..left.len())];
        let b = right[rng.random_range(0..right.len())];
        if valid(a, b) {
            return Some(Edge::new(a, b));
        }
    }
    let mut candidates = Vec::new();
    for &a in left {
        for &b in right {
            if valid(a, b) {
                candidates.push((a, b));
            }
        }
    }
    if candidates.is_empty() {
        None
    } else {
        let (a, b) = candidates[rng.random_range(0..candidates.len())];
        Some(Edge::new(a, b))
    }
}
