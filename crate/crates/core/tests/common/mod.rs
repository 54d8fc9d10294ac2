//! Synthetic citation data in the LINQS `.content` / `.cites` layout.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use structnoise::graph::Graph;
use structnoise::sampling::seeded_rng;

/// Writes `<dir>/<name>.content` and `<dir>/<name>.cites` for a planted
/// partition: `classes × per_class` papers, each citing two others (mostly
/// within its class) and carrying four noisy topic words.
pub fn write_planted(dir: &Path, name: &str, classes: usize, per_class: usize, seed: u64) {
    let n = classes * per_class;
    let dim = classes * 10 + 10;
    let mut rng = seeded_rng(seed);
    let mut content = String::new();
    for v in 0..n {
        let class = v % classes;
        let mut words = BTreeSet::new();
        for _ in 0..4 {
            let w = if rng.random::<f64>() < 0.5 {
                class * 10 + rng.random_range(0..10)
            } else {
                rng.random_range(0..dim)
            };
            words.insert(w);
        }
        write!(content, "p{v:05}").unwrap();
        for w in 0..dim {
            content.push_str(if words.contains(&w) { " 1" } else { " 0" });
        }
        writeln!(content, " topic{class}").unwrap();
    }
    let mut cites = String::new();
    for v in 0..n {
        for _ in 0..2 {
            let u = if rng.random::<f64>() < 0.85 {
                v % classes + classes * rng.random_range(0..per_class)
            } else {
                rng.random_range(0..n)
            };
            if u != v {
                writeln!(cites, "p{u:05} p{v:05}").unwrap();
            }
        }
    }
    fs::write(dir.join(format!("{name}.content")), content).unwrap();
    fs::write(dir.join(format!("{name}.cites")), cites).unwrap();
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = seeded_rng(seed);
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((a, b));
            }
        }
    }
    Graph::from_edges(n, &pairs).unwrap()
}
