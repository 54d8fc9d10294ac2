//! Recursive structural features (ReFeX style).
//!
//! Three base columns per node (degree, egonet internal edges, egonet
//! boundary edges) are grown by repeated neighbor mean/sum aggregation, then
//! pruned of constant and highly correlated columns and min-max scaled.

use ndarray::Array2;

use crate::graph::Graph;

/// Named feature columns, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn node_count(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Row-major `node_count × columns` matrix.
    pub fn to_matrix(&self, node_count: usize) -> Array2<f64> {
        Array2::from_shape_fn((node_count, self.columns.len()), |(i, j)| self.columns[j][i])
    }
}

fn base_features(g: &Graph) -> FeatureTable {
    let n = g.node_count();
    let mut degree = Vec::with_capacity(n);
    let mut internal = Vec::with_capacity(n);
    let mut boundary = Vec::with_capacity(n);
    for v in 0..n {
        let nbrs: Vec<usize> = g.neighbors(v).iter().copied().collect();
        let mut links_among_neighbors = 0usize;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if g.has_edge(a, b) {
                    links_among_neighbors += 1;
                }
            }
        }
        let inside = nbrs.len() + links_among_neighbors;
        let ego_degree: usize = nbrs.iter().map(|&u| g.degree(u)).sum::<usize>() + nbrs.len();
        degree.push(nbrs.len() as f64);
        internal.push(inside as f64);
        boundary.push((ego_degree - 2 * inside) as f64);
    }
    FeatureTable {
        names: vec!["degree".into(), "egonet_internal".into(), "egonet_boundary".into()],
        columns: vec![degree, internal, boundary],
    }
}

/// Base features plus `depth` rounds of neighbor mean and sum over every
/// existing column. Unpruned and unscaled.
pub fn refex_raw_features(g: &Graph, depth: usize) -> FeatureTable {
    let mut table = base_features(g);
    for _ in 0..depth {
        let existing = table.columns.len();
        for c in 0..existing {
            let col = &table.columns[c];
            let mut mean = Vec::with_capacity(col.len());
            let mut sum = Vec::with_capacity(col.len());
            for v in 0..g.node_count() {
                let s: f64 = g.neighbors(v).iter().map(|&u| col[u]).sum();
                let d = g.degree(v);
                sum.push(s);
                mean.push(if d == 0 { 0.0 } else { s / d as f64 });
            }
            let name = table.names[c].clone();
            table.names.push(format!("mean({name})"));
            table.columns.push(mean);
            table.names.push(format!("sum({name})"));
            table.columns.push(sum);
        }
    }
    table
}

fn is_constant(col: &[f64]) -> bool {
    let (lo, hi) = min_max(col);
    hi - lo <= 1e-12 * hi.abs().max(1.0)
}

fn min_max(col: &[f64]) -> (f64, f64) {
    col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Drops constant columns and any column whose correlation with an earlier
/// retained column exceeds `threshold`, then min-max scales the survivors
/// to [0, 1]. Strongly anti-correlated columns are kept.
pub fn prune_and_scale(table: &FeatureTable, threshold: f64) -> FeatureTable {
    let mut kept = FeatureTable {
        names: Vec::new(),
        columns: Vec::new(),
    };
    for (name, col) in table.names.iter().zip(&table.columns) {
        if is_constant(col) {
            continue;
        }
        if kept.columns.iter().any(|k| pearson(k, col) > threshold) {
            continue;
        }
        kept.names.push(name.clone());
        kept.columns.push(col.clone());
    }
    for col in &mut kept.columns {
        let (lo, hi) = min_max(col);
        for x in col.iter_mut() {
            *x = (*x - lo) / (hi - lo);
        }
    }
    kept
}

/// Pruned and scaled recursive features as an `n × f` matrix with column names.
pub fn refex_features(g: &Graph, depth: usize, correlation_threshold: f64) -> (Array2<f64>, Vec<String>) {
    let table = prune_and_scale(&refex_raw_features(g, depth), correlation_threshold);
    (table.to_matrix(g.node_count()), table.names)
}
