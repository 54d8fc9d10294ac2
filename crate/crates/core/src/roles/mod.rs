//! Role discovery: recursive structural features factorized by NMF, with each
//! node assigned the role of its largest basis weight.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::noise::DEFAULT_ROLE_COUNT;

pub mod nmf;
pub mod refex;

pub use nmf::{nmf, NmfResult};
pub use refex::{refex_features, refex_raw_features, FeatureTable};

#[derive(Clone, Debug, PartialEq)]
pub struct RoleConfig {
    pub role_count: usize,
    pub recursion_depth: usize,
    pub correlation_threshold: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Independent NMF initializations; the lowest final objective wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RoleConfig {
    fn default() -> Self {
        RoleConfig {
            role_count: DEFAULT_ROLE_COUNT,
            recursion_depth: 2,
            correlation_threshold: 0.95,
            max_iters: 1000,
            tol: 1e-6,
            restarts: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RoleModel {
    /// Pruned, scaled features `V` (`n × f`).
    pub features: Array2<f64>,
    pub feature_names: Vec<String>,
    /// `G` (`n × rank`).
    pub basis: Array2<f64>,
    /// `F` (`rank × f`).
    pub coefficients: Array2<f64>,
    pub assignment: Vec<usize>,
    pub requested_roles: usize,
    /// Factorization rank actually used: `min(requested, f, n)`, or 1 when
    /// no feature column survives pruning.
    pub rank: usize,
}

impl RoleModel {
    pub fn fit(g: &Graph, cfg: &RoleConfig) -> Result<Self> {
        if cfg.role_count < 2 {
            return Err(Error::input(format!(
                "role_count {} must be at least 2",
                cfg.role_count
            )));
        }
        if g.node_count() == 0 {
            return Err(Error::input("role discovery on an empty graph"));
        }
        let (features, feature_names) = refex_features(g, cfg.recursion_depth, cfg.correlation_threshold);
        let (n, f) = features.dim();
        let rank = cfg.role_count.min(f).min(n);
        if rank == 0 {
            // Every node looks the same: one role.
            return Ok(RoleModel {
                features,
                feature_names,
                basis: Array2::ones((n, 1)),
                coefficients: Array2::zeros((1, 0)),
                assignment: vec![0; n],
                requested_roles: cfg.role_count,
                rank: 1,
            });
        }
        let mut fit = nmf(&features, rank, cfg.max_iters, cfg.tol, cfg.seed)?;
        for k in 1..cfg.restarts.max(1) as u64 {
            let seed = cfg.seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let other = nmf(&features, rank, cfg.max_iters, cfg.tol, seed)?;
            if other.objective() < fit.objective() {
                fit = other;
            }
        }
        let assignment = assign_roles(&fit.basis);
        Ok(RoleModel {
            features,
            feature_names,
            basis: fit.basis,
            coefficients: fit.coefficients,
            assignment,
            requested_roles: cfg.role_count,
            rank,
        })
    }

    /// Writes the feature matrix as comma-separated text with a header row.
    pub fn write_features(&self, path: &Path) -> Result<()> {
        let mut out = String::from("node");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (v, row) in self.features.rows().into_iter().enumerate() {
            write!(out, "{v}").unwrap();
            for x in row {
                write!(out, ",{x}").unwrap();
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Row-wise argmax; ties go to the lowest column.
pub fn assign_roles(basis: &Array2<f64>) -> Vec<usize> {
    basis
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn argmax_examples() {
        assert_eq!(assign_roles(&array![[0.1, 0.9]]), vec![1]);
        assert_eq!(assign_roles(&array![[0.5, 0.5]]), vec![0]);
        assert_eq!(assign_roles(&array![[0.0, 0.2, 0.2]]), vec![1]);
    }

    #[test]
    fn star_center_and_leaves_split() {
        for seed in 0..10 {
            let cfg = RoleConfig {
                role_count: 2,
                seed,
                ..Default::default()
            };
            let model = RoleModel::fit(&star4(), &cfg).unwrap();
            assert_eq!(model.rank, 2);
            let leaf = model.assignment[1];
            assert!(model.assignment[1..].iter().all(|&r| r == leaf));
            assert_ne!(model.assignment[0], leaf, "seed {seed}");
            assert!(model.basis.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn regular_graph_single_role() {
        let model = RoleModel::fit(&triangle(), &RoleConfig::default()).unwrap();
        assert_eq!(model.assignment, vec![0, 0, 0]);
        assert_eq!(model.rank, 1);
    }

    #[test]
    fn default_uses_six_roles() {
        let cfg = RoleConfig::default();
        assert_eq!(cfg.role_count, 6);
        // a path of 12 has enough distinct positions for several columns
        let pairs: Vec<_> = (0..11).map(|i| (i, i + 1)).collect();
        let g = Graph::from_edges(12, &pairs).unwrap();
        let model = RoleModel::fit(&g, &cfg).unwrap();
        assert_eq!(model.requested_roles, 6);
        assert!(model.rank <= 6);
        assert!(model.assignment.iter().all(|&r| r < model.rank));
        // mirror-symmetric positions look identical
        for i in 0..6 {
            assert_eq!(model.assignment[i], model.assignment[11 - i]);
        }
    }

    #[test]
    fn feature_dump() {
        let model = RoleModel::fit(
            &star4(),
            &RoleConfig {
                role_count: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        model.write_features(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node,degree,egonet_boundary"));
        assert_eq!(lines.next(), Some("0,1,0"));
        assert_eq!(text.lines().count(), 6);
    }
}
