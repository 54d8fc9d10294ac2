//! Structural noise: local (degree-ranked), community (Louvain classes) and
//! global (role classes) perturbations, each with delete, flip and add
//! operations.
//!
//! Every generator is a pure function of the clean graph and a [`NoiseSpec`].
//! It never mutates its input, never adds an edge of the original graph, and
//! under flip keeps the edge count exactly.

use std::fmt;
use std::str::FromStr;

use crate::community::louvain_with_resolution;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};
use crate::roles::{RoleConfig, RoleModel};

pub mod community;
pub mod global;
pub mod local;

mod classes;

pub use community::{classify_edges, community_add, community_delete, community_flip};
pub use global::{classify_edges_by_role, global_add, global_delete, global_flip};
pub use local::{local_add, local_delete, local_flip, select_targets};

pub const DEFAULT_ROLE_COUNT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseLevel {
    Local,
    Community,
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeOp {
    Delete,
    Flip,
    Add,
}

impl NoiseLevel {
    pub const ALL: [NoiseLevel; 3] = [NoiseLevel::Local, NoiseLevel::Community, NoiseLevel::Global];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseLevel::Local => "local",
            NoiseLevel::Community => "community",
            NoiseLevel::Global => "global",
        }
    }
}

impl EdgeOp {
    pub const ALL: [EdgeOp; 3] = [EdgeOp::Delete, EdgeOp::Flip, EdgeOp::Add];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeOp::Delete => "delete",
            EdgeOp::Flip => "flip",
            EdgeOp::Add => "add",
        }
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for EdgeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "local" => Ok(NoiseLevel::Local),
            "community" => Ok(NoiseLevel::Community),
            "global" => Ok(NoiseLevel::Global),
            other => Err(Error::config(format!("unknown noise level '{other}'"))),
        }
    }
}

impl FromStr for EdgeOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "delete" => Ok(EdgeOp::Delete),
            "flip" => Ok(EdgeOp::Flip),
            "add" => Ok(EdgeOp::Add),
            other => Err(Error::config(format!("unknown edge operation '{other}'"))),
        }
    }
}

/// Everything needed to reproduce one perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub level: NoiseLevel,
    pub operation: EdgeOp,
    /// Fraction in (0, 1]: of nodes for local noise, of each edge class otherwise.
    pub ratio: f64,
    pub seed: u64,
    /// Local noise only; defaults to the degree mode of the clean graph.
    pub threshold_override: Option<usize>,
    /// Louvain resolution; 1.0 when unset.
    pub community_resolution: Option<f64>,
    /// Number of roles for global noise; [`DEFAULT_ROLE_COUNT`] when unset.
    pub role_count: Option<usize>,
}

impl NoiseSpec {
    pub fn new(level: NoiseLevel, operation: EdgeOp, ratio: f64, seed: u64) -> Self {
        NoiseSpec {
            level,
            operation,
            ratio,
            seed,
            threshold_override: None,
            community_resolution: None,
            role_count: None,
        }
    }

    pub fn with_threshold(mut self, t: usize) -> Self {
        self.threshold_override = Some(t);
        self
    }

    pub fn with_role_count(mut self, r: usize) -> Self {
        self.role_count = Some(r);
        self
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.community_resolution = Some(resolution);
        self
    }

    pub fn role_count(&self) -> usize {
        self.role_count.unwrap_or(DEFAULT_ROLE_COUNT)
    }

    pub fn resolution(&self) -> f64 {
        self.community_resolution.unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::input(format!("ratio {} is outside (0, 1]", self.ratio)));
        }
        if let Some(r) = self.role_count {
            if r < 2 {
                return Err(Error::input(format!("role_count {r} must be at least 2")));
            }
        }
        if let Some(res) = self.community_resolution {
            if !(res.is_finite() && res > 0.0) {
                return Err(Error::input(format!("community resolution {res} must be positive")));
            }
        }
        Ok(())
    }
}

/// What a perturbation did to the clean graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PerturbationReport {
    /// Original edges removed, in the order they were removed.
    pub deleted: Vec<Edge>,
    /// New edges, none of which exist in the original graph.
    pub added: Vec<Edge>,
    /// Deletions rolled back or additions abandoned for lack of a valid endpoint.
    pub skipped_pairs: usize,
    /// Local noise only: the processed nodes in processing order.
    pub targets: Vec<NodeId>,
    /// Local noise only: the degree threshold in effect.
    pub threshold: Option<usize>,
}

/// Node labels that community and global noise classify edges by.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassFrame {
    Communities(Vec<usize>),
    Roles(Vec<usize>),
}

impl ClassFrame {
    pub fn labels(&self) -> &[usize] {
        match self {
            ClassFrame::Communities(l) | ClassFrame::Roles(l) => l,
        }
    }
}

/// Computes the frame a spec's level needs on the clean graph: a Louvain
/// partition for community noise, a role assignment for global noise, nothing
/// for local noise.
pub fn derive_frame(g: &Graph, spec: &NoiseSpec, roles: &RoleConfig) -> Result<Option<ClassFrame>> {
    match spec.level {
        NoiseLevel::Local => Ok(None),
        NoiseLevel::Community => {
            let p = louvain_with_resolution(g, spec.seed, spec.resolution())?;
            Ok(Some(ClassFrame::Communities(p.assignment)))
        }
        NoiseLevel::Global => {
            let cfg = RoleConfig {
                role_count: spec.role_count(),
                seed: spec.seed,
                ..roles.clone()
            };
            let model = RoleModel::fit(g, &cfg)?;
            Ok(Some(ClassFrame::Roles(model.assignment)))
        }
    }
}

/// Applies `spec` to the clean graph `g`. Community and global levels need
/// the matching [`ClassFrame`].
pub fn perturb(g: &Graph, spec: &NoiseSpec, frame: Option<&ClassFrame>) -> Result<(Graph, PerturbationReport)> {
    spec.validate()?;
    let labels = |expected: &str| -> Result<&[usize]> {
        let l = match (spec.level, frame) {
            (NoiseLevel::Community, Some(f @ ClassFrame::Communities(_)))
            | (NoiseLevel::Global, Some(f @ ClassFrame::Roles(_))) => f.labels(),
            _ => return Err(Error::input(format!("{} noise needs a {expected} frame", spec.level))),
        };
        if l.len() != g.node_count() {
            return Err(Error::input(format!(
                "{expected} frame covers {} nodes, graph has {}",
                l.len(),
                g.node_count()
            )));
        }
        Ok(l)
    };
    match (spec.level, spec.operation) {
        (NoiseLevel::Local, EdgeOp::Delete) => local_delete(g, spec),
        (NoiseLevel::Local, EdgeOp::Flip) => local_flip(g, spec),
        (NoiseLevel::Local, EdgeOp::Add) => local_add(g, spec),
        (NoiseLevel::Community, op) => {
            let p = labels("community")?;
            match op {
                EdgeOp::Delete => Ok(community_delete(g, p, spec)),
                EdgeOp::Flip => Ok(community_flip(g, p, spec)),
                EdgeOp::Add => Ok(community_add(g, p, spec)),
            }
        }
        (NoiseLevel::Global, op) => {
            let r = labels("role")?;
            match op {
                EdgeOp::Delete => Ok(global_delete(g, r, spec)),
                EdgeOp::Flip => Ok(global_flip(g, r, spec)),
                EdgeOp::Add => Ok(global_add(g, r, spec)),
            }
        }
    }
}
