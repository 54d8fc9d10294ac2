//! Structural noise for graphs.
//!
//! Perturbs an undirected graph's edge set at three granularities (local,
//! by degree rank; community, by Louvain partition; global, by RolX roles)
//! with delete, flip and add operations, and measures how a two-layer GCN
//! copes with the result.
//!
//! ```
//! use structnoise::graph::Graph;
//! use structnoise::noise::{perturb, EdgeOp, NoiseLevel, NoiseSpec};
//!
//! let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
//! let spec = NoiseSpec::new(NoiseLevel::Local, EdgeOp::Delete, 0.25, 7);
//! let (noisy, report) = perturb(&g, &spec, None).unwrap();
//! assert_eq!(noisy.edge_count() + report.deleted.len(), g.edge_count());
//! ```

pub mod community;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod io;
pub mod noise;
pub mod roles;
pub mod runner;
pub mod sampling;
pub mod sparse;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, NodeId};
