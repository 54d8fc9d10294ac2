//! Dataset loading and serialization of perturbed graphs.

pub mod dataset;
pub mod edgelist;
pub mod manifest;

pub use dataset::{load_dataset, load_dataset_with, DataSplit, Dataset, LoadReport, SplitPart, SplitProtocol};
pub use edgelist::{checksum, edge_list_text, read_edge_list, write_edge_list};
pub use manifest::{manifest_text, parse_key_values, write_manifest};
