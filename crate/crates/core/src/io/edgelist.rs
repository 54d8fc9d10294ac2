//! Canonical edge-list files: one `u v` line per edge, `u < v`, sorted.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{from_edge_list, Graph, NodeId};

/// Hex SHA-256 of `bytes`.
pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn edge_list_text(g: &Graph) -> String {
    let mut out = String::with_capacity(g.edge_count() * 12);
    for e in g.edges() {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Writes the canonical edge list and returns its checksum.
pub fn write_edge_list(g: &Graph, path: &Path) -> Result<String> {
    let text = edge_list_text(g);
    fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    Ok(checksum(text.as_bytes()))
}

/// Parses an edge list. With `node_count = None` the graph spans ids up to
/// the largest one mentioned.
pub fn read_edge_list(path: &Path, node_count: Option<usize>) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(path, &text, node_count)
}

pub(crate) fn parse_edge_list(path: &Path, text: &str, node_count: Option<usize>) -> Result<Graph> {
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let parsed = match tokens.as_slice() {
            [a, b] => a.parse().ok().zip(b.parse().ok()),
            _ => None,
        };
        let pair = parsed.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("expected two node ids, got '{line}'"),
        })?;
        pairs.push(pair);
    }
    let n = node_count.unwrap_or_else(|| pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
    from_edge_list(&pairs, n).map(|(g, _)| g)
}
