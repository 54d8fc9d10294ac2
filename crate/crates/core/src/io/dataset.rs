//! Citation-network datasets in the `<name>.content` / `<name>.cites` layout.
//!
//! Content rows are `id attr_1 … attr_d label`; citation rows are `id id`.
//! String ids and label names both map to dense integers in lexicographic
//! order. Citation rows naming an unknown paper or citing themselves are
//! dropped and counted, as are repeated citations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};
use crate::sampling::seeded_rng;
use crate::sparse::CsrMatrix;

/// Disjoint train / validation / test node sets, each sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DataSplit {
    pub train: Vec<NodeId>,
    pub validation: Vec<NodeId>,
    pub test: Vec<NodeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitPart {
    Train,
    Validation,
    Test,
}

impl DataSplit {
    pub fn part(&self, which: SplitPart) -> &[NodeId] {
        match which {
            SplitPart::Train => &self.train,
            SplitPart::Validation => &self.validation,
            SplitPart::Test => &self.test,
        }
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        let mut seen = vec![false; node_count];
        for &v in self.train.iter().chain(&self.validation).chain(&self.test) {
            if v >= node_count {
                return Err(Error::input(format!("split node {v} out of range")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::input(format!("node {v} appears in more than one split part")));
            }
        }
        Ok(())
    }
}

/// Fixed semi-supervised split: `per_class_train` labelled nodes per class,
/// then `validation` and `test` nodes from the rest, all drawn from one
/// seeded permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitProtocol {
    pub per_class_train: usize,
    pub validation: usize,
    pub test: usize,
    pub seed: u64,
}

impl Default for SplitProtocol {
    fn default() -> Self {
        SplitProtocol {
            per_class_train: 20,
            validation: 500,
            test: 1000,
            seed: 0,
        }
    }
}

impl SplitProtocol {
    pub fn apply(&self, labels: &[usize], num_classes: usize) -> DataSplit {
        let mut order: Vec<NodeId> = (0..labels.len()).collect();
        order.shuffle(&mut seeded_rng(self.seed));
        let mut per_class = vec![0usize; num_classes];
        let mut train = Vec::new();
        let mut rest = Vec::new();
        for v in order {
            let c = labels[v];
            if per_class[c] < self.per_class_train {
                per_class[c] += 1;
                train.push(v);
            } else {
                rest.push(v);
            }
        }
        let val_end = self.validation.min(rest.len());
        let test_end = (val_end + self.test).min(rest.len());
        let mut validation = rest[..val_end].to_vec();
        let mut test = rest[val_end..test_end].to_vec();
        train.sort_unstable();
        validation.sort_unstable();
        test.sort_unstable();
        DataSplit {
            train,
            validation,
            test,
        }
    }
}

/// What the loader dropped or collapsed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Non-blank rows of the citation file.
    pub citation_rows: usize,
    pub dropped_unknown: usize,
    pub dropped_self_loops: usize,
    /// Rows repeating an earlier citation in either direction.
    pub duplicate_edges: usize,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    /// `node_count × feature_dim`, nonnegative.
    pub features: CsrMatrix,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    /// Original string id of each dense node id.
    pub node_ids: Vec<String>,
    pub split: DataSplit,
    pub report: LoadReport,
}

impl Dataset {
    /// Assembles a dataset from in-memory parts, checking shape invariants.
    pub fn from_parts(
        name: impl Into<String>,
        graph: Graph,
        features: CsrMatrix,
        labels: Vec<usize>,
        split: DataSplit,
    ) -> Result<Self> {
        let n = graph.node_count();
        if features.rows() != n || labels.len() != n {
            return Err(Error::input(format!(
                "{} feature rows and {} labels for {n} nodes",
                features.rows(),
                labels.len()
            )));
        }
        if features.values().iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::input("features must be nonnegative"));
        }
        split.validate(n)?;
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        Ok(Dataset {
            name: name.into(),
            graph,
            features,
            labels,
            class_names: (0..num_classes).map(|c| c.to_string()).collect(),
            node_ids: (0..n).map(|v| v.to_string()).collect(),
            split,
            report: LoadReport::default(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn isolated_nodes(&self) -> usize {
        (0..self.node_count()).filter(|&v| self.graph.degree(v) == 0).count()
    }
}

fn locate(dir: &Path, name: &str, ext: &str) -> Result<PathBuf> {
    let stem = name.to_lowercase();
    let candidates = [
        dir.join(format!("{stem}.{ext}")),
        dir.join(&stem).join(format!("{stem}.{ext}")),
    ];
    candidates
        .iter()
        .find(|p| p.is_file())
        .cloned()
        .ok_or_else(|| Error::input(format!("no {stem}.{ext} under {}", dir.display())))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

struct ContentRow {
    id: String,
    attrs: Vec<(usize, f64)>,
    label: String,
}

fn parse_content(path: &Path, text: &str) -> Result<(Vec<ContentRow>, usize)> {
    let mut rows = Vec::new();
    let mut dim: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() < 3 {
            return Err(parse_err(path, lineno, "expected 'id attr… label'"));
        }
        let d = tokens.len() - 2;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(parse_err(path, lineno, format!("{d} attributes, expected {expected}")));
            }
            Some(_) => {}
        }
        let mut attrs = Vec::new();
        for (j, tok) in tokens[1..=d].iter().enumerate() {
            let x: f64 = tok
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("attribute {} is not a number: '{tok}'", j + 1)))?;
            if !x.is_finite() || x < 0.0 {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("attribute {} must be nonnegative", j + 1),
                ));
            }
            if x != 0.0 {
                attrs.push((j, x));
            }
        }
        rows.push(ContentRow {
            id: tokens[0].to_string(),
            attrs,
            label: tokens[d + 1].to_string(),
        });
    }
    let dim = dim.ok_or_else(|| Error::input(format!("{} has no rows", path.display())))?;
    Ok((rows, dim))
}

/// Loads `name` from `dir` with the standard 20-per-class / 500 / 1000 split.
pub fn load_dataset(dir: &Path, name: &str) -> Result<Dataset> {
    load_dataset_with(dir, name, &SplitProtocol::default())
}

pub fn load_dataset_with(dir: &Path, name: &str, protocol: &SplitProtocol) -> Result<Dataset> {
    let content_path = locate(dir, name, "content")?;
    let cites_path = locate(dir, name, "cites")?;
    let (rows, dim) = parse_content(&content_path, &read(&content_path)?)?;

    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (lineno, row) in rows.iter().enumerate() {
        if index.insert(row.id.as_str(), 0).is_some() {
            return Err(parse_err(
                &content_path,
                lineno + 1,
                format!("duplicate node id '{}'", row.id),
            ));
        }
    }
    for (dense, slot) in index.values_mut().enumerate() {
        *slot = dense;
    }
    let class_names: Vec<String> = rows
        .iter()
        .map(|r| r.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let n = rows.len();
    let mut feature_rows = vec![Vec::new(); n];
    let mut labels = vec![0usize; n];
    let mut node_ids = vec![String::new(); n];
    for row in &rows {
        let v = index[row.id.as_str()];
        feature_rows[v] = row.attrs.clone();
        labels[v] = class_names.binary_search(&row.label).expect("label collected above");
        node_ids[v] = row.id.clone();
    }

    let mut report = LoadReport::default();
    let mut graph = Graph::empty(n);
    for (i, line) in read(&cites_path)?.lines().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 2 {
            return Err(parse_err(&cites_path, i + 1, "expected 'id id'"));
        }
        report.citation_rows += 1;
        let (Some(&a), Some(&b)) = (index.get(tokens[0]), index.get(tokens[1])) else {
            report.dropped_unknown += 1;
            continue;
        };
        if a == b {
            report.dropped_self_loops += 1;
        } else if !graph.insert_edge(Edge::new(a, b)) {
            report.duplicate_edges += 1;
        }
    }
    if report.dropped_unknown > 0 {
        log::warn!(
            "{}: dropped {} citations with unknown endpoints",
            cites_path.display(),
            report.dropped_unknown
        );
    }

    let split = protocol.apply(&labels, class_names.len());
    Ok(Dataset {
        name: name.to_string(),
        graph,
        features: CsrMatrix::from_rows(dim, feature_rows),
        labels,
        class_names,
        node_ids,
        split,
        report,
    })
}
