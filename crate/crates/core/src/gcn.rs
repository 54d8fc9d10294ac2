//! Two-layer graph convolutional classifier, `softmax(Â · relu(Â·X·W1) · W2)`,
//! with an optional DropEdge training mode.
//!
//! Everything runs on one thread with fixed summation order, so a seed
//! determines the trained weights and the reported accuracy exactly.

use ndarray::{Array2, Zip};
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};
use crate::io::{Dataset, SplitPart};
use crate::sampling::{ceil_count, seeded_rng, SeededRng};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Plain,
    /// Re-normalizes the adjacency each epoch from a uniform edge subsample.
    DropEdge,
}

impl Variant {
    pub fn model_name(self) -> &'static str {
        match self {
            Variant::Plain => "gcn",
            Variant::DropEdge => "gcn-dropedge",
        }
    }

    pub fn from_model_name(name: &str) -> Result<Self> {
        match name.trim() {
            "gcn" => Ok(Variant::Plain),
            "gcn-dropedge" => Ok(Variant::DropEdge),
            other => Err(Error::config(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcnHyper {
    pub hidden: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Dropout probability on hidden activations, in [0, 1).
    pub dropout: f64,
    pub epochs: usize,
    pub patience: usize,
    /// Fraction of edges kept per epoch under DropEdge, in (0, 1].
    pub drop_edge_keep: f64,
    /// Row-normalize input features before training and evaluation.
    pub normalize_features: bool,
}

impl Default for GcnHyper {
    fn default() -> Self {
        GcnHyper {
            hidden: 16,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            dropout: 0.5,
            epochs: 200,
            patience: 10,
            drop_edge_keep: 0.8,
            normalize_features: true,
        }
    }
}

impl GcnHyper {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::config("hidden size must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.drop_edge_keep > 0.0 && self.drop_edge_keep <= 1.0) {
            return Err(Error::config(format!(
                "drop_edge_keep {} outside (0, 1]",
                self.drop_edge_keep
            )));
        }
        if self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
            || self.weight_decay.is_nan()
            || self.weight_decay < 0.0
        {
            return Err(Error::config(
                "learning rate must be positive and weight decay nonnegative",
            ));
        }
        Ok(())
    }
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` with `D̃` the degrees of `A + I`.
pub fn normalize_adjacency(g: &Graph) -> CsrMatrix {
    normalize_edges(g.node_count(), g.edges())
}

fn normalize_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> CsrMatrix {
    let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for e in edges {
        rows[e.u()].push(e.v());
        rows[e.v()].push(e.u());
    }
    let scale: Vec<f64> = rows.iter().map(|r| 1.0 / (r.len() as f64).sqrt()).collect();
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut cols)| {
            cols.sort_unstable();
            cols.into_iter().map(|j| (j, scale[i] * scale[j])).collect()
        })
        .collect();
    CsrMatrix::from_rows(n, rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcnModel {
    /// `feature_dim × hidden`.
    pub w1: Array2<f64>,
    /// `hidden × num_classes`.
    pub w2: Array2<f64>,
    pub hyper: GcnHyper,
}

struct Forward {
    pre: Array2<f64>,
    hidden: Array2<f64>,
    logits: Array2<f64>,
}

fn glorot(rows: usize, cols: usize, rng: &mut SeededRng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}

pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let s = row.sum();
        row.mapv_inplace(|x| x / s);
    }
    out
}

fn argmax_rows(m: &Array2<f64>) -> Vec<usize> {
    m.rows()
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

/// Fraction of `nodes` whose prediction equals the label; 0 for no nodes.
pub fn accuracy(predictions: &[usize], labels: &[usize], nodes: &[NodeId]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let correct = nodes.iter().filter(|&&v| predictions[v] == labels[v]).count();
    correct as f64 / nodes.len() as f64
}

/// Mean cross-entropy over `nodes`.
fn cross_entropy(probs: &Array2<f64>, labels: &[usize], nodes: &[NodeId]) -> f64 {
    let total: f64 = nodes.iter().map(|&v| -(probs[[v, labels[v]]].max(1e-300)).ln()).sum();
    total / nodes.len().max(1) as f64
}

impl GcnModel {
    /// Glorot-uniform initialization.
    pub fn new(feature_dim: usize, num_classes: usize, hyper: GcnHyper, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        Self::init_with(feature_dim, num_classes, hyper, &mut rng)
    }

    fn init_with(feature_dim: usize, num_classes: usize, hyper: GcnHyper, rng: &mut SeededRng) -> Self {
        GcnModel {
            w1: glorot(feature_dim, hyper.hidden, rng),
            w2: glorot(hyper.hidden, num_classes, rng),
            hyper,
        }
    }

    fn forward(&self, adj: &CsrMatrix, x: &CsrMatrix, dropout_mask: Option<&Array2<f64>>) -> Forward {
        let pre = adj.dot(&x.dot(&self.w1));
        let mut hidden = pre.mapv(|z| z.max(0.0));
        if let Some(mask) = dropout_mask {
            hidden *= mask;
        }
        let logits = adj.dot(&hidden.dot(&self.w2));
        Forward { pre, hidden, logits }
    }

    /// Class probabilities for every node; no dropout.
    pub fn predict_proba(&self, adj: &CsrMatrix, x: &CsrMatrix) -> Array2<f64> {
        softmax_rows(&self.forward(adj, x, None).logits)
    }

    pub fn predict(&self, adj: &CsrMatrix, x: &CsrMatrix) -> Vec<usize> {
        argmax_rows(&self.forward(adj, x, None).logits)
    }

    /// Training loss `CE(train) + (wd/2)·‖W1‖²` and its gradients with respect
    /// to `W1` and `W2`. `dropout_mask` multiplies the hidden activations
    /// (entries 0 or `1/(1-p)`).
    pub fn loss_and_gradients(
        &self,
        adj: &CsrMatrix,
        x: &CsrMatrix,
        labels: &[usize],
        train: &[NodeId],
        dropout_mask: Option<&Array2<f64>>,
    ) -> (f64, Array2<f64>, Array2<f64>) {
        let fwd = self.forward(adj, x, dropout_mask);
        let probs = softmax_rows(&fwd.logits);
        let wd = self.hyper.weight_decay;
        let loss = cross_entropy(&probs, labels, train) + 0.5 * wd * self.w1.iter().map(|w| w * w).sum::<f64>();

        let mut d_logits = Array2::zeros(probs.dim());
        let inv = 1.0 / train.len().max(1) as f64;
        for &v in train {
            let mut row = d_logits.row_mut(v);
            row.assign(&probs.row(v));
            row[labels[v]] -= 1.0;
            row *= inv;
        }
        // logits = Â·(H·W2)
        let d_hw2 = adj.t_dot(&d_logits);
        let grad_w2 = fwd.hidden.t().dot(&d_hw2);
        let mut d_hidden = d_hw2.dot(&self.w2.t());
        if let Some(mask) = dropout_mask {
            d_hidden *= mask;
        }
        Zip::from(&mut d_hidden).and(&fwd.pre).for_each(|d, &z| {
            if z <= 0.0 {
                *d = 0.0;
            }
        });
        // pre = Â·(X·W1)
        let d_xw1 = adj.t_dot(&d_hidden);
        let mut grad_w1 = x.t_dot(&d_xw1);
        grad_w1.scaled_add(wd, &self.w1);
        (loss, grad_w1, grad_w2)
    }

    fn is_finite(&self) -> bool {
        self.w1.iter().chain(self.w2.iter()).all(|x| x.is_finite())
    }
}

struct Adam {
    m: Array2<f64>,
    v: Array2<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(shape: (usize, usize)) -> Self {
        Adam {
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
            t: 0,
        }
    }

    fn step(&mut self, param: &mut Array2<f64>, grad: &Array2<f64>, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        Zip::from(param)
            .and(&mut self.m)
            .and(&mut self.v)
            .and(grad)
            .for_each(|p, m, v, &g| {
                *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
                *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
            });
    }
}

fn prepared_features(dataset: &Dataset, hyper: &GcnHyper) -> CsrMatrix {
    if hyper.normalize_features {
        dataset.features.row_normalized()
    } else {
        dataset.features.clone()
    }
}

fn dropout_mask(shape: (usize, usize), p: f64, rng: &mut SeededRng) -> Array2<f64> {
    let keep_scale = 1.0 / (1.0 - p);
    Array2::from_shape_simple_fn(shape, || if rng.random::<f64>() < p { 0.0 } else { keep_scale })
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: GcnModel,
    pub test_accuracy: f64,
    pub best_validation_accuracy: f64,
    pub epochs_run: usize,
}

/// Trains on `dataset`'s labels and split over the (possibly perturbed)
/// graph `g` and reports test accuracy of the checkpoint with the best
/// validation accuracy (ties to lower validation loss). Training stops once
/// neither validation accuracy nor validation loss has reached a new best
/// for `patience` epochs. Without validation nodes it runs every epoch and
/// keeps the final weights.
pub fn train(dataset: &Dataset, g: &Graph, hyper: &GcnHyper, seed: u64, variant: Variant) -> Result<TrainOutcome> {
    hyper.validate()?;
    if g.node_count() != dataset.node_count() {
        return Err(Error::input(format!(
            "graph has {} nodes, dataset {} has {}",
            g.node_count(),
            dataset.name,
            dataset.node_count()
        )));
    }
    let x = prepared_features(dataset, hyper);
    let adj_full = normalize_adjacency(g);
    let edges = g.edge_list();
    let labels = &dataset.labels;
    let split = &dataset.split;

    let mut rng = seeded_rng(seed);
    let mut model = GcnModel::init_with(dataset.feature_dim(), dataset.num_classes(), hyper.clone(), &mut rng);
    let mut adam1 = Adam::new(model.w1.dim());
    let mut adam2 = Adam::new(model.w2.dim());

    let mut best = (model.clone(), f64::NEG_INFINITY, f64::INFINITY);
    // patience watches accuracy and loss separately
    let (mut top_acc, mut low_loss) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut stale = 0;
    let mut epochs_run = 0;
    for epoch in 0..hyper.epochs {
        epochs_run = epoch + 1;
        let sampled;
        let adj = match variant {
            Variant::Plain => &adj_full,
            Variant::DropEdge => {
                let keep = ceil_count(hyper.drop_edge_keep, edges.len());
                let picked = index::sample(&mut rng, edges.len(), keep);
                sampled = normalize_edges(g.node_count(), picked.into_iter().map(|i| edges[i]));
                &sampled
            }
        };
        let mask = (hyper.dropout > 0.0).then(|| dropout_mask((g.node_count(), hyper.hidden), hyper.dropout, &mut rng));
        let (loss, grad_w1, grad_w2) = model.loss_and_gradients(adj, &x, labels, &split.train, mask.as_ref());
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        adam1.step(&mut model.w1, &grad_w1, hyper.learning_rate);
        adam2.step(&mut model.w2, &grad_w2, hyper.learning_rate);
        if !model.is_finite() {
            return Err(Error::Divergence { epoch, loss: f64::NAN });
        }

        if split.validation.is_empty() {
            continue;
        }
        let probs = model.predict_proba(&adj_full, &x);
        let val_acc = accuracy(&argmax_rows(&probs), labels, &split.validation);
        let val_loss = cross_entropy(&probs, labels, &split.validation);
        if val_acc > best.1 || (val_acc == best.1 && val_loss < best.2) {
            best = (model.clone(), val_acc, val_loss);
        }
        if val_acc >= top_acc || val_loss <= low_loss {
            top_acc = top_acc.max(val_acc);
            low_loss = low_loss.min(val_loss);
            stale = 0;
        } else {
            stale += 1;
            if stale >= hyper.patience {
                break;
            }
        }
    }

    let (model, best_val) = if split.validation.is_empty() {
        (model, 0.0)
    } else {
        (best.0, best.1)
    };
    let test_accuracy = accuracy(&model.predict(&adj_full, &x), labels, &split.test);
    Ok(TrainOutcome {
        model,
        test_accuracy,
        best_validation_accuracy: best_val,
        epochs_run,
    })
}

/// Accuracy of `model` on one split part over graph `g`.
pub fn evaluate(model: &GcnModel, dataset: &Dataset, g: &Graph, part: SplitPart) -> f64 {
    let x = prepared_features(dataset, &model.hyper);
    let adj = normalize_adjacency(g);
    accuracy(&model.predict(&adj, &x), &dataset.labels, dataset.split.part(part))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    use super::*;
    use crate::graph::fixtures::*;
    use crate::io::DataSplit;

    #[test]
    fn adjacency_examples() {
        assert_eq!(normalize_adjacency(&Graph::empty(1)).to_dense(), array![[1.0]]);
        let edge = normalize_adjacency(&Graph::from_edges(2, &[(0, 1)]).unwrap()).to_dense();
        assert!(edge.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        let k3 = normalize_adjacency(&triangle()).to_dense();
        for i in 0..3 {
            assert_abs_diff_eq!(k3.row(i).sum(), 1.0, epsilon = 1e-15);
            for j in 0..3 {
                assert_abs_diff_eq!(k3[[i, j]], 1.0 / 3.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_bounded() {
        let a = normalize_adjacency(&two_triangles_bridge()).to_dense();
        assert_eq!(a, a.t());
        assert!(a.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let p = softmax_rows(&array![[1.0, 2.0, 3.0], [1000.0, -1000.0, 0.0]]);
        for row in p.rows() {
            assert_abs_diff_eq!(row.sum(), 1.0, epsilon = 1e-12);
        }
    }

    /// Ten nodes, one-hot class features, edges only within a class.
    fn separable_toy() -> Dataset {
        let labels: Vec<usize> = (0..10).map(|v| v / 5).collect();
        let features = CsrMatrix::from_rows(2, labels.iter().map(|&c| vec![(c, 1.0)]).collect());
        let g = Graph::from_edges(10, &[(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7), (7, 8), (8, 9)]).unwrap();
        let split = DataSplit {
            train: (0..10).collect(),
            validation: vec![],
            test: vec![],
        };
        Dataset::from_parts("toy", g, features, labels, split).unwrap()
    }

    #[test]
    fn separable_toy_trains_to_perfect() {
        let ds = separable_toy();
        let hyper = GcnHyper {
            patience: usize::MAX,
            ..Default::default()
        };
        let out = train(&ds, &ds.graph, &hyper, 3, Variant::Plain).unwrap();
        assert!(out.epochs_run <= 200);
        assert_eq!(evaluate(&out.model, &ds, &ds.graph, SplitPart::Train), 1.0);
    }

    #[test]
    fn evaluate_fixed_predictors() {
        let mut ds = separable_toy();
        ds.graph = Graph::empty(10);
        ds.split = DataSplit {
            train: vec![],
            validation: vec![],
            test: (0..10).collect(),
        };
        let hyper = GcnHyper {
            hidden: 2,
            normalize_features: false,
            ..Default::default()
        };
        let perfect = GcnModel {
            w1: Array2::eye(2),
            w2: Array2::eye(2),
            hyper: hyper.clone(),
        };
        assert_eq!(evaluate(&perfect, &ds, &ds.graph, SplitPart::Test), 1.0);
        let constant = GcnModel {
            w1: Array2::eye(2),
            w2: array![[1.0, 0.0], [1.0, 0.0]],
            hyper,
        };
        let acc = evaluate(&constant, &ds, &ds.graph, SplitPart::Test);
        assert_eq!(acc, 0.5);
        assert_eq!(acc, evaluate(&constant, &ds, &ds.graph, SplitPart::Test));
    }

    #[test]
    fn training_is_deterministic() {
        let ds = separable_toy();
        for variant in [Variant::Plain, Variant::DropEdge] {
            let a = train(&ds, &ds.graph, &GcnHyper::default(), 11, variant).unwrap();
            let b = train(&ds, &ds.graph, &GcnHyper::default(), 11, variant).unwrap();
            assert_eq!(a.model, b.model);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let ds = separable_toy();
        let hyper = GcnHyper {
            learning_rate: f64::INFINITY,
            ..Default::default()
        };
        assert!(matches!(
            train(&ds, &ds.graph, &hyper, 0, Variant::Plain),
            Err(Error::Divergence { epoch: 0, .. })
        ));
    }

    #[test]
    fn incompatible_graph_rejected() {
        let ds = separable_toy();
        assert!(train(&ds, &Graph::empty(3), &GcnHyper::default(), 0, Variant::Plain).is_err());
    }

    #[test]
    fn model_names() {
        assert_eq!(Variant::from_model_name("gcn-dropedge").unwrap(), Variant::DropEdge);
        assert!(Variant::from_model_name("sage").is_err());
    }
}
