//! Line-oriented `key=value` sweep descriptions.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gcn::{GcnHyper, Variant};
use crate::noise::{EdgeOp, NoiseLevel};

/// The default ratio grid: 0.05 to 0.80 in steps of 0.05.
pub fn default_ratios() -> Vec<f64> {
    (1..=16).map(|i| i as f64 / 20.0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub datasets: Vec<String>,
    pub data_dir: PathBuf,
    pub levels: Vec<NoiseLevel>,
    pub ops: Vec<EdgeOp>,
    pub ratios: Vec<f64>,
    pub repetitions: usize,
    pub models: Vec<Variant>,
    pub base_seed: u64,
    pub threshold: Option<usize>,
    pub resolution: Option<f64>,
    pub role_count: Option<usize>,
    pub hyper: GcnHyper,
    /// Also write each perturbed graph and its manifest.
    pub write_graphs: bool,
    /// Put measured wall times in the results file. Off by default so the
    /// file stays byte-identical across runs; times always go to
    /// `timings.csv`.
    pub record_wall_time: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            datasets: Vec::new(),
            data_dir: PathBuf::from("data"),
            levels: NoiseLevel::ALL.to_vec(),
            ops: EdgeOp::ALL.to_vec(),
            ratios: default_ratios(),
            repetitions: 6,
            models: vec![Variant::Plain, Variant::DropEdge],
            base_seed: 0,
            threshold: None,
            resolution: None,
            role_count: None,
            hyper: GcnHyper::default(),
            write_graphs: false,
            record_wall_time: false,
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse '{value}'")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(format!("{key}: expected true or false, got '{value}'"))),
    }
}

impl SweepConfig {
    /// Parses a config. Blank lines and `#` comments are ignored; unset keys
    /// keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::config(format!("line {}: duplicate key '{key}'", i + 1)));
            }
            match key {
                "datasets" => cfg.datasets = list(value).map(str::to_string).collect(),
                "data_dir" => cfg.data_dir = PathBuf::from(value),
                "levels" => cfg.levels = list(value).map(str::parse).collect::<Result<_>>()?,
                "ops" => cfg.ops = list(value).map(str::parse).collect::<Result<_>>()?,
                "ratios" => cfg.ratios = list(value).map(|v| scalar(key, v)).collect::<Result<_>>()?,
                "repetitions" => cfg.repetitions = scalar(key, value)?,
                "models" => cfg.models = list(value).map(Variant::from_model_name).collect::<Result<_>>()?,
                "base_seed" => cfg.base_seed = scalar(key, value)?,
                "threshold" => cfg.threshold = Some(scalar(key, value)?),
                "resolution" => cfg.resolution = Some(scalar(key, value)?),
                "role_count" => cfg.role_count = Some(scalar(key, value)?),
                "hidden" => cfg.hyper.hidden = scalar(key, value)?,
                "learning_rate" => cfg.hyper.learning_rate = scalar(key, value)?,
                "weight_decay" => cfg.hyper.weight_decay = scalar(key, value)?,
                "dropout" => cfg.hyper.dropout = scalar(key, value)?,
                "epochs" => cfg.hyper.epochs = scalar(key, value)?,
                "patience" => cfg.hyper.patience = scalar(key, value)?,
                "drop_edge_keep" => cfg.hyper.drop_edge_keep = scalar(key, value)?,
                "write_graphs" => cfg.write_graphs = boolean(key, value)?,
                "record_wall_time" => cfg.record_wall_time = boolean(key, value)?,
                other => return Err(Error::config(format!("line {}: unknown key '{other}'", i + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a config file. A relative `data_dir` is taken
    /// relative to the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        if cfg.data_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.data_dir = parent.join(&cfg.data_dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("datasets", self.datasets.is_empty()),
            ("levels", self.levels.is_empty()),
            ("ops", self.ops.is_empty()),
            ("ratios", self.ratios.is_empty()),
            ("models", self.models.is_empty()),
        ];
        if let Some((key, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::config(format!("{key} must not be empty")));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be at least 1"));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::config(format!("ratio {r} is outside (0, 1]")));
        }
        if self.role_count.is_some_and(|r| r < 2) {
            return Err(Error::config("role_count must be at least 2"));
        }
        if self.resolution.is_some_and(|r| !(r.is_finite() && r > 0.0)) {
            return Err(Error::config("resolution must be positive"));
        }
        let names: BTreeSet<_> = self.datasets.iter().map(|d| d.to_lowercase()).collect();
        let levels: BTreeSet<_> = self.levels.iter().collect();
        let ops: BTreeSet<_> = self.ops.iter().collect();
        let models: BTreeSet<_> = self.models.iter().map(|m| m.model_name()).collect();
        let ratios: BTreeSet<_> = self.ratios.iter().map(|r| r.to_bits()).collect();
        if names.len() != self.datasets.len()
            || levels.len() != self.levels.len()
            || ops.len() != self.ops.len()
            || models.len() != self.models.len()
            || ratios.len() != self.ratios.len()
        {
            return Err(Error::config("list entries must be distinct"));
        }
        self.hyper.validate()
    }

    /// Number of records a complete sweep produces.
    pub fn cell_count(&self) -> usize {
        self.datasets.len()
            * self.levels.len()
            * self.ops.len()
            * self.ratios.len()
            * self.repetitions
            * self.models.len()
    }
}
