//! Perturbation manifests: `key=value` lines in a fixed order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, PerturbationReport};

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn manifest_text(spec: &NoiseSpec, report: &PerturbationReport, graph_checksum: &str) -> String {
    let fields: [(&str, String); 13] = [
        ("level", spec.level.to_string()),
        ("operation", spec.operation.to_string()),
        ("ratio", spec.ratio.to_string()),
        ("seed", spec.seed.to_string()),
        ("threshold_override", opt(spec.threshold_override)),
        ("community_resolution", opt(spec.community_resolution)),
        ("role_count", spec.role_count().to_string()),
        ("threshold", opt(report.threshold)),
        ("target_count", report.targets.len().to_string()),
        ("deleted_count", report.deleted.len().to_string()),
        ("added_count", report.added.len().to_string()),
        ("skipped_pairs", report.skipped_pairs.to_string()),
        ("graph_checksum", graph_checksum.to_string()),
    ];
    fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn write_manifest(spec: &NoiseSpec, report: &PerturbationReport, graph_checksum: &str, path: &Path) -> Result<()> {
    fs::write(path, manifest_text(spec, report, graph_checksum)).map_err(|e| Error::io(path, e))
}

/// Parses `key=value` lines back into ordered pairs.
pub fn parse_key_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
