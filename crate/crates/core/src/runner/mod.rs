//! Sweep orchestration: every (dataset, level, op, ratio, repetition, model)
//! cell perturbs the clean graph, trains a classifier on the result and
//! leaves a record file behind, so an interrupted sweep resumes where it
//! stopped.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use log::{debug, info};
use sha2::{Digest, Sha256};

use crate::community::louvain_with_resolution;
use crate::error::{Error, Result};
use crate::gcn::{train, Variant};
use crate::io::{checksum, edge_list_text, load_dataset, parse_key_values, write_manifest, Dataset};
use crate::noise::{perturb, ClassFrame, EdgeOp, NoiseLevel, NoiseSpec};
use crate::roles::{RoleConfig, RoleModel};

pub mod config;

pub use config::{default_ratios, SweepConfig};

pub const RESULTS_HEADER: &str = "dataset,model,level,op,ratio,repetition,seed,accuracy,wall_time_ms";

/// Seed of one noise cell: the first eight bytes (little-endian) of the
/// SHA-256 of its coordinates. The ratio enters by value, so running a
/// subset of the grid reproduces the same cells.
pub fn cell_seed(base_seed: u64, level: NoiseLevel, op: EdgeOp, ratio: f64, repetition: usize) -> u64 {
    let key = format!("{base_seed}|{level}|{op}|{ratio}|{repetition}");
    let digest = Sha256::digest(key.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub model: String,
    pub spec: NoiseSpec,
    pub repetition: usize,
    pub accuracy: f64,
    pub wall_time_ms: u64,
    /// Checksum of the perturbed edge list the model was trained on.
    pub graph_checksum: String,
}

impl ExperimentRecord {
    fn sort_key(&self) -> (String, String, NoiseLevel, EdgeOp, u64, usize) {
        // ratios are positive, so their bit patterns sort numerically
        (
            self.dataset.clone(),
            self.model.clone(),
            self.spec.level,
            self.spec.operation,
            self.spec.ratio.to_bits(),
            self.repetition,
        )
    }
}

/// Sorts records into canonical order.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by_key(ExperimentRecord::sort_key);
}

/// Writes records as comma-separated text in canonical order.
pub fn emit_results(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in &sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.model,
            r.spec.level,
            r.spec.operation,
            r.spec.ratio,
            r.repetition,
            r.spec.seed,
            r.accuracy,
            r.wall_time_ms
        )
        .unwrap();
    }
    write_atomic(path, &out)
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Outcome of [`run_sweep`].
#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub records: Vec<ExperimentRecord>,
    /// Cells trained in this run.
    pub computed: usize,
    /// Cells taken from existing record files.
    pub reused: usize,
}

/// One perturbation, shared by every model trained on it.
#[derive(Clone, Debug)]
struct NoiseCell {
    dataset: usize,
    spec: NoiseSpec,
    repetition: usize,
}

impl NoiseCell {
    fn stem(&self) -> String {
        format!(
            "{}-{}-{}-r{}",
            self.spec.level, self.spec.operation, self.spec.ratio, self.repetition
        )
    }
}

struct Layout {
    root: PathBuf,
}

impl Layout {
    fn dataset_dir(&self, kind: &str, dataset: &str) -> PathBuf {
        self.root.join(kind).join(dataset)
    }

    fn record_path(&self, dataset: &str, cell: &NoiseCell, model: Variant) -> PathBuf {
        self.dataset_dir("cells", dataset)
            .join(format!("{}-{}.rec", cell.stem(), model.model_name()))
    }
}

/// Fingerprint of everything that determines a cell's result.
fn cell_fingerprint(cfg: &SweepConfig, dataset: &str, cell: &NoiseCell, model: Variant) -> String {
    let text = format!(
        "{dataset}|{}|{:?}|{}|{:?}|{}|{:?}",
        model.model_name(),
        cell.spec,
        cell.repetition,
        cfg.hyper,
        cfg.base_seed,
        RoleConfig::default()
    );
    checksum(text.as_bytes())
}

fn record_text(fingerprint: &str, r: &ExperimentRecord) -> String {
    format!(
        "cell={fingerprint}\naccuracy={}\nwall_time_ms={}\ngraph_checksum={}\n",
        r.accuracy, r.wall_time_ms, r.graph_checksum
    )
}

/// Loads a finished cell if its record file exists and matches `fingerprint`.
fn load_record(path: &Path, fingerprint: &str, template: ExperimentRecord) -> Option<ExperimentRecord> {
    let text = fs::read_to_string(path).ok()?;
    let kv: BTreeMap<String, String> = parse_key_values(&text).into_iter().collect();
    if kv.get("cell")? != fingerprint {
        return None;
    }
    Some(ExperimentRecord {
        accuracy: kv.get("accuracy")?.parse().ok()?,
        wall_time_ms: kv.get("wall_time_ms")?.parse().ok()?,
        graph_checksum: kv.get("graph_checksum")?.clone(),
        ..template
    })
}

/// Per-dataset state computed once on the clean graph.
struct Prepared {
    dataset: Dataset,
    communities: Option<ClassFrame>,
    roles: Option<ClassFrame>,
}

impl Prepared {
    fn new(dataset: Dataset, cfg: &SweepConfig, need_communities: bool, need_roles: bool) -> Result<Self> {
        let communities = if need_communities {
            let p = louvain_with_resolution(&dataset.graph, cfg.base_seed, cfg.resolution.unwrap_or(1.0))?;
            info!("{}: {} communities", dataset.name, p.community_count);
            Some(ClassFrame::Communities(p.assignment))
        } else {
            None
        };
        let roles = if need_roles {
            let role_cfg = RoleConfig {
                seed: cfg.base_seed,
                role_count: cfg.role_count.unwrap_or(crate::noise::DEFAULT_ROLE_COUNT),
                ..RoleConfig::default()
            };
            let model = RoleModel::fit(&dataset.graph, &role_cfg)?;
            info!(
                "{}: {} roles from {} features",
                dataset.name,
                model.rank,
                model.feature_names.len()
            );
            Some(ClassFrame::Roles(model.assignment))
        } else {
            None
        };
        Ok(Prepared {
            dataset,
            communities,
            roles,
        })
    }

    fn frame(&self, level: NoiseLevel) -> Option<&ClassFrame> {
        match level {
            NoiseLevel::Local => None,
            NoiseLevel::Community => self.communities.as_ref(),
            NoiseLevel::Global => self.roles.as_ref(),
        }
    }
}

struct Job {
    cell: NoiseCell,
    models: Vec<(Variant, String)>,
}

struct Finished {
    dataset: String,
    cell: NoiseCell,
    records: Vec<(String, ExperimentRecord)>,
}

fn run_job(prep: &Prepared, cfg: &SweepConfig, layout: &Layout, job: &Job) -> Result<Finished> {
    let ds = &prep.dataset;
    let (noisy, report) = perturb(&ds.graph, &job.cell.spec, prep.frame(job.cell.spec.level))?;
    noisy.validate()?;
    let text = edge_list_text(&noisy);
    let graph_checksum = checksum(text.as_bytes());
    if cfg.write_graphs {
        let dir = layout.dataset_dir("graphs", &ds.name);
        let stem = job.cell.stem();
        write_atomic(&dir.join(format!("{stem}.edges")), &text)?;
        write_manifest(
            &job.cell.spec,
            &report,
            &graph_checksum,
            &dir.join(format!("{stem}.manifest")),
        )?;
    }
    let mut records = Vec::with_capacity(job.models.len());
    for (model, fingerprint) in &job.models {
        let start = Instant::now();
        let outcome = train(ds, &noisy, &cfg.hyper, job.cell.spec.seed, *model)?;
        let wall_time_ms = start.elapsed().as_millis() as u64;
        debug!(
            "{} {} {} acc={:.4} epochs={}",
            ds.name,
            job.cell.stem(),
            model.model_name(),
            outcome.test_accuracy,
            outcome.epochs_run
        );
        records.push((
            fingerprint.clone(),
            ExperimentRecord {
                dataset: ds.name.clone(),
                model: model.model_name().to_string(),
                spec: job.cell.spec.clone(),
                repetition: job.cell.repetition,
                accuracy: outcome.test_accuracy,
                wall_time_ms,
                graph_checksum: graph_checksum.clone(),
            },
        ));
    }
    Ok(Finished {
        dataset: ds.name.clone(),
        cell: job.cell.clone(),
        records,
    })
}

fn noise_spec(cfg: &SweepConfig, level: NoiseLevel, op: EdgeOp, ratio: f64, repetition: usize) -> NoiseSpec {
    let mut spec = NoiseSpec::new(level, op, ratio, cell_seed(cfg.base_seed, level, op, ratio, repetition));
    if level == NoiseLevel::Local {
        spec.threshold_override = cfg.threshold;
    }
    if level == NoiseLevel::Community {
        spec.community_resolution = cfg.resolution;
    }
    if level == NoiseLevel::Global {
        spec.role_count = cfg.role_count;
    }
    spec
}

/// Loads every configured dataset from `cfg.data_dir` and runs the sweep.
pub fn run_sweep(cfg: &SweepConfig, out: &Path, jobs: usize) -> Result<SweepSummary> {
    cfg.validate()?;
    let datasets = cfg
        .datasets
        .iter()
        .map(|name| load_dataset(&cfg.data_dir, name))
        .collect::<Result<Vec<_>>>()?;
    run_sweep_on(cfg, datasets, out, jobs)
}

/// Runs the sweep over already loaded datasets (matched to `cfg.datasets`
/// by position) with `jobs` worker threads, writing into `out`:
///
/// - `results.csv`: one row per cell in canonical order;
/// - `graphs.csv`: checksum of every perturbed graph;
/// - `timings.csv`: measured wall time per cell;
/// - `cells/`: per-cell record files used to resume;
/// - `graphs/`: edge lists and manifests when `write_graphs` is set.
pub fn run_sweep_on(cfg: &SweepConfig, datasets: Vec<Dataset>, out: &Path, jobs: usize) -> Result<SweepSummary> {
    cfg.validate()?;
    if datasets.len() != cfg.datasets.len() {
        return Err(Error::config(format!(
            "{} datasets configured, {} supplied",
            cfg.datasets.len(),
            datasets.len()
        )));
    }
    let layout = Layout {
        root: out.to_path_buf(),
    };
    for ds in &datasets {
        let mut kinds = vec!["cells"];
        if cfg.write_graphs {
            kinds.push("graphs");
        }
        for kind in kinds {
            let dir = layout.dataset_dir(kind, &ds.name);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
    }

    let mut records = Vec::with_capacity(cfg.cell_count());
    let mut pending: Vec<Vec<Job>> = datasets.iter().map(|_| Vec::new()).collect();
    for (d, ds) in datasets.iter().enumerate() {
        for &level in &cfg.levels {
            for &op in &cfg.ops {
                for &ratio in &cfg.ratios {
                    for repetition in 0..cfg.repetitions {
                        let cell = NoiseCell {
                            dataset: d,
                            spec: noise_spec(cfg, level, op, ratio, repetition),
                            repetition,
                        };
                        let mut models = Vec::new();
                        for &model in &cfg.models {
                            let fp = cell_fingerprint(cfg, &ds.name, &cell, model);
                            let template = ExperimentRecord {
                                dataset: ds.name.clone(),
                                model: model.model_name().to_string(),
                                spec: cell.spec.clone(),
                                repetition,
                                accuracy: 0.0,
                                wall_time_ms: 0,
                                graph_checksum: String::new(),
                            };
                            match load_record(&layout.record_path(&ds.name, &cell, model), &fp, template) {
                                Some(r) => records.push(r),
                                None => models.push((model, fp)),
                            }
                        }
                        if !models.is_empty() {
                            pending[d].push(Job { cell, models });
                        }
                    }
                }
            }
        }
    }
    let reused = records.len();
    info!(
        "{} cells already complete, {} to run",
        reused,
        cfg.cell_count() - reused
    );

    let mut prepared = Vec::with_capacity(datasets.len());
    for (ds, jobs_here) in datasets.into_iter().zip(&pending) {
        let needs = |level| jobs_here.iter().any(|j| j.cell.spec.level == level);
        prepared.push(Prepared::new(
            ds,
            cfg,
            needs(NoiseLevel::Community),
            needs(NoiseLevel::Global),
        )?);
    }
    let work: Vec<Job> = pending.into_iter().flatten().collect();

    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let workers = jobs.max(1).min(work.len().max(1));
    let mut computed = 0;
    let mut first_error = None;
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Result<Finished>>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (work, prepared, layout, next, failed) = (&work, &prepared, &layout, &next, &failed);
            scope.spawn(move || loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = work.get(i) else { break };
                let result = run_job(&prepared[job.cell.dataset], cfg, layout, job);
                if result.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                if tx.send(result).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // single collector: record files are written here only
        for msg in rx {
            let written = msg.and_then(|done| {
                for (fp, record) in done.records {
                    let model = Variant::from_model_name(&record.model)?;
                    let path = layout.record_path(&done.dataset, &done.cell, model);
                    write_atomic(&path, &record_text(&fp, &record))?;
                    records.push(record);
                    computed += 1;
                }
                Ok(())
            });
            if let Err(e) = written {
                failed.store(true, Ordering::Relaxed);
                first_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }

    sort_records(&mut records);
    let mut shown = records.clone();
    if !cfg.record_wall_time {
        for r in &mut shown {
            r.wall_time_ms = 0;
        }
    }
    emit_results(&shown, &out.join("results.csv"))?;
    write_atomic(&out.join("timings.csv"), &timings_text(&records))?;
    write_atomic(&out.join("graphs.csv"), &checksums_text(&records))?;
    Ok(SweepSummary {
        records,
        computed,
        reused,
    })
}

fn timings_text(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("dataset,model,level,op,ratio,repetition,wall_time_ms\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.dataset, r.model, r.spec.level, r.spec.operation, r.spec.ratio, r.repetition, r.wall_time_ms
        )
        .unwrap();
    }
    out
}

/// One line per perturbed graph; models trained on the same graph share it.
fn checksums_text(records: &[ExperimentRecord]) -> String {
    let mut rows = BTreeMap::new();
    for r in records {
        let key = (
            r.dataset.clone(),
            r.spec.level,
            r.spec.operation,
            r.spec.ratio.to_bits(),
            r.repetition,
        );
        rows.entry(key).or_insert_with(|| {
            format!(
                "{},{},{},{},{},{},{}",
                r.dataset, r.spec.level, r.spec.operation, r.spec.ratio, r.repetition, r.spec.seed, r.graph_checksum
            )
        });
    }
    let mut out = String::from("dataset,level,op,ratio,repetition,seed,graph_checksum\n");
    for line in rows.values() {
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_are_stable_and_distinct() {
        let a = cell_seed(0, NoiseLevel::Local, EdgeOp::Flip, 0.05, 0);
        assert_eq!(a, cell_seed(0, NoiseLevel::Local, EdgeOp::Flip, 0.05, 0));
        let mut seen = std::collections::BTreeSet::new();
        for level in NoiseLevel::ALL {
            for op in EdgeOp::ALL {
                for ratio in default_ratios() {
                    for rep in 0..6 {
                        assert!(seen.insert(cell_seed(0, level, op, ratio, rep)));
                    }
                }
            }
        }
        assert_ne!(a, cell_seed(1, NoiseLevel::Local, EdgeOp::Flip, 0.05, 0));
    }

    fn record(level: NoiseLevel, ratio: f64, rep: usize) -> ExperimentRecord {
        ExperimentRecord {
            dataset: "toy".into(),
            model: "gcn".into(),
            spec: NoiseSpec::new(level, EdgeOp::Delete, ratio, 9),
            repetition: rep,
            accuracy: 0.5,
            wall_time_ms: 0,
            graph_checksum: "x".into(),
        }
    }

    #[test]
    fn emitted_rows_are_canonical() {
        let records = vec![
            record(NoiseLevel::Global, 0.05, 0),
            record(NoiseLevel::Local, 0.8, 1),
            record(NoiseLevel::Local, 0.1, 0),
            record(NoiseLevel::Local, 0.8, 0),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_results(&records, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], RESULTS_HEADER);
        assert_eq!(lines[1], "toy,gcn,local,delete,0.1,0,9,0.5,0");
        assert_eq!(lines[2], "toy,gcn,local,delete,0.8,0,9,0.5,0");
        assert_eq!(lines[3], "toy,gcn,local,delete,0.8,1,9,0.5,0");
        assert!(lines[4].starts_with("toy,gcn,global"));
    }

    #[test]
    fn stale_record_is_not_reused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.rec");
        let r = record(NoiseLevel::Local, 0.1, 0);
        fs::write(&path, record_text("abc", &r)).unwrap();
        assert_eq!(
            load_record(&path, "abc", record(NoiseLevel::Local, 0.1, 0)),
            Some(r.clone())
        );
        assert_eq!(load_record(&path, "abd", r), None);
    }
}
