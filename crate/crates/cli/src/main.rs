use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use structnoise::gcn::{train, GcnHyper, Variant};
use structnoise::io::{load_dataset, read_edge_list, write_edge_list, write_manifest};
use structnoise::noise::{derive_frame, perturb, EdgeOp, NoiseLevel, NoiseSpec};
use structnoise::roles::RoleConfig;
use structnoise::runner::{run_sweep, SweepConfig};
use structnoise::Error;

/// Structural noise injection and GCN robustness sweeps.
#[derive(Parser)]
#[command(name = "structnoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Perturb a dataset's graph once and write the edge list and manifest.
    Perturb(PerturbArgs),
    /// Run a sweep described by a key=value config file.
    Sweep(SweepArgs),
    /// Train and test a GCN on a dataset with a replacement edge list.
    Eval(EvalArgs),
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    #[arg(long)]
    level: NoiseLevel,
    #[arg(long)]
    op: EdgeOp,
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Degree threshold for local noise (default: degree mode).
    #[arg(long)]
    threshold: Option<usize>,
    /// Louvain resolution for community noise.
    #[arg(long)]
    resolution: Option<f64>,
    /// Number of roles for global noise.
    #[arg(long)]
    role_count: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// gcn or gcn-dropedge.
    #[arg(long, value_parser = Variant::from_model_name)]
    model: Variant,
    /// Edge list over the dataset's node ids.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn create_dir(dir: &Path) -> structnoise::Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run_perturb(args: PerturbArgs) -> structnoise::Result<()> {
    let spec = NoiseSpec {
        threshold_override: args.threshold,
        community_resolution: args.resolution,
        role_count: args.role_count,
        ..NoiseSpec::new(args.level, args.op, args.ratio, args.seed)
    };
    spec.validate().map_err(|e| match e {
        Error::Input(msg) => Error::Config(msg),
        other => other,
    })?;
    let ds = load_dataset(&args.data_dir, &args.dataset)?;
    let frame = derive_frame(&ds.graph, &spec, &RoleConfig::default())?;
    let (noisy, report) = perturb(&ds.graph, &spec, frame.as_ref())?;
    noisy.validate()?;

    create_dir(&args.out)?;
    let stem = format!(
        "{}-{}-{}-{}-s{}",
        ds.name, spec.level, spec.operation, spec.ratio, spec.seed
    );
    let edges = args.out.join(format!("{stem}.edges"));
    let manifest = args.out.join(format!("{stem}.manifest"));
    let sum = write_edge_list(&noisy, &edges)?;
    write_manifest(&spec, &report, &sum, &manifest)?;
    println!(
        "{}: {} -> {} edges (deleted {}, added {}, skipped {})",
        ds.name,
        ds.graph.edge_count(),
        noisy.edge_count(),
        report.deleted.len(),
        report.added.len(),
        report.skipped_pairs
    );
    println!("{}", edges.display());
    println!("{}", manifest.display());
    Ok(())
}

fn run_sweep_command(args: SweepArgs) -> structnoise::Result<()> {
    let cfg = SweepConfig::from_file(&args.config)?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    create_dir(&args.out)?;
    info!("{} cells on {jobs} workers", cfg.cell_count());
    let summary = run_sweep(&cfg, &args.out, jobs)?;
    println!(
        "{} records ({} computed, {} reused) in {}",
        summary.records.len(),
        summary.computed,
        summary.reused,
        args.out.join("results.csv").display()
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> structnoise::Result<()> {
    let ds = load_dataset(&args.data_dir, &args.dataset)?;
    let g = read_edge_list(&args.graph, Some(ds.node_count()))?;
    g.validate()?;
    let outcome = train(&ds, &g, &GcnHyper::default(), args.seed, args.model)?;
    println!(
        "{} {} test_accuracy={:.4} best_validation_accuracy={:.4} epochs={}",
        ds.name,
        args.model.model_name(),
        outcome.test_accuracy,
        outcome.best_validation_accuracy,
        outcome.epochs_run
    );
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::Divergence { .. } => 3,
        Error::Input(_) | Error::Parse { .. } | Error::Io { .. } => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Perturb(args) => run_perturb(args),
        Command::Sweep(args) => run_sweep_command(args),
        Command::Eval(args) => run_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
