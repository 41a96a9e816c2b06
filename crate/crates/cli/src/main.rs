//! `dqlab` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dqlab::pollute::DupCountDist;
use dqlab::quality::{measure, RepresentationMap};
use dqlab::runner::{
    emit_report, read_results_csv, read_results_json, run_experiment, write_outputs, ExperimentConfig, ReportFormat,
    RunOptions,
};
use dqlab::scenario::{pollute, stratified_split, Dimension, Level, PollutionOptions};
use dqlab::tabular::{
    derive_rng, discretize_target, drop_small_classes, load_csv, restore_numeric_target, save_csv, Dataset,
    DatasetManifest,
};
use dqlab::Error;

#[derive(Parser, Debug)]
#[command(
    name = "dqlab",
    version,
    about = "Pollute tabular data along six quality dimensions and measure the effect on learners"
)]
struct Cli {
    /// Master seed; for `run` it replaces the seed list of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Column manifest (TOML) of the input dataset.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `run`; 0 picks the number of cores. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score every quality dimension of a dataset.
    Measure(MeasureArgs),
    /// Pollute one dimension of a dataset at one level.
    Pollute(PolluteArgs),
    /// Stratified train/test split.
    Split(SplitArgs),
    /// Run an experiment grid from a config file.
    Run(RunArgs),
    /// Re-emit long and wide result tables from a results file.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct MeasureArgs {
    data: PathBuf,
    /// Representation groups per categorical column (JSON).
    #[arg(long)]
    representations: Option<PathBuf>,
    /// Clean version of the data, required for the accuracy scores.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PolluteArgs {
    data: PathBuf,
    /// completeness, feature_accuracy, target_accuracy, uniqueness, class_balance or consistency_k<N>.
    #[arg(long)]
    dimension: String,
    /// Pollution level; a duplication factor such as 10/4 for uniqueness.
    #[arg(long)]
    level: String,
    /// Duplicate-count distribution for uniqueness: always1, uniform, normal or zipf.
    #[arg(long, default_value = "always1")]
    dup_count: String,
    /// Rows of a class-balance version; derived from the data when absent.
    #[arg(long)]
    sample_count: Option<usize>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    data: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Regression only: binned classes smaller than this are discarded first.
    #[arg(long, default_value_t = 10)]
    min_class_size: usize,
}

#[derive(Args, Debug)]
struct RunArgs {
    config: PathBuf,
    /// Also write every polluted CSV and pollution log.
    #[arg(long)]
    keep_intermediate: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// results.csv or results.json from an earlier run.
    results: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Dq(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Dq(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a PathBuf> {
    value
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("--{flag} is required for this command")))
}

fn out_dir(cli: &Cli) -> CliResult<&Path> {
    let dir = require(&cli.out, "out")?;
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| {
        Failure::Dq(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn load(cli: &Cli, data: &Path) -> CliResult<(DatasetManifest, Dataset)> {
    let manifest = DatasetManifest::load(require(&cli.manifest, "manifest")?)?;
    let ds = load_csv(data, &manifest)?;
    Ok((manifest, ds))
}

fn cmd_measure(cli: &Cli, args: &MeasureArgs) -> CliResult<()> {
    let (manifest, ds) = load(cli, &args.data)?;
    let map = match &args.representations {
        Some(p) => RepresentationMap::load(p)?,
        None => RepresentationMap::default(),
    };
    let gt = match &args.ground_truth {
        Some(p) => Some(load_csv(p, &manifest)?),
        None => None,
    };
    let report = measure(&ds, &map, gt.as_ref())?;
    let text = serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n";
    match &cli.out {
        Some(_) => write_text(&out_dir(cli)?.join("quality.json"), &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_pollute(cli: &Cli, args: &PolluteArgs) -> CliResult<()> {
    let (manifest, ds) = load(cli, &args.data)?;
    let dim: Dimension = args.dimension.parse()?;
    let level = Level::parse_for(dim, &args.level)?;
    let options = PollutionOptions {
        dup_count: args.dup_count.parse::<DupCountDist>()?,
        sample_count: args.sample_count,
    };
    let seed = cli.seed.unwrap_or(0);
    // same stream the runner uses for a whole-dataset pollution
    let rng = derive_rng(seed, &["pollute", &dim.to_string()]).child("train");
    let by_class = matches!(dim, Dimension::Uniqueness | Dimension::ClassBalance);
    let source = match manifest.bin_step {
        Some(step) if by_class && ds.target_column().as_numerical().is_some() => discretize_target(&ds, step)?,
        _ => ds,
    };
    let mut half = pollute(&source, dim, level, &options, &rng)?;
    if half.dataset.target_bins().is_some() {
        half.dataset = restore_numeric_target(&half.dataset)?;
    }
    let dir = out_dir(cli)?;
    save_csv(&half.dataset, dir.join("polluted.csv"))?;
    half.log.save_jsonl(dir.join("pollution_log.jsonl"))?;
    if let Some(map) = &half.representations {
        map.save(dir.join("representations.json"))?;
    }
    if let Some(plan) = &half.plan {
        log::info!(
            "class balance: lambda {} (cap {}), counts {:?}",
            plan.lambda,
            plan.lambda_cap,
            plan.counts
        );
    }
    log::info!("{} cells or rows changed", half.log.len());
    Ok(())
}

fn cmd_split(cli: &Cli, args: &SplitArgs) -> CliResult<()> {
    let (manifest, ds) = load(cli, &args.data)?;
    let source = match manifest.bin_step {
        Some(step) if ds.target_column().as_numerical().is_some() => {
            drop_small_classes(&discretize_target(&ds, step)?, args.min_class_size)?
        }
        _ => ds,
    };
    let seed = cli.seed.unwrap_or(0);
    let split = stratified_split(&source, args.train_fraction, &derive_rng(seed, &["split"]))?;
    let restore = |d: &Dataset| -> CliResult<Dataset> {
        Ok(if d.target_bins().is_some() {
            restore_numeric_target(d)?
        } else {
            d.clone()
        })
    };
    let dir = out_dir(cli)?;
    save_csv(&restore(&split.train)?, dir.join("train.csv"))?;
    save_csv(&restore(&split.test)?, dir.join("test.csv"))?;
    let text = serde_json::to_string_pretty(&split.manifest).map_err(Error::from)? + "\n";
    write_text(&dir.join("split.json"), &text)
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> CliResult<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(m) = &cli.manifest {
        cfg.manifest = m.clone();
    }
    let dir = out_dir(cli)?.to_path_buf();
    let opts = RunOptions {
        threads: cli.threads,
        intermediate_dir: args.keep_intermediate.then(|| dir.join("intermediate")),
    };
    let out = run_experiment(&cfg, &opts)?;
    write_outputs(&cfg, &out, &dir)?;
    if !out.failures.is_empty() {
        log::warn!("{} cell(s) or learner(s) failed; see failures.csv", out.failures.len());
    }
    log::info!("{} result rows written to {}", out.records.len(), dir.display());
    Ok(())
}

fn cmd_report(cli: &Cli, args: &ReportArgs) -> CliResult<()> {
    let records = match args.results.extension().and_then(|e| e.to_str()) {
        Some("json") => read_results_json(&args.results)?,
        _ => read_results_csv(&args.results)?,
    };
    let formats: &[ReportFormat] = match args.format {
        Format::Csv => &[ReportFormat::Csv],
        Format::Json => &[ReportFormat::Json],
        Format::Both => &[ReportFormat::Csv, ReportFormat::Json],
    };
    emit_report(&records, out_dir(cli)?, formats)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Measure(a) => cmd_measure(&cli, a),
        Command::Pollute(a) => cmd_pollute(&cli, a),
        Command::Split(a) => cmd_split(&cli, a),
        Command::Run(a) => cmd_run(&cli, a),
        Command::Report(a) => cmd_report(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Dq(e)) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
