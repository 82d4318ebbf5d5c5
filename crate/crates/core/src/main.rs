use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pspso::harness::{
    compare_files, run_experiment, sweep_dump, Batch, ExperimentConfig, HarnessError,
};

/// Environment variable holding the default worker count.
const JOBS_ENV: &str = "PSPSO_JOBS";

#[derive(Parser)]
#[command(
    name = "pspso",
    version,
    about = "Run and compare PSPSO experiments on moving-peaks scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of seeded runs and write one CSV row per run.
    Run(RunArgs),
    /// Run one batch per value of a single parameter into one CSV.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to vary, e.g. `p` or `algo.swarm_count`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Mann-Whitney U comparison of two result files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Algo label to select in the first file, if it holds several.
        #[arg(long)]
        algo_a: Option<String>,
        /// Algo label to select in the second file, if it holds several.
        #[arg(long)]
        algo_b: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// F1..F12 or custom.
    #[arg(long)]
    scenario: Option<String>,
    /// pspso or restart-baseline.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// TOML config with [problem], [algo] and [run] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set p=0.05` or `--set problem.dims=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write per-run error traces and peak histories here.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    /// Worker threads (default: $PSPSO_JOBS, else all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn default_jobs() -> Result<String, HarnessError> {
    match std::env::var(JOBS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n.to_string()),
            _ => Err(HarnessError::Usage(format!(
                "{JOBS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .to_string()),
    }
}

/// Environment default, then config file, then flags, then `--set`.
fn resolve(args: &RunArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut entries = vec![("run.jobs".to_string(), default_jobs()?)];
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| {
            HarnessError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        entries.extend(ExperimentConfig::file_entries(&text)?);
    }
    let flags = [
        ("problem.scenario", args.scenario.clone()),
        ("algo.name", args.algo.clone()),
        ("run.runs", args.runs.map(|v| v.to_string())),
        ("run.seed", args.seed.map(|v| v.to_string())),
        ("run.jobs", args.jobs.map(|v| v.to_string())),
    ];
    entries.extend(
        flags
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v))),
    );
    for item in &args.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("--set expects KEY=VALUE, got {item:?}")))?;
        entries.push((k.trim().to_string(), v.to_string()));
    }
    ExperimentConfig::from_entries(&entries)
}

fn report(out: &Path, batches: &[Batch]) {
    let runs: usize = batches.iter().map(|b| b.config.run.runs).sum();
    eprintln!("wrote {runs} runs to {}", out.display());
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = resolve(&args)?;
            let dump = cfg.to_toml();
            let batches = [Batch::new(cfg)];
            run_experiment(&batches, &dump, &args.out, args.trace_dir.as_deref())?;
            report(&args.out, &batches);
        }
        Command::Sweep { run, param, values } => {
            let base = resolve(&run)?;
            let batches = Batch::sweep(&base, &param, &values)?;
            let dump = sweep_dump(&base, &param, &values);
            run_experiment(&batches, &dump, &run.out, run.trace_dir.as_deref())?;
            report(&run.out, &batches);
        }
        Command::Compare {
            a,
            b,
            algo_a,
            algo_b,
        } => {
            let cmp = compare_files(&a, &b, algo_a.as_deref(), algo_b.as_deref())?;
            println!("{cmp}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
