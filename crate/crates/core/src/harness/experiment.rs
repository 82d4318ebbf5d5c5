//! Seeded batch execution and CSV output.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{canonical_key, AlgoKind, ExperimentConfig};
use super::HarnessError;
use crate::algorithm::{run_pspso, run_restart_baseline, RunResult};
use crate::problem::{Benchmark, DynamicLandscape};
use crate::stats::summarize;

pub const CSV_HEADER: [&str; 6] = [
    "scenario",
    "algo",
    "seed",
    "offline_error",
    "evaluations",
    "wall_time_ms",
];
pub const SUMMARY_TAG: &str = "#SUMMARY";
pub const PARTIAL_TAG: &str = "#PARTIAL";

/// One completed run, as written to a CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario: String,
    pub algo: String,
    pub seed: u64,
    pub offline_error: f64,
    pub evaluations: u64,
    pub wall_time_ms: Option<f64>,
}

/// A resolved config plus the label written in the `algo` column.
#[derive(Debug, Clone)]
pub struct Batch {
    pub label: String,
    pub config: ExperimentConfig,
}

impl Batch {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            label: config.algo.name.to_string(),
            config,
        }
    }

    /// One batch per value of `param`, labelled `algo[param=value]`.
    pub fn sweep(
        base: &ExperimentConfig,
        param: &str,
        values: &[String],
    ) -> Result<Vec<Self>, HarnessError> {
        if values.is_empty() {
            return Err(HarnessError::Usage("sweep needs at least one value".into()));
        }
        values
            .iter()
            .map(|value| {
                let mut config = base.clone();
                config.set(param, value)?;
                config.validate()?;
                Ok(Self {
                    label: format!("{}[{}={}]", config.algo.name, param, value.trim()),
                    config,
                })
            })
            .collect()
    }
}

/// Config dump for a sweep: the unswept base plus a comment naming the swept
/// key, so the file still loads as a plain config.
pub fn sweep_dump(base: &ExperimentConfig, param: &str, values: &[String]) -> String {
    format!(
        "# sweep {} = {}\n{}",
        canonical_key(param),
        values.join(","),
        base.to_toml()
    )
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    /// Completed runs in seed order.
    pub records: Vec<RunRecord>,
    /// Seed and message of the first failed run, if any.
    pub failure: Option<(u64, String)>,
}

/// Dynamics seed for run `run_index`: FNV-1a over the base seed, scenario
/// name and run index, finished with a splitmix64 mix. Algorithms compared
/// at the same index see the same problem instance.
pub fn derive_dynamics_seed(base_seed: u64, scenario: &str, run_index: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let bytes = base_seed
        .to_le_bytes()
        .into_iter()
        .chain(scenario.bytes())
        .chain([0xff])
        .chain(run_index.to_le_bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

fn file_stem(label: &str, scenario: &str, seed: u64) -> String {
    let clean: String = format!("{scenario}_{label}")
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{clean}_seed{seed}")
}

/// Executes run `run_index` of `batch`. With `trace_dir`, also writes the
/// per-evaluation error trace (`.errors`) and the peak history (`.envs`).
pub fn run_one(
    batch: &Batch,
    run_index: usize,
    trace_dir: Option<&Path>,
) -> Result<(RunRecord, RunResult), HarnessError> {
    let cfg = &batch.config;
    let seed = cfg.run.seed.wrapping_add(run_index as u64);
    let dynamics = derive_dynamics_seed(cfg.run.seed, &cfg.problem.scenario, run_index as u64);
    let landscape = DynamicLandscape::new(cfg.landscape_params()?, dynamics)?;
    let mut bench = Benchmark::new(landscape);
    if trace_dir.is_some() {
        bench = bench.with_trace().with_history();
    }

    let start = Instant::now();
    let outcome = match cfg.algo.name {
        AlgoKind::Pspso => run_pspso(&cfg.algo_config(), &cfg.pso_params(), &mut bench, seed),
        AlgoKind::RestartBaseline => run_restart_baseline(
            &cfg.algo_config(),
            &cfg.pso_params(),
            cfg.algo.restart_every,
            &mut bench,
            seed,
        ),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    let result = outcome.map_err(|e| HarnessError::RunFailed {
        seed,
        completed: 0,
        message: e.to_string(),
    })?;

    if let Some(dir) = trace_dir {
        let stem = file_stem(&batch.label, &cfg.problem.scenario, seed);
        let path = dir.join(format!("{stem}.errors"));
        let write_errors = || -> io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            for e in &result.error_trace {
                writeln!(w, "{e}")?;
            }
            w.flush()
        };
        write_errors().map_err(|e| HarnessError::io(&path, e))?;
        let path = dir.join(format!("{stem}.envs"));
        let write_envs = || -> io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            bench.write_history(&mut w)?;
            w.flush()
        };
        write_envs().map_err(|e| HarnessError::io(&path, e))?;
    }

    let record = RunRecord {
        scenario: cfg.problem.scenario.clone(),
        algo: batch.label.clone(),
        seed,
        offline_error: result.offline_error,
        evaluations: result.evaluations_used,
        wall_time_ms: cfg.run.timing.then_some(elapsed),
    };
    Ok((record, result))
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".to_string()
    }
}

/// Runs `runner` for every run index of `batch` on `batch.config.run.jobs`
/// workers. A failure or panic stops the batch from starting further runs;
/// completed runs are kept, ordered by seed.
pub fn run_batch_with<F>(batch: &Batch, runner: F) -> Result<BatchOutcome, HarnessError>
where
    F: Fn(usize) -> Result<RunRecord, HarnessError> + Sync,
{
    let cfg = &batch.config;
    let failed = AtomicBool::new(false);
    let attempt = |idx: usize| -> Option<Result<RunRecord, (u64, String)>> {
        if failed.load(Ordering::SeqCst) {
            return None;
        }
        let seed = cfg.run.seed.wrapping_add(idx as u64);
        let res = match catch_unwind(AssertUnwindSafe(|| runner(idx))) {
            Ok(Ok(record)) => Ok(record),
            Ok(Err(HarnessError::RunFailed { message, .. })) => Err((seed, message)),
            Ok(Err(e)) => Err((seed, e.to_string())),
            Err(payload) => Err((seed, panic_message(payload))),
        };
        if res.is_err() {
            failed.store(true, Ordering::SeqCst);
        }
        Some(res)
    };

    let results: Vec<_> = if cfg.run.jobs <= 1 {
        (0..cfg.run.runs).map(attempt).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.jobs)
            .build()
            .map_err(|e| {
                HarnessError::Usage(format!("cannot start {} workers: {e}", cfg.run.jobs))
            })?;
        pool.install(|| (0..cfg.run.runs).into_par_iter().map(attempt).collect())
    };

    let mut outcome = BatchOutcome::default();
    for res in results.into_iter().flatten() {
        match res {
            Ok(record) => outcome.records.push(record),
            Err(fail) => {
                if outcome
                    .failure
                    .as_ref()
                    .is_none_or(|(seed, _)| fail.0 < *seed)
                {
                    outcome.failure = Some(fail);
                }
            }
        }
    }
    Ok(outcome)
}

pub fn run_batch(batch: &Batch, trace_dir: Option<&Path>) -> Result<BatchOutcome, HarnessError> {
    run_batch_with(batch, |idx| {
        run_one(batch, idx, trace_dir).map(|(record, _)| record)
    })
}

fn csv_error(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Header, then for each batch its data rows followed by either a
/// `#SUMMARY` row or, if the batch failed, a `#PARTIAL` row.
pub fn write_csv<W: Write>(out: W, results: &[(&Batch, &BatchOutcome)]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for (batch, outcome) in results {
        for r in &outcome.records {
            let wall = r
                .wall_time_ms
                .map(|t| format!("{t:.3}"))
                .unwrap_or_default();
            w.write_record([
                r.scenario.clone(),
                r.algo.clone(),
                r.seed.to_string(),
                r.offline_error.to_string(),
                r.evaluations.to_string(),
                wall,
            ])
            .map_err(csv_error)?;
        }
        let scenario = &batch.config.problem.scenario;
        match &outcome.failure {
            None => {
                let errors: Vec<f64> = outcome.records.iter().map(|r| r.offline_error).collect();
                if let Ok(s) = summarize(&errors) {
                    w.write_record([
                        SUMMARY_TAG.to_string(),
                        scenario.clone(),
                        batch.label.clone(),
                        s.n.to_string(),
                        s.mean.to_string(),
                        s.std_error.to_string(),
                    ])
                    .map_err(csv_error)?;
                }
            }
            Some((seed, message)) => {
                w.write_record([
                    PARTIAL_TAG.to_string(),
                    scenario.clone(),
                    batch.label.clone(),
                    format!("completed={}", outcome.records.len()),
                    format!("failed_seed={seed}"),
                    message.clone(),
                ])
                .map_err(csv_error)?;
            }
        }
    }
    w.flush()
}

/// Path of the resolved-config dump written next to `out`.
pub fn config_dump_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".config.toml");
    out.with_file_name(name)
}

/// Runs `batches` in order and writes `out` plus its config dump. Stops at
/// the first failed batch; the CSV then ends with a `#PARTIAL` row and the
/// error is returned after the file is written.
pub fn run_experiment(
    batches: &[Batch],
    config_dump: &str,
    out: &Path,
    trace_dir: Option<&Path>,
) -> Result<Vec<BatchOutcome>, HarnessError> {
    // fail on an unwritable path before spending any compute
    let file = File::create(out).map_err(|e| HarnessError::io(out, e))?;
    let dump_path = config_dump_path(out);
    fs::write(&dump_path, config_dump).map_err(|e| HarnessError::io(&dump_path, e))?;
    if let Some(dir) = trace_dir {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }

    let mut outcomes = Vec::with_capacity(batches.len());
    for batch in batches {
        let outcome = run_batch(batch, trace_dir)?;
        let failed = outcome.failure.is_some();
        outcomes.push(outcome);
        if failed {
            break;
        }
    }

    let pairs: Vec<(&Batch, &BatchOutcome)> = batches.iter().zip(&outcomes).collect();
    write_csv(BufWriter::new(file), &pairs).map_err(|e| HarnessError::io(out, e))?;

    if let Some(last) = outcomes.last() {
        if let Some((seed, message)) = &last.failure {
            return Err(HarnessError::RunFailed {
                seed: *seed,
                completed: outcomes.iter().map(|o| o.records.len()).sum(),
                message: message.clone(),
            });
        }
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(runs: usize, jobs: usize) -> Batch {
        let overrides: Vec<(String, String)> = [
            ("scenario", "F8"),
            ("problem.environments", "3"),
            ("runs", &runs.to_string()),
            ("jobs", &jobs.to_string()),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Batch::new(ExperimentConfig::resolve(None, &overrides).unwrap())
    }

    fn csv_of(batch: &Batch, outcome: &BatchOutcome) -> String {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[(batch, outcome)]).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn dynamics_seed_depends_on_every_input() {
        let base = derive_dynamics_seed(42, "F1", 0);
        assert_eq!(base, derive_dynamics_seed(42, "F1", 0));
        assert_ne!(base, derive_dynamics_seed(43, "F1", 0));
        assert_ne!(base, derive_dynamics_seed(42, "F2", 0));
        assert_ne!(base, derive_dynamics_seed(42, "F1", 1));
    }

    #[test]
    fn row_accounting() {
        let batch = tiny(4, 1);
        let outcome = run_batch(&batch, None).unwrap();
        assert!(outcome.failure.is_none());
        let text = csv_of(&batch, &outcome);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "scenario,algo,seed,offline_error,evaluations,wall_time_ms"
        );
        assert_eq!(lines.len(), 1 + 4 + 1);
        assert!(lines[1].starts_with("F8,pspso,42,"));
        assert!(lines[1].ends_with(",1500,"));
        assert!(lines[5].starts_with("#SUMMARY,F8,pspso,4,"));
    }

    #[test]
    fn panic_marks_partial() {
        let batch = tiny(5, 1);
        let outcome = run_batch_with(&batch, |idx| {
            if idx == 2 {
                panic!("boom");
            }
            run_one(&batch, idx, None).map(|(r, _)| r)
        })
        .unwrap();
        assert_eq!(outcome.records.len(), 2);
        assert_eq!(outcome.failure.as_ref().unwrap().0, 44);
        let text = csv_of(&batch, &outcome);
        let last = text.lines().last().unwrap();
        assert!(
            last.starts_with("#PARTIAL,F8,pspso,completed=2,failed_seed=44,"),
            "{last}"
        );
        assert!(last.contains("boom"));
        assert!(!text.contains(SUMMARY_TAG));
    }

    #[test]
    fn failed_batch_still_writes_its_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let good = tiny(2, 1);
        let mut bad = tiny(3, 2);
        // skips validation, so every run fails when it builds its landscape
        bad.config.problem.dims = 0;
        bad.label = "broken".into();
        let err = run_experiment(&[good, bad], "", &out, None).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(matches!(
            err,
            HarnessError::RunFailed {
                seed: 42,
                completed: 2,
                ..
            }
        ));
        let text = fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 + 1 + 1);
        assert!(lines[3].starts_with("#SUMMARY,F8,pspso,2,"));
        assert!(lines[4].starts_with("#PARTIAL,F8,broken,completed=0,failed_seed=42,"));
        assert!(config_dump_path(&out).exists());
    }

    #[test]
    fn timing_fills_wall_time() {
        let mut batch = tiny(1, 1);
        batch.config.run.timing = true;
        let outcome = run_batch(&batch, None).unwrap();
        assert!(outcome.records[0].wall_time_ms.unwrap() >= 0.0);
        let text = csv_of(&batch, &outcome);
        assert!(!text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn sweep_labels() {
        let base = tiny(1, 1).config;
        let values: Vec<String> = ["0", "0.05"].iter().map(|s| s.to_string()).collect();
        let batches = Batch::sweep(&base, "p", &values).unwrap();
        assert_eq!(batches[0].label, "pspso[p=0]");
        assert_eq!(batches[1].config.algo.perturbation, 0.05);
        assert!(Batch::sweep(&base, "p", &["x".to_string()]).is_err());
        assert!(Batch::sweep(&base, "nope", &values).is_err());
        let dump = sweep_dump(&base, "p", &values);
        assert!(dump.starts_with("# sweep algo.perturbation = 0,0.05\n"));
    }
}
