//! Executes a resolved configuration and writes the run directory.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sos_core::mcmc::{default_cap, holley_check, run_chain, CoupledPair, RunMetadata, RunSpec};
use sos_core::oracle::VerificationRecord;
use sos_core::{typical_heights, Field, Parameters};

use crate::config::{Experiment, ExperimentConfig, Initial};
use crate::{experiments, table::Table};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: Value,
    pub records: Vec<VerificationRecord>,
}

impl RunOutcome {
    /// False iff some deterministic check failed.
    pub fn hard_checks_passed(&self) -> bool {
        self.records.iter().all(VerificationRecord::acceptable)
    }
}

/// Raw output of an experiment before it is written to disk.
pub(crate) struct ExperimentOutput {
    pub table: Table,
    pub summary: Value,
    pub records: Vec<VerificationRecord>,
}

/// Runs the configured experiment, on a dedicated pool when a thread count
/// is given, and writes `config.json`, `series.csv`, `summary.json` and
/// `verify.json` into the output directory.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let output = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .context("building the worker pool")?
            .install(|| dispatch(config)),
        None => dispatch(config),
    }?;
    let elapsed = clock.elapsed().as_secs_f64();
    write_outputs(config, output, started, elapsed)
}

fn dispatch(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.experiment {
        Experiment::OracleVerify => experiments::oracle_verify(config),
        Experiment::SamplerValidate => experiments::sampler_validate(config),
        Experiment::Domination => experiments::domination(config),
        Experiment::SubcriticalHeight => experiments::subcritical_height(config),
        Experiment::CriticalZeros => experiments::critical_zeros(config),
        Experiment::CriticalHeightExplore => experiments::critical_height_explore(config),
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_outputs(
    config: &ExperimentConfig,
    output: ExperimentOutput,
    started: u64,
    elapsed: f64,
) -> Result<RunOutcome> {
    let dir = config.out.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let threads = config.threads.unwrap_or_else(rayon::current_num_threads);
    let passed = output.records.iter().all(VerificationRecord::acceptable);

    write_json(
        &dir.join("config.json"),
        &json!({
            "code_version": CODE_VERSION,
            "config": config,
            "metadata": { "started_unix": started, "threads": threads },
        }),
    )?;

    let csv_path = dir.join("series.csv");
    let file =
        fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# sos {CODE_VERSION}")?;
    writeln!(
        w,
        "# config {}",
        serde_json::to_string(&portable_config(config))?
    )?;
    output.table.write(&mut w)?;
    w.flush()?;

    let summary = json!({
        "code_version": CODE_VERSION,
        "config": config,
        "experiment": config.experiment.name(),
        "hard_checks_passed": passed,
        "results": output.summary,
        "metadata": { "elapsed_seconds": elapsed, "threads": threads },
    });
    write_json(&dir.join("summary.json"), &summary)?;
    write_json(
        &dir.join("verify.json"),
        &json!({
            "code_version": CODE_VERSION,
            "config": config,
            "passed": passed,
            "records": output.records,
        }),
    )?;
    Ok(RunOutcome {
        dir,
        summary,
        records: output.records,
    })
}

/// The config as embedded in `series.csv`: the output location is left out so
/// the same experiment written to two places yields the same bytes.
fn portable_config(config: &ExperimentConfig) -> Value {
    let mut v = serde_json::to_value(config).expect("config serializes");
    if let Some(map) = v.as_object_mut() {
        map.remove("out");
    }
    v
}

/// One `(N, h)` chain of a sampling experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub(crate) struct Job {
    pub index: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
}

/// Jobs in `N`-major order; job `i` draws from stream `i`.
pub(crate) fn jobs(config: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &n in &config.n {
        for &h in &config.h_resolved {
            out.push(Job {
                index: out.len(),
                n,
                h,
            });
        }
    }
    out
}

pub(crate) fn run_spec(
    config: &ExperimentConfig,
    params: &Parameters,
    stream: u64,
    critical: bool,
) -> RunSpec {
    let cap = config
        .cap
        .unwrap_or_else(|| default_cap(params.beta(), params.n()));
    let mut spec = RunSpec::new(config.sweeps, config.burn_in, config.thinning, config.seed);
    spec.stream = stream;
    spec.cap = Some(cap);
    spec.initial = initial_condition(config.initial, params, critical, cap);
    spec
}

fn initial_condition(
    initial: Initial,
    params: &Parameters,
    critical: bool,
    cap: u32,
) -> sos_core::mcmc::InitialCondition {
    use sos_core::mcmc::InitialCondition;
    match initial {
        Initial::Zero => InitialCondition::Zero,
        Initial::Typical => {
            let t = typical_heights(params);
            let level = if critical { t.critical } else { t.typical };
            InitialCondition::Flat(level.min(cap))
        }
    }
}

/// Per-sample values of named columns from one chain.
pub(crate) struct Sampled {
    pub sweeps: Vec<u64>,
    pub columns: Vec<Vec<f64>>,
    pub metadata: RunMetadata,
}

pub(crate) fn sample<F>(
    params: &Parameters,
    spec: &RunSpec,
    width: usize,
    observe: F,
) -> Result<Sampled>
where
    F: Fn(&Field) -> Vec<f64>,
{
    let mut sweeps = Vec::new();
    let mut columns = vec![Vec::new(); width];
    let metadata = run_chain(params, spec, |s, state| {
        let values = observe(&state.field());
        debug_assert_eq!(values.len(), width);
        sweeps.push(s);
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
    })?;
    Ok(Sampled {
        sweeps,
        columns,
        metadata,
    })
}

/// Runs `f` over the jobs in parallel, returning results in job order.
pub(crate) fn par_jobs<T, F>(jobs: &[Job], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Job) -> Result<T> + Sync,
{
    jobs.par_iter().map(&f).collect()
}

/// Coupled chains for one `(N, h1, h2)` triple.
pub(crate) fn coupled_run(
    params_lo: &Parameters,
    params_hi: &Parameters,
    spec: &RunSpec,
    observe: impl Fn(&Field, &Field) -> Vec<f64>,
    width: usize,
) -> (Sampled, Option<sos_core::Error>, u64) {
    let cap = spec.cap.expect("resolved cap");
    let start = spec.initial.field(params_lo.n());
    let mut pair = CoupledPair::from_fields(
        start.clone(),
        start,
        params_lo,
        params_hi,
        cap,
        spec.seed,
        spec.stream,
    )
    .expect("validated parameters");
    let mut sweeps = Vec::new();
    let mut columns = vec![Vec::new(); width];
    let mut failure = None;
    for s in 1..=spec.sweeps {
        if let Err(e) = pair.sweep() {
            failure = Some(e);
            break;
        }
        if s > spec.burn_in && (s - spec.burn_in) % spec.thinning == 0 {
            let values = observe(
                &pair.lower_h_chain().field(),
                &pair.higher_h_chain().field(),
            );
            sweeps.push(s);
            for (col, v) in columns.iter_mut().zip(values) {
                col.push(v);
            }
        }
    }
    let lo = pair.lower_h_chain();
    let hits = lo.cap_hit_count() + pair.higher_h_chain().cap_hit_count();
    let metadata = RunMetadata {
        spec: *spec,
        cap,
        kept_samples: sweeps.len() as u64,
        updates: 2 * lo.updates(),
        cap_hit_count: hits,
        cap_hit_fraction: if lo.updates() == 0 {
            0.0
        } else {
            hits as f64 / (2 * lo.updates()) as f64
        },
        warnings: Vec::new(),
    };
    (
        Sampled {
            sweeps,
            columns,
            metadata,
        },
        failure,
        pair.sweep_count(),
    )
}

/// Holley pre-check over neighbor tuples in `0..=3` and the configured rewards.
pub(crate) fn holley_record(config: &ExperimentConfig) -> VerificationRecord {
    let mut grid: Vec<f64> = (0..=10).map(|i| config.h_w * i as f64 / 10.0).collect();
    grid.extend(&config.h_resolved);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let report = holley_check(config.beta, 3, &grid, 8, 1e-12);
    VerificationRecord::new(
        "holley_cdf_ordering",
        report.max_excess,
        0.0,
        report.max_excess.max(0.0),
        report.passed(),
    )
    .with("beta", config.beta)
    .with("tuple_pairs", report.tuple_pairs as f64)
    .with("h_pairs", report.h_pairs as f64)
    .with("violations", report.violations.len() as f64)
}
