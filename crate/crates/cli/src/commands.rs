use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use minen_core::config::Variant;
use minen_core::sim::{write_outputs, write_route_log, OUTPUT_FILES, ROUTES_FILE};
use minen_core::{RunSummary, SimConfig, Simulation};
use rayon::prelude::*;

use crate::aggregate::{fmt_stat, fmt_value, spread, RunRow, METRICS};
use crate::error::CliError;
use crate::CommonArgs;

type Result<T> = std::result::Result<T, CliError>;

/// Config file (or defaults) with command-line overrides applied.
fn load_config(args: &CommonArgs) -> Result<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(p) = args.protocol {
        cfg.protocol = p;
    }
    if let Some(s) = args.scheduler {
        cfg.scheduler.algorithm = s;
    }
    if let Some(seed) = args.seed {
        cfg.network.rng_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn seed_list(args: &CommonArgs, cfg: &SimConfig) -> Result<Vec<u64>> {
    let seeds = match (&args.seeds, args.seed) {
        (Some(range), _) => range.0.clone(),
        (None, Some(seed)) => vec![seed],
        (None, None) => cfg.seeds.clone().unwrap_or_else(|| vec![cfg.network.rng_seed]),
    };
    if seeds.is_empty() {
        return Err(CliError::Usage("seed list is empty".into()));
    }
    Ok(seeds)
}

/// Creates `dir` and refuses to clobber any of `files` unless forced.
fn prepare_dir(dir: &Path, files: &[&str], force: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    if !force {
        if let Some(f) = files.iter().find(|f| dir.join(f).exists()) {
            return Err(CliError::Usage(format!(
                "{} already exists; pass --force to overwrite",
                dir.join(f).display()
            )));
        }
    }
    Ok(())
}

fn output_names(trace: bool) -> Vec<&'static str> {
    let mut files = OUTPUT_FILES.to_vec();
    if trace {
        files.push(ROUTES_FILE);
    }
    files
}

fn simulate(cfg: &SimConfig, dir: &Path, trace: bool) -> Result<RunSummary> {
    let mut sim = Simulation::new(cfg.clone())?;
    if trace {
        sim.trace_routes();
    }
    while sim.step()?.is_some() {}
    let summary = sim.summary();
    write_outputs(&summary, dir)?;
    if let Some(log) = sim.route_log() {
        write_route_log(log, &dir.join(ROUTES_FILE))?;
    }
    Ok(summary)
}

// The only place wall-clock data is written.
fn write_run_log(out: &Path, command: &str, lines: &[String], started: Instant) -> Result<()> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut text = format!("command: {command}\nfinished_unix: {stamp}\nelapsed_s: {:.3}\n", started.elapsed().as_secs_f64());
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    fs::write(out.join("run.log"), text)?;
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

pub fn run(args: &CommonArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = load_config(args)?;
    prepare_dir(&args.out, &output_names(args.trace_routes), args.force)?;
    let s = simulate(&cfg, &args.out, args.trace_routes)?;
    write_run_log(
        &args.out,
        "run",
        &[
            format!("seed: {}", s.seed),
            format!("protocol: {}", s.protocol.as_str()),
            format!("scheduler: {}", s.scheduler.as_str()),
            format!("rounds_total: {}", s.rounds_total),
        ],
        started,
    )
}

fn write_rows(path: &Path, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    let mut header = vec!["variant", "seed"];
    header.extend(METRICS);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.variant.clone(), r.seed.to_string()];
        rec.extend(r.values.iter().map(|v| fmt_value(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per variant: run count, then median, q1, q3 and IQR of each
/// metric.
fn write_aggregate(path: &Path, groups: &[(String, Vec<RunRow>)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    let mut header = vec!["variant".to_string(), "runs".to_string()];
    for m in METRICS {
        for stat in ["median", "q1", "q3", "iqr"] {
            header.push(format!("{m}_{stat}"));
        }
    }
    w.write_record(&header)?;
    for (name, rows) in groups {
        let mut rec = vec![name.clone(), rows.len().to_string()];
        for i in 0..METRICS.len() {
            let s = spread(rows.iter().map(|r| r.values[i]));
            rec.extend([s.median, s.q1, s.q3, s.iqr].map(fmt_stat));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn run_seeds(
    cfg: &SimConfig,
    seeds: &[u64],
    out: &Path,
    args: &CommonArgs,
    pool: &rayon::ThreadPool,
) -> Result<Vec<RunSummary>> {
    let dirs: Vec<PathBuf> = seeds.iter().map(|s| out.join(format!("seed-{s}"))).collect();
    for d in &dirs {
        prepare_dir(d, &output_names(args.trace_routes), args.force)?;
    }
    pool.install(|| {
        seeds
            .par_iter()
            .zip(&dirs)
            .map(|(&seed, dir)| simulate(&cfg.clone().with_seed(seed), dir, args.trace_routes))
            .collect()
    })
}

pub fn compare(args: &CommonArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = load_config(args)?;
    if cfg.variants.len() < 2 {
        return Err(CliError::Usage(format!(
            "compare needs at least 2 variants in the config, found {}",
            cfg.variants.len()
        )));
    }
    let seeds = seed_list(args, &cfg)?;
    prepare_dir(&args.out, &["comparison.csv", "medians.csv"], args.force)?;
    let pool = pool(args.workers)?;

    let mut groups = Vec::new();
    let mut all = Vec::new();
    for (i, v) in cfg.variants.iter().enumerate() {
        let label = v.label(&cfg);
        let variant_cfg = Variant::apply(v, &cfg);
        let dir = args.out.join(format!("{i:02}-{label}"));
        let summaries = run_seeds(&variant_cfg, &seeds, &dir, args, &pool)?;
        let rows: Vec<RunRow> = summaries.iter().map(|s| RunRow::from_summary(&label, s)).collect();
        all.extend(rows.iter().cloned());
        groups.push((label, rows));
    }
    write_rows(&args.out.join("comparison.csv"), &all)?;
    write_aggregate(&args.out.join("medians.csv"), &groups)?;
    write_run_log(
        &args.out,
        "compare",
        &[
            format!("variants: {}", groups.len()),
            format!("seeds: {seeds:?}"),
            format!("workers: {}", args.workers),
        ],
        started,
    )
}

pub fn sweep(args: &CommonArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = load_config(args)?;
    let seeds = seed_list(args, &cfg)?;
    prepare_dir(&args.out, &["sweep.csv", "aggregate.csv"], args.force)?;
    let pool = pool(args.workers)?;
    let label = format!(
        "{}-{}",
        cfg.protocol.as_str(),
        cfg.scheduler.algorithm.as_str()
    );
    let summaries = run_seeds(&cfg, &seeds, &args.out, args, &pool)?;
    let rows: Vec<RunRow> = summaries.iter().map(|s| RunRow::from_summary(&label, s)).collect();
    write_rows(&args.out.join("sweep.csv"), &rows)?;
    write_aggregate(&args.out.join("aggregate.csv"), &[(label, rows)])?;
    write_run_log(
        &args.out,
        "sweep",
        &[format!("seeds: {seeds:?}"), format!("workers: {}", args.workers)],
        started,
    )
}
