use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use minen_core::{ProtocolKind, SchedulerKind};

mod aggregate;
mod commands;
mod error;

#[derive(Parser)]
#[command(name = "minen", version, about = "Energy-aware WSN routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one network until it dies or hits the round cap.
    Run(CommonArgs),
    /// Run every configured variant over the same seeds.
    Compare(CommonArgs),
    /// Run one variant over a range of seeds in parallel.
    Sweep(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inclusive seed range, e.g. `1..10`.
    #[arg(long, value_parser = parse_seed_range)]
    pub seeds: Option<SeedRange>,
    #[arg(long)]
    pub protocol: Option<ProtocolKind>,
    #[arg(long)]
    pub scheduler: Option<SchedulerKind>,
    /// Worker threads for sweeps and comparisons.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
    /// Also write routes.jsonl with every round's head paths.
    #[arg(long)]
    pub trace_routes: bool,
}

/// Seeds of an inclusive `A..B` range; empty when `B < A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRange(pub Vec<u64>);

fn parse_seed_range(s: &str) -> Result<SeedRange, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    Ok(SeedRange((a..=b).collect()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Sweep(args) => commands::sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("minen: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CliError;

    #[test]
    fn seed_ranges_are_inclusive() {
        assert_eq!(parse_seed_range("1..3").unwrap().0, vec![1, 2, 3]);
        assert_eq!(parse_seed_range("4..4").unwrap().0, vec![4]);
        assert!(parse_seed_range("5..3").unwrap().0.is_empty());
        assert!(parse_seed_range("5").is_err());
        assert!(parse_seed_range("a..3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn io_errors_map_to_exit_three() {
        let e: CliError = std::io::Error::other("disk").into();
        assert_eq!(e.exit_code(), 3);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }
}
