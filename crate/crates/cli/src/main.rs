//! `qhdlab`: drive the dispersive hydrodynamics solvers from config files.
//!
//! Subcommands: `run` (one experiment), `sweep` (Cartesian product of
//! list-valued parameters), `verify` (named check suite), and
//! `list-experiments`. Exit codes: 0 success, 2 validation failure,
//! 3 solver breakdown, 4 assertion failure, 1 crash.

mod config;
mod errors;
mod output;
mod run;
mod sweep;
mod verify;

use clap::{Args, Parser, Subcommand};
use config::{validate, RunConfig, EXPERIMENT_NAMES, FAMILY_NAMES, LAW_NAMES};
use errors::CliResult;
use output::{say, write_error_record, write_manifest};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable holding the default output root.
const OUT_ENV: &str = "QHDLAB_OUT";

#[derive(Parser)]
#[command(name = "qhdlab", version, about = "Dispersive hydrodynamics laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $QHDLAB_OUT/<config stem> or runs/<stem>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep cells (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the seed recorded in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the time-step stability gates.
    #[arg(long)]
    override_cfl: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name (see list-experiments).
    suite: String,
    /// Output directory for the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment from a config file.
    Run(RunArgs),
    /// Expand list-valued parameters into cells and run them all.
    Sweep(RunArgs),
    /// Run a named verification suite and write its JSON report.
    Verify(VerifyArgs),
    /// List experiment kinds, data families, laws, and verify suites.
    ListExperiments,
}

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

fn resolve_out(explicit: &Option<PathBuf>, config_path: &Path, suffix: &str) -> PathBuf {
    if let Some(dir) = explicit {
        return dir.clone();
    }
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    out_root().join(format!("{stem}{suffix}"))
}

fn cmd_run(args: &RunArgs) -> CliResult<i32> {
    let config = RunConfig::load(&args.config)?;
    let v = validate(config, args.seed)?;
    let dir = resolve_out(&args.out, &args.config, "");
    let started = Instant::now();

    match run::execute(&v, &dir, args.override_cfl) {
        Ok(_) => {
            write_manifest(&dir, &v.config, &v.kind.name(), v.seed, started.elapsed().as_secs_f64(), "ok")?;
            say(&format!("run complete: {}", dir.display()));
            Ok(0)
        }
        Err(err) => {
            // record the failure next to whatever partial outputs exist
            let _ = output::ensure_dir(&dir);
            write_error_record(&dir, &err);
            let _ = write_manifest(
                &dir,
                &v.config,
                &v.kind.name(),
                v.seed,
                started.elapsed().as_secs_f64(),
                err.kind_name(),
            );
            Err(err)
        }
    }
}

fn cmd_sweep(args: &RunArgs) -> CliResult<i32> {
    let config = RunConfig::load(&args.config)?;
    let dir = resolve_out(&args.out, &args.config, "_sweep");
    let outcome = sweep::execute(&config, &dir, args.jobs, args.seed, args.override_cfl)?;
    say(&format!(
        "sweep complete: {} ok, {} failed, report {}",
        outcome.ok,
        outcome.failed,
        dir.join("sweep.json").display()
    ));
    Ok(outcome.exit_code)
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<i32> {
    let dir = args.out.clone().unwrap_or_else(|| out_root().join("verify"));
    verify::execute(&args.suite, &dir)
}

fn cmd_list() -> i32 {
    say("experiments:");
    for name in EXPERIMENT_NAMES {
        say(&format!("  {name}"));
    }
    say("data families:");
    for name in FAMILY_NAMES {
        say(&format!("  {name}"));
    }
    say("laws:");
    for name in LAW_NAMES {
        say(&format!("  {name}"));
    }
    say("verify suites:");
    for name in qhdlab::suites::SUITE_NAMES {
        say(&format!("  {name}"));
    }
    0
}

fn dispatch(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::ListExperiments => Ok(cmd_list()),
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(&cli)));
    let code = match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            eprintln!("error: crashed: {message}");
            1
        }
    };
    std::process::exit(code);
}
