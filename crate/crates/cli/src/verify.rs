//! The `verify` subcommand: runs one named check suite and reports the
//! results as console lines plus a JSON report.

use crate::errors::{CliError, CliResult};
use crate::output::{ensure_dir, say, write_json};
use qhdlab::suites::{run_suite, SUITE_NAMES};
use std::path::Path;

pub fn execute(suite: &str, out_dir: &Path) -> CliResult<i32> {
    if !SUITE_NAMES.contains(&suite) {
        return Err(CliError::Validation(format!(
            "unknown suite {suite:?}; expected one of {}",
            SUITE_NAMES.join(", ")
        )));
    }

    let report = run_suite(suite).map_err(CliError::runtime_from)?;

    for check in &report.checks {
        let tag = if check.passed { "ok  " } else { "FAIL" };
        say(&format!("  {tag} {}: {}", check.name, check.detail));
    }
    say(&format!(
        "suite {}: {} ({} checks)",
        report.suite,
        if report.passed { "pass" } else { "FAIL" },
        report.checks.len()
    ));

    ensure_dir(out_dir)?;
    let path = write_json(out_dir, &format!("verify_{suite}.json"), &report)?;
    say(&format!("report: {}", path.display()));

    Ok(if report.passed { 0 } else { 4 })
}
