//! Parameter sweeps: the Cartesian product of every list-valued entry in
//! the config becomes a set of cells, each executed as an independent run
//! in its own directory on a bounded worker pool. Failures are recorded and
//! the sweep continues; aggregation collects per-cell metrics and fits an
//! order law where the experiment defines one.

use crate::config::{validate, ExperimentKind, HarnessKind, RunConfig, ScalarOrList};
use crate::errors::{CliError, CliResult};
use crate::output::{ensure_dir, write_error_record, write_json, write_manifest};
use crate::run;
use qhdlab::fit::fit_order;
use serde_json::json;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct Cell {
    pub index: usize,
    pub eps: f64,
    pub dt: f64,
    pub config: RunConfig,
}

#[derive(Debug)]
pub struct CellResult {
    pub index: usize,
    pub eps: f64,
    pub dt: f64,
    pub status: &'static str,
    pub exit_code: i32,
    pub message: String,
    pub metrics: Option<serde_json::Value>,
}

/// Expands the list-valued parameters into cells. At least one parameter
/// must be a list, and every list must be non-empty.
pub fn expand(config: &RunConfig) -> CliResult<Vec<Cell>> {
    let eps_values = config.model.eps.values();
    let dt_values = config.time.dt.values();
    if eps_values.is_empty() {
        return Err(CliError::Validation("eps list must not be empty".into()));
    }
    if dt_values.is_empty() {
        return Err(CliError::Validation("dt list must not be empty".into()));
    }
    if !config.model.eps.is_list() && !config.time.dt.is_list() {
        return Err(CliError::Validation(
            "sweep needs at least one list-valued parameter (eps or dt)".into(),
        ));
    }

    let mut cells = Vec::new();
    for &eps in &eps_values {
        for &dt in &dt_values {
            let mut cfg = config.clone();
            cfg.model.eps = ScalarOrList::One(eps);
            cfg.time.dt = ScalarOrList::One(dt);
            cells.push(Cell { index: cells.len(), eps, dt, config: cfg });
        }
    }
    Ok(cells)
}

fn run_cell(cell: &Cell, dir: &Path, seed: Option<u64>, override_cfl: bool) -> CellResult {
    let started = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| -> CliResult<run::RunOutput> {
        let v = validate(cell.config.clone(), seed)?;
        ensure_dir(dir)?;
        let out = run::execute(&v, dir, override_cfl)?;
        write_manifest(
            dir,
            &v.config,
            &v.kind.name(),
            v.seed,
            started.elapsed().as_secs_f64(),
            "ok",
        )?;
        Ok(out)
    }));

    match outcome {
        Ok(Ok(out)) => CellResult {
            index: cell.index,
            eps: cell.eps,
            dt: cell.dt,
            status: "ok",
            exit_code: 0,
            message: String::new(),
            metrics: Some(out.metrics),
        },
        Ok(Err(err)) => {
            let _ = ensure_dir(dir);
            write_error_record(dir, &err);
            CellResult {
                index: cell.index,
                eps: cell.eps,
                dt: cell.dt,
                status: err.kind_name(),
                exit_code: err.exit_code(),
                message: err.to_string(),
                metrics: None,
            }
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            let err = CliError::Crash(format!("cell panicked: {message}"));
            let _ = ensure_dir(dir);
            write_error_record(dir, &err);
            CellResult {
                index: cell.index,
                eps: cell.eps,
                dt: cell.dt,
                status: "crash",
                exit_code: 1,
                message,
                metrics: None,
            }
        }
    }
}

/// Order fit over cell results where the experiment defines one: the
/// eps-refinement harnesses fit their total error against eps.
fn aggregate_fit(kind: ExperimentKind, results: &[CellResult]) -> Option<serde_json::Value> {
    if !matches!(
        kind,
        ExperimentKind::Harness(HarnessKind::EulerLimit)
            | ExperimentKind::Harness(HarnessKind::Transonic)
    ) {
        return None;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in results {
        let Some(metrics) = &r.metrics else { continue };
        // each single-eps harness cell reports its points; use the total of
        // the last one (the final checkpoint)
        let total = metrics
            .get("points")
            .and_then(|p| p.as_array())
            .and_then(|a| a.last())
            .and_then(|p| p.get("total").or_else(|| p.get("density_error")))
            .and_then(|t| t.as_f64());
        if let Some(t) = total {
            xs.push(r.eps);
            ys.push(t);
        }
    }
    if xs.len() < 3 {
        return None;
    }
    fit_order(&xs, &ys).ok().map(|f| json!({ "eps_order": f, "cells": xs.len() }))
}

pub struct SweepOutcome {
    pub exit_code: i32,
    pub ok: usize,
    pub failed: usize,
}

pub fn execute(
    config: &RunConfig,
    out_dir: &Path,
    jobs: Option<usize>,
    seed: Option<u64>,
    override_cfl: bool,
) -> CliResult<SweepOutcome> {
    // validate the base config once up front so a malformed sweep fails
    // fast, before any cell directories are created
    let base = validate(config.clone(), seed)?;
    let cells = expand(config)?;
    ensure_dir(out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Crash(format!("cannot build worker pool: {e}")))?;

    let started = Instant::now();
    let mut results: Vec<CellResult> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|cell| {
                let dir = out_dir.join(format!("cell_{:03}", cell.index));
                run_cell(cell, &dir, seed, override_cfl)
            })
            .collect()
    });
    results.sort_by_key(|r| r.index);

    let mut table = String::from("cell,eps,dt,exit_code\n");
    for r in &results {
        table.push_str(&format!(
            "{},{:.17e},{:.17e},{}\n",
            r.index, r.eps, r.dt, r.exit_code
        ));
    }
    std::fs::write(out_dir.join("cells.csv"), table)
        .map_err(|e| CliError::Crash(format!("writing cells.csv: {e}")))?;

    let cell_summaries: Vec<serde_json::Value> = results
        .iter()
        .map(|r| {
            json!({
                "cell": r.index,
                "dir": format!("cell_{:03}", r.index),
                "eps": r.eps,
                "dt": r.dt,
                "status": r.status,
                "exit_code": r.exit_code,
                "message": r.message,
                "metrics": r.metrics,
            })
        })
        .collect();

    let fit = aggregate_fit(base.kind, &results);
    if let Some(f) = &fit {
        write_json(out_dir, "fit.json", f)?;
    }

    let ok = results.iter().filter(|r| r.exit_code == 0).count();
    let failed = results.len() - ok;
    let exit_code = if results.iter().any(|r| r.status == "crash") {
        1
    } else {
        results.iter().map(|r| r.exit_code).max().unwrap_or(0)
    };

    let report = json!({
        "cells": cell_summaries,
        "ok": ok,
        "failed": failed,
        "exit_code": exit_code,
        "fit": fit,
    });
    write_json(out_dir, "sweep.json", &report)?;
    write_manifest(
        out_dir,
        config,
        &base.kind.name(),
        base.seed,
        started.elapsed().as_secs_f64(),
        if failed == 0 { "ok" } else { "partial" },
    )?;

    Ok(SweepOutcome { exit_code, ok, failed })
}
