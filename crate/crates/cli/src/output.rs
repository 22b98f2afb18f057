use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use hfl_core::report::{emit_csv, write_atomic, ReportCache, ReportError};
use hfl_core::{Error, RunReport};
use serde_json::Value;

use crate::commands::{dispatch, Session};
use crate::Cli;

enum Failure {
    /// Rejected input or parameters, or a failing module operation.
    Core(Error),
    /// Writing results failed.
    Output(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        Failure::Core(e.into())
    }
}

pub fn run(cli: Cli) -> ExitCode {
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Core(e)) => {
            eprintln!("hfl: error[{}]: {e}", e.code());
            ExitCode::from(2)
        }
        Err(Failure::Output(msg)) => {
            eprintln!("hfl: error[output]: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
            .map_err(|e| Failure::Output(e.to_string()))?;
    }
    let session = Session {
        seed: cli.seed,
        jobs: cli.jobs.map(|j| j as usize),
        out: cli.out.clone(),
        cache: ReportCache::from_env(),
    };
    let start = Instant::now();
    let outcome = dispatch(&session, &cli.command)?;
    let elapsed = start.elapsed().as_secs_f64();
    let report = &outcome.report;

    // Everything is rendered before anything is written.
    let json = report.to_json()?;
    let csv = cli.csv.as_deref().map(|name| emit_csv(report, name)).transpose()?;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    if let Some(dir) = &cli.out {
        let slug = report.config.kind.replace(' ', "-");
        files.push((dir.join(format!("{slug}.json")), json.clone()));
        for name in report.tables.keys() {
            files.push((dir.join(format!("{slug}.{name}.csv")), emit_csv(report, name)?));
        }
        for (suffix, contents) in artifacts(report) {
            files.push((dir.join(format!("{slug}.{suffix}")), contents));
        }
        let timing = serde_json::json!({
            "kind": report.config.kind,
            "cache_key": outcome.key,
            "cached": outcome.cached,
            "wall_clock_seconds": elapsed,
        });
        let timing = serde_json::to_string_pretty(&timing).expect("serializable") + "\n";
        files.push((dir.join(format!("{slug}.timing.json")), timing));
    }

    if let (Some(cache), false) = (&session.cache, outcome.cached) {
        cache.store(&outcome.key, &json).map_err(|e| Failure::Output(e.to_string()))?;
    }
    for (path, contents) in &files {
        write(path, contents)?;
    }
    let mut stdout = std::io::stdout().lock();
    let printed = match (&csv, &cli.out) {
        (Some(text), _) => Some(text),
        (None, None) => Some(&json),
        (None, Some(_)) => None,
    };
    if let Some(text) = printed {
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Output(e.to_string()))?;
    }

    let failed = report.verdicts.iter().any(|v| v.name == "suite" && v.outcome == "fail");
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    write_atomic(path, contents.as_bytes()).map_err(|e| Failure::Output(e.to_string()))
}

/// Files that can be fed back to other subcommands.
fn artifacts(report: &RunReport) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if let Some(Value::String(edges)) = report.results.get("edge_list") {
        out.push(("edges.txt", edges.clone()));
    }
    for (key, suffix) in [("labelling", "labelling.json"), ("presentation", "presentation.json")] {
        if let Some(v) = report.results.get(key) {
            out.push((suffix, serde_json::to_string_pretty(v).expect("serializable") + "\n"));
        }
    }
    out
}
