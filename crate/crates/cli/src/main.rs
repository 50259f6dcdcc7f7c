//! `geovisc`: batch driver for the geometry checks, jet diagnostics and
//! grid solvers.
//!
//! Exit codes: 0 when every suite passes, 1 when some suite fails, 2 for
//! usage errors (bad flags, unreadable or invalid config), 3 for runtime
//! errors.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use config::JobConfig;
use output::{Outcome, Table};

#[derive(Parser)]
#[command(name = "geovisc", version, about = "Geometry, jet and viscosity-solver checks on model manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON job description.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSV and JSON files.
    #[arg(long, global = true, value_name = "DIR", default_value = "geovisc-out")]
    out: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Transport, exp/log and curvature invariants.
    GeometryCheck,
    /// Sign and bound of the transported Hessian of d².
    HessianSign,
    /// Doubling-of-variables trace and (*) candidates.
    ComparisonDemo,
    /// Solve u + G(x, du, d²u) = 0 on a grid.
    Solve,
    /// Yamabe-type equation on the 2-sphere.
    Yamabe,
    /// Run every suite, including operator structure checks.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::GeometryCheck => "geometry-check",
            Self::HessianSign => "hessian-sign",
            Self::ComparisonDemo => "comparison-demo",
            Self::Solve => "solve",
            Self::Yamabe => "yamabe",
            Self::Report => "report",
        }
    }
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load_config(cli: &Cli) -> Result<JobConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => JobConfig::load(p).map_err(Failure::Usage)?,
        None => JobConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != cli.command.name() {
            return Err(Failure::Usage(anyhow::anyhow!(
                "config is for `{c}` but the subcommand is `{}`",
                cli.command.name()
            )));
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    Ok(cfg)
}

fn print(outcome: &Outcome) {
    for line in outcome.summary_lines() {
        println!("{line}");
    }
}

fn run_single(cli: &Cli, cfg: &JobConfig) -> anyhow::Result<bool> {
    let outcome = commands::run(cli.command.name(), cfg)?;
    let cfg_json = serde_json::to_value(cfg)?;
    outcome.write(&cli.out, &cfg_json, cfg.seed(), cfg.outputs.json.as_deref(), cfg.outputs.csv.as_deref())?;
    print(&outcome);
    Ok(outcome.pass())
}

#[derive(serde::Serialize)]
struct ReportRow {
    section: String,
    suite: String,
    pass: bool,
}

fn run_report(out_dir: &Path, cfg: &JobConfig) -> anyhow::Result<bool> {
    let mut sections = Vec::new();
    let mut rows = Vec::new();
    for (dir, command, job) in commands::report_jobs(cfg)? {
        eprintln!("report: running {dir}");
        let outcome = commands::run(command, &job).with_context(|| format!("report section `{dir}`"))?;
        outcome.write(&out_dir.join(dir), &serde_json::to_value(&job)?, job.seed(), None, None)?;
        print(&outcome);
        for s in &outcome.suites {
            rows.push(ReportRow { section: dir.into(), suite: s.name.clone(), pass: s.pass });
        }
        sections.push(json!({ "section": dir, "command": command, "pass": outcome.pass(), "suites": outcome.suites }));
    }
    let pass = rows.iter().all(|r| r.pass);
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{}/{}", r.section, r.suite)).collect();
    let report = json!({
        "command": "report",
        "seed": cfg.seed(),
        "config": cfg,
        "pass": pass,
        "failed": failed,
        "sections": sections,
    });
    std::fs::write(out_dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let table = Table::from_records("report.csv", &rows)?;
    std::fs::write(out_dir.join(&table.file), &table.bytes)?;
    println!("{} of {} suites passed", rows.len() - failed.len(), rows.len());
    Ok(pass)
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let cfg = load_config(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage(anyhow::anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Report => {
            std::fs::create_dir_all(&cli.out)
                .with_context(|| format!("cannot create {}", cli.out.display()))
                .map_err(Failure::Runtime)?;
            run_report(&cli.out, &cfg).map_err(Failure::Runtime)
        }
        _ => run_single(cli, &cfg).map_err(Failure::Runtime),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
