use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qgc_cli::catalog::{self, BUNDLED};
use qgc_cli::config::ScenarioConfig;
use qgc_cli::scenario::{self, Report, RunError};
use qgc_core::analysis::rows_to_text;

/// Scenario runner for bilinear control on quantum graphs.
///
/// Exit codes: 0 every check passed, 1 a check failed or a run error
/// occurred, 2 the configuration or command line is invalid.
#[derive(Parser)]
#[command(name = "qgc", version)]
struct Cli {
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a bundled scenario by name.
    Run {
        config: String,
        /// Output directory (default: `[output] dir`, then out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List bundled scenarios.
    List,
    /// Run only the assumption checks of a scenario.
    Audit {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for symmetry with `run`; audits use no randomness.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn print_report(report: &Report, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("report serializes"));
        return;
    }
    print!("{}", rows_to_text(&report.checks));
    println!(
        "{} ({}): {}; {} files in {}",
        report.scenario,
        report.kind,
        if report.pass() { "PASS" } else { "FAIL" },
        report.artifacts.len(),
        report.out_dir.display()
    );
}

fn list(json: bool) -> ExitCode {
    let mut entries = Vec::new();
    for b in BUNDLED {
        match ScenarioConfig::parse(b.source, std::path::Path::new(".")) {
            Ok(cfg) => entries.push((b.name, cfg.kind.as_str(), cfg.description)),
            Err(e) => {
                eprintln!("error: bundled scenario {}: {e}", b.name);
                return ExitCode::from(2);
            }
        }
    }
    if json {
        let v: Vec<serde_json::Value> = entries
            .iter()
            .map(|(name, kind, desc)| serde_json::json!({ "name": name, "kind": kind, "description": desc }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&v).expect("catalog serializes"));
    } else {
        let width = entries.iter().map(|e| e.0.len()).max().unwrap_or(0);
        for (name, kind, desc) in entries {
            println!("{name:<width$}  {kind:<18}  {desc}");
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::List => return list(cli.json),
        Command::Run { config, out, seed } => catalog::resolve(config)
            .map_err(RunError::from)
            .and_then(|cfg| scenario::run(&cfg, out.as_deref(), *seed)),
        Command::Audit { config, out, .. } => catalog::resolve(config)
            .map_err(RunError::from)
            .and_then(|cfg| scenario::audit(&cfg, out.as_deref())),
    };
    match outcome {
        Ok(report) => {
            print_report(&report, cli.json);
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if cli.json {
                println!("{}", serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
