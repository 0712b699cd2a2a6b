//! Command-line front end: execute scenario files and the self-check suite.
//!
//! Exit status: `0` when every task ran and every check certified zero, `1`
//! when a task errored or a check found a nonzero witness, `2` for usage,
//! syntax, or I/O problems.  Reports go to stdout (or `--out`); timing notes
//! go to stderr so reports stay byte-deterministic.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use magrav::scenario::{self, Report, RunCfg, Scenario, SelfcheckCfg};

#[derive(Parser)]
#[command(
    name = "magrav",
    about = "Exact symbolic tensor calculus for metric-affine gravity",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and print its report.
    Run {
        /// Path to the scenario file.
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the JSON rendering instead of plain text.
        #[arg(long)]
        json: bool,
        /// Global zero-test seed (each task mixes in its position).
        #[arg(long, default_value_t = scenario::DEFAULT_SEED)]
        seed: u64,
        /// Default zero-test sample count (tasks may override).
        #[arg(long, default_value_t = scenario::DEFAULT_SAMPLES)]
        samples: usize,
        /// Run tasks one after another instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Run the built-in verification suite.
    Selfcheck {
        /// Emit the JSON rendering instead of plain text.
        #[arg(long)]
        json: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Perturb a gamma matrix so the Clifford check fails (negative
        /// control for the suite itself).
        #[arg(long, hide = true)]
        tamper_gamma: bool,
    },
}

fn emit(report: &Report, json: bool, out: Option<&Path>) -> std::io::Result<()> {
    let rendered = if json {
        report.render_json()
    } else {
        report.render_text()
    };
    match out {
        Some(path) => std::fs::write(path, rendered),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn log_timings(report: &Report) {
    for rec in &report.records {
        eprintln!(
            "[magrav] {} ({}): {:.3}s",
            rec.id,
            rec.op,
            rec.wall.as_secs_f64()
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, json, out) = match cli.command {
        Command::Run {
            file,
            out,
            json,
            seed,
            samples,
            serial,
        } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("magrav: cannot read `{}`: {e}", file.display());
                    return ExitCode::from(2);
                }
            };
            let title = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".to_string());
            let parsed = Scenario::parse(&text, &title);
            let scenario = match parsed {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("magrav: {}: {e}", file.display());
                    return ExitCode::from(2);
                }
            };
            let cfg = RunCfg {
                seed,
                samples,
                serial,
            };
            match scenario::run(&scenario, &cfg) {
                Ok(report) => (report, json, out),
                Err(e) => {
                    eprintln!("magrav: {}: {e}", file.display());
                    return ExitCode::from(2);
                }
            }
        }
        Command::Selfcheck {
            json,
            out,
            tamper_gamma,
        } => {
            let cfg = SelfcheckCfg { tamper_gamma };
            match scenario::selfcheck(&cfg) {
                Ok(report) => (report, json, out),
                Err(e) => {
                    eprintln!("magrav: selfcheck: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    };
    log_timings(&report);
    if let Err(e) = emit(&report, json, out.as_deref()) {
        eprintln!("magrav: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
