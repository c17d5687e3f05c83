//! `ablab`: scenario-driven front end to the `ablab` library.
//!
//! Exit status: 0 when every requested study passes, 2 for an invalid
//! scenario or command line, 3 when a study fails a check or cannot be
//! evaluated, 1 for I/O errors.

mod config;
mod report;
mod studies;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::{load_scenario, schema_json, ConfigError, Study};

#[derive(Parser)]
#[command(name = "ablab", version, about = "Aharonov–Bohm phase, field-energy and QED toy-model studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for report files.
    #[arg(long, global = true, value_name = "DIR", env = "ABLAB_OUT_DIR", default_value = "reports")]
    out: PathBuf,

    /// Run only this study.
    #[arg(long, global = true, value_name = "NAME")]
    study: Option<String>,

    /// Dotted-path edit applied to the scenario before validation, e.g. `solenoid.radius=0.2`.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Multiplies every upper-bound tolerance of the checks.
    #[arg(long, global = true, value_name = "FACTOR", default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Path phases in the Coulomb gauge.
    Phase,
    /// Path phases under the configured gauge functions.
    GaugeScan,
    /// Energy studies: energy, energy-grid, gauge-variance.
    Energy,
    /// Mode-model studies: qed-convergence, qed-exact, entanglement.
    Qed,
    /// Every study listed in the scenario, plus an aggregate report.
    Report,
    /// Check the scenario against the schema without computing anything.
    Validate {
        /// Print the JSON schema of the scenario format and exit.
        #[arg(long)]
        print_schema: bool,
    },
}

impl Command {
    fn family(self) -> &'static [Study] {
        match self {
            Command::Phase => &[Study::Phase],
            Command::GaugeScan => &[Study::GaugeScan],
            Command::Energy => &[Study::Energy, Study::EnergyGrid, Study::GaugeVariance],
            Command::Qed => &[Study::QedConvergence, Study::QedExact, Study::Entanglement],
            Command::Report => &Study::ALL,
            Command::Validate { .. } => &[],
        }
    }
}

/// Bad command line or scenario contents: exit 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug)]
struct StudyError {
    study: Study,
    source: ablab::Error,
}

impl fmt::Display for StudyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "study {}: {}", self.study, self.source)
    }
}

impl std::error::Error for StudyError {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.is::<ConfigError>() || e.is::<UsageError>() {
        return 2;
    }
    if let Some(StudyError { source, .. }) = e.downcast_ref::<StudyError>() {
        return match source {
            ablab::Error::NonFinite(_) | ablab::Error::NotHermitian(_) => 3,
            _ => 2,
        };
    }
    1
}

fn select(cli: &Cli, scenario: &config::ScenarioConfig) -> anyhow::Result<Vec<Study>> {
    let family = cli.command.family();
    if let Some(name) = &cli.study {
        let study = Study::from_name(name).ok_or_else(|| {
            let names: Vec<&str> = Study::ALL.iter().map(|s| s.name()).collect();
            UsageError(format!("unknown study '{name}' (expected one of {})", names.join(", ")))
        })?;
        if !family.contains(&study) {
            return Err(UsageError(format!("study '{name}' does not belong to this subcommand")).into());
        }
        return Ok(vec![study]);
    }
    if family.len() == 1 {
        return Ok(family.to_vec());
    }
    let listed: Vec<Study> = scenario.scenario.studies.iter().copied().filter(|s| family.contains(s)).collect();
    if listed.is_empty() {
        return Err(UsageError(format!(
            "scenario '{}' lists no studies for this subcommand; pass --study",
            scenario.scenario.name
        ))
        .into());
    }
    let mut unique = Vec::new();
    for s in listed {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }
    Ok(unique)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Command::Validate { print_schema: true } = cli.command {
        print!("{}", schema_json());
        return Ok(true);
    }
    if !(cli.tolerance_scale.is_finite() && cli.tolerance_scale > 0.0) {
        return Err(UsageError(format!("--tolerance-scale must be positive, got {}", cli.tolerance_scale)).into());
    }
    let path = cli.config.as_ref().ok_or_else(|| UsageError("--config PATH is required".into()))?;
    let scenario = load_scenario(path, &cli.overrides)?;
    if let Command::Validate { .. } = cli.command {
        println!("{}: valid scenario '{}'", path.display(), scenario.scenario.name);
        return Ok(true);
    }
    let studies = select(cli, &scenario)?;
    let results: Vec<(Study, f64, ablab::Result<studies::StudyOutput>)> = studies
        .par_iter()
        .map(|&s| {
            let start = Instant::now();
            let out = studies::run_study(s, &scenario, cli.tolerance_scale);
            (s, start.elapsed().as_secs_f64(), out)
        })
        .collect();

    let name = &scenario.scenario.name;
    let mut outs = Vec::new();
    let mut first_error = None;
    for (study, elapsed, result) in results {
        match result {
            Ok(out) => {
                let meta = report::Meta { config_path: path, overrides: &cli.overrides, elapsed_seconds: elapsed };
                let files = report::write_study(&cli.out, name, cli.tolerance_scale, &out, &meta)?;
                println!(
                    "{} {study} ({} checks, {elapsed:.2}s) -> {}",
                    if out.passed { "PASS" } else { "FAIL" },
                    out.checks.len(),
                    files[1].display()
                );
                for c in out.failed_checks() {
                    eprintln!("study {study} failed check '{}': {:e} {} {:e}", c.name, c.value, c.comparison, c.threshold);
                }
                outs.push(out);
            }
            Err(source) => {
                // the first error is printed by main
                if first_error.is_some() {
                    eprintln!("error: study {study}: {source}");
                } else {
                    first_error = Some(StudyError { study, source });
                }
            }
        }
    }
    if cli.command == Command::Report {
        report::write_aggregate(&cli.out, name, cli.tolerance_scale, &outs)?;
    }
    if let Some(e) = first_error {
        return Err(e.into());
    }
    Ok(outs.iter().all(|o| o.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
