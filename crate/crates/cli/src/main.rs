//! `fbk`: run registered scenarios or link files and print invariant reports.
//!
//! Exit codes: 0 success, 2 check mismatch, 3 invalid input,
//! 4 numerical failure, 5 unknown scenario. Usage errors count as invalid input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fbk_core::framedlink::SampledLoop;
use fbk_core::linkfile::run_link_file;
use fbk_core::report::InvariantReport;
use fbk_core::scenarios::{find, registry, Overrides, ScenarioOutcome};
use fbk_core::tracer::loop_csv;
use fbk_core::{Error, ErrorKind};

#[derive(Parser)]
#[command(
    name = "fbk",
    version,
    about = "Mod-2 invariants of framed links in spin manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario, or `all`.
    Scenario {
        name: String,
        /// Compare against the expected values; exit 2 on mismatch.
        #[arg(long)]
        check: bool,
        /// Override a setting, as key=value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Write each component as component_<i>.csv into this directory.
        #[arg(long, value_name = "DIR")]
        csv: Option<PathBuf>,
    },
    /// Compute the invariant of a framed link stored as JSON.
    Link {
        file: PathBuf,
        /// Tolerance override, as key=value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, value_name = "DIR")]
        csv: Option<PathBuf>,
    },
    /// List registered scenarios.
    List,
}

enum Failure {
    Mismatch,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn write_csv(dir: &Path, loops: &[SampledLoop]) -> Result<(), Error> {
    let io =
        |e: std::io::Error| Error::Parse(format!("cannot write CSV to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (i, l) in loops.iter().enumerate() {
        fs::write(dir.join(format!("component_{i}.csv")), loop_csv(l)).map_err(io)?;
    }
    Ok(())
}

/// Print to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn check(outcome: &ScenarioOutcome) -> bool {
    let bad = outcome.mismatches();
    for m in &bad {
        eprintln!("{}: {m}", outcome.name);
    }
    bad.is_empty()
}

fn scenario(name: &str, checking: bool, set: &[String], csv: Option<&Path>) -> Result<(), Failure> {
    let overrides = Overrides::parse(set)?;
    if name == "all" {
        let mut reports: Vec<InvariantReport> = Vec::new();
        let mut ok = true;
        for s in registry() {
            let out = s.run(&overrides)?;
            if let Some(dir) = csv {
                write_csv(&dir.join(s.name), &out.loops)?;
            }
            if checking {
                ok &= check(&out);
            }
            reports.push(out.report);
        }
        emit(&serde_json::to_string_pretty(&reports).expect("reports serialize"));
        return if ok { Ok(()) } else { Err(Failure::Mismatch) };
    }
    let out = find(name)?.run(&overrides)?;
    if let Some(dir) = csv {
        write_csv(dir, &out.loops)?;
    }
    emit(&out.report.to_json());
    if checking && !check(&out) {
        return Err(Failure::Mismatch);
    }
    Ok(())
}

fn link(file: &Path, set: &[String], csv: Option<&Path>) -> Result<(), Failure> {
    let overrides = Overrides::parse(set)?;
    let tol = overrides.tolerances()?;
    if !overrides.tolerances_only() {
        return Err(Failure::Error(Error::Validation {
            invariant: "link overrides are tolerances".into(),
            detail: "only tolerance keys apply to link files".into(),
        }));
    }
    let (report, link) = run_link_file(file, &tol)?;
    if let Some(dir) = csv {
        let loops: Vec<SampledLoop> = link.components().iter().map(|c| c.loop_.clone()).collect();
        write_csv(dir, &loops)?;
    }
    emit(&report.to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Scenario {
            name,
            check,
            set,
            csv,
        } => scenario(name, *check, set, csv.as_deref()),
        Command::Link { file, set, csv } => link(file, set, csv.as_deref()),
        Command::List => {
            let lines: Vec<String> = registry()
                .iter()
                .map(|s| format!("{:<28}{}", s.name, s.summary))
                .collect();
            emit(&lines.join("\n"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(2),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Input => 3,
                ErrorKind::Numerical => 4,
                ErrorKind::UnknownScenario => 5,
            })
        }
    }
}
