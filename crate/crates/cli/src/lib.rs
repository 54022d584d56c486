//! Batch front end of the `sphavg` laboratory.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 infeasible scale.

// `!(x <= tol)` is the idiom for checks that NaN must fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::Parser;
use sphavg_core::pilot::PilotTable;
use sphavg_core::{Error, PILOT_TABLE};
use thiserror::Error as ThisError;

use args::{Cli, Command};
use commands::Outcome;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::InfeasibleScale { .. }) => EXIT_INFEASIBLE,
            CliError::Core(Error::SolverStall { .. }) => EXIT_VERIFICATION,
            CliError::Output { .. } => EXIT_VERIFICATION,
            _ => EXIT_USAGE,
        }
    }
}

/// Loads `--pilot` when it exists, else the built-in table. Under
/// `--refreeze` a missing file starts an empty table.
pub fn load_pilot(path: Option<&Path>, refreeze: bool) -> Result<PilotTable, CliError> {
    match path {
        Some(p) if p.exists() => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Ok(PilotTable::parse(&text)?)
        }
        Some(p) if !refreeze => Err(CliError::Usage(format!(
            "pilot file {} does not exist",
            p.display()
        ))),
        Some(_) => Ok(PilotTable::default()),
        None => Ok(PilotTable::parse(PILOT_TABLE)?),
    }
}

/// Runs one parsed command against `pilot`.
pub fn execute(command: &Command, pilot: &PilotTable, refreeze: bool) -> Result<Outcome, CliError> {
    match command {
        Command::VerifyGauss(a) => commands::verify_gauss(a),
        Command::Residual(a) => commands::residual(a, pilot, refreeze),
        Command::RatioSurvey(a) => commands::ratio_survey(a),
        Command::Decompose(a) => commands::decompose(a, pilot, refreeze),
        Command::MaximalSurvey(a) => commands::maximal_survey(a, pilot, refreeze),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })
}

fn write_outputs(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    let banner = (!cli.common.no_banner).then(|| {
        format!(
            "sphavg {} generated {}",
            cli.command.name(),
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        )
    });
    let io_err = |path: &str| {
        let path = path.to_string();
        move |source| CliError::Output { path, source }
    };
    match &cli.common.out {
        Some(p) => {
            let mut w = create(p)?;
            outcome
                .table
                .write_csv(&mut w, banner.as_deref())
                .and_then(|_| w.flush())
                .map_err(io_err(&p.display().to_string()))?;
        }
        None => {
            let stdout = io::stdout();
            outcome
                .table
                .write_csv(stdout.lock(), banner.as_deref())
                .map_err(io_err("stdout"))?;
        }
    }
    if let Some(p) = &cli.common.dat {
        let mut w = create(p)?;
        outcome
            .table
            .write_dat(&mut w, banner.as_deref())
            .and_then(|_| w.flush())
            .map_err(io_err(&p.display().to_string()))?;
    }
    Ok(())
}

fn refreeze(path: &Path, mut table: PilotTable, outcome: &Outcome) -> Result<(), CliError> {
    if table.keys().next().is_none() {
        table = PilotTable::parse(PILOT_TABLE)?;
    }
    for f in &outcome.frozen {
        table.set(&f.key, f.value, f.provenance.clone());
    }
    std::fs::write(path, table.render()).map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })
}

fn run_parsed(cli: &Cli) -> Result<i32, CliError> {
    if cli.common.refreeze && cli.common.pilot.is_none() {
        return Err(CliError::Usage("--refreeze needs --pilot PATH".into()));
    }
    let pilot = load_pilot(cli.common.pilot.as_deref(), cli.common.refreeze)?;
    let outcome = execute(&cli.command, &pilot, cli.common.refreeze)?;
    write_outputs(cli, &outcome)?;
    if cli.common.refreeze {
        let path = cli.common.pilot.as_deref().expect("checked above");
        refreeze(path, pilot, &outcome)?;
        eprintln!("froze {} value(s) into {}", outcome.frozen.len(), path.display());
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    Ok(if outcome.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}

/// Entry point shared by the binary and the tests.
pub fn run<I: IntoIterator<Item = OsString>>(argv: I) -> i32 {
    let argv = match args::expand_config(argv.into_iter().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_parsed(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
