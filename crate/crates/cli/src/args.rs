//! Command-line surface and `key = value` config-file merging.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use sphavg_core::decomposition::DEFAULT_COST_BUDGET;
use sphavg_core::ncmax::DEFAULT_TOL;
use sphavg_core::survey::Regime;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "sphavg",
    version,
    about = "Verification harness for discrete spherical averages and their multipliers",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// `key = value` file whose entries act as flags; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Whitespace-separated copy of the table for gnuplot.
    #[arg(long, global = true, value_name = "PATH")]
    pub dat: Option<PathBuf>,
    /// Omit the timestamp comment line so output is byte-reproducible.
    #[arg(long, global = true)]
    pub no_banner: bool,
    /// Pilot file with frozen regression values; the built-in table when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub pilot: Option<PathBuf>,
    /// Recompute the frozen values and write them into `--pilot`.
    #[arg(long, global = true)]
    pub refreeze: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Gauss-sum normalization and size bound over a (q, d) grid.
    VerifyGauss(GaussArgs),
    /// Residual of a symbol against its approximant, with its envelope.
    Residual(ResidualArgs),
    /// Lattice-point density ratio against the inverse sphere measure.
    RatioSurvey(RatioArgs),
    /// Major-arc, minor and error terms of the symbol decomposition.
    Decompose(DecomposeArgs),
    /// Empirical dyadic maximal ratios, scalar and matrix-valued.
    MaximalSurvey(MaximalArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyGauss(_) => "verify-gauss",
            Command::Residual(_) => "residual",
            Command::RatioSurvey(_) => "ratio-survey",
            Command::Decompose(_) => "decompose",
            Command::MaximalSurvey(_) => "maximal-survey",
        }
    }
}

pub const SUBCOMMANDS: [&str; 5] = [
    "verify-gauss",
    "residual",
    "ratio-survey",
    "decompose",
    "maximal-survey",
];

/// Comma-separated values with inclusive `a..b` ranges, e.g. `1,3..5`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T> FromStr for List<T>
where
    T: FromStr + Copy + PartialOrd + Into<u64> + TryFrom<u64>,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<T>()
                .map_err(|_| format!("'{}' is not a valid number", v.trim()))
        };
        let mut out = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            match part.split_once("..") {
                Some((lo, hi)) => {
                    let (lo, hi): (u64, u64) = (parse(lo)?.into(), parse(hi)?.into());
                    if lo > hi {
                        return Err(format!("empty range {lo}..{hi}"));
                    }
                    for v in lo..=hi {
                        out.push(T::try_from(v).map_err(|_| format!("{v} out of range"))?);
                    }
                }
                None => out.push(parse(part)?),
            }
        }
        if out.is_empty() {
            return Err("list is empty".into());
        }
        Ok(List(out))
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GaussArgs {
    /// Largest denominator q.
    #[arg(long, default_value_t = 12)]
    pub qmax: u64,
    /// Dimensions.
    #[arg(long, default_value = "1..8")]
    pub d: List<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct ResidualArgs {
    /// small, intermediate or folded.
    #[arg(long)]
    pub regime: Regime,
    #[arg(long)]
    pub d: usize,
    /// Squared radius; t^2 for the folded regime.
    #[arg(long)]
    pub lambda: u64,
    /// Pseudorandom frequencies in addition to the origin.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    /// Cap on the coefficient-extraction cost estimate d * lambda^2.
    #[arg(long, default_value_t = DEFAULT_COST_BUDGET)]
    pub budget: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RatioArgs {
    #[arg(long)]
    pub d: List<u32>,
    #[arg(long)]
    pub lambda: List<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub lambda: u64,
    /// Cutoff indices, each in 1..=floor(sqrt(lambda)) + 1.
    #[arg(long)]
    pub n: List<u64>,
    /// Pseudorandom frequencies in addition to the origin.
    #[arg(long, default_value_t = 3)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    /// Cap on the cost estimate d * lambda^2.
    #[arg(long, default_value_t = DEFAULT_COST_BUDGET)]
    pub budget: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MaximalArgs {
    /// Dimensions of the scalar survey.
    #[arg(long, default_value = "2..5")]
    pub dims: List<u32>,
    /// Torus side L of the scalar survey.
    #[arg(long, default_value_t = 32)]
    pub side: usize,
    /// Dyadic exponents m; the radii are t = 2^m.
    #[arg(long, default_value = "0..2")]
    pub scales: List<u32>,
    #[arg(long, default_value_t = 2)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Cap on the estimated FFT work, sites * log2(sites) * (scales + 1).
    #[arg(long, default_value_t = DEFAULT_COST_BUDGET)]
    pub budget: f64,
    /// Dimensions of the matrix-valued trials.
    #[arg(long, default_value = "2..3")]
    pub matrix_dims: List<u32>,
    #[arg(long, default_value_t = 10)]
    pub matrix_side: usize,
    /// Fiber order n of the matrix-valued trials.
    #[arg(long, default_value_t = 2)]
    pub matrix_n: usize,
    /// Matrix-valued trials per dimension; 0 disables them.
    #[arg(long, default_value_t = 1)]
    pub matrix_trials: usize,
    /// Relative duality-gap tolerance of the majorant solver.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

/// Splices `--config` entries into `argv` after the subcommand, so explicit
/// flags, which come later, override them.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = argv.into_iter();
    let bin = rest.next().unwrap_or_else(|| "sphavg".into());
    let mut args: Vec<OsString> = Vec::new();
    let mut config = None;
    while let Some(a) = rest.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let path = rest
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            args.push(a);
        }
    }
    let Some(path) = config else {
        let mut out = vec![bin];
        out.extend(args);
        return Ok(out);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let (command, flags) = parse_config(&text)?;
    let position = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let mut out = vec![bin];
    match position {
        Some(i) => {
            out.extend(args[..=i].iter().cloned());
            out.extend(flags);
            out.extend(args[i + 1..].iter().cloned());
        }
        None => {
            let command = command.ok_or_else(|| {
                CliError::Usage("no subcommand on the command line or in the config".into())
            })?;
            out.push(command.into());
            out.extend(flags);
            out.extend(args);
        }
    }
    Ok(out)
}

/// Returns the optional `command` entry and the remaining entries as flags.
fn parse_config(text: &str) -> Result<(Option<String>, Vec<OsString>), CliError> {
    let mut command = None;
    let mut flags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "command" {
            command = Some(value.to_string());
            continue;
        }
        match value {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                flags.push(format!("--{key}").into());
                flags.push(value.into());
            }
        }
    }
    Ok((command, flags))
}
