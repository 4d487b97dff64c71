//! `ffrace`: prime number races in 𝔽_q[T] from the command line.

mod commands;
mod output;
mod reproduce;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ffrace::densities::{AsymptoticMode, DEFAULT_DRAWS};
use ffrace::lfunctions::DEFAULT_DEGREE_CAP;
use ffrace::unitgroup::DEFAULT_PHI_CAP;
use output::{Format, RunInfo};

#[derive(Debug, Parser)]
#[command(name = "ffrace", version, about = "Prime number races in F_q[T]: characters, L-functions, biases and densities")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Field size (an odd prime).
    #[arg(long, global = true, default_value_t = 3)]
    pub q: u64,
    /// Modulus polynomial, e.g. "T^2+T+1".
    #[arg(long, global = true)]
    pub modulus: Option<String>,
    /// Output format; defaults to a table on a terminal and JSON otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for sampling paths.
    #[arg(long, global = true, env = "FFRACE_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest accepted φ(m).
    #[arg(long, global = true, default_value_t = DEFAULT_PHI_CAP)]
    pub phi_cap: u64,
    /// Largest accepted deg m for L-function work.
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE_CAP)]
    pub degree_cap: usize,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case", tag = "subcommand")]
pub enum Command {
    /// Character table modulo m.
    Chars {
        /// Columns to show; all units by default.
        #[arg(long)]
        classes: Option<String>,
    },
    /// L-polynomial coefficients and inverse zeros.
    Lfunc {
        /// A single character index.
        #[arg(long = "char")]
        character: Option<usize>,
    },
    /// Inverse zeros of modulus √q with N_m and the LI diagnostics.
    Zeros {
        #[arg(long = "char")]
        character: Option<usize>,
    },
    /// C_m, N_m, B_m and the covariance for a race.
    Bias {
        #[arg(long)]
        classes: String,
        /// Add main-term predictions for B_m.
        #[arg(long)]
        predictors: bool,
    },
    /// Density of the ordering E_{a_1} > … > E_{a_r}.
    Density {
        #[arg(long, value_enum, default_value_t = EngineArg::Asymptotic)]
        engine: EngineArg,
        #[arg(long)]
        classes: String,
        /// Monte Carlo draws.
        #[arg(long, default_value_t = DEFAULT_DRAWS)]
        draws: u64,
        /// Largest X for the counting engine.
        #[arg(long, default_value_t = 200)]
        xmax: usize,
        /// Terms kept by the asymptotic engine.
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
    },
    /// Exact normalized counts E_a(X) for X = 1..xmax.
    Race {
        #[arg(long)]
        classes: String,
        #[arg(long, default_value_t = 50)]
        xmax: usize,
        /// Compare against the periodic limit on LO:HI under both parity conventions.
        #[arg(long, value_parser = parse_window)]
        calibrate: Option<(usize, usize)>,
    },
    /// Regenerate the worked-example tables and check them against golden values.
    Reproduce {
        /// Tables to regenerate; all of them by default.
        #[arg(value_enum)]
        tables: Vec<reproduce::PaperTable>,
        /// Output directory for the artifacts.
        #[arg(long, default_value = "ffrace-reproduce")]
        out: std::path::PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Asymptotic,
    Mc,
    Periodic,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Full,
    FirstOrder,
    BOnly,
}

impl From<ModeArg> for AsymptoticMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => AsymptoticMode::Full,
            ModeArg::FirstOrder => AsymptoticMode::FirstOrder,
            ModeArg::BOnly => AsymptoticMode::BOnly,
        }
    }
}

fn parse_window(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo == 0 || lo > hi {
        return Err("need 1 ≤ LO ≤ HI".into());
    }
    Ok((lo, hi))
}

/// Bad input detected after argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use ffrace::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::ModulusTooLarge { .. } | E::DegreeCap { .. } | E::PeriodOverflow { .. } => 3,
                E::Numerical(_) => 4,
                E::InvalidField(_) | E::Parse { .. } | E::NotCoprime { .. } | E::Precondition(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the worker pool")?;
    }
    let format = Format::resolve(cli.global.format);
    let run_info = RunInfo {
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(&cli.command).to_string(),
        seed: cli.global.seed,
        config: serde_json::json!({ "global": &cli.global, "command": &cli.command }),
    };
    let report = match &cli.command {
        Command::Reproduce { tables, out } => return reproduce::run(tables, out, format, &run_info),
        cmd => commands::dispatch(&cli.global, cmd)?,
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    report.emit(format, &run_info, &mut lock)?;
    lock.flush()?;
    Ok(())
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Chars { .. } => "chars",
        Command::Lfunc { .. } => "lfunc",
        Command::Zeros { .. } => "zeros",
        Command::Bias { .. } => "bias",
        Command::Density { .. } => "density",
        Command::Race { .. } => "race",
        Command::Reproduce { .. } => "reproduce",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("30:44"), Ok((30, 44)));
        assert!(parse_window("44:30").is_err());
        assert!(parse_window("30").is_err());
    }

    #[test]
    fn exit_codes() {
        let cap = anyhow::Error::new(ffrace::Error::ModulusTooLarge { phi: 10, cap: 5 });
        assert_eq!(exit_code(&cap), 3);
        let num = anyhow::Error::new(ffrace::Error::Numerical("x".into())).context("finding zeros");
        assert_eq!(exit_code(&num), 4);
        assert_eq!(exit_code(&anyhow::Error::new(UsageError("bad".into()))), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }
}
