//! Command-line front end for `wiretap-core`.
//!
//! Every subcommand returns a [`RunReport`]; the binary prints it as JSON on
//! stdout. Failures print a JSON error with a category on stderr and exit
//! nonzero.

pub mod commands;
pub mod error;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wiretap_core::{CurveFamily, Family, ThresholdKind};

pub use error::{CliError, CliResult};
pub use report::RunReport;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "WIRETAP_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "wiretap-lab",
    version,
    about = "Private-information numerics for hybrid classical-quantum wiretap channels"
)]
pub struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degradability and capability flags of a channel.
    Classify(ClassifyArgs),
    /// Solve for a named threshold parameter.
    Threshold(ThresholdArgs),
    /// Tabulate a rate curve and write it as a `.dat` file.
    Curve(CurveArgs),
    /// Rate of a preprocessing scheme at one parameter value.
    Rate(RateArgs),
    /// Look for additivity violations on random qubit qcc channels.
    Additivity(AdditivityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// BPC(r) to Bob, BEC((1-r)^2) to Charlie.
    Bob,
    /// BSC(p) to Bob, BPC(1-2p) to Charlie.
    Eve,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Bob => Family::Bob,
            FamilyArg::Eve => Family::Eve,
        }
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("channel").required(true).args(["family", "config"]))]
pub struct ClassifyArgs {
    #[arg(long, value_enum, requires = "param")]
    pub family: Option<FamilyArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub param: Option<f64>,
    /// JSON channel description.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// bob_less_noisy, bob_more_capable, bob_degradable, eve_less_noisy or eve_degradable.
    pub kind: ThresholdKind,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// bob_n1, bob_n2_parity, eve_n1 or eve_n3_rep.
    pub family: CurveFamily,
    /// Parameter range as `start:end`.
    #[arg(long, value_parser = parse_range)]
    pub range: (f64, f64),
    #[arg(long, default_value_t = 0.0005)]
    pub step: f64,
    /// Output path; defaults to `<family>.dat`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    /// Two-use parity encoder (bob family).
    Parity,
    /// n-fold repetition with preprocessing noise (eve family).
    Rep,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, allow_negative_numbers = true)]
    pub param: f64,
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    /// Block length of the repetition scheme.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Fix the preprocessing noise instead of optimizing it.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeChannel {
    /// Random POVMs from the seeded generator.
    Random,
    /// Computational-basis measurement followed by BSC(0.1) to Bob and BEC(0.3) to Charlie.
    Classical,
}

#[derive(Debug, Args)]
pub struct AdditivityArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ProbeChannel::Random)]
    pub channel: ProbeChannel,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected start:end, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Applies [`THREADS_ENV`] to the global worker pool. Safe to call more
/// than once; only the first successful call takes effect.
pub fn init_thread_pool() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // An already-initialized pool (e.g. a second call in tests) is fine.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_args<I, S>(args: I) -> CliResult<RunReport>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli =
        Cli::try_parse_from(std::iter::once("wiretap-lab".to_string()).chain(args.iter().cloned()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, args.join(" "))
}

/// Runs a parsed command; `echo` is recorded verbatim in the report.
pub fn run(cli: &Cli, echo: String) -> CliResult<RunReport> {
    let start = Instant::now();
    let out = match &cli.command {
        Command::Classify(a) => commands::classify(a)?,
        Command::Threshold(a) => commands::threshold(a)?,
        Command::Curve(a) => commands::curve(a)?,
        Command::Rate(a) => commands::rate(a)?,
        Command::Additivity(a) => commands::additivity(a)?,
    };
    let report = RunReport {
        command: echo,
        parameters: out.parameters,
        results: out.results,
        version: env!("CARGO_PKG_VERSION"),
        seed: out.seed,
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    if let Some(path) = &cli.report {
        report::write_atomic(path, report.to_json().as_bytes())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parser() {
        assert_eq!(parse_range("0.52:0.55").unwrap(), (0.52, 0.55));
        assert!(parse_range("0.52").is_err());
        assert!(parse_range("a:0.5").is_err());
    }

    #[test]
    fn classify_needs_a_channel() {
        let err = run_args(["classify"]).unwrap_err();
        assert_eq!(err.category(), "usage");
        let err = run_args(["classify", "--family", "bob"]).unwrap_err();
        assert_eq!(err.category(), "usage");
    }

    #[test]
    fn unknown_threshold_is_a_usage_error() {
        let err = run_args(["threshold", "nonsense"]).unwrap_err();
        assert_eq!(err.category(), "usage");
        assert_eq!(err.exit_code(), 2);
    }
}
