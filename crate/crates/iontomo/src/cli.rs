//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iontomo_core::photon_stats::{BrightChannel, FluorescenceParams};
use serde::Serialize;

use crate::bench::{
    readout_error_rates, run_both_shots_modes, run_distribution_study, run_tomography_benchmark, write_report,
    BenchmarkConfig, ErrorSource, ShotsMode,
};
use crate::error::Result;
use crate::formats::{format_sig, to_json, write_file};

/// Directory that relative `--output` paths resolve against; when set, a
/// subcommand run without `--output` writes `<subcommand>.<format>` there.
pub const OUTPUT_DIR_ENV: &str = "IONTOMO_OUTPUT_DIR";

const SYMBOLS: &str = "\
Symbols:
  --t          t     detection time
  --lambda     λ     decay rate of the dark level (1/T₁)
  --lambda-b   λ_B   detected fluorescence rate of the bright level
  --lambda-d   λ_D   dark and background count rate
  --p10        p₁₀   probability of reading 1 for |0⟩
  --p01        p₀₁   probability of reading 0 for |1⟩

JSON output keeps full precision; CSV and summary lines use --precision.";

#[derive(Debug, Parser)]
#[command(name = "iontomo", version, about = "Ion-qubit readout statistics and fuzzy-measurement tomography")]
#[command(after_help = SYMBOLS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bright and dark count distributions, threshold and error rates.
    #[command(allow_negative_numbers = true)]
    Distributions {
        #[command(flatten)]
        fluorescence: FluorescenceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Readout error probabilities p10 and p01 at the threshold k0.
    #[command(allow_negative_numbers = true)]
    Errors {
        #[command(flatten)]
        fluorescence: FluorescenceArgs,
        /// Use this threshold instead of the automatic choice.
        #[arg(long)]
        k0: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tomography of Haar-random pure states under fuzzy and standard models.
    #[command(allow_negative_numbers = true)]
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct FluorescenceArgs {
    #[arg(long = "t", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.001)]
    pub lambda: f64,
    #[arg(long = "lambda-d", default_value_t = 0.2)]
    pub lambda_d: f64,
    #[arg(long = "lambda-b", default_value_t = 25.0)]
    pub lambda_b: f64,
    /// Add the background rate to the bright-state count mean.
    #[arg(long)]
    pub bright_includes_noise: bool,
}

impl FluorescenceArgs {
    fn params(&self) -> Result<FluorescenceParams> {
        Ok(FluorescenceParams::new(self.t, self.lambda, self.lambda_b, self.lambda_d)?)
    }

    fn channel(&self) -> BrightChannel {
        if self.bright_includes_noise {
            BrightChannel::WithBackground
        } else {
            BrightChannel::FluorescenceOnly
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Significant digits for CSV and summary output.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShotsModeArg {
    Total,
    PerBasis,
    Both,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, default_value_t = 2)]
    pub qubits: usize,
    #[arg(long, default_value_t = 200)]
    pub states: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub shots: u64,
    #[arg(long, value_enum, default_value_t = ShotsModeArg::Total)]
    pub shots_mode: ShotsModeArg,
    /// Readout error p10; with --p01 it replaces the photon-statistics model.
    #[arg(long, requires = "p01")]
    pub p10: Option<f64>,
    #[arg(long, requires = "p10")]
    pub p01: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reconstruction rank, or "full".
    #[arg(long, default_value = "1", value_parser = parse_rank)]
    pub rank: RankArg,
    /// Leave non-converged states out of the means.
    #[arg(long)]
    pub exclude_nonconverged: bool,
    #[command(flatten)]
    pub fluorescence: FluorescenceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankArg(pub Option<usize>);

fn parse_rank(s: &str) -> std::result::Result<RankArg, String> {
    if s == "full" {
        return Ok(RankArg(None));
    }
    match s.parse::<usize>() {
        Ok(r) if r >= 1 => Ok(RankArg(Some(r))),
        _ => Err(format!("expected a positive integer or \"full\", got {s:?}")),
    }
}

impl BenchmarkArgs {
    fn config(&self) -> Result<BenchmarkConfig> {
        let error_source = match (self.p10, self.p01) {
            (Some(p10), Some(p01)) => ErrorSource::Direct { p10, p01 },
            _ => ErrorSource::Fluorescence {
                params: self.fluorescence.params()?,
                bright_channel: self.fluorescence.channel(),
            },
        };
        let config = BenchmarkConfig {
            n_qubits: self.qubits,
            n_states: self.states,
            shots: self.shots,
            shots_mode: match self.shots_mode {
                ShotsModeArg::PerBasis => ShotsMode::PerBasis,
                _ => ShotsMode::Total,
            },
            error_source,
            master_seed: self.seed,
            rank: self.rank.0,
            exclude_nonconverged: self.exclude_nonconverged,
            output_path: None,
        };
        config.validate()?;
        if self.shots_mode == ShotsModeArg::Both {
            BenchmarkConfig {
                shots_mode: ShotsMode::PerBasis,
                ..config.clone()
            }
            .validate()?;
        }
        Ok(config)
    }
}

/// Resolves where output goes: `None` means standard output.
fn destination(output: &OutputArgs, name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let ext = match output.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    match (&output.output, dir) {
        (Some(path), Some(dir)) if path.is_relative() => Some(dir.join(path)),
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{name}.{ext}"))),
        (None, None) => None,
    }
}

/// Writes `body` to the destination, or returns it for standard output.
/// A written file is acknowledged with `summary` on standard output.
fn emit(output: &OutputArgs, name: &str, body: String, summary: String) -> Result<String> {
    match destination(output, name) {
        Some(path) => {
            write_file(&path, body.as_bytes())?;
            Ok(format!("{summary} output={}\n", path.display()))
        }
        None => Ok(body),
    }
}

fn render<T: Serialize>(output: &OutputArgs, value: &T, csv: impl FnOnce(usize) -> Result<String>) -> Result<String> {
    match output.format {
        Format::Json => Ok(to_json(value)? + "\n"),
        Format::Csv => csv(output.precision as usize),
    }
}

/// Runs a parsed invocation and returns what goes to standard output.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Distributions { fluorescence, output } => {
            let study = run_distribution_study(&fluorescence.params()?, fluorescence.channel())?;
            let digits = output.precision as usize;
            let summary = format!(
                "k0={} p10={} p01={}",
                study.error_model.k0,
                format_sig(study.error_model.p10, digits),
                format_sig(study.error_model.p01, digits)
            );
            let body = render(output, &study, |d| study.to_csv(d))?;
            emit(output, "distributions", body, summary)
        }
        Command::Errors { fluorescence, k0, output } => {
            let report = readout_error_rates(&fluorescence.params()?, fluorescence.channel(), *k0)?;
            let digits = output.precision as usize;
            let summary = format!(
                "k0={} p10={} p01={}",
                report.k0,
                format_sig(report.p10, digits),
                format_sig(report.p01, digits)
            );
            let body = render(output, &report, |d| report.to_csv(d))?;
            emit(output, "errors", body, summary)
        }
        Command::Benchmark(args) => {
            let config = args.config()?;
            let output = &args.output;
            let digits = output.precision as usize;
            let ratio = |r: Option<f64>| r.map_or_else(|| "undefined".to_string(), |r| format_sig(r, digits));
            let destination = destination(output, "benchmark");
            if args.shots_mode == ShotsModeArg::Both {
                let comparison = run_both_shots_modes(&config)?;
                let summary = format!(
                    "ratio_total={} ratio_per_basis={}",
                    ratio(comparison.total.ratio),
                    ratio(comparison.per_basis.ratio)
                );
                match (output.format, destination) {
                    (Format::Json, Some(path)) => {
                        comparison.write(&path, digits)?;
                        Ok(format!("{summary} output={}\n", path.display()))
                    }
                    _ => {
                        let body = render(output, &comparison, |d| comparison.to_csv(d))?;
                        emit(output, "benchmark", body, summary)
                    }
                }
            } else {
                let report = run_tomography_benchmark(&config)?;
                let summary = format!(
                    "ratio={} mean_fuzzy={} mean_standard={} non_converged={}",
                    ratio(report.ratio),
                    format_sig(report.fuzzy.mean, digits),
                    format_sig(report.standard.mean, digits),
                    report.non_converged
                );
                match (output.format, destination) {
                    (Format::Json, Some(path)) => {
                        write_report(&path, &report, digits)?;
                        Ok(format!("{summary} output={}\n", path.display()))
                    }
                    _ => {
                        let body = render(output, &report, |d| report.to_csv(d))?;
                        emit(output, "benchmark", body, summary)
                    }
                }
            }
        }
    }
}

/// Single-line error message: `error: <kind>: <message>`.
pub fn error_line(kind: &str, message: &str) -> String {
    let flat: Vec<&str> = message.split_whitespace().collect();
    format!("error: {kind}: {}", flat.join(" "))
}
