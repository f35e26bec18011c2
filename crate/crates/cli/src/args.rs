use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtwt_core::phase::{Mode, DEFAULT_RETRY_BUDGET};
use qtwt_core::pipeline::{BetaMode, NormalizationStrategy, PipelineConfig, Rounds, SweepParam};
use qtwt_core::sched::{AlphaMode, BoundsMode, Lateness};
use qtwt_core::state::DEFAULT_MAX_QUBITS;

use crate::error::CliError;

/// Environment variable overriding the qubit capacity.
pub const MAX_QUBITS_ENV: &str = "QTWT_MAX_QUBITS";

/// Longest grid accepted by `sweep`.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "qtwt",
    version,
    about = "Grover + cost-phase simulator for weighted tardiness scheduling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Brute-force optimum of an instance file.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        clamp: bool,
    },
    /// Simulate the pipeline and write the distribution and a summary.
    Qsim {
        instance: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the exact pipeline over a parameter grid.
    Sweep {
        instance: PathBuf,
        #[arg(long, value_enum)]
        param: ParamArg,
        /// `start:stop:step` (stop included) or a comma list.
        #[arg(long, value_name = "SPEC", allow_hyphen_values = true, value_parser = parse_grid)]
        grid: Grid,
        #[command(flatten)]
        sim: SimArgs,
        /// Output CSV file.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Compare the pipeline argmax with brute force on random instances.
    Validate {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Only keep instances with a single optimal schedule.
        #[arg(long)]
        unique: bool,
        #[command(flatten)]
        sim: SimArgs,
        /// Optional JSON summary file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// `auto` or a fixed number of Grover rounds.
    #[arg(long, default_value = "auto", value_parser = parse_rounds)]
    pub rounds: Rounds,
    #[arg(long, value_enum, default_value_t = NormArg::Minmax)]
    pub norm: NormArg,
    /// `random`, `best-second` or a number.
    #[arg(long, default_value = "random", allow_hyphen_values = true, value_parser = parse_alpha)]
    pub alpha: AlphaMode,
    /// `auto` or a positive number.
    #[arg(long, default_value = "auto", allow_hyphen_values = true, value_parser = parse_beta)]
    pub beta: BetaMode,
    #[arg(long, value_enum, default_value_t = BoundsArg::Exact)]
    pub bounds: BoundsArg,
    /// Clamp lateness at zero (tardiness) instead of the signed lateness.
    #[arg(long)]
    pub clamp: bool,
    /// `exact` or `shots:N`.
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RETRY_BUDGET)]
    pub retry_budget: u32,
    /// Width of the cost-phase control register (experimental above 1).
    #[arg(long, default_value_t = 1)]
    pub control_qubits: u32,
    /// Fail instead of backing off when every control-0 amplitude vanishes.
    #[arg(long)]
    pub no_saturation_guard: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Minmax,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundsArg {
    Exact,
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Rounds,
    Beta,
    Alpha,
}

impl From<ParamArg> for SweepParam {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Rounds => SweepParam::Rounds,
            ParamArg::Beta => SweepParam::Beta,
            ParamArg::Alpha => SweepParam::Alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl SimArgs {
    pub fn config(&self, max_qubits: u32) -> PipelineConfig {
        let normalization = match self.norm {
            NormArg::Minmax => NormalizationStrategy::MinMax {
                bounds: match self.bounds {
                    BoundsArg::Exact => BoundsMode::Exact,
                    BoundsArg::Conservative => BoundsMode::Conservative,
                },
            },
            NormArg::Sigmoid => NormalizationStrategy::Sigmoid {
                alpha: self.alpha,
                beta: self.beta,
            },
        };
        PipelineConfig {
            rounds: self.rounds,
            normalization,
            lateness: Lateness::from_clamp(self.clamp),
            mode: self.mode,
            seed: self.seed,
            retry_budget: self.retry_budget,
            max_qubits,
            control_qubits: self.control_qubits,
            saturation_guard: !self.no_saturation_guard,
            ..PipelineConfig::default()
        }
    }
}

/// Qubit capacity from the environment value, if any.
pub fn max_qubits(var: Option<&str>) -> Result<u32, CliError> {
    match var {
        None => Ok(DEFAULT_MAX_QUBITS),
        Some(v) => v
            .trim()
            .parse()
            .ok()
            .filter(|&q| q > 0 && q <= 63)
            .ok_or_else(|| {
                CliError::usage(format!(
                    "{MAX_QUBITS_ENV}={v:?} is not an integer in [1, 63]"
                ))
            }),
    }
}

pub fn parse_rounds(s: &str) -> Result<Rounds, String> {
    if s == "auto" {
        return Ok(Rounds::Auto);
    }
    s.parse()
        .map(Rounds::Fixed)
        .map_err(|_| format!("expected `auto` or a nonnegative integer, got {s:?}"))
}

pub fn parse_alpha(s: &str) -> Result<AlphaMode, String> {
    match s {
        "random" => Ok(AlphaMode::MidpointRandom),
        "best-second" => Ok(AlphaMode::MidpointBestSecond),
        _ => finite(s).map(AlphaMode::Fixed),
    }
}

pub fn parse_beta(s: &str) -> Result<BetaMode, String> {
    if s == "auto" {
        return Ok(BetaMode::Auto);
    }
    match finite(s)? {
        b if b > 0.0 => Ok(BetaMode::Fixed(b)),
        _ => Err(format!("beta must be > 0, got {s}")),
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    if s == "exact" {
        return Ok(Mode::Exact);
    }
    let shots = s
        .strip_prefix("shots:")
        .and_then(|n| n.parse::<u64>().ok())
        .ok_or_else(|| format!("expected `exact` or `shots:N`, got {s:?}"))?;
    if shots == 0 {
        return Err("shots must be >= 1".into());
    }
    Ok(Mode::Sampled { shots })
}

fn finite(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a finite number, got {s:?}"))
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(format!("range grid needs start:stop:step, got {s:?}"));
        };
        let (start, stop, step) = (finite(start)?, finite(stop)?, finite(step)?);
        if step == 0.0 || (stop - start) * step < 0.0 {
            return Err(format!("step {step} never reaches {stop} from {start}"));
        }
        let span = (stop - start) / step;
        if span >= MAX_GRID_POINTS as f64 {
            return Err(format!("grid longer than {MAX_GRID_POINTS} points"));
        }
        let n = (span + 1e-9).floor() as usize + 1;
        (0..n).map(|k| start + k as f64 * step).collect()
    } else {
        s.split(',')
            .map(|v| finite(v.trim()))
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() || values.len() > MAX_GRID_POINTS {
        return Err(format!("grid must have 1 to {MAX_GRID_POINTS} points"));
    }
    Ok(Grid(values))
}
