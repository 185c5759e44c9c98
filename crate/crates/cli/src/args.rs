//! Command-line grammar.

use clap::{Args, Parser, Subcommand, ValueEnum};

use spinmr::spin::DEFAULT_J_MAX;
use spinmr::sweep::{SweepGrid, Variable, DEFAULT_SCAN_STEP};
use spinmr::{Quantity, SpinQuantumNumber};

use crate::{Command, EngineChoice, OutputFormat, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "spinmr", version, about = "Macrorealism violations for a precessing spin-j system")]
pub struct Cli {
    #[command(subcommand)]
    command: Sub,

    #[arg(long, global = true, value_enum, default_value_t = Output::Csv)]
    output: Output,

    /// Significant digits (decimals for `table`; defaults to the published ones).
    #[arg(long, global = true)]
    precision: Option<usize>,

    /// Largest j accepted by the simulation engine.
    #[arg(long, global = true, env = "SPINMR_J_MAX", default_value_t = DEFAULT_J_MAX)]
    j_max: f64,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Output {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Sim,
    Closed,
    Both,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Sim => EngineChoice::Sim,
            EngineArg::Closed => EngineChoice::Closed,
            EngineArg::Both => EngineChoice::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariableArg {
    Lambda,
    #[value(alias = "visibility")]
    V,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// K_LGI, K_WLGI and the NSIT left-hand side at one parameter point.
    Evaluate(EvaluateArgs),
    /// Threshold sharpness or visibility above which a quantity is violated.
    Threshold(ThresholdArgs),
    /// Regenerate one of the ten reference tables.
    Table(TableArgs),
    /// Evaluate a cartesian grid of parameters.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Spin quantum number (`10`, `1.5` or `3/2`).
    #[arg(long)]
    j: SpinQuantumNumber,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    #[arg(long, default_value_t = 0)]
    x: usize,
    /// Comma-separated; default all three.
    #[arg(long, value_delimiter = ',')]
    quantity: Vec<Quantity>,
    #[arg(long, value_enum, default_value_t = EngineArg::Sim)]
    engine: EngineArg,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    j: SpinQuantumNumber,
    #[arg(long, default_value_t = 0)]
    x: usize,
    #[arg(long, value_delimiter = ',')]
    quantity: Vec<Quantity>,
    #[arg(long, value_enum, default_value_t = VariableArg::Lambda)]
    variable: VariableArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Sim)]
    engine: EngineArg,
    /// Bisection tolerance (at least 1e-6).
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Coarse λ-scan step before bisection.
    #[arg(long, default_value_t = DEFAULT_SCAN_STEP)]
    scan_step: f64,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Table number, 1 to 10.
    n: u32,
    /// Print each cell's deviation and exit 4 if any exceeds the tolerance.
    #[arg(long = "paper-diff", visible_alias = "diff")]
    published_diff: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    j: Vec<SpinQuantumNumber>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    v: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    x: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    quantity: Vec<Quantity>,
    #[arg(long, value_enum, default_value_t = EngineArg::Sim)]
    engine: EngineArg,
}

fn or_all(q: Vec<Quantity>) -> Vec<Quantity> {
    if q.is_empty() {
        Quantity::ALL.to_vec()
    } else {
        q
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let command = match cli.command {
            Sub::Evaluate(a) => Command::Evaluate {
                j: a.j,
                lambda: a.lambda,
                v: a.v,
                x: a.x,
                quantities: or_all(a.quantity),
                engine: a.engine.into(),
            },
            Sub::Threshold(a) => Command::Threshold {
                j: a.j,
                x: a.x,
                quantities: or_all(a.quantity),
                variable: match a.variable {
                    VariableArg::Lambda => Variable::Lambda,
                    VariableArg::V => Variable::Visibility,
                },
                engine: a.engine.into(),
                tol: a.tol,
                scan_step: a.scan_step,
            },
            Sub::Table(a) => Command::Table {
                n: a.n,
                published_diff: a.published_diff,
            },
            Sub::Sweep(a) => Command::Sweep {
                grid: SweepGrid {
                    js: a.j,
                    lambdas: a.lambda,
                    vs: a.v,
                    xs: a.x,
                    quantities: or_all(a.quantity),
                },
                engine: a.engine.into(),
            },
        };
        RunConfig {
            command,
            output: match cli.output {
                Output::Csv => OutputFormat::Csv,
                Output::Json => OutputFormat::Json,
            },
            precision: cli.precision,
            j_max: cli.j_max,
            workers: cli.workers,
        }
    }
}

pub fn parse<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args).map(RunConfig::from)
}
