//! Front end for the `spinmr` binary: evaluation, threshold search, table
//! regeneration and grid sweeps, written as CSV or JSON.

pub mod args;
mod format;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use spinmr::closed_form::closed_form_value;
use spinmr::quantities::simulate_in;
use spinmr::sweep::{
    find_threshold_in, reproduce_table, sweep_with_j_max, table_tolerance, CellKind, PublishedValue, SweepGrid,
    SweepRow, ThresholdQuery, Variable,
};
use spinmr::{Engine, Params, Quantity, SpinContext, SpinQuantumNumber};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNAVAILABLE: i32 = 3;
pub const EXIT_PAPER_DIFF: i32 = 4;

pub const DEFAULT_PRECISION: usize = 6;

/// Extra allowance on top of the table tolerance when diffing, so that
/// exact boundary cells are not decided by round-off.
pub const DIFF_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Sim,
    Closed,
    Both,
}

impl EngineChoice {
    fn engines(self) -> &'static [Engine] {
        match self {
            EngineChoice::Sim => &[Engine::Simulation],
            EngineChoice::Closed => &[Engine::ClosedForm],
            EngineChoice::Both => &[Engine::Simulation, Engine::ClosedForm],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Evaluate {
        j: SpinQuantumNumber,
        lambda: f64,
        v: f64,
        x: usize,
        quantities: Vec<Quantity>,
        engine: EngineChoice,
    },
    Threshold {
        j: SpinQuantumNumber,
        x: usize,
        quantities: Vec<Quantity>,
        variable: Variable,
        engine: EngineChoice,
        tol: f64,
        scan_step: f64,
    },
    Table {
        n: u32,
        published_diff: bool,
    },
    Sweep {
        grid: SweepGrid,
        engine: EngineChoice,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: OutputFormat,
    /// Significant digits; for `table`, decimals. `None` picks the default.
    pub precision: Option<usize>,
    /// Largest j the simulation engine will accept.
    pub j_max: f64,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid --{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("{0}")]
    Unavailable(String),
    #[error("{0} cell(s) outside the published tolerance")]
    PaperDiff(usize),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } => EXIT_INVALID,
            CliError::Unavailable(_) => EXIT_UNAVAILABLE,
            CliError::PaperDiff(_) => EXIT_PAPER_DIFF,
            CliError::Failed(_) | CliError::Io(_) => EXIT_FAILED,
        }
    }
}

impl From<spinmr::Error> for CliError {
    fn from(e: spinmr::Error) -> Self {
        use spinmr::Error as E;
        let field = match &e {
            E::InvalidSpin(_) | E::DimensionOverflow { .. } => "j",
            E::InvalidSharpness(_) => "lambda",
            E::InvalidVisibility(_) => "v",
            E::InvalidGrouping { .. } => "x",
            E::InvalidTolerance(_) => "tol",
            E::InvalidScanStep(_) => "scan-step",
            E::UnknownTable(_) => "table",
            E::ClosedFormUnavailable(_) => return CliError::Unavailable(e.to_string()),
            _ => return CliError::Failed(e.to_string()),
        };
        CliError::Invalid {
            field,
            message: e.to_string(),
        }
    }
}

/// One evaluated point. `engine` is `sim`, `closed` or `diff`; a `diff` row
/// holds absolute differences between the other two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub j: f64,
    pub lambda: f64,
    pub v: f64,
    pub x: usize,
    pub quantity: Quantity,
    pub value: f64,
    pub violation: f64,
    pub engine: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub j: f64,
    pub x: usize,
    pub quantity: Quantity,
    pub variable: Variable,
    /// `None` when nothing in [0, 1] violates.
    pub threshold: Option<f64>,
    pub engine: String,
    pub sign_changes: Option<usize>,
    pub anomaly: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub table: u32,
    pub quantity: Quantity,
    pub kind: CellKind,
    /// `None` for the j → ∞ row.
    pub j: Option<f64>,
    /// `None` for the variable being solved for in threshold cells.
    pub lambda: Option<f64>,
    pub v: Option<f64>,
    pub x: usize,
    /// Violation or threshold; `None` means no violation.
    pub result: Option<f64>,
    pub closed_form: Option<f64>,
    pub published: Option<PublishedValue>,
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub engine: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub anomalies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<R> {
    pub rows: Vec<R>,
    pub metadata: Metadata,
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Diagnostics go to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match args::parse(args) {
        Ok(config) => run(&config, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            code
        }
    }
}

pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(config, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs the command, writing its report to `out`. A failed `--paper-diff`
/// still writes the full report before returning the error.
pub fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if config.workers == Some(0) {
        return Err(CliError::Invalid {
            field: "workers",
            message: "worker count must be at least 1".into(),
        });
    }
    if config.j_max.is_nan() || config.j_max < 0.0 {
        return Err(CliError::Invalid {
            field: "j-max",
            message: format!("{} is not a non-negative number", config.j_max),
        });
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Failed(e.to_string()))?;
    let mut buf = Vec::new();
    let res = pool.install(|| dispatch(config, &mut buf));
    out.write_all(&buf)?;
    res
}

fn dispatch(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match &config.command {
        Command::Evaluate {
            j,
            lambda,
            v,
            x,
            quantities,
            engine,
        } => {
            let params = Params {
                j: *j,
                lambda: *lambda,
                v: *v,
                x: *x,
            };
            params.validate()?;
            let ctx = context_for(*j, *engine, config.j_max)?;
            let mut rows = Vec::new();
            for &q in quantities {
                rows.extend(evaluate_point(ctx.as_ref(), &params, q, *engine)?);
            }
            emit_evaluations(config, "evaluate", *engine, rows, out)
        }
        Command::Threshold {
            j,
            x,
            quantities,
            variable,
            engine,
            tol,
            scan_step,
        } => {
            let ctx = context_for(*j, *engine, config.j_max)?;
            let mut rows = Vec::new();
            let mut anomalies = Vec::new();
            for &q in quantities {
                let mut found = Vec::new();
                for &e in engine.engines() {
                    let query = ThresholdQuery::new(q, *j, *x, *variable, e)?;
                    let res = find_threshold_in(&query, ctx.as_ref(), *tol, *scan_step)?;
                    if res.anomaly {
                        anomalies.push(format!(
                            "{q} {} threshold at j = {j}, x = {x} ({}): {} sign changes on the scan",
                            variable_name(*variable),
                            e.name(),
                            res.sign_changes
                        ));
                    }
                    found.push(ThresholdRecord {
                        j: j.j(),
                        x: *x,
                        quantity: q,
                        variable: *variable,
                        threshold: res.threshold.value(),
                        engine: e.name().to_string(),
                        sign_changes: Some(res.sign_changes),
                        anomaly: res.anomaly,
                    });
                }
                if let [a, b] = &found[..] {
                    let diff = ThresholdRecord {
                        threshold: match (a.threshold, b.threshold) {
                            (Some(s), Some(c)) => Some((s - c).abs()),
                            _ => None,
                        },
                        engine: "diff".into(),
                        sign_changes: None,
                        anomaly: a.threshold.is_some() != b.threshold.is_some(),
                        ..a.clone()
                    };
                    found.push(diff);
                }
                rows.extend(found);
            }
            let metadata = Metadata {
                command: "threshold".into(),
                engine: engine_label(*engine),
                tolerance: Some(*tol),
                anomalies,
            };
            match config.output {
                OutputFormat::Json => write_json(out, &Report { rows, metadata }),
                OutputFormat::Csv => {
                    let digits = config.precision.unwrap_or(DEFAULT_PRECISION);
                    let body: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                format::spin(r.j),
                                r.x.to_string(),
                                r.quantity.to_string(),
                                variable_name(r.variable).into(),
                                r.threshold.map_or("none".into(), |t| format::significant(t, digits)),
                                r.engine.clone(),
                            ]
                        })
                        .collect();
                    Ok(format::write_csv(out, &["j", "x", "quantity", "variable", "threshold", "engine"], &body)?)
                }
            }
        }
        Command::Table { n, published_diff } => run_table(config, *n, *published_diff, out),
        Command::Sweep { grid, engine } => {
            let mut per_engine = Vec::new();
            for &e in engine.engines() {
                per_engine.push(sweep_with_j_max(grid, e, config.j_max)?.rows);
            }
            let mut rows = Vec::new();
            for i in 0..per_engine[0].len() {
                let point: Vec<EvaluationRecord> = per_engine.iter().map(|r| sweep_record(&r[i])).collect();
                rows.extend(with_diff(point));
            }
            emit_evaluations(config, "sweep", *engine, rows, out)
        }
    }
}

fn variable_name(v: Variable) -> &'static str {
    match v {
        Variable::Lambda => "lambda",
        Variable::Visibility => "v",
    }
}

fn engine_label(e: EngineChoice) -> String {
    match e {
        EngineChoice::Sim => "sim",
        EngineChoice::Closed => "closed",
        EngineChoice::Both => "both",
    }
    .into()
}

fn context_for(j: SpinQuantumNumber, engine: EngineChoice, j_max: f64) -> Result<Option<SpinContext>, CliError> {
    if engine == EngineChoice::Closed {
        return Ok(None);
    }
    if j.j() > j_max {
        return Err(CliError::Invalid {
            field: "j",
            message: format!("j = {j} exceeds j_max = {j_max} (raise it with --j-max or SPINMR_J_MAX)"),
        });
    }
    Ok(Some(SpinContext::with_j_max(j, j_max)?))
}

fn evaluate_point(
    ctx: Option<&SpinContext>,
    params: &Params,
    q: Quantity,
    engine: EngineChoice,
) -> Result<Vec<EvaluationRecord>, CliError> {
    let mut point = Vec::new();
    for &e in engine.engines() {
        let value = match e {
            Engine::Simulation => simulate_in(ctx.expect("context built for simulation"), params, q)?.value,
            Engine::ClosedForm => closed_form_value(params, q)?,
        };
        point.push(EvaluationRecord {
            j: params.j.j(),
            lambda: params.lambda,
            v: params.v,
            x: params.x,
            quantity: q,
            value,
            violation: value - q.bound(),
            engine: e.name().to_string(),
        });
    }
    Ok(with_diff(point))
}

fn with_diff(mut point: Vec<EvaluationRecord>) -> Vec<EvaluationRecord> {
    if let [a, b] = &point[..] {
        let diff = EvaluationRecord {
            value: (a.value - b.value).abs(),
            violation: (a.violation - b.violation).abs(),
            engine: "diff".into(),
            ..a.clone()
        };
        point.push(diff);
    }
    point
}

fn sweep_record(row: &SweepRow) -> EvaluationRecord {
    let value = row.value.expect("sweep rows carry values");
    EvaluationRecord {
        j: row.j.expect("sweep rows have finite j").j(),
        lambda: row.lambda,
        v: row.v,
        x: row.x,
        quantity: row.quantity,
        value,
        violation: value - row.quantity.bound(),
        engine: row.engine.name().to_string(),
    }
}

fn emit_evaluations(
    config: &RunConfig,
    command: &str,
    engine: EngineChoice,
    rows: Vec<EvaluationRecord>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match config.output {
        OutputFormat::Json => write_json(
            out,
            &Report {
                rows,
                metadata: Metadata {
                    command: command.into(),
                    engine: engine_label(engine),
                    tolerance: None,
                    anomalies: Vec::new(),
                },
            },
        ),
        OutputFormat::Csv => {
            let digits = config.precision.unwrap_or(DEFAULT_PRECISION);
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        format::spin(r.j),
                        r.lambda.to_string(),
                        r.v.to_string(),
                        r.x.to_string(),
                        r.quantity.to_string(),
                        format::significant(r.value, digits),
                        format::significant(r.violation, digits),
                        r.engine.clone(),
                    ]
                })
                .collect();
            Ok(format::write_csv(
                out,
                &["j", "lambda", "v", "x", "quantity", "value", "violation", "engine"],
                &body,
            )?)
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn run_table(config: &RunConfig, n: u32, published_diff: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let table = reproduce_table(n)?;
    let tolerance = table_tolerance(n)?;
    let rows: Vec<TableRecord> = table
        .rows
        .iter()
        .map(|r| {
            let within = if r.kind == CellKind::Asymptotic {
                r.deviation().is_some_and(|d| d < 1e-12)
            } else {
                r.matches_published(DIFF_SLACK)
            };
            TableRecord {
                table: n,
                quantity: r.quantity,
                kind: r.kind,
                j: r.j.map(|j| j.j()),
                lambda: finite(r.lambda),
                v: finite(r.v),
                x: r.x,
                result: r.result,
                closed_form: r.closed_form,
                published: r.published,
                deviation: r.deviation(),
                tolerance,
                within_tolerance: within,
            }
        })
        .collect();
    let misses = rows.iter().filter(|r| !r.within_tolerance).count();

    match config.output {
        OutputFormat::Json => write_json(
            out,
            &Report {
                rows,
                metadata: Metadata {
                    command: format!("table {n}"),
                    engine: "sim".into(),
                    tolerance: Some(tolerance),
                    anomalies: table.metadata.anomalies,
                },
            },
        )?,
        OutputFormat::Csv => {
            let mut header = vec!["quantity", "kind", "j", "lambda", "v", "x", "result", "closed_form", "published"];
            if published_diff {
                header.extend(["deviation", "tolerance", "status"]);
            }
            let opt = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let decimals = config
                        .precision
                        .or(r.published.and_then(|p| p.decimals()).map(|d| d as usize))
                        .unwrap_or(2);
                    let shown = |x: Option<f64>| x.map_or("none".to_string(), |x| format::fixed(x, decimals));
                    let mut line = vec![
                        r.quantity.to_string(),
                        kind_name(r.kind).into(),
                        r.j.map_or("inf".into(), format::spin),
                        opt(r.lambda),
                        opt(r.v),
                        r.x.to_string(),
                        shown(r.result),
                        r.closed_form.map_or(String::new(), |c| format::fixed(c, decimals)),
                        match r.published {
                            Some(PublishedValue::Number { value, decimals }) => format::fixed(value, decimals as usize),
                            Some(PublishedValue::NoViolation) => "none".into(),
                            None => String::new(),
                        },
                    ];
                    if published_diff {
                        line.push(r.deviation.map_or(String::new(), |d| format::fixed(d, 6)));
                        line.push(r.tolerance.to_string());
                        line.push(if r.within_tolerance { "ok" } else { "FAIL" }.into());
                    }
                    line
                })
                .collect();
            format::write_csv(out, &header, &body)?;
        }
    }
    if published_diff && misses > 0 {
        return Err(CliError::PaperDiff(misses));
    }
    Ok(())
}

fn kind_name(k: CellKind) -> &'static str {
    match k {
        CellKind::Violation => "violation",
        CellKind::LambdaThreshold => "lambda_threshold",
        CellKind::VisibilityThreshold => "v_threshold",
        CellKind::Asymptotic => "limit",
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Failed(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
