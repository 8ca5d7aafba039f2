//! Command-line front end.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit codes: 0 on
//! success, 2 on usage errors, 1 on numerical failures.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::asymptotics::{ExpansionEval, Order, RuntimeEstimate, DEFAULT_EPS};
use crate::bounds::{corridor_c1, corridor_c2, verify_inequalities};
use crate::drift::{drift_bounds, DriftTable, ProblemSize};
use crate::error::{Error, Result};
use crate::figures::{expansion_figure, runtime_gap_figure, SizeRange};
use crate::hitting::hitting_profile;
use crate::kernel::TransitionKernel;
use crate::scalar::{Backend, Rational, Scalar};
use crate::sim::{run_with_samples, Engine, SimConfig, Start};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "onemax", version, about = "Runtime of the (1+1) EA on OneMax")]
pub struct Cli {
    /// Worker threads for internal parallelism (default: all cores).
    #[arg(long, global = true, env = "ONEMAX_THREADS")]
    pub threads: Option<usize>,

    #[command(flatten)]
    pub output: OutputArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Significant digits for floats.
    #[arg(long, global = true, default_value_t = 15)]
    pub precision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Float,
    Rational,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Float => Backend::Float64,
            BackendArg::Rational => Backend::ExactRational,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Bitstring,
    Chain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drift and normalized drift table.
    Drift {
        n: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Float)]
        backend: BackendArg,
    },
    /// Exact expected runtime, inverse-drift sum and corridor.
    Runtime {
        n: usize,
        /// Initial zero-count (default ⌊n/2⌋).
        #[arg(long)]
        start: Option<usize>,
        #[arg(long, value_enum, default_value_t = BackendArg::Float)]
        backend: BackendArg,
    },
    /// Inequality checks and the η profile.
    Bounds {
        n: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Float)]
        backend: BackendArg,
    },
    /// Asymptotic runtime estimates and expansion accuracy.
    Asym {
        #[arg(required = true, num_args = 1..)]
        n: Vec<usize>,
        /// Expansion order 0, 1 or 2.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Distance from α = 1 excluded from the expansion, e.g. 1/8.
        #[arg(long, value_parser = parse_eps)]
        eps: Option<f64>,
    },
    /// Data behind the comparison plots.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        /// Inclusive range lo:hi (default 2:50 for plot 1, 10:200 for plot 2).
        #[arg(long)]
        n_range: Option<String>,
    },
    /// Monte Carlo simulation.
    Sim {
        #[arg(long)]
        n: usize,
        /// fixed:<zeros> or uniform (default fixed:⌊n/2⌋).
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EngineArg::Chain)]
        engine: EngineArg,
        /// Iteration cap per run (default ⌈100 e n (ln n + 1)⌉).
        #[arg(long)]
        max_iters: Option<u64>,
        /// Also write one runtime per line to this file.
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
}

/// Parses `p/q` or a decimal.
pub fn parse_eps(s: &str) -> std::result::Result<f64, String> {
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("{e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("{e}"))?;
            p / q
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(format!("eps must lie in (0, 1), got {s}"))
    }
}

/// A table cell with its CSV text and JSON value.
#[derive(Debug, Clone)]
struct Cell {
    text: String,
    json: Value,
}

impl Cell {
    fn scalar<S: Scalar>(v: &S, precision: usize) -> Self {
        Cell {
            text: v.render(precision),
            json: v.to_json(),
        }
    }

    fn float(v: f64, precision: usize) -> Self {
        Self::scalar(&v, precision)
    }

    fn int(v: impl Into<u64>) -> Self {
        let v = v.into();
        Cell {
            text: v.to_string(),
            json: json!(v),
        }
    }

    fn boolean(v: bool) -> Self {
        Cell {
            text: v.to_string(),
            json: json!(v),
        }
    }

    fn text(v: impl Into<String>) -> Self {
        let v = v.into();
        Cell {
            json: json!(v),
            text: v,
        }
    }

    fn opt_float(v: Option<f64>, precision: usize) -> Self {
        match v {
            Some(v) => Self::float(v, precision),
            None => Cell {
                text: String::new(),
                json: Value::Null,
            },
        }
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

/// Rendered output of one subcommand.
enum Output {
    Table(Table),
    /// Structured JSON document with a CSV fallback table.
    Document(Value, Table),
}

fn render_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Numeric(format!("csv output: {e}"));
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.text.as_str())).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Error::Numeric(format!("csv output: {e}")))
}

fn table_json(table: &Table) -> Value {
    Value::Array(
        table
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    table
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.json.clone()))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn render(output: &Output, format: Format) -> Result<Vec<u8>> {
    match (output, format) {
        (Output::Table(t) | Output::Document(_, t), Format::Csv) => render_csv(t),
        (Output::Table(t), Format::Json) => json_bytes(&table_json(t)),
        (Output::Document(doc, _), Format::Json) => json_bytes(doc),
    }
}

fn json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(v).map_err(|e| Error::Numeric(format!("json output: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn drift_table<S: Scalar>(n: ProblemSize, precision: usize) -> Result<Table> {
    let table = DriftTable::<S>::build(n)?;
    let rows = (0..=n.get())
        .map(|k| {
            let (lo, hi) = drift_bounds(n, k);
            vec![
                Cell::int(k as u64),
                Cell::scalar(&table.delta()[k], precision),
                Cell::scalar(&table.delta_star()[k], precision),
                Cell::float(lo, precision),
                Cell::float(hi, precision),
            ]
        })
        .collect();
    Ok(Table {
        header: vec!["k", "delta", "delta_star", "lower_bound", "upper_bound"],
        rows,
    })
}

fn runtime_table<S: Scalar>(n: ProblemSize, start: usize, precision: usize) -> Result<Table> {
    if start > n.get() {
        return Err(Error::domain("start", start, format!("0..={n}")));
    }
    let kernel = TransitionKernel::<S>::build(n)?;
    let table = DriftTable::<S>::build(n)?;
    let profile = hitting_profile(&kernel, &table)?;
    let g = &profile.g()[start];
    let q = &profile.q()[start];
    let log_n = (n.get() as f64).ln();
    let lower = q.to_f64() - corridor_c1() * log_n;
    let upper = q.to_f64() - corridor_c2() * log_n;
    // Decide membership exactly where possible: only the log terms are irrational.
    let in_corridor = S::from_f64(lower) <= *g && *g <= S::from_f64(upper);
    Ok(Table {
        header: vec![
            "n",
            "k",
            "g_exact",
            "q_sum",
            "q_minus_c1_logn",
            "q_minus_c2_logn",
            "in_corridor",
        ],
        rows: vec![vec![
            Cell::int(n.get() as u64),
            Cell::int(start as u64),
            Cell::scalar(g, precision),
            Cell::scalar(q, precision),
            Cell::float(lower, precision),
            Cell::float(upper, precision),
            Cell::boolean(in_corridor),
        ]],
    })
}

fn bounds_output(n: ProblemSize, backend: Backend, precision: usize) -> Result<Output> {
    let report = verify_inequalities(n, backend)?;
    let rows = report
        .checks
        .iter()
        .map(|c| {
            vec![
                Cell::text(c.check_id.clone()),
                Cell::text(c.range.clone()),
                Cell::opt_float(c.bound, precision),
                Cell::opt_float(c.observed, precision),
                Cell::text(match c.pass {
                    Some(p) => p.to_string(),
                    None => "n/a".to_string(),
                }),
                Cell::text(c.worst_at.clone().unwrap_or_default()),
                Cell::opt_float(c.slack, precision),
                Cell::boolean(c.exact),
            ]
        })
        .collect();
    let table = Table {
        header: vec![
            "check_id", "range", "bound", "observed", "pass", "worst_at", "slack", "exact",
        ],
        rows,
    };
    let doc = serde_json::to_value(&report).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(Output::Document(doc, table))
}

fn asym_table(sizes: &[usize], order: usize, eps: f64, precision: usize) -> Result<Table> {
    let order = Order::try_from(order)?;
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let n = ProblemSize::new(n)?;
        let est = RuntimeEstimate::new(n)?;
        let table = DriftTable::<f64>::build(n)?;
        let limit = ((1.0 - eps) * n.get() as f64).floor() as usize;
        let mut worst = (0.0f64, 0usize);
        for k in 1..=limit {
            let eval = ExpansionEval::at(k as f64 / n.get() as f64, n)?;
            let err = (table.delta_star()[k] - eval.delta_star(order)).abs();
            if err > worst.0 {
                worst = (err, k);
            }
        }
        rows.push(vec![
            Cell::int(n.get() as u64),
            Cell::int(order.index() as u64),
            Cell::float(eps, precision),
            Cell::float(est.q_asym, precision),
            Cell::float(est.et_asym, precision),
            Cell::float(est.c0, precision),
            Cell::float(est.c1, precision),
            Cell::float(est.c2, precision),
            Cell::float(worst.0, precision),
            Cell::int(worst.1 as u64),
        ]);
    }
    Ok(Table {
        header: vec![
            "n",
            "order",
            "eps",
            "q_asym",
            "et_asym",
            "c0",
            "c1",
            "c2",
            "max_abs_error",
            "argmax_k",
        ],
        rows,
    })
}

fn figures_table(which: u8, range: Option<&str>, precision: usize) -> Result<Table> {
    let f = |v: f64| Cell::float(v, precision);
    if which == 1 {
        let range: SizeRange = range.unwrap_or("2:50").parse()?;
        let rows = expansion_figure(range)?
            .into_iter()
            .map(|r| {
                vec![
                    Cell::int(r.n as u64),
                    Cell::int(r.k as u64),
                    f(r.alpha),
                    f(r.delta_star_exact),
                    f(r.approx0),
                    f(r.approx1),
                    f(r.approx2),
                    f(r.err0),
                    f(r.err1),
                    f(r.err2),
                    f(r.inv_err0),
                    f(r.inv_err1),
                    f(r.inv_err2),
                ]
            })
            .collect();
        Ok(Table {
            header: vec![
                "n",
                "k",
                "alpha",
                "delta_star_exact",
                "approx0",
                "approx1",
                "approx2",
                "err0",
                "err1",
                "err2",
                "inv_err0",
                "inv_err1",
                "inv_err2",
            ],
            rows,
        })
    } else {
        let range: SizeRange = range.unwrap_or("10:200").parse()?;
        let rows = runtime_gap_figure(range)?
            .into_iter()
            .map(|r| {
                vec![
                    Cell::int(r.n as u64),
                    f(r.q_exact),
                    f(r.g_exact),
                    f(r.diff),
                    f(r.diff_minus_half_e_log),
                ]
            })
            .collect();
        Ok(Table {
            header: vec!["n", "q_exact", "g_exact", "diff", "diff_minus_half_e_log"],
            rows,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn sim_output(
    n: usize,
    start: Option<&str>,
    reps: u64,
    seed: u64,
    engine: EngineArg,
    max_iters: Option<u64>,
    samples_out: Option<&PathBuf>,
    precision: usize,
) -> std::result::Result<Output, Failure> {
    let n = ProblemSize::new(n)?;
    let start = match start {
        Some(s) => s.parse()?,
        None => Start::FixedZeros(n.half()),
    };
    let engine = match engine {
        EngineArg::Bitstring => Engine::Bitstring,
        EngineArg::Chain => Engine::StateChain,
    };
    let mut config = SimConfig::new(n, start, reps, seed, engine)?;
    if let Some(cap) = max_iters {
        config = config.with_max_iters(cap)?;
    }
    let (report, samples) = run_with_samples(&config)?;
    if let Some(path) = samples_out {
        let mut text = String::with_capacity(samples.len() * 8);
        for s in &samples {
            text.push_str(&s.to_string());
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    let table = Table {
        header: vec![
            "n", "start", "engine", "samples", "mean", "std_error", "min", "max", "truncated",
            "seed",
        ],
        rows: vec![vec![
            Cell::int(n.get() as u64),
            Cell::text(report.start.to_string()),
            Cell::text(report.engine.to_string()),
            Cell::int(report.samples),
            Cell::float(report.mean, precision),
            Cell::float(report.std_error, precision),
            Cell::int(report.min),
            Cell::int(report.max),
            Cell::int(report.truncated),
            Cell::int(report.seed),
        ]],
    };
    let doc = serde_json::to_value(&report).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(Output::Document(doc, table))
}

/// Why a command failed.
#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(Error::InvalidSize { .. } | Error::Domain { .. } | Error::Capacity { .. }) => {
                EXIT_USAGE
            }
            Failure::Lib(Error::Numeric(_) | Error::Mismatch(_)) | Failure::Io(_) => EXIT_NUMERIC,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(e) => format!("output error: {e}"),
        }
    }
}

fn with_backend<T>(
    backend: BackendArg,
    float: impl FnOnce() -> Result<T>,
    exact: impl FnOnce() -> Result<T>,
) -> Result<T> {
    match Backend::from(backend) {
        Backend::Float64 => float(),
        Backend::ExactRational => exact(),
    }
}

fn execute(cli: &Cli) -> std::result::Result<Output, Failure> {
    let p = cli.output.precision;
    let out = match &cli.command {
        Command::Drift { n, backend } => {
            let n = ProblemSize::new(*n)?;
            Output::Table(with_backend(
                *backend,
                || drift_table::<f64>(n, p),
                || drift_table::<Rational>(n, p),
            )?)
        }
        Command::Runtime { n, start, backend } => {
            let n = ProblemSize::new(*n)?;
            let k = start.unwrap_or(n.half());
            Output::Table(with_backend(
                *backend,
                || runtime_table::<f64>(n, k, p),
                || runtime_table::<Rational>(n, k, p),
            )?)
        }
        Command::Bounds { n, backend } => {
            bounds_output(ProblemSize::new(*n)?, Backend::from(*backend), p)?
        }
        Command::Asym { n, order, eps } => {
            Output::Table(asym_table(n, *order, eps.unwrap_or(DEFAULT_EPS), p)?)
        }
        Command::Figures { which, n_range } => {
            Output::Table(figures_table(*which, n_range.as_deref(), p)?)
        }
        Command::Sim {
            n,
            start,
            reps,
            seed,
            engine,
            max_iters,
            samples_out,
        } => sim_output(
            *n,
            start.as_deref(),
            *reps,
            *seed,
            *engine,
            *max_iters,
            samples_out.as_ref(),
            p,
        )?,
    };
    Ok(out)
}

fn configure_threads(threads: Option<usize>) -> std::result::Result<(), String> {
    if let Some(t) = threads {
        if t == 0 {
            return Err("--threads must be at least 1".into());
        }
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name), writing data to
/// `stdout` unless `--out` is given and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    if let Err(msg) = configure_threads(cli.threads) {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_USAGE;
    }
    let result = execute(&cli).and_then(|output| {
        let bytes = render(&output, cli.output.format)?;
        match &cli.output.out {
            Some(path) => std::fs::write(path, bytes)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
            None => stdout
                .write_all(&bytes)
                .map_err(|e| Failure::Io(e.to_string())),
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.exit_code()
        }
    }
}

/// `p/q` text of a rational, used by callers that post-process CSV output.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q == BigInt::from(0) {
        return None;
    }
    Some(Rational::new(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("onemax").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn eps_parsing() {
        assert_eq!(parse_eps("1/8").unwrap(), 0.125);
        assert_eq!(parse_eps("0.25").unwrap(), 0.25);
        assert!(parse_eps("1").is_err());
        assert!(parse_eps("a/b").is_err());
    }

    #[test]
    fn drift_rational() {
        let (code, out, _) = call(&["drift", "2", "--backend", "rational"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "k,delta,delta_star,lower_bound,upper_bound");
        assert!(lines[1].starts_with("0,0,0,"));
        assert!(lines[2].starts_with("1,1/4,"));
        assert!(lines[3].starts_with("2,1,"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["drift", "1"]).0, EXIT_USAGE);
        assert_eq!(call(&["drift"]).0, EXIT_USAGE);
        assert_eq!(call(&["drift", "70", "--backend", "rational"]).0, EXIT_USAGE);
        assert_eq!(call(&["runtime", "5", "--start", "6"]).0, EXIT_USAGE);
        let (code, out, err) = call(&["sim", "--n", "5", "--start", "fixed:9"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("error"));
    }

    #[test]
    fn runtime_rows() {
        let (code, out, _) = call(&["runtime", "3", "--start", "3", "--backend", "rational"]);
        assert_eq!(code, 0);
        assert!(out.lines().nth(1).unwrap().starts_with("3,3,189/22,"));
        let (_, out, _) = call(&["runtime", "4", "--start", "2"]);
        assert!(out.lines().nth(1).unwrap().ends_with(",true"));
        let (_, out, _) = call(&["runtime", "2", "--start", "0", "--format", "json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["g_exact"], json!(0.0));
    }

    #[test]
    fn rational_json_is_num_den() {
        let (_, out, _) = call(&["drift", "2", "--backend", "rational", "--format", "json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[1]["delta"], json!({"num": "1", "den": "4"}));
    }

    #[test]
    fn parse_rational_text() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational::ratio(3, 4));
        assert_eq!(parse_rational("5").unwrap(), Rational::ratio(5, 1));
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn corridor_constant_in_runtime_output() {
        let (_, out, _) = call(&["runtime", "10"]);
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        let q: f64 = row[3].parse().unwrap();
        let lower: f64 = row[4].parse().unwrap();
        assert!((q - lower - 4.0 * E.powf(3.5) * 10f64.ln()).abs() < 1e-9);
    }
}
