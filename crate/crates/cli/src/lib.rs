//! Command-line front end: parses flags, drives the library and renders a
//! [`Report`] as CSV or JSON.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 usage or parse error,
//! 3 numeric failure.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ftoc_core::expr::{parse, Expr};
use ftoc_core::fixedpoint::{
    iterate_scalar, newton, power_method, IterationFailure, IterationTrace, SmallMatrix,
};
use ftoc_core::funcspace::{Interval, PanelRule, QuadratureConfig, RealFunction};
use ftoc_core::report::{CheckReport, WorstCase};
use ftoc_core::simplex::{
    ordering_partition_check, remainder_by_slicing_with, simplex_volume_exact,
    simplex_volume_montecarlo, MonteCarloConfig, SimplexSpec, PARTITION_DIMENSIONS,
};
use ftoc_core::taylor::{evaluate_polynomial, expand, max_pairwise_gap, report_for};
use ftoc_core::verify::{self, agreement_threshold, Suite, VerifyConfig};
use ftoc_core::Error;

pub mod output;

pub use output::{Cell, Record, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ftoc",
    version,
    about = "Taylor expansions, remainders and simplex volumes via iterated integration",
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Taylor coefficients f^(n)(a) and the polynomial P_N at requested points.
    Expand(ExpandArgs),
    /// The remainder f - P_N computed several independent ways, plus its bound.
    Remainder(RemainderArgs),
    /// Ordered-simplex volume: exact, Monte Carlo and the n! cell partition.
    Simplex(SimplexArgs),
    /// Scalar iteration, Newton's method or the matrix power method.
    Fixedpoint(FixedpointArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct QuadratureArgs {
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Relative quadrature tolerance.
    #[arg(long = "rel-tol", default_value_t = 0.0)]
    pub rel_tol: f64,
    /// Panel rule: gk15 or gk21.
    #[arg(long, default_value = "gk15")]
    pub rule: String,
}

impl QuadratureArgs {
    fn config(&self) -> Result<QuadratureConfig, CliError> {
        let rule = PanelRule::from_name(&self.rule)
            .ok_or_else(|| CliError::usage(format!("unknown panel rule '{}'", self.rule)))?;
        let cfg = QuadratureConfig {
            abs_tolerance: self.tol,
            rel_tolerance: self.rel_tol,
            base_rule: rule,
            ..QuadratureConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn record(&self, r: &mut Record) {
        r.push("tol", self.tol);
        r.push("rel_tol", self.rel_tol);
        r.push("rule", self.rule.as_str());
    }
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Evaluation points, comma separated or repeated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Evenly spaced points `lo:hi:count`, endpoints included.
    #[arg(long = "x-range", allow_hyphen_values = true)]
    pub x_range: Option<String>,
}

impl PointArgs {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let mut pts = self.x.clone();
        if let Some(spec) = &self.x_range {
            pts.extend(parse_range(spec)?);
        }
        if let Some(bad) = pts.iter().find(|v| !v.is_finite()) {
            return Err(CliError::usage(format!("evaluation point {bad} is not finite")));
        }
        Ok(pts)
    }
}

/// `lo:hi:count` into `count` evenly spaced points.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("--x-range expects lo:hi:count, got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { hi } else { lo + step * i as f64 })
        .collect())
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    /// Function of x, e.g. "exp(x)".
    #[arg(long)]
    pub f: String,
    /// Base point.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Order N.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RemainderArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimplexArgs {
    /// Dimension.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// x_{k+1} = g(x_k) with g given by --f.
    Iterate,
    /// Newton's method on f given by --f.
    Newton,
    /// Power method on --matrix from --v0.
    Power,
}

#[derive(Debug, Clone, Args)]
pub struct FixedpointArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Rows separated by ';', entries by ',', e.g. "2,1;1,2".
    #[arg(long)]
    pub matrix: Option<String>,
    /// Starting vector, comma separated. Defaults to all ones.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v0: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Only run these suites (repeatable).
    #[arg(long = "suite", value_parser = parse_suite)]
    pub suites: Vec<Suite>,
    /// Fault injection: scale every iterated integral of 1 by (1 + eps).
    #[arg(long = "perturb-basis", default_value_t = 0.0)]
    pub perturb_basis: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite '{s}', expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Precondition(_) | Error::Config(_) => {
                CliError::Usage(e.to_string())
            }
            Error::Domain { .. }
            | Error::ToleranceNotMet { .. }
            | Error::UnsupportedDifferentiation(_)
            | Error::ZeroDerivative { .. }
            | Error::ZeroImage { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl<S> From<IterationFailure<S>> for CliError {
    fn from(f: IterationFailure<S>) -> Self {
        let iterations = f.trace.iterations_used;
        match CliError::from(f.error) {
            CliError::Numeric(m) => CliError::Numeric(format!("{m} (after {iterations} iterations)")),
            other => other,
        }
    }
}

fn parse_function(text: &str) -> Result<Expr, CliError> {
    parse(text).map_err(|e| CliError::Usage(format!("{e} in \"{text}\"")))
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Expand(a) => &a.output,
            Command::Remainder(a) => &a.output,
            Command::Simplex(a) => &a.output,
            Command::Fixedpoint(a) => &a.output,
            Command::Verify(a) => &a.output,
        }
    }
}

/// Executes a parsed command without writing anything.
pub fn execute(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Expand(a) => cmd_expand(a),
        Command::Remainder(a) => cmd_remainder(a),
        Command::Simplex(a) => cmd_simplex(a),
        Command::Fixedpoint(a) => cmd_fixedpoint(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Renders `report` in the requested format.
pub fn render(report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Json => report
            .write_json(&mut buf)
            .map_err(|e| CliError::Io(e.to_string()))?,
        Format::Csv => report
            .write_csv(&mut buf)
            .map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(buf)
}

/// Runs `cli`, writes its output and returns the process exit code.
/// Diagnostics go to `err`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let out = cli.command.output();
    let result = execute(&cli.command).and_then(|report| {
        let bytes = render(&report, out.format)?;
        match &out.out {
            Some(path) => std::fs::write(path, &bytes)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => stdout
                .write_all(&bytes)
                .map_err(|e| CliError::Io(e.to_string()))?,
        }
        Ok(report)
    });
    match result {
        Ok(report) => {
            let failing: Vec<&CheckReport> = report.failing().collect();
            if failing.is_empty() {
                EXIT_OK
            } else {
                for c in failing {
                    let _ = writeln!(err, "{c}");
                }
                EXIT_INVARIANT
            }
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn points_cell(points: &[f64]) -> Cell {
    if points.is_empty() {
        return Cell::Null;
    }
    let text: Vec<String> = points
        .iter()
        .map(|v| output::format_number(*v).unwrap_or_default())
        .collect();
    Cell::Text(text.join(","))
}

pub const EXPAND_COLUMNS: [&str; 7] = [
    "kind",
    "n",
    "derivative",
    "coefficient",
    "scaled_coefficient",
    "x",
    "polynomial",
];

fn cmd_expand(args: &ExpandArgs) -> Result<Report, CliError> {
    let f = parse_function(&args.f)?;
    let points = args.points.points()?;
    let config = Record::new()
        .with("f", args.f.as_str())
        .with("a", args.a)
        .with("n", args.n)
        .with("x", points_cell(&points));
    let mut report = Report::new("expand", config, &EXPAND_COLUMNS);
    let t = expand(&f, args.a, args.n)?;
    for (n, ((d, c), s)) in t
        .derivative_exprs()
        .iter()
        .zip(t.coefficients())
        .zip(t.scaled_coefficients())
        .enumerate()
    {
        report.push_row(vec![
            "coefficient".into(),
            n.into(),
            d.to_string().into(),
            (*c).into(),
            s.into(),
            Cell::Null,
            Cell::Null,
        ]);
    }
    for x in points {
        report.push_row(vec![
            "polynomial".into(),
            args.n.into(),
            Cell::Null,
            Cell::Null,
            Cell::Null,
            x.into(),
            evaluate_polynomial(&t, x).into(),
        ]);
    }
    Ok(report)
}

pub const REMAINDER_COLUMNS: [&str; 7] = [
    "x",
    "direct",
    "exact_integral",
    "nested_integral",
    "sliced",
    "bound",
    "max_gap",
];

fn cmd_remainder(args: &RemainderArgs) -> Result<Report, CliError> {
    let f = parse_function(&args.f)?;
    let cfg = args.quadrature.config()?;
    let points = args.points.points()?;
    if points.is_empty() {
        return Err(CliError::usage("remainder needs --x or --x-range"));
    }
    let mut config = Record::new()
        .with("f", args.f.as_str())
        .with("a", args.a)
        .with("n", args.n)
        .with("x", points_cell(&points));
    args.quadrature.record(&mut config);
    let mut report = Report::new("remainder", config, &REMAINDER_COLUMNS);
    let t = expand(&f, args.a, args.n)?;
    let mut agreement = WorstCase::new("four_way_agreement");
    let mut bound = WorstCase::new("bound_validity");
    for x in points {
        let r = report_for(&t, x, &cfg)?;
        let sliced = remainder_by_slicing_with(t.residual_integrand(), args.a, args.n, x, &cfg)?;
        let mut values = r.remainders();
        values.push(sliced);
        let gap = max_pairwise_gap(&values);
        agreement.observe(gap, agreement_threshold(args.n), || format!("x = {x}"));
        if x >= args.a {
            let excess = r.direct.abs() - (r.bound * (1.0 + 1e-9) + 1e-12);
            bound.observe(excess.max(0.0), 0.0, || format!("x = {x}"));
        }
        report.push_row(vec![
            x.into(),
            r.direct.into(),
            r.exact_integral.into(),
            Cell::opt(r.nested_integral),
            sliced.into(),
            r.bound.into(),
            gap.into(),
        ]);
    }
    report.invariants.push(agreement.finish());
    if bound.cases() > 0 {
        report.invariants.push(bound.finish());
    }
    Ok(report)
}

pub const SIMPLEX_COLUMNS: [&str; 15] = [
    "n",
    "a",
    "x",
    "samples",
    "seed",
    "exact",
    "estimate",
    "std_error",
    "z_score",
    "partition_classified",
    "partition_discarded",
    "chi_square",
    "chi_square_threshold",
    "max_abs_z",
    "partition_pass",
];

/// Monte Carlo estimates within this many standard errors count as agreeing.
pub const SIGMA_LIMIT: f64 = 4.0;

fn cmd_simplex(args: &SimplexArgs) -> Result<Report, CliError> {
    let config = Record::new()
        .with("n", args.n)
        .with("a", args.a)
        .with("x", args.x)
        .with("samples", args.samples)
        .with("seed", args.seed);
    let mut report = Report::new("simplex", config, &SIMPLEX_COLUMNS);
    let spec = SimplexSpec::new(args.n, args.a, args.x)?;
    let mc = MonteCarloConfig::new(args.samples, args.seed)?;
    let exact = simplex_volume_exact(&spec);
    let m = simplex_volume_montecarlo(&spec, &mc)?;
    let deviation = (m.estimate - exact).abs();
    let z = if m.std_error > 0.0 {
        (m.estimate - exact) / m.std_error
    } else {
        0.0
    };
    report.invariants.push(
        CheckReport::new("montecarlo_volume", deviation, SIGMA_LIMIT * m.std_error)
            .and(m.std_error > 0.0 || deviation == 0.0, "zero variance but inexact"),
    );
    let mut row = vec![
        args.n.into(),
        args.a.into(),
        args.x.into(),
        args.samples.into(),
        args.seed.into(),
        exact.into(),
        m.estimate.into(),
        m.std_error.into(),
        z.into(),
    ];
    if PARTITION_DIMENSIONS.contains(&args.n) {
        let p = ordering_partition_check(args.n, &mc)?;
        row.extend([
            p.classified.into(),
            p.discarded.into(),
            p.chi_square.into(),
            p.chi_square_threshold.into(),
            p.max_abs_z.into(),
            p.pass().into(),
        ]);
        report.invariants.extend(p.checks());
    } else {
        row.extend(std::iter::repeat_n(Cell::Null, 6));
    }
    report.push_row(row);
    Ok(report)
}

pub const FIXEDPOINT_COLUMNS: [&str; 6] = ["k", "x", "eigenvalue", "vector", "residual", "converged"];

fn scalar_rows(report: &mut Report, t: &IterationTrace<f64>, tol: f64) {
    for (k, x) in t.iterates.iter().enumerate() {
        let residual = k.checked_sub(1).map(|i| t.residuals[i]);
        report.push_row(vec![
            k.into(),
            (*x).into(),
            Cell::Null,
            Cell::Null,
            Cell::opt(residual),
            (residual.is_some_and(|r| r <= tol) && k == t.iterations_used && t.converged).into(),
        ]);
    }
    report.invariants.push(trace_check(t.is_consistent(tol)));
}

fn trace_check(ok: bool) -> CheckReport {
    CheckReport::new("trace_integrity", if ok { 0.0 } else { 1.0 }, 0.0)
}

fn parse_matrix(text: &str) -> Result<SmallMatrix, CliError> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::usage(format!("cannot read --matrix '{text}': {e}")))?;
    Ok(SmallMatrix::from_rows(&rows)?)
}

fn cmd_fixedpoint(args: &FixedpointArgs) -> Result<Report, CliError> {
    let mut config = Record::new().with(
        "method",
        match args.method {
            Method::Iterate => "iterate",
            Method::Newton => "newton",
            Method::Power => "power",
        },
    );
    match args.method {
        Method::Iterate | Method::Newton => {
            let text = args
                .f
                .as_deref()
                .ok_or_else(|| CliError::usage("--f is required for this method"))?;
            config.push("f", text);
            config.push("x0", args.x0);
            config.push("tol", args.tol);
            config.push("max_iter", args.max_iter);
            let f = parse_function(text)?;
            let mut report = Report::new("fixedpoint", config, &FIXEDPOINT_COLUMNS);
            let trace = if args.method == Method::Iterate {
                let g = RealFunction::from_expr(f, Interval::widest());
                iterate_scalar(&g, args.x0, args.tol, args.max_iter)?
            } else {
                newton(&f, args.x0, args.tol, args.max_iter)?
            };
            scalar_rows(&mut report, &trace, args.tol);
            Ok(report)
        }
        Method::Power => {
            let text = args
                .matrix
                .as_deref()
                .ok_or_else(|| CliError::usage("--matrix is required for the power method"))?;
            let m = parse_matrix(text)?;
            let v0 = if args.v0.is_empty() {
                vec![1.0; m.dim()]
            } else {
                args.v0.clone()
            };
            config.push("matrix", text);
            config.push("v0", points_cell(&v0));
            config.push("tol", args.tol);
            config.push("max_iter", args.max_iter);
            let mut report = Report::new("fixedpoint", config, &FIXEDPOINT_COLUMNS);
            let r = power_method(&m, &v0, args.tol, args.max_iter)?;
            let t = &r.trace;
            for (k, v) in t.iterates.iter().enumerate() {
                let residual = k.checked_sub(1).map(|i| t.residuals[i]);
                let rayleigh: f64 = v.iter().zip(m.mul_vec(v)).map(|(a, b)| a * b).sum();
                report.push_row(vec![
                    k.into(),
                    Cell::Null,
                    rayleigh.into(),
                    points_cell(v),
                    Cell::opt(residual),
                    (t.converged && k == t.iterations_used).into(),
                ]);
            }
            report.invariants.push(trace_check(t.is_consistent(args.tol)));
            if t.converged {
                report.invariants.push(CheckReport::new(
                    "power_method_residual",
                    r.residual(&m),
                    10.0 * args.tol * r.eigenvalue.abs(),
                ));
            }
            Ok(report)
        }
    }
}

pub const VERIFY_COLUMNS: [&str; 6] = ["suite", "name", "pass", "measured_gap", "threshold", "detail"];

fn cmd_verify(args: &VerifyArgs) -> Result<Report, CliError> {
    if !args.perturb_basis.is_finite() {
        return Err(CliError::usage("--perturb-basis must be finite"));
    }
    let suites = if args.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suites.clone()
    };
    let cfg = VerifyConfig {
        quadrature: args.quadrature.config()?,
        seed: args.seed,
        perturb_basis: args.perturb_basis,
    };
    let names: Vec<&str> = suites.iter().map(|s| s.name()).collect();
    let mut config = Record::new()
        .with("suites", names.join(","))
        .with("seed", args.seed)
        .with("perturb_basis", args.perturb_basis);
    args.quadrature.record(&mut config);
    let mut report = Report::new("verify", config, &VERIFY_COLUMNS);
    for suite_report in verify::run(&suites, &cfg) {
        for c in suite_report.checks {
            report.push_row(vec![
                suite_report.suite.name().into(),
                c.name.as_str().into(),
                c.pass.into(),
                c.measured_gap.into(),
                c.threshold.into(),
                c.detail.as_str().into(),
            ]);
            report.invariants.push(c);
        }
    }
    Ok(report)
}
