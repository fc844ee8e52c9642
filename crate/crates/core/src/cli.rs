//! `divcircle` command-line front end.
//!
//! Exit codes: 0 success, 1 unknown verb, 2 parameter out of range,
//! 3 budget exceeded, 4 I/O failure. Errors are reported on stderr as one
//! line: `error code=<n> kind=<kind> message="<text>"`.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};

use crate::arcs::{build_arc_family, ArcTag, DEFAULT_NU, MAX_NU};
use crate::arith::{sieve_divisor, Fraction};
use crate::error::Error;
use crate::expsum::{eval_direct, grid_eval, kernel_envelope, kernel_eval, rational_tau_sum, PhasePoint};
use crate::moments::{kernel_arc_integral, kernel_moment_even_exact, moment_even_exact, moment_on_arcs, moment_quadrature_refined, singular_series, DEFAULT_TOL};
use crate::par;
use crate::report::{emit_report, Cell, Format, Table};
use crate::verify::{quadrature_grid_size, theorem_ratio_table};

#[derive(Debug, Parser)]
#[command(name = "divcircle", version, about = "Circle-method numerics for the divisor-function exponential sum")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Output path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Seed recorded in the report metadata.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Evaluate M_τ(α), or the rational sum at a/q.
    Sum(SumArgs),
    /// Evaluate the Dirichlet kernel or one of its moments.
    Kernel(KernelArgs),
    /// List the major arcs or classify a phase.
    Arcs(ArcsArgs),
    /// L^p moment of M_τ, optionally split over the arcs.
    Moment(MomentArgs),
    /// Singular series value.
    Singular(SingularArgs),
    /// Ratio table for the moment asymptotics.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SumArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub x: u64,
    /// Phase β.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Moment exponent; the kernel moment over a full period.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ArcsArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long, default_value_t = DEFAULT_NU)]
    pub nu: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub p: f64,
    /// Force the exact integer-convolution path (even p only).
    #[arg(long)]
    pub exact: bool,
    /// Starting grid size (default: smallest power of two >= 8X).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Also split the quadrature over the major/minor arcs for this ν.
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SingularArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub p: f64,
    /// Denominator cap P (default X^ν).
    #[arg(long)]
    pub pcap: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_NU)]
    pub nu: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, default_value_t = DEFAULT_NU)]
    pub nu: f64,
    #[arg(long = "x-list", value_delimiter = ',', required = true)]
    pub x_list: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

/// A failed invocation: exit code plus a one-line description.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn line(&self) -> String {
        format!("error code={} kind={} message={:?}", self.code, self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { code: e.exit_code(), kind: e.kind().to_string(), message: e.to_string() }
    }
}

/// Result of a successful command, ready for emission.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn param(msg: String) -> Error {
    Error::Parameter(msg)
}

fn check_x(x: u64) -> Result<(), Error> {
    if x == 0 {
        return Err(param("--x must be at least 1".into()));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<(), Error> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(param(format!("--p {p} must be >= 1")));
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<(), Error> {
    if !(nu > 0.0 && nu <= MAX_NU) {
        return Err(param(format!("--nu {nu} outside (0, {MAX_NU}]")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), Error> {
    if !(tol > 0.0) {
        return Err(param(format!("--tol {tol} must be positive")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<(), Error> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(param(format!("--alpha {alpha} outside [0, 1)")));
    }
    Ok(())
}

fn even_order(p: f64) -> Result<u32, Error> {
    if p >= 2.0 && p.fract() == 0.0 && (p as u64) % 2 == 0 && p <= 64.0 {
        Ok((p as u32) / 2)
    } else {
        Err(param(format!("--exact needs an even integer p, got {p}")))
    }
}

fn run_sum(args: &SumArgs) -> Result<Table, Error> {
    check_x(args.x)?;
    let table = sieve_divisor(args.x as usize)?;
    match (args.alpha, args.a, args.q) {
        (Some(alpha), None, None) => {
            check_alpha(alpha)?;
            let m = eval_direct(&table, PhasePoint::new(alpha));
            let mut t = Table::new(&["X", "alpha", "re", "im", "abs"]);
            t.push(vec![args.x.into(), alpha.into(), m.re.into(), m.im.into(), m.norm().into()]);
            Ok(t)
        }
        (None, Some(a), Some(q)) => {
            let frac = Fraction::new(a, q)?;
            let r = rational_tau_sum(&table, frac);
            let mut t = Table::new(&["X", "a", "q", "exact_re", "exact_im", "main", "residual_re", "residual_im"]);
            t.push(vec![
                args.x.into(),
                a.into(),
                q.into(),
                r.exact.re.into(),
                r.exact.im.into(),
                r.main.into(),
                r.residual.re.into(),
                r.residual.im.into(),
            ]);
            Ok(t)
        }
        _ => Err(param("sum needs either --alpha or both --a and --q".into())),
    }
}

fn run_kernel(args: &KernelArgs) -> Result<Table, Error> {
    check_x(args.x)?;
    match (args.alpha, args.p) {
        (Some(beta), None) => {
            check_alpha(beta)?;
            let v = kernel_eval(args.x, beta);
            let mut t = Table::new(&["X", "beta", "re", "im", "abs", "envelope"]);
            t.push(vec![
                args.x.into(),
                beta.into(),
                v.re.into(),
                v.im.into(),
                v.norm().into(),
                kernel_envelope(args.x, beta).into(),
            ]);
            Ok(t)
        }
        (None, Some(p)) => {
            check_p(p)?;
            let mut t = Table::new(&["X", "p", "method", "N", "value", "rel_error_est"]);
            if args.exact {
                let s = even_order(p)?;
                let m = kernel_moment_even_exact(args.x, s)?;
                t.push(vec![args.x.into(), p.into(), m.method.as_str().into(), 0usize.into(), m.value.into(), 0.0.into()]);
            } else {
                check_tol(args.tol)?;
                let (v, m, rel) = kernel_arc_integral(args.x, 0.5, p, args.tol)?;
                t.push(vec![args.x.into(), p.into(), "quadrature".into(), m.into(), v.into(), rel.into()]);
            }
            Ok(t)
        }
        _ => Err(param("kernel needs exactly one of --alpha or --p".into())),
    }
}

fn run_arcs(args: &ArcsArgs) -> Result<Table, Error> {
    check_nu(args.nu)?;
    let fam = build_arc_family(args.x, args.nu)?;
    let chk = fam.checks();
    let mut t = match args.alpha {
        None => {
            let mut t = Table::new(&["a", "q", "center", "radius"]);
            for arc in fam.arcs() {
                t.push(vec![
                    arc.fraction.numer().into(),
                    arc.fraction.denom().into(),
                    arc.center.into(),
                    arc.radius.into(),
                ]);
            }
            t
        }
        Some(alpha) => {
            check_alpha(alpha)?;
            let c = fam.classify(alpha);
            let tag = match c.tag {
                ArcTag::Major(_) => "major",
                ArcTag::Minor => "minor",
            };
            let mut t = Table::new(&["alpha", "tag", "a", "q", "delta", "bound"]);
            t.push(vec![
                alpha.into(),
                tag.into(),
                c.witness.fraction.numer().into(),
                c.witness.fraction.denom().into(),
                c.witness.delta.into(),
                c.witness.bound.into(),
            ]);
            t
        }
    };
    t.meta("X", args.x);
    t.meta("nu", args.nu);
    t.meta("P", fam.params().p);
    t.meta("disjoint", chk.disjoint);
    t.meta("measure", chk.measure);
    t.meta("measure_unwrapped", chk.measure_unwrapped);
    Ok(t)
}

fn run_moment(args: &MomentArgs) -> Result<Table, Error> {
    check_x(args.x)?;
    check_p(args.p)?;
    check_tol(args.tol)?;
    let table = sieve_divisor(args.x as usize)?;
    let mut t = Table::new(&["X", "p", "part", "method", "N", "value", "rel_error_est"]);
    if args.exact {
        let s = even_order(args.p)?;
        let m = moment_even_exact(&table, s)?;
        let value = match &m.exact {
            Some(v) if v.bits() <= 53 => Cell::Int(u64::try_from(v.clone()).unwrap_or(u64::MAX) as i64),
            _ => m.value.into(),
        };
        t.push(vec![args.x.into(), args.p.into(), "total".into(), m.method.as_str().into(), 0usize.into(), value, 0.0.into()]);
        return Ok(t);
    }
    let n = args.grid.unwrap_or_else(|| quadrature_grid_size(args.x));
    let grid = grid_eval(&table, n)?;
    let (total, fine) = moment_quadrature_refined(&grid, args.p, args.tol)?;
    t.push(vec![
        args.x.into(),
        args.p.into(),
        "total".into(),
        total.method.as_str().into(),
        total.n.into(),
        total.value.into(),
        total.rel_error_est.into(),
    ]);
    if let Some(nu) = args.nu {
        check_nu(nu)?;
        let fam = build_arc_family(args.x, nu)?;
        let (major, minor) = moment_on_arcs(&fine, &fam, args.p)?;
        for (name, m) in [("major", major), ("minor", minor)] {
            t.push(vec![
                args.x.into(),
                args.p.into(),
                name.into(),
                m.method.as_str().into(),
                m.n.into(),
                m.value.into(),
                m.rel_error_est.into(),
            ]);
        }
    }
    Ok(t)
}

fn run_singular(args: &SingularArgs) -> Result<Table, Error> {
    check_x(args.x)?;
    if !(args.p > 0.0) {
        return Err(param(format!("--p {} must be positive", args.p)));
    }
    let pcap = match args.pcap {
        Some(c) => c,
        None => {
            check_nu(args.nu)?;
            (args.x as f64).powf(args.nu)
        }
    };
    let s = singular_series(args.x, pcap, args.p)?;
    let mut t = Table::new(&["X", "P", "p", "value", "ratio"]);
    let ratio = s.value / (args.x as f64).ln().powf(args.p);
    t.push(vec![args.x.into(), pcap.into(), args.p.into(), s.value.into(), ratio.into()]);
    Ok(t)
}

fn run_verify(args: &VerifyArgs) -> Result<Table, Error> {
    check_p(args.p)?;
    check_nu(args.nu)?;
    check_tol(args.tol)?;
    let report = theorem_ratio_table(args.p, &args.x_list, args.nu, args.tol)?;
    Ok(report.to_table())
}

fn dispatch(verb: &Verb) -> Result<Table, Error> {
    match verb {
        Verb::Sum(a) => run_sum(a),
        Verb::Kernel(a) => run_kernel(a),
        Verb::Arcs(a) => run_arcs(a),
        Verb::Moment(a) => run_moment(a),
        Verb::Singular(a) => run_singular(a),
        Verb::Verify(a) => run_verify(a),
    }
}

/// Parse `argv` (including the program name) and run the command.
pub fn parse_and_run(argv: &[String]) -> Result<Outcome, CliError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = match e.kind() {
            ErrorKind::InvalidSubcommand => 1,
            _ => 2,
        };
        let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
        CliError { code, kind: if code == 1 { "unknown_verb".into() } else { "parameter".into() }, message: first }
    })?;
    let clock = Instant::now();
    let result = par::with_threads(cli.threads, || dispatch(&cli.verb).map(|t| (t, par::current_threads())));
    let (mut table, threads) = result?;
    table.meta("version", env!("CARGO_PKG_VERSION"));
    table.meta("seed", cli.seed);
    table.meta("threads", threads);
    table.meta("wall_ms", clock.elapsed().as_millis() as u64);
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    Ok(Outcome { table, format, out: cli.out })
}

/// Full command execution; returns the process exit code.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if let Err(e) = Cli::try_parse_from(argv) {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = write!(stdout, "{e}");
            return 0;
        }
    }
    let outcome = match parse_and_run(argv) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            return e.code;
        }
    };
    match emit_report(&outcome.table, outcome.format, outcome.out.as_deref(), stdout) {
        Ok(()) => 0,
        Err(e) => {
            let e = CliError::from(e);
            let _ = writeln!(stderr, "{}", e.line());
            e.code
        }
    }
}
