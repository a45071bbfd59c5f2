//! `meanomega` command line: sieve and cache buckets, exact sums, constants,
//! verification reports and comparisons.
//!
//! Exit codes: 0 ok, 1 usage, 2 verification failure, 3 I/O.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::cache;
use crate::dirichlet::gk_series_exact;
use crate::error::Error;
use crate::euler::{euler_constant_direct, euler_constant_series, EulerConstantResult, Method, Variant};
use crate::sieve::{accumulate_buckets, exact_mean_sum, OmegaBuckets, DEFAULT_SEGMENT_SIZE, MAX_X};
use crate::verify::{
    compare_series, discrepancy_check, lemma1_check, lemma2_check, lemma3_check, lemma4_check, shiu_check,
    tauz_reports, tauz_rows, LemmaReport, DEFAULT_ALPHA_MAX, DEFAULT_P0, DEFAULT_PRIME_LIMIT, DEFAULT_SERIES_ORDER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// `max |e_norm| / min |e_norm|` allowed by `compare --strict`.
pub const E_NORM_SPREAD: f64 = 20.0;

const DEFAULT_CACHE: &str = "meanomega-buckets.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Thm3,
    Thm1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Series,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LemmaArg {
    #[value(name = "1")]
    L1,
    #[value(name = "2")]
    L2,
    #[value(name = "3")]
    L3,
    #[value(name = "4")]
    L4,
    #[value(name = "6")]
    L6,
    Shiu,
    Discrepancy,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "meanomega", version, about = "Mean values of d(n)/k^omega(n)")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads for sieving. MEANOMEGA_THREADS, when set, takes precedence;
    /// the default is machine parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Suppress progress and human-readable notes on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sieve [1, x] and write the omega-bucket cache.
    Sieve {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        /// Comma-separated checkpoints (default: powers of ten up to x, and x).
        #[arg(long, value_parser = parse_count, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_SEGMENT_SIZE as u64)]
        segment_size: u64,
        #[arg(long, default_value = DEFAULT_CACHE)]
        cache: PathBuf,
    },
    /// Exact S_k(x) at every cached checkpoint.
    Sum {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = DEFAULT_CACHE)]
        cache: PathBuf,
    },
    /// The Euler-product constant C_k.
    Constant {
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value = "thm3")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "series")]
        method: MethodArg,
        #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_PRIME_LIMIT)]
        prime_limit: u64,
        #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_P0)]
        p0: u64,
        #[arg(long, default_value_t = DEFAULT_SERIES_ORDER)]
        order: usize,
    },
    /// Run lemma checks; exits 2 if any fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        lemma: LemmaArg,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Comma-separated checkpoints.
        #[arg(long, value_parser = parse_count, value_delimiter = ',')]
        x: Vec<u64>,
        #[arg(long, default_value_t = 2.0 / 3.0)]
        z: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA_MAX)]
        alpha_max: u32,
        /// Bucket cache, needed by `shiu` and `discrepancy`.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Exact sums against the main term.
    Compare {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = DEFAULT_CACHE)]
        cache: PathBuf,
        /// Add the thm1-vs-thm3 constant verdict.
        #[arg(long)]
        discrepancy: bool,
        /// Exit 2 unless |ratio - 1| shrinks and e_norm stays within a band.
        #[arg(long)]
        strict: bool,
    },
    /// sum_{n <= x} tau_z(n) against x (log x)^(z-1) / Gamma(z).
    Tauz {
        #[arg(long)]
        z: f64,
        #[arg(long, value_parser = parse_count, value_delimiter = ',', required = true)]
        x: Vec<u64>,
    },
    /// Exact local coefficients g_k(p^alpha).
    Gk {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 12)]
        alpha_max: u32,
    },
}

/// Parses `1000000`, `1e6`, `2.5e3` or `10^6` into an exact integer.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    let err = || format!("not a nonnegative integer: {s:?}");
    if let Some((base, exp)) = s.split_once('^') {
        let base: u64 = base.parse().map_err(|_| err())?;
        let exp: u32 = exp.parse().map_err(|_| err())?;
        return base.checked_pow(exp).ok_or_else(err);
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (s.as_str(), 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let shift = exp - frac.len() as i32;
    let digits = format!("{int}{frac}");
    let mut v: u64 = digits.parse().map_err(|_| err())?;
    if shift >= 0 {
        v = 10u64
            .checked_pow(shift as u32)
            .and_then(|p| v.checked_mul(p))
            .ok_or_else(err)?;
    } else {
        let p = 10u64.checked_pow((-shift) as u32).ok_or_else(err)?;
        if v % p != 0 {
            return Err(err());
        }
        v /= p;
    }
    Ok(v)
}

/// Round to 15 significant digits and print the shortest form of the result.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.14e}").parse().expect("formatted float");
    format!("{rounded:?}")
}

#[derive(Clone, Debug)]
enum Cell {
    Int(String),
    Float(f64),
    /// Full round-trip precision.
    Exact(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(s) | Cell::Text(s) => s.clone(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Exact(v) => format!("{v:?}"),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        let num = |s: String| -> Value {
            match serde_json::from_str::<Value>(&s) {
                Ok(v @ Value::Number(_)) => v,
                _ => Value::String(s),
            }
        };
        match self {
            Cell::Int(s) => num(s.clone()),
            Cell::Float(_) | Cell::Exact(_) => num(self.csv()),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// `key: value` lines after a CSV table; extra top-level fields in JSON.
    trailer: Vec<(&'static str, String)>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            trailer: Vec::new(),
        }
    }

    fn emit(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
                for (k, v) in &self.trailer {
                    writeln!(out, "{k}: {v}")?;
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                let value = if self.trailer.is_empty() {
                    Value::Array(rows)
                } else {
                    let mut m = Map::new();
                    m.insert("rows".into(), Value::Array(rows));
                    for (k, v) in &self.trailer {
                        m.insert(k.to_string(), Value::String(v.clone()));
                    }
                    Value::Object(m)
                };
                writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"))?;
            }
        }
        Ok(())
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Cache { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = std::result::Result<Option<Table>, Failure>;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    err: &'a mut dyn Write,
    verify_failed: bool,
}

impl Ctx<'_> {
    fn note(&mut self, msg: &str) {
        if !self.cfg.quiet {
            let _ = writeln!(self.err, "{msg}");
        }
    }
}

fn check_k(k: u32) -> std::result::Result<(), Failure> {
    if k < 2 {
        return Err(Failure::Usage(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

pub const THREADS_ENV: &str = "MEANOMEGA_THREADS";

/// Environment first, then the flag, then machine parallelism.
pub fn resolve_threads(flag: Option<u64>) -> std::result::Result<usize, String> {
    if let Some(v) = std::env::var_os(THREADS_ENV) {
        let v = v.to_string_lossy();
        return match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        };
    }
    Ok(flag.map_or_else(
        || std::thread::available_parallelism().map_or(1, |n| n.get()),
        |t| t as usize,
    ))
}

fn thread_pool(threads: Option<u64>) -> std::result::Result<rayon::ThreadPool, Failure> {
    let n = resolve_threads(threads).map_err(Failure::Usage)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn default_checkpoints(x: u64) -> Vec<u64> {
    let mut v: Vec<u64> = std::iter::successors(Some(10u64), |p| p.checked_mul(10))
        .take_while(|&p| p < x)
        .collect();
    v.push(x);
    v
}

fn cmd_sieve(ctx: &mut Ctx, x: u64, checkpoints: &[u64], segment_size: u64, path: &Path) -> CmdResult {
    if x > MAX_X {
        return Err(Failure::Usage(format!("x = {x} exceeds the supported ceiling {MAX_X}")));
    }
    if x == 0 {
        return Err(Failure::Usage("x must be positive".into()));
    }
    let mut cps = if checkpoints.is_empty() {
        default_checkpoints(x)
    } else {
        checkpoints.to_vec()
    };
    cps.sort_unstable();
    if cps.last().is_some_and(|&c| c > x) {
        return Err(Failure::Usage(format!("checkpoints must not exceed x = {x}")));
    }
    let pool = thread_pool(ctx.cfg.threads)?;
    let buckets = pool.install(|| accumulate_buckets(x, &cps, segment_size as usize))?;
    cache::save(path, &buckets)?;
    ctx.note(&format!("wrote {} checkpoints to {}", buckets.len(), path.display()));
    Ok(None)
}

fn load_cache(path: &Path) -> std::result::Result<Vec<OmegaBuckets>, Failure> {
    cache::load(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn cmd_sum(k: u32, path: &Path) -> CmdResult {
    check_k(k)?;
    let buckets = load_cache(path)?;
    let mut t = Table::new(vec!["x", "S_num", "S_den", "S_float"]);
    for b in &buckets {
        let (r, f) = exact_mean_sum(b, k)?;
        t.rows.push(vec![
            Cell::Int(b.x.to_string()),
            Cell::Int(r.numer().to_string()),
            Cell::Int(r.denom().to_string()),
            Cell::Exact(f),
        ]);
    }
    Ok(Some(t))
}

fn constant_row(c: &EulerConstantResult) -> Vec<Cell> {
    vec![
        Cell::Int(c.k.to_string()),
        Cell::Text(c.variant.to_string()),
        Cell::Text(c.method.to_string()),
        Cell::Text(c.truncation.to_string()),
        Cell::Float(c.value),
        Cell::Float(c.tail_estimate),
    ]
}

fn cmd_constant(k: u32, variant: Variant, method: Method, prime_limit: u64, p0: u64, order: usize) -> CmdResult {
    check_k(k)?;
    let c = match method {
        Method::Direct => euler_constant_direct(k, variant, prime_limit)?,
        Method::Series => euler_constant_series(k, variant, p0, order)?,
    };
    let mut t = Table::new(vec!["k", "variant", "method", "truncation", "value", "tail_estimate"]);
    t.rows.push(constant_row(&c));
    Ok(Some(t))
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(";")
}

fn report_table(reports: &[LemmaReport]) -> Table {
    let mut t = Table::new(vec!["lemma", "pass", "criterion", "measured", "bound", "detail"]);
    for r in reports {
        t.rows.push(vec![
            Cell::Text(r.lemma.to_string()),
            Cell::Bool(r.pass),
            Cell::Text(format!("{:?}", r.criterion).to_lowercase()),
            Cell::Text(join_floats(&r.measured)),
            Cell::Text(join_floats(&r.bound)),
            Cell::Text(format!("\"{}\"", r.detail.replace('"', "'"))),
        ]);
    }
    t
}

fn or_default(xs: &[u64], default: &[u64]) -> Vec<u64> {
    if xs.is_empty() {
        default.to_vec()
    } else {
        let mut v = xs.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    ctx: &mut Ctx,
    lemma: LemmaArg,
    k: u32,
    xs: &[u64],
    z: f64,
    alpha_max: u32,
    cache_path: Option<&PathBuf>,
) -> CmdResult {
    check_k(k)?;
    let trend = or_default(xs, &[10_000, 100_000, 1_000_000]);
    let single = *or_default(xs, &[1_000_000]).last().expect("nonempty");
    let all = lemma == LemmaArg::All;
    let mut reports = Vec::new();
    if all || lemma == LemmaArg::L1 {
        reports.push(lemma1_check(k, &trend)?);
    }
    if all || lemma == LemmaArg::L2 {
        reports.push(lemma2_check(k, &trend)?);
    }
    if all || lemma == LemmaArg::L3 {
        reports.push(lemma3_check(k, single)?);
    }
    if all || lemma == LemmaArg::L4 {
        reports.push(lemma4_check(k, single, alpha_max)?);
    }
    if all || lemma == LemmaArg::L6 {
        if trend.first().is_some_and(|&x| x < 1_000) {
            return Err(Failure::Usage("tau_z checkpoints must be at least 1000".into()));
        }
        let rows = tauz_rows(z, &trend)?;
        reports.extend(tauz_reports(z, &rows));
    }
    let needs_cache = matches!(lemma, LemmaArg::Shiu | LemmaArg::Discrepancy);
    match cache_path {
        Some(p) if all || needs_cache => {
            let buckets = load_cache(p)?;
            if all || lemma == LemmaArg::Shiu {
                reports.push(shiu_check(k, &buckets)?);
            }
            if all || lemma == LemmaArg::Discrepancy {
                reports.push(discrepancy_check(k, &buckets)?.report);
            }
        }
        None if needs_cache => return Err(Failure::Usage("--cache is required for this check".into())),
        _ => {}
    }
    for r in &reports {
        let status = if r.pass { "PASS" } else { "FAIL" };
        ctx.note(&format!("{} {status}: {}", r.lemma, r.detail));
    }
    ctx.verify_failed = reports.iter().any(|r| !r.pass);
    Ok(Some(report_table(&reports)))
}

fn cmd_compare(ctx: &mut Ctx, k: u32, path: &Path, discrepancy: bool, strict: bool) -> CmdResult {
    check_k(k)?;
    let buckets: Vec<OmegaBuckets> = load_cache(path)?.into_iter().filter(|b| b.x >= 2).collect();
    let constant = euler_constant_series(k, Variant::Thm3, DEFAULT_P0, DEFAULT_SERIES_ORDER)?;
    let rows = compare_series(k, &buckets, &constant)?;
    let mut t = Table::new(vec!["x", "S", "M", "ratio", "e_norm"]);
    for r in &rows {
        t.rows.push(vec![
            Cell::Int(r.x.to_string()),
            Cell::Float(r.s),
            Cell::Float(r.main),
            Cell::Float(r.ratio),
            Cell::Float(r.e_norm),
        ]);
    }
    if discrepancy {
        let d = discrepancy_check(k, &buckets)?;
        ctx.note(&d.report.detail);
        t.trailer.push(("constant_variant", d.verdict.to_string()));
        if strict && !d.report.pass {
            ctx.verify_failed = true;
        }
    }
    if strict {
        let first = rows.first().expect("three rows");
        let last = rows.last().expect("three rows");
        let shrinks = (last.ratio - 1.0).abs() < (first.ratio - 1.0).abs();
        let mags: Vec<f64> = rows.iter().map(|r| r.e_norm.abs()).collect();
        let max = mags.iter().copied().fold(0.0, f64::max);
        let min = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let banded = max < E_NORM_SPREAD * min;
        ctx.note(&format!(
            "strict: |ratio-1| shrinks: {shrinks}; e_norm spread {} (limit {E_NORM_SPREAD})",
            fmt_float(max / min)
        ));
        if !(shrinks && banded) {
            ctx.verify_failed = true;
        }
    }
    Ok(Some(t))
}

fn cmd_tauz(z: f64, xs: &[u64]) -> CmdResult {
    let xs = or_default(xs, &[]);
    let rows = tauz_rows(z, &xs)?;
    let mut t = Table::new(vec!["x", "sum", "main", "e_norm"]);
    for r in rows {
        t.rows.push(vec![
            Cell::Int(r.x.to_string()),
            Cell::Float(r.sum),
            Cell::Float(r.main),
            Cell::Float(r.e_norm),
        ]);
    }
    Ok(Some(t))
}

fn cmd_gk(k: u32, alpha_max: u32) -> CmdResult {
    check_k(k)?;
    let s = gk_series_exact(k, alpha_max.max(1) as usize)?;
    let mut t = Table::new(vec!["alpha", "g_num", "g_den", "g_float"]);
    for (a, c) in s.coeffs().iter().enumerate().take(alpha_max as usize + 1) {
        t.rows.push(vec![
            Cell::Int(a.to_string()),
            Cell::Int(c.numer().to_string()),
            Cell::Int(c.denom().to_string()),
            Cell::Float(crate::dirichlet::ratio_to_f64(c)),
        ]);
    }
    Ok(Some(t))
}

fn dispatch(ctx: &mut Ctx) -> CmdResult {
    let cfg = ctx.cfg;
    match &cfg.command {
        Command::Sieve {
            x,
            checkpoints,
            segment_size,
            cache,
        } => cmd_sieve(ctx, *x, checkpoints, *segment_size, cache),
        Command::Sum { k, cache } => cmd_sum(*k, cache),
        Command::Constant {
            k,
            variant,
            method,
            prime_limit,
            p0,
            order,
        } => {
            let variant = match variant {
                VariantArg::Thm3 => Variant::Thm3,
                VariantArg::Thm1 => Variant::Thm1,
            };
            let method = match method {
                MethodArg::Direct => Method::Direct,
                MethodArg::Series => Method::Series,
            };
            cmd_constant(*k, variant, method, *prime_limit, *p0, *order)
        }
        Command::Verify {
            lemma,
            k,
            x,
            z,
            alpha_max,
            cache,
        } => cmd_verify(ctx, *lemma, *k, x, *z, *alpha_max, cache.as_ref()),
        Command::Compare {
            k,
            cache,
            discrepancy,
            strict,
        } => cmd_compare(ctx, *k, cache, *discrepancy, *strict),
        Command::Tauz { z, x } => cmd_tauz(*z, x),
        Command::Gk { k, alpha_max } => cmd_gk(*k, *alpha_max),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    run_config(&cfg, out, err)
}

pub fn run_config(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut ctx = Ctx {
        cfg,
        err,
        verify_failed: false,
    };
    let result = dispatch(&mut ctx);
    let failed = ctx.verify_failed;
    let emitted = match result {
        Ok(Some(t)) => t.emit(cfg.format, out).map_err(Failure::from),
        Ok(None) => Ok(()),
        Err(f) => Err(f),
    };
    match emitted {
        Ok(()) if failed => EXIT_VERIFY,
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_IO
        }
    }
}
