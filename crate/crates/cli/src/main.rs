mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use singer_core::acceptance;
use singer_core::arith::{FactorCache, PrimePower, CACHE_ENV_VAR};
use singer_core::constants::{euler_product_pn, series_p_default, series_p_direct_range, series_p_grouped};
use singer_core::distribution::{self, Ecdf, Rendering};
use singer_core::ensembles::{self, AverageReport, Ensemble, Mode, Params};
use singer_core::rational::{decimal_f64, decimal_string, decimal_with_digits, ratio_string};
use singer_core::singer::{self, build_field, oracle, GroupSpec};
use singer_core::{Context, Error, Limits};

use output::{write_records, Format, Record};

#[derive(Parser, Debug)]
#[command(name = "singer", version, about = "Singer-cycle densities in GL_n(q)")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json-lines")]
    format: Format,
    /// Factorization cache file, loaded before and saved after the command.
    #[arg(long, global = true, env = CACHE_ENV_VAR)]
    cache: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    workers: u64,
    /// Accepted for interface stability; every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(flatten)]
    caps: Caps,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Caps {
    #[arg(long, global = true)]
    sieve_cap: Option<u64>,
    #[arg(long, global = true)]
    field_cap: Option<u128>,
    #[arg(long, global = true)]
    group_cap: Option<u128>,
    #[arg(long, global = true)]
    poly_cap: Option<u128>,
    #[arg(long, global = true)]
    direct_cap: Option<u64>,
    #[arg(long, global = true)]
    exact_terms: Option<usize>,
    /// Prime bound for the Euler product attached to averages.
    #[arg(long, global = true)]
    report_prime_bound: Option<u64>,
}

impl Caps {
    fn apply(&self, mut l: Limits) -> Limits {
        if let Some(v) = self.sieve_cap {
            l.sieve_cap = v;
        }
        if let Some(v) = self.field_cap {
            l.field_cap = v;
        }
        if let Some(v) = self.group_cap {
            l.group_cap = v;
        }
        if let Some(v) = self.poly_cap {
            l.poly_cap = v;
        }
        if let Some(v) = self.direct_cap {
            l.direct_cap = v;
        }
        if let Some(v) = self.exact_terms {
            l.exact_terms = v;
        }
        if let Some(v) = self.report_prime_bound {
            l.prime_bound = v;
        }
        l
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct GroupArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: u128,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// p_n(q) = φ(q^n-1) / (n(q^n-1)).
    Density(GroupArgs),
    /// Number of Singer cycles in GL_n(q).
    Count(GroupArgs),
    GlOrder(GroupArgs),
    PrimitivePolys(GroupArgs),
    #[command(subcommand)]
    Constants(ConstantsCmd),
    #[command(subcommand)]
    Avg(AvgCmd),
    #[command(subcommand)]
    Dist(DistCmd),
    #[command(subcommand)]
    Oracle(OracleCmd),
    #[command(subcommand)]
    Cache(CacheCmd),
    /// Runs the acceptance suite and prints a pass/fail table.
    Accept {
        /// Criterion ids to run; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Subcommand, Debug)]
enum ConstantsCmd {
    /// Certified truncated Euler product for p_n.
    Artin {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1_000_000)]
        prime_bound: u64,
    },
    /// P(p, r) by order grouping (default) or direct summation.
    Series {
        #[arg(long)]
        p: u128,
        #[arg(long, default_value_t = 1)]
        r: u64,
        /// Truncation order; the per-prime default when omitted.
        #[arg(long)]
        k: Option<u32>,
        /// Sum directly over squarefree m ≤ M instead.
        #[arg(long)]
        direct: bool,
        #[arg(long, default_value_t = 100_000)]
        m: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    PrimePowers,
    Extensions,
    Ranks,
}

#[derive(Args, Debug, Clone, Copy)]
struct EnsembleArgs {
    #[arg(long)]
    mode: ModeArg,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
}

impl EnsembleArgs {
    fn ensemble(&self) -> singer_core::Result<Ensemble> {
        let mode = match self.mode {
            ModeArg::PrimePowers => Mode::PrimePowers,
            ModeArg::Extensions => Mode::Extensions,
            ModeArg::Ranks => Mode::Ranks,
        };
        let params = match mode {
            Mode::PrimePowers => Params { n: self.n, ..Params::default() },
            Mode::Extensions => Params { p: self.p, n: self.n.or(Some(1)), ..Params::default() },
            Mode::Ranks => Params { q: self.q, ..Params::default() },
        };
        Ensemble::from_parts(mode, &params)
    }
}

#[derive(Subcommand, Debug)]
enum AvgCmd {
    PrimePowers {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        x: f64,
    },
    Extensions {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        x: f64,
    },
    Ranks {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        x: f64,
    },
    /// Averages at each x of an ascending list.
    Ladder {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        xs: Vec<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum DistCmd {
    /// Jump points (z, F(z)) of the ECDF of n·p_n over the ensemble.
    Ecdf {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        x: f64,
        /// Write decimals with this many significant digits instead of exact rationals.
        #[arg(long, num_args = 0..=1, default_missing_value = "15")]
        decimal: Option<usize>,
    },
    /// Kolmogorov distances between ECDFs at consecutive x values.
    Kolmogorov {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        xs: Vec<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Formula vs exhaustive matrix count for every group within the caps.
    Verify {
        #[arg(long, default_value_t = 2_000_000)]
        max_group_size: u128,
    },
    /// Describes F_{p^r} as constructed by the oracle.
    Field {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        r: u32,
    },
}

#[derive(Subcommand, Debug)]
enum CacheCmd {
    Stats,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RANGE: u8 = 3;
const EXIT_FACTORIZATION: u8 = 4;
const EXIT_ORACLE_CAP: u8 = 5;
const EXIT_DOMAIN: u8 = 6;
const EXIT_CACHE: u8 = 7;

fn classify(e: &Error) -> (&'static str, u8) {
    match e {
        Error::InvalidArgument(_) => ("invalid_argument", EXIT_INVALID),
        Error::Range(_) => ("range", EXIT_RANGE),
        Error::FactorizationExhausted { .. } => ("factorization_exhausted", EXIT_FACTORIZATION),
        Error::OracleCap { .. } => ("oracle_cap", EXIT_ORACLE_CAP),
        Error::Domain(_) => ("domain", EXIT_DOMAIN),
        Error::Cache(_) => ("cache", EXIT_CACHE),
    }
}

fn error_record(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message, "exit_code": code }));
    ExitCode::from(code)
}

enum Failure {
    Lib(Error),
    Io(io::Error),
    /// The command ran but its checks failed.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let message = e.kind().to_string();
            return error_record("invalid_argument", &message, EXIT_INVALID);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            let (kind, code) = classify(&e);
            error_record(kind, &e.to_string(), code)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => error_record("io", &e.to_string(), EXIT_FAILURE),
        Err(Failure::Check(msg)) => error_record("check_failed", &msg, EXIT_FAILURE),
    }
}

fn run(cli: &Cli) -> Outcome {
    let cache = match &cli.cache {
        Some(path) => {
            let (cache, report) = FactorCache::load(path)?;
            if !report.rejected.is_empty() {
                log::warn!("{} cache lines rejected", report.rejected.len());
            }
            Some((path.clone(), Arc::new(cache), report))
        }
        None => None,
    };
    let limits = cli.caps.apply(Limits::default());
    let mut ctx = Context::new(cli.workers as usize)?.with_limits(limits);
    if let Some((_, c, _)) = &cache {
        ctx = ctx.with_cache(c.clone());
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = dispatch(cli, &ctx, cache.as_ref().map(|(p, c, r)| (p, c.as_ref(), r)), &mut out);
    out.flush()?;
    if let Some((path, c, _)) = &cache {
        if !matches!(cli.command, Command::Cache(_)) {
            c.save(path)?;
        }
    }
    result
}

type CacheView<'a> = Option<(&'a PathBuf, &'a FactorCache, &'a singer_core::arith::LoadReport)>;

fn dispatch(cli: &Cli, ctx: &Context, cache: CacheView, out: &mut dyn Write) -> Outcome {
    let format = cli.format;
    match &cli.command {
        Command::Density(g) => {
            let spec = group(g)?;
            let d = singer::density(ctx, &spec)?;
            let exact = d.exact();
            let rec = group_record(&spec)
                .int("numerator", d.numerator())
                .with("denominator", d.denominator.to_string())
                .with("density", ratio_string(&exact))
                .with("decimal", decimal_string(&exact));
            write_records(out, format, &[rec])?;
        }
        Command::Count(g) => {
            let spec = group(g)?;
            let order = singer::gl_order(&spec)?;
            let count = singer::singer_count(ctx, &spec)?;
            let ratio = singer::count_ratio(ctx, &spec)?;
            let rec = group_record(&spec)
                .int("gl_order", order)
                .int("singer_count", count)
                .with("fraction", ratio_string(&ratio))
                .with("decimal", decimal_string(&ratio));
            write_records(out, format, &[rec])?;
        }
        Command::GlOrder(g) => {
            let spec = group(g)?;
            write_records(out, format, &[group_record(&spec).int("gl_order", singer::gl_order(&spec)?)])?;
        }
        Command::PrimitivePolys(g) => {
            let spec = group(g)?;
            let count = singer::primitive_poly_count(ctx, &spec)?;
            write_records(out, format, &[group_record(&spec).int("primitive_polys", count)])?;
        }
        Command::Constants(ConstantsCmd::Artin { n, prime_bound }) => {
            let v = euler_product_pn(ctx, *n, *prime_bound)?;
            let rec = Record::new()
                .with("n", *n)
                .with("prime_bound", *prime_bound)
                .with("estimate", v.estimate)
                .with("error_bound", v.error_bound)
                .with("lower", v.lower())
                .with("upper", v.upper())
                .with("decimal", decimal_f64(v.estimate))
                .with("meta", v.meta.clone());
            write_records(out, format, &[rec])?;
        }
        Command::Constants(ConstantsCmd::Series { p, r, k, direct, m }) => {
            if *direct {
                let d = series_p_direct_range(ctx, *p, *r, 1, *m)?;
                let rec = Record::new()
                    .int("p", *p)
                    .with("r", *r)
                    .with("m", *m)
                    .with("value", d.value)
                    .with("absolute", d.absolute)
                    .with("terms", d.terms)
                    .with("decimal", decimal_f64(d.value));
                write_records(out, format, &[rec])?;
            } else {
                let s = match k {
                    Some(k) => series_p_grouped(ctx, *p, *r, *k)?,
                    None => series_p_default(ctx, *p, *r)?,
                };
                let c = &s.certified;
                let rec = Record::new()
                    .int("p", *p)
                    .with("r", *r)
                    .with("k", c.truncation)
                    .with("estimate", c.estimate)
                    .with("error_bound", c.error_bound)
                    .with("lower", c.lower())
                    .with("upper", c.upper())
                    .with("exact_estimate", ratio_string(&s.exact_estimate))
                    .with("decimal", decimal_string(&s.exact_estimate))
                    .with("contains_zero", c.contains_zero())
                    .with("meta", c.meta.clone());
                write_records(out, format, &[rec])?;
            }
        }
        Command::Avg(cmd) => {
            let reports = match cmd {
                AvgCmd::PrimePowers { n, x } => vec![ensembles::average_over_prime_powers(ctx, *n, *x)?],
                AvgCmd::Extensions { p, n, x } => vec![ensembles::average_over_extensions(ctx, *p, *n, *x)?],
                AvgCmd::Ranks { q, x } => vec![ensembles::average_over_ranks(ctx, *q, *x)?],
                AvgCmd::Ladder { ensemble, xs } => ensembles::convergence_ladder(ctx, ensemble.ensemble()?, xs)?,
            };
            write_reports(out, format, &reports)?;
        }
        Command::Dist(DistCmd::Ecdf { ensemble, x, decimal }) => {
            let e = distribution::ecdf(ctx, ensemble.ensemble()?, *x)?;
            let how = match decimal {
                Some(0) => return Err(Error::InvalidArgument("--decimal needs at least 1 digit".into()).into()),
                Some(d) => Rendering::Decimal(*d),
                None => Rendering::Exact,
            };
            write_ecdf(out, format, &e, how)?;
        }
        Command::Dist(DistCmd::Kolmogorov { ensemble, xs }) => {
            if xs.len() < 2 {
                return Err(Error::InvalidArgument("--xs needs at least two values".into()).into());
            }
            let lines = distribution::stability_ladder(ctx, ensemble.ensemble()?, xs)?;
            match format {
                Format::Csv => distribution::write_ladder_csv(&mut *out, &lines)?,
                Format::JsonLines => {
                    for l in &lines {
                        writeln!(out, "{}", serde_json::to_string(l).map_err(io::Error::other)?)?;
                    }
                }
                Format::Plain => {
                    let recs: Vec<Record> = lines
                        .iter()
                        .map(|l| {
                            Record::new()
                                .with("mode", l.mode.as_str())
                                .with("params", l.params.clone())
                                .with("x1", l.x1)
                                .with("x2", l.x2)
                                .with("kolmogorov_distance", l.kolmogorov_distance)
                        })
                        .collect();
                    write_records(out, format, &recs)?;
                }
            }
        }
        Command::Oracle(OracleCmd::Verify { max_group_size }) => {
            let mut limits = ctx.limits.clone();
            limits.group_cap = limits.group_cap.max(*max_group_size);
            let octx = oracle_context(ctx, limits)?;
            let mut recs = Vec::new();
            let mut mismatches = 0;
            for spec in oracle::specs_within(*max_group_size, octx.limits.field_cap) {
                let formula = singer::singer_count(&octx, &spec)?;
                let counted = oracle::oracle_count_max_order_elements(&octx, &spec)?;
                mismatches += usize::from(formula != counted);
                log::info!("{spec}: {formula} vs {counted}");
                recs.push(
                    group_record(&spec)
                        .int("formula_count", formula)
                        .int("oracle_count", counted)
                        .with("match", formula == counted),
                );
            }
            write_records(out, format, &recs)?;
            if mismatches > 0 {
                return Err(Failure::Check(format!("{mismatches} formula/oracle mismatches")));
            }
        }
        Command::Oracle(OracleCmd::Field { p, r }) => {
            let f = build_field(*p, *r, ctx.limits.field_cap)?;
            let modulus: Vec<String> = f.modulus().iter().map(u32::to_string).collect();
            let units = (1..f.size() as u16).filter(|&a| f.inv(a).is_some()).count();
            let rec = Record::new()
                .with("p", f.p())
                .with("r", f.r())
                .with("size", f.size())
                .with("modulus", modulus.join(" "))
                .with("units", units);
            write_records(out, format, &[rec])?;
        }
        Command::Cache(CacheCmd::Stats) => {
            let Some((path, c, report)) = cache else {
                return Err(Error::InvalidArgument(format!("cache stats needs --cache or {CACHE_ENV_VAR}")).into());
            };
            let rec = Record::new()
                .with("path", path.display().to_string())
                .with("entries", c.stats().entries)
                .with("accepted", report.accepted)
                .with("rejected", report.rejected.len());
            write_records(out, format, &[rec])?;
        }
        Command::Accept { only } => {
            if let Some(bad) = only.iter().find(|&&id| !(1..=11).contains(&id)) {
                return Err(Error::InvalidArgument(format!("no criterion {bad}")).into());
            }
            let results = acceptance::run(ctx.workers(), ctx.cache().cloned(), only)?;
            let recs: Vec<Record> = results
                .iter()
                .map(|r| {
                    Record::new()
                        .with("criterion", r.id)
                        .with("status", if r.passed { "PASS" } else { "FAIL" })
                        .with("title", r.title)
                        .with("documented_miss", r.documented_miss)
                        .with("detail", r.detail.clone())
                })
                .collect();
            write_records(out, format, &recs)?;
            let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
            if !failed.is_empty() {
                return Err(Failure::Check(format!("criteria failed: {failed:?}")));
            }
        }
    }
    Ok(())
}

fn group(g: &GroupArgs) -> singer_core::Result<GroupSpec> {
    GroupSpec::new(g.n, PrimePower::from_q(g.q)?)
}

fn group_record(spec: &GroupSpec) -> Record {
    Record::new().with("n", spec.n()).int("q", spec.q().q())
}

fn oracle_context(ctx: &Context, limits: Limits) -> singer_core::Result<Context> {
    let mut c = Context::new(ctx.workers())?.with_limits(limits);
    if let Some(cache) = ctx.cache() {
        c = c.with_cache(cache.clone());
    }
    Ok(c)
}

fn write_reports(out: &mut dyn Write, format: Format, reports: &[AverageReport]) -> Outcome {
    match format {
        Format::JsonLines => ensembles::write_json_lines(&mut *out, reports)?,
        Format::Csv => ensembles::write_csv(&mut *out, reports)?,
        Format::Plain => {
            let recs: Vec<Record> = reports
                .iter()
                .map(|r| {
                    Record::new()
                        .with("mode", r.mode.as_str())
                        .with("params", r.params.to_string())
                        .with("x", r.x)
                        .with("sample_size", r.sample_size)
                        .with("empirical_mean", decimal_f64(r.empirical_mean))
                        .with("theoretical", decimal_f64(r.theoretical.estimate))
                        .with("discrepancy", decimal_f64(r.discrepancy))
                })
                .collect();
            write_records(out, format, &recs)?;
        }
    }
    Ok(())
}

fn write_ecdf(out: &mut dyn Write, format: Format, e: &Ecdf, how: Rendering) -> Outcome {
    if format == Format::Csv {
        return Ok(distribution::write_ecdf_csv(&mut *out, e, how)?);
    }
    let n = e.size() as u128;
    let render = |num: u128, den: u128| -> singer_core::Result<String> {
        let f = distribution::Fraction::new(num, den)?;
        Ok(match how {
            Rendering::Exact => f.to_string(),
            Rendering::Decimal(d) => decimal_with_digits(&f.to_big(), d),
        })
    };
    let mut recs = Vec::new();
    for (z, count) in e.jumps() {
        recs.push(Record::new().with("z", render(z.num(), z.den())?).with("F", render(count as u128, n)?));
    }
    write_records(out, format, &recs)?;
    Ok(())
}
