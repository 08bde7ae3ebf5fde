//! Ensemble averages of p_n(q) over prime powers q ≤ x, over extensions
//! p^r with r ≤ x, and over ranks n ≤ x, each paired with its limiting constant.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{enumerate_prime_powers_capped, is_prime, qn_minus_1, PrimePower};
use crate::constants::{euler_product_pn, series_p_default, CertifiedValue};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::rational::{ratio_string, MixedSum, SumState};
use crate::singer::{density_from_factorization, DensityRecord, GroupSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PrimePowers,
    Extensions,
    Ranks,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::PrimePowers => "prime_powers",
            Mode::Extensions => "extensions",
            Mode::Ranks => "ranks",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prime_powers" | "prime-powers" => Ok(Mode::PrimePowers),
            "extensions" => Ok(Mode::Extensions),
            "ranks" => Ok(Mode::Ranks),
            _ => Err(Error::invalid(format!("unknown ensemble mode {s:?}"))),
        }
    }
}

/// An ensemble: the fixed parameters of one of the three averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ensemble {
    /// q ranges over prime powers, n fixed.
    PrimePowers { n: u32 },
    /// q = p^r with r ranging, p and n fixed.
    Extensions { p: u64, n: u32 },
    /// n ranges, q fixed.
    Ranks { q: PrimePower },
}

impl Ensemble {
    pub fn prime_powers(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        Ok(Ensemble::PrimePowers { n })
    }

    pub fn extensions(p: u64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !is_prime(p as u128) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        Ok(Ensemble::Extensions { p, n })
    }

    pub fn ranks(q: u64) -> Result<Self> {
        Ok(Ensemble::Ranks { q: PrimePower::from_q(q as u128)? })
    }

    pub fn mode(&self) -> Mode {
        match self {
            Ensemble::PrimePowers { .. } => Mode::PrimePowers,
            Ensemble::Extensions { .. } => Mode::Extensions,
            Ensemble::Ranks { .. } => Mode::Ranks,
        }
    }

    pub fn params(&self) -> Params {
        match *self {
            Ensemble::PrimePowers { n } => Params { n: Some(n), ..Params::default() },
            Ensemble::Extensions { p, n } => Params { n: Some(n), p: Some(p), ..Params::default() },
            Ensemble::Ranks { q } => Params { q: Some(q.q() as u64), ..Params::default() },
        }
    }

    pub fn from_parts(mode: Mode, params: &Params) -> Result<Self> {
        let need = |v: Option<u64>, name: &str| v.ok_or_else(|| Error::invalid(format!("{mode} needs {name}")));
        match mode {
            Mode::PrimePowers => Ensemble::prime_powers(need(params.n.map(u64::from), "n")? as u32),
            Mode::Extensions => Ensemble::extensions(need(params.p, "p")?, need(params.n.map(u64::from), "n")? as u32),
            Mode::Ranks => Ensemble::ranks(need(params.q, "q")?),
        }
    }
}

/// Fixed parameters as they appear in reports: `n=1`, `p=2;n=1`, `q=2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(p) = self.p {
            parts.push(format!("p={p}"));
        }
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if let Some(q) = self.q {
            parts.push(format!("q={q}"));
        }
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for Params {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Params::default();
        for part in s.split(';').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("bad parameter {part:?}")))?;
            let bad = || Error::invalid(format!("bad value in {part:?}"));
            match key {
                "p" => out.p = Some(value.parse().map_err(|_| bad())?),
                "n" => out.n = Some(value.parse().map_err(|_| bad())?),
                "q" => out.q = Some(value.parse().map_err(|_| bad())?),
                _ => return Err(Error::invalid(format!("unknown parameter {key:?}"))),
            }
        }
        Ok(out)
    }
}

/// Density records of the ensemble members with index ≤ x, in ascending order.
#[derive(Debug, Clone)]
pub struct Members {
    pub ensemble: Ensemble,
    pub x: f64,
    /// Set when x was lowered to keep q^n - 1 below 2^128.
    pub truncated_to: Option<u64>,
    pub records: Vec<DensityRecord>,
}

impl Members {
    /// The ensemble index of a record: q, r or n.
    pub fn index_of(&self, record: &DensityRecord) -> u128 {
        match self.ensemble {
            Ensemble::PrimePowers { .. } => record.spec.q().q(),
            Ensemble::Extensions { .. } => record.spec.q().r() as u128,
            Ensemble::Ranks { .. } => record.spec.n() as u128,
        }
    }

    /// Number of leading records with index ≤ x.
    pub fn prefix_len(&self, x: f64) -> usize {
        let bound = if x < 1.0 { 0 } else { x.floor() as u128 };
        self.records.partition_point(|r| self.index_of(r) <= bound)
    }
}

/// Largest y with y^n - 1 < 2^128.
fn largest_safe_base(n: u32) -> u128 {
    if n == 1 {
        return u128::MAX;
    }
    let mut y = (2f64.powf(128.0 / n as f64)).floor() as u128;
    while y > 2 && qn_minus_1(y, n).is_err() {
        y -= 1;
    }
    while qn_minus_1(y + 1, n).is_ok() {
        y += 1;
    }
    y
}

fn index_bound(x: f64) -> Result<u64> {
    if !x.is_finite() {
        return Err(Error::invalid("x must be finite"));
    }
    Ok(if x < 1.0 { 0 } else { x.floor() as u64 })
}

fn range_at(what: &str, value: u128, n: u32) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Range(_) => Error::range(format!("q^n - 1 exceeds 2^128 at {what} = {value} (n = {n})")),
        other => other,
    }
}

/// Computes every member density with index ≤ x.
pub fn members(ctx: &Context, ensemble: Ensemble, x: f64) -> Result<Members> {
    let bound = index_bound(x)?;
    let mut truncated_to = None;
    // (p, exponent multiplier r, rank n) for each member; q^n - 1 = p^{rn} - 1
    let specs: Vec<(PrimePower, u32)> = match ensemble {
        Ensemble::PrimePowers { n } => {
            let mut effective = x;
            let safe = largest_safe_base(n);
            if bound as u128 > safe {
                truncated_to = Some(safe as u64);
                effective = safe as f64;
                log::warn!("prime-power ensemble with n = {n}: x truncated from {x} to {safe}");
            }
            let qs = enumerate_prime_powers_capped(effective, ctx.limits.sieve_cap)?;
            qs.entries().iter().map(|&q| (q, n)).collect()
        }
        Ensemble::Extensions { p, n } => (1..=bound)
            .map(|r| {
                let r = u32::try_from(r).map_err(|_| Error::range(format!("r = {r} out of range")))?;
                qn_minus_1(p as u128, r.saturating_mul(n)).map_err(range_at("r", r as u128, n))?;
                Ok((PrimePower::new(p as u128, r)?, n))
            })
            .collect::<Result<_>>()?,
        Ensemble::Ranks { q } => (1..=bound)
            .map(|n| {
                let n = u32::try_from(n).map_err(|_| Error::range(format!("n = {n} out of range")))?;
                qn_minus_1(q.q(), n).map_err(range_at("n", n as u128, n))?;
                Ok((q, n))
            })
            .collect::<Result<_>>()?,
    };
    let done = std::sync::atomic::AtomicUsize::new(0);
    let total = specs.len();
    let records = ctx.install(|| {
        specs
            .par_iter()
            .map(|&(q, n)| {
                let spec = GroupSpec::new(n, q).map_err(range_at("q", q.q(), n))?;
                // factor p^{rn} - 1 directly: more cyclotomic pieces than (p^r)^n - 1
                let f = ctx.factor_qn_minus_1(q.p(), q.r() * n)?;
                let record = density_from_factorization(&spec, &f)?;
                let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                if finished.is_multiple_of(50_000) {
                    log::info!("{}: {finished}/{total} member densities", ensemble.mode());
                }
                Ok(record)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Members { ensemble, x, truncated_to, records })
}

/// One point of an average law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub mode: Mode,
    pub params: Params,
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated_to: Option<u64>,
    pub sample_size: u64,
    /// Σ p_n over the members; for ranks the summand is p_n(q), so n·p_n ∈ (0, 1].
    pub raw_sum: f64,
    /// `num/den` while the sum is still exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_sum_exact: Option<String>,
    /// Q(x), floor(x) or ln x.
    pub normalizer: f64,
    pub empirical_mean: f64,
    pub theoretical: CertifiedValue,
    pub discrepancy: f64,
    pub sum_state: SumState,
}

/// Limiting constant of an ensemble's average.
pub fn theoretical(ctx: &Context, ensemble: Ensemble) -> Result<CertifiedValue> {
    match ensemble {
        Ensemble::PrimePowers { n } => euler_product_pn(ctx, n, ctx.limits.prime_bound),
        Ensemble::Extensions { p, n } => Ok(series_p_default(ctx, p as u128, n as u64)?.certified.divided_by(n)),
        Ensemble::Ranks { q } => Ok(series_p_default(ctx, q.p(), q.r() as u64)?.certified),
    }
}

fn normalizer(mode: Mode, x: f64, sample_size: usize) -> f64 {
    match mode {
        Mode::PrimePowers => sample_size as f64,
        Mode::Extensions => x.floor(),
        Mode::Ranks => x.ln(),
    }
}

fn check_x(ensemble: Ensemble, x: f64) -> Result<()> {
    let min = match ensemble.mode() {
        Mode::PrimePowers => 2.0,
        Mode::Extensions => 1.0,
        Mode::Ranks => {
            if !(x > 1.0) {
                return Err(Error::invalid(format!("ranks average needs x > 1 (ln x > 0), got {x}")));
            }
            1.0
        }
    };
    if !x.is_finite() || x < min {
        return Err(Error::invalid(format!("{} average needs finite x ≥ {min}, got {x}", ensemble.mode())));
    }
    Ok(())
}

/// Running sum that snapshots reports at a ladder of x values.
struct Accumulator<'a> {
    members: &'a Members,
    theoretical: &'a CertifiedValue,
    sum: MixedSum,
    consumed: usize,
}

impl Accumulator<'_> {
    fn report_at(&mut self, x: f64) -> AverageReport {
        let end = self.members.prefix_len(x);
        for record in &self.members.records[self.consumed..end] {
            self.sum.add(&BigUint::from(record.phi_value), &record.denominator);
        }
        self.consumed = end;
        let ensemble = self.members.ensemble;
        let mode = ensemble.mode();
        let norm = normalizer(mode, x, end);
        let exact = self.sum.exact();
        let raw_sum = self.sum.value();
        let empirical_mean = match (&exact, mode) {
            (Some(e), Mode::PrimePowers | Mode::Extensions) if norm > 0.0 => {
                crate::rational::big_to_f64(&(e / num_rational::BigRational::from_integer((norm as u64).into())))
            }
            _ => raw_sum / norm,
        };
        AverageReport {
            mode,
            params: ensemble.params(),
            x,
            truncated_to: self.members.truncated_to,
            sample_size: end as u64,
            raw_sum,
            raw_sum_exact: exact.as_ref().map(ratio_string),
            normalizer: norm,
            empirical_mean,
            theoretical: self.theoretical.clone(),
            discrepancy: (empirical_mean - self.theoretical.estimate).abs(),
            sum_state: self.sum.state(),
        }
    }
}

/// One report per x, each extending the previous running sum.
pub fn convergence_ladder(ctx: &Context, ensemble: Ensemble, xs: &[f64]) -> Result<Vec<AverageReport>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    for &x in xs {
        check_x(ensemble, x)?;
    }
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("ladder x values must be ascending"));
    }
    let x_max = *xs.last().expect("nonempty");
    let members = members(ctx, ensemble, x_max)?;
    let theory = theoretical(ctx, ensemble)?;
    if theory.contains_zero() {
        log::warn!("{}: certified interval of the limiting constant contains 0", ensemble.mode());
    }
    let mut acc = Accumulator { members: &members, theoretical: &theory, sum: MixedSum::new(ctx.limits.exact_terms), consumed: 0 };
    Ok(xs.iter().map(|&x| acc.report_at(x)).collect())
}

pub fn average(ctx: &Context, ensemble: Ensemble, x: f64) -> Result<AverageReport> {
    Ok(convergence_ladder(ctx, ensemble, &[x])?.pop().expect("one report"))
}

pub fn average_over_prime_powers(ctx: &Context, n: u32, x: f64) -> Result<AverageReport> {
    average(ctx, Ensemble::prime_powers(n)?, x)
}

pub fn average_over_extensions(ctx: &Context, p: u64, n: u32, x: f64) -> Result<AverageReport> {
    average(ctx, Ensemble::extensions(p, n)?, x)
}

pub fn average_over_ranks(ctx: &Context, q: u64, x: f64) -> Result<AverageReport> {
    average(ctx, Ensemble::ranks(q)?, x)
}

// ---- serialization ----

pub fn write_json_lines<W: Write>(mut out: W, reports: &[AverageReport]) -> Result<()> {
    for r in reports {
        let line = serde_json::to_string(r).map_err(|e| Error::invalid(format!("serialize: {e}")))?;
        writeln!(out, "{line}").map_err(io_error)?;
    }
    Ok(())
}

pub fn read_json_lines<R: BufRead>(input: R) -> Result<Vec<AverageReport>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(io_error)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::invalid(format!("bad report line: {e}")))?);
    }
    Ok(out)
}

pub const CSV_COLUMNS: [&str; 9] = [
    "mode",
    "params",
    "x",
    "sample_size",
    "raw_sum",
    "empirical_mean",
    "theoretical_estimate",
    "theoretical_error_bound",
    "discrepancy",
];

/// The CSV projection of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub mode: Mode,
    pub params: String,
    pub x: f64,
    pub sample_size: u64,
    pub raw_sum: f64,
    pub empirical_mean: f64,
    pub theoretical_estimate: f64,
    pub theoretical_error_bound: f64,
    pub discrepancy: f64,
}

impl From<&AverageReport> for CsvRow {
    fn from(r: &AverageReport) -> Self {
        CsvRow {
            mode: r.mode,
            params: r.params.to_string(),
            x: r.x,
            sample_size: r.sample_size,
            raw_sum: r.raw_sum,
            empirical_mean: r.empirical_mean,
            theoretical_estimate: r.theoretical.estimate,
            theoretical_error_bound: r.theoretical.error_bound,
            discrepancy: r.discrepancy,
        }
    }
}

pub fn write_csv<W: Write>(out: W, reports: &[AverageReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(CsvRow::from(r)).map_err(csv_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_error)?.clone();
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(Error::invalid(format!("unexpected CSV header {headers:?}")));
    }
    rd.deserialize().map(|row| row.map_err(csv_error)).collect()
}

fn io_error(e: std::io::Error) -> Error {
    Error::invalid(format!("i/o: {e}"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn exact_sum(r: &AverageReport) -> BigRational {
        let s = r.raw_sum_exact.as_ref().expect("exact");
        let (a, b) = s.split_once('/').unwrap_or((s, "1"));
        BigRational::new(a.parse().unwrap(), b.parse().unwrap())
    }

    #[test]
    fn prime_power_examples() {
        let ctx = Context::default();
        let r = average_over_prime_powers(&ctx, 1, 2.0).unwrap();
        assert_eq!((r.sample_size, r.empirical_mean), (1, 1.0));
        let r = average_over_prime_powers(&ctx, 1, 10.0).unwrap();
        assert_eq!(r.sample_size, 7);
        let expect = q(1, 1) + q(1, 2) + q(2, 3) + q(1, 2) + q(1, 3) + q(6, 7) + q(1, 2);
        assert_eq!(exact_sum(&r), expect);
        assert_eq!(r.empirical_mean, crate::rational::big_to_f64(&(expect / q(7, 1))));
        let r2 = average_over_prime_powers(&ctx, 2, 10.0).unwrap();
        // (1/2)φ(q²-1)/(q²-1) for q = 2,3,4,5,7,8,9
        let expect2 = [(2, 3), (4, 8), (8, 15), (8, 24), (16, 48), (36, 63), (32, 80)]
            .iter()
            .fold(q(0, 1), |acc, &(a, b)| acc + q(a, 2 * b));
        assert_eq!(exact_sum(&r2), expect2);
    }

    #[test]
    fn extension_examples() {
        let ctx = Context::default();
        assert_eq!(average_over_extensions(&ctx, 2, 1, 1.0).unwrap().empirical_mean, 1.0);
        let r = average_over_extensions(&ctx, 2, 1, 2.0).unwrap();
        assert_eq!(exact_sum(&r), q(5, 3));
        assert_eq!(r.empirical_mean, 5.0 / 6.0);
        assert_eq!(average_over_extensions(&ctx, 3, 1, 2.0).unwrap().empirical_mean, 0.5);
        assert!(matches!(average_over_extensions(&ctx, 2, 2, 70.0), Err(Error::Range(_))));
    }

    #[test]
    fn rank_examples() {
        let ctx = Context::default();
        let r = average_over_ranks(&ctx, 2, 2.0).unwrap();
        assert_eq!(exact_sum(&r), q(4, 3));
        assert_eq!(r.empirical_mean, (4.0 / 3.0) / 2f64.ln());
        let r = average_over_ranks(&ctx, 2, std::f64::consts::E).unwrap();
        assert_eq!(r.sample_size, 2);
        assert!((r.empirical_mean - 4.0 / 3.0).abs() < 1e-15);
        let r = average_over_ranks(&ctx, 3, 3.0).unwrap();
        assert_eq!(exact_sum(&r), q(1, 2) + q(1, 4) + q(12, 3 * 26));
        assert!(average_over_ranks(&ctx, 3, 1.0).is_err());
        assert!(average_over_ranks(&ctx, 6, 3.0).is_err());
    }

    #[test]
    fn prime_power_truncation_reported() {
        let ctx = Context::default();
        // n = 64: only q = 2, 3, 4 satisfy q^64 - 1 < 2^128
        let r = average_over_prime_powers(&ctx, 64, 10.0).unwrap();
        assert_eq!(r.truncated_to, Some(4));
        assert_eq!(r.sample_size, 3);
        assert_eq!(largest_safe_base(1), u128::MAX);
        assert_eq!(largest_safe_base(128), 2);
    }

    #[test]
    fn ladder_matches_fresh_and_shares_theory() {
        let ctx = Context::default();
        let ladder = convergence_ladder(&ctx, Ensemble::prime_powers(1).unwrap(), &[10.0, 100.0]).unwrap();
        assert_eq!(ladder[0].theoretical, ladder[1].theoretical);
        assert_eq!(ladder[1], average_over_prime_powers(&ctx, 1, 100.0).unwrap());
        for (e, xs) in [
            (Ensemble::extensions(2, 1).unwrap(), vec![10.0, 20.0, 40.0]),
            (Ensemble::ranks(2).unwrap(), vec![16.0, 32.0, 64.0]),
        ] {
            let ladder = convergence_ladder(&ctx, e, &xs).unwrap();
            assert_eq!(ladder.last().unwrap(), &average(&ctx, e, *xs.last().unwrap()).unwrap());
            assert!(convergence_ladder(&ctx, e, &[40.0, 20.0]).is_err());
        }
    }

    #[test]
    fn switchover_recorded_and_means_bounded() {
        let mut ctx = Context::default();
        ctx.limits.exact_terms = 5;
        let r = average_over_prime_powers(&ctx, 2, 50.0).unwrap();
        assert_eq!(r.sum_state, SumState::SwitchedAfter(5));
        assert!(r.raw_sum_exact.is_none());
        assert!(r.empirical_mean > 0.0 && r.empirical_mean <= 0.5);
        let exact_ctx = Context::default();
        let e = average_over_prime_powers(&exact_ctx, 2, 50.0).unwrap();
        assert!((e.empirical_mean - r.empirical_mean).abs() < 1e-14);
    }

    #[test]
    fn shared_constant_across_modes() {
        let ctx = Context::default();
        let a = average_over_extensions(&ctx, 2, 1, 8.0).unwrap();
        let b = average_over_ranks(&ctx, 2, 8.0).unwrap();
        assert_eq!(a.theoretical, b.theoretical);
    }

    #[test]
    fn worker_count_does_not_change_reports() {
        let one = Context::new(1).unwrap();
        let four = Context::new(4).unwrap();
        let e = Ensemble::prime_powers(2).unwrap();
        assert_eq!(average(&one, e, 3000.0).unwrap(), average(&four, e, 3000.0).unwrap());
    }

    #[test]
    fn params_round_trip() {
        for e in [Ensemble::prime_powers(3).unwrap(), Ensemble::extensions(5, 2).unwrap(), Ensemble::ranks(9).unwrap()] {
            let p = e.params();
            let back: Params = p.to_string().parse().unwrap();
            assert_eq!(Ensemble::from_parts(e.mode(), &back).unwrap(), e);
        }
        assert!("z=3".parse::<Params>().is_err());
    }

    #[test]
    fn json_and_csv_round_trip() {
        let ctx = Context::default();
        let reports = convergence_ladder(&ctx, Ensemble::ranks(2).unwrap(), &[2.0, 10.0, 20.0]).unwrap();
        let mut buf = Vec::new();
        write_json_lines(&mut buf, &reports).unwrap();
        assert_eq!(read_json_lines(buf.as_slice()).unwrap(), reports);
        let mut csv_buf = Vec::new();
        write_csv(&mut csv_buf, &reports).unwrap();
        let text = String::from_utf8(csv_buf.clone()).unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        let rows = read_csv(csv_buf.as_slice()).unwrap();
        assert_eq!(rows, reports.iter().map(CsvRow::from).collect::<Vec<_>>());
    }
}
