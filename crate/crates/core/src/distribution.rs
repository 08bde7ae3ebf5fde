//! Empirical distribution functions of n·p_n over the three ensembles and
//! the Kolmogorov distance between them.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::arith::modular::mul_wide;
use crate::context::Context;
use crate::ensembles::{members, Ensemble, Members, Mode};
use crate::error::{Error, Result};
use crate::rational::{decimal_with_digits, f64_to_big, parse_rational, ratio_to_f64, DECIMAL_DIGITS};

/// Nonnegative fraction in lowest terms with u128 parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u128,
    den: u128,
}

impl Fraction {
    pub fn new(num: u128, den: u128) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        let g = gcd(num, den).max(1);
        Ok(Fraction { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u128 {
        self.num
    }

    pub fn den(&self) -> u128 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&BigUint::from(self.num), &BigUint::from(self.den))
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigUint::from(self.num).into(), BigUint::from(self.den).into())
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        mul_wide(self.num, other.den).cmp(&mul_wide(other.num, self.den))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Which ensemble an ECDF was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfMeta {
    pub mode: Mode,
    pub params: String,
    pub x: f64,
    /// Sample values are n·p_n, so every mode lives on (0, 1].
    pub scaling: String,
}

/// Empirical distribution function of a finite sample, ties kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sample: Vec<Fraction>,
    pub meta: EcdfMeta,
}

impl Ecdf {
    pub fn new(mut sample: Vec<Fraction>, meta: EcdfMeta) -> Result<Self> {
        if let Some(bad) = sample.iter().find(|f| f.num > f.den) {
            return Err(Error::domain(format!("sample value {bad} outside [0, 1]")));
        }
        sample.sort_unstable();
        Ok(Ecdf { sample, meta })
    }

    /// First members with index ≤ x, as n·p_n values.
    pub fn from_members(m: &Members, x: f64) -> Result<Self> {
        let len = m.prefix_len(x);
        let sample = m.records[..len]
            .iter()
            .map(|r| Fraction::new(r.phi_value, r.modulus))
            .collect::<Result<Vec<_>>>()?;
        let meta = EcdfMeta {
            mode: m.ensemble.mode(),
            params: m.ensemble.params().to_string(),
            x,
            scaling: "n*p_n".into(),
        };
        Ecdf::new(sample, meta)
    }

    pub fn size(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    pub fn sample(&self) -> &[Fraction] {
        &self.sample
    }

    /// Number of sample values ≤ z.
    pub fn count_le(&self, z: &Fraction) -> usize {
        self.sample.partition_point(|v| v <= z)
    }

    /// F(z) exactly.
    pub fn evaluate_exact(&self, z: &Fraction) -> Result<Fraction> {
        if self.is_empty() {
            return Err(Error::domain("empty ECDF"));
        }
        Fraction::new(self.count_le(z) as u128, self.size() as u128)
    }

    /// F(z) for a real z, comparing exactly against the sample.
    pub fn evaluate(&self, z: f64) -> f64 {
        if self.is_empty() || z.is_nan() {
            return f64::NAN;
        }
        if z < 0.0 {
            return 0.0;
        }
        if z >= 1.0 {
            return 1.0;
        }
        let exact = f64_to_big(z);
        let count = self.sample.partition_point(|v| v.to_big() <= exact);
        count as f64 / self.size() as f64
    }

    /// Distinct jump locations with F at each.
    pub fn jumps(&self) -> Vec<(Fraction, usize)> {
        let mut out: Vec<(Fraction, usize)> = Vec::new();
        for (i, v) in self.sample.iter().enumerate() {
            match out.last_mut() {
                Some((last, count)) if last == v => *count = i + 1,
                _ => out.push((*v, i + 1)),
            }
        }
        out
    }

    /// Monotone, right-continuous, 0 below the minimum and 1 at the maximum.
    pub fn check_axioms(&self) -> std::result::Result<(), String> {
        if self.is_empty() {
            return Err("empty sample".into());
        }
        if self.sample.windows(2).any(|w| w[0] > w[1]) {
            return Err("sample not sorted".into());
        }
        let n = self.size();
        let jumps = self.jumps();
        let mut previous = 0;
        for (i, (z, count)) in jumps.iter().enumerate() {
            if *count <= previous {
                return Err(format!("F not increasing at {z}"));
            }
            if self.count_le(z) != *count {
                return Err(format!("F({z}) disagrees with its jump table"));
            }
            // right-continuity: F is constant on [z_i, z_{i+1})
            if let Some((next, _)) = jumps.get(i + 1) {
                let below_next = self.sample.partition_point(|v| v < next);
                if below_next != *count {
                    return Err(format!("F jumps inside ({z}, {next})"));
                }
            }
            let left = self.sample.partition_point(|v| v < z);
            if left >= *count {
                return Err(format!("no mass at jump {z}"));
            }
            previous = *count;
        }
        if previous != n || self.evaluate(1.0) != 1.0 {
            return Err("F(max) != 1".into());
        }
        if self.evaluate(-1.0) != 0.0 {
            return Err("F below support != 0".into());
        }
        Ok(())
    }
}

/// Kolmogorov distance, exact and rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub exact: Fraction,
    pub value: f64,
}

/// sup_z |F_a(z) - F_b(z)|, scanned over the merged jump points.
pub fn kolmogorov_distance(a: &Ecdf, b: &Ecdf) -> Result<Distance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("Kolmogorov distance needs two non-empty ECDFs"));
    }
    let (sa, sb) = (a.sample(), b.sample());
    let (na, nb) = (sa.len() as u128, sb.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: u128 = 0;
    while i < sa.len() || j < sb.len() {
        let z = match (sa.get(i), sb.get(j)) {
            (Some(x), Some(y)) => *x.min(y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => unreachable!(),
        };
        while i < sa.len() && sa[i] == z {
            i += 1;
        }
        while j < sb.len() && sb[j] == z {
            j += 1;
        }
        best = best.max((i as u128 * nb).abs_diff(j as u128 * na));
    }
    let exact = Fraction::new(best, na * nb)?;
    Ok(Distance { exact, value: exact.to_f64() })
}

pub fn ecdf(ctx: &Context, ensemble: Ensemble, x: f64) -> Result<Ecdf> {
    Ecdf::from_members(&members(ctx, ensemble, x)?, x)
}

pub fn ecdf_prime_powers(ctx: &Context, n: u32, x: f64) -> Result<Ecdf> {
    ecdf(ctx, Ensemble::prime_powers(n)?, x)
}

pub fn ecdf_extensions(ctx: &Context, p: u64, n: u32, x: f64) -> Result<Ecdf> {
    ecdf(ctx, Ensemble::extensions(p, n)?, x)
}

pub fn ecdf_ranks(ctx: &Context, q: u64, x: f64) -> Result<Ecdf> {
    ecdf(ctx, Ensemble::ranks(q)?, x)
}

/// One rung of a stability ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderLine {
    pub mode: Mode,
    pub params: String,
    pub x1: f64,
    pub x2: f64,
    pub kolmogorov_distance: f64,
}

/// Distances between ECDFs at consecutive x values, from one member computation.
pub fn stability_ladder(ctx: &Context, ensemble: Ensemble, xs: &[f64]) -> Result<Vec<LadderLine>> {
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("ladder x values must be ascending"));
    }
    let Some(&x_max) = xs.last() else {
        return Ok(Vec::new());
    };
    let m = members(ctx, ensemble, x_max)?;
    let ecdfs = xs.iter().map(|&x| Ecdf::from_members(&m, x)).collect::<Result<Vec<_>>>()?;
    ecdfs
        .windows(2)
        .map(|w| {
            Ok(LadderLine {
                mode: ensemble.mode(),
                params: ensemble.params().to_string(),
                x1: w[0].meta.x,
                x2: w[1].meta.x,
                kolmogorov_distance: kolmogorov_distance(&w[0], &w[1])?.value,
            })
        })
        .collect()
}

/// How jump locations and values are written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Rendering {
    #[default]
    Exact,
    Decimal(usize),
}

fn render(f: &Fraction, how: Rendering) -> String {
    match how {
        Rendering::Exact => f.to_string(),
        Rendering::Decimal(digits) => decimal_with_digits(&f.to_big(), digits),
    }
}

/// CSV with header `z,F` and one row per jump point.
pub fn write_ecdf_csv<W: Write>(out: W, e: &Ecdf, how: Rendering) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    w.write_record(["z", "F"]).map_err(err)?;
    let n = e.size() as u128;
    for (z, count) in e.jumps() {
        let f = Fraction::new(count as u128, n)?;
        w.write_record([render(&z, how), render(&f, how)]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("i/o: {e}")))
}

/// Reads `z,F` rows back as exact rationals.
pub fn read_ecdf_csv<R: std::io::Read>(input: R) -> Result<Vec<(BigRational, BigRational)>> {
    let mut rd = csv::Reader::from_reader(input);
    let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    let headers = rd.headers().map_err(err)?.clone();
    if headers.iter().ne(["z", "F"]) {
        return Err(Error::invalid(format!("unexpected ECDF header {headers:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(err)?;
        let parse = |s: &str| parse_rational(s).ok_or_else(|| Error::invalid(format!("bad number {s:?}")));
        out.push((parse(&row[0])?, parse(&row[1])?));
    }
    Ok(out)
}

pub fn write_ladder_csv<W: Write>(out: W, lines: &[LadderLine]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for l in lines {
        w.serialize(l).map_err(|e| Error::invalid(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::invalid(format!("i/o: {e}")))
}

pub fn read_ladder_csv<R: std::io::Read>(input: R) -> Result<Vec<LadderLine>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::invalid(format!("csv: {e}"))))
        .collect()
}

/// Decimal rendering used when exact output is not requested.
pub const DEFAULT_DECIMAL: Rendering = Rendering::Decimal(DECIMAL_DIGITS);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fr(a: u128, b: u128) -> Fraction {
        Fraction::new(a, b).unwrap()
    }

    fn meta() -> EcdfMeta {
        EcdfMeta { mode: Mode::Ranks, params: String::new(), x: 0.0, scaling: "n*p_n".into() }
    }

    fn from_values(v: &[(u128, u128)]) -> Ecdf {
        Ecdf::new(v.iter().map(|&(a, b)| fr(a, b)).collect(), meta()).unwrap()
    }

    #[test]
    fn prime_power_example() {
        let ctx = Context::default();
        let e = ecdf_prime_powers(&ctx, 1, 10.0).unwrap();
        let expect = [fr(1, 3), fr(1, 2), fr(1, 2), fr(1, 2), fr(2, 3), fr(6, 7), fr(1, 1)];
        assert_eq!(e.sample(), &expect);
        assert_eq!(e.evaluate_exact(&fr(1, 2)).unwrap(), fr(4, 7));
        assert_eq!(e.evaluate(0.5), 4.0 / 7.0);
        assert_eq!(e.evaluate(1.0), 1.0);
        assert_eq!(e.evaluate(0.0), 0.0);
        e.check_axioms().unwrap();
    }

    #[test]
    fn extension_and_rank_examples() {
        let ctx = Context::default();
        let e = ecdf_extensions(&ctx, 2, 1, 3.0).unwrap();
        assert_eq!(e.sample(), &[fr(2, 3), fr(6, 7), fr(1, 1)]);
        assert_eq!(e.evaluate_exact(&fr(2, 3)).unwrap(), fr(1, 3));
        let single = ecdf_extensions(&ctx, 2, 1, 1.0).unwrap();
        assert_eq!(single.size(), 1);
        assert_eq!((single.evaluate(0.999), single.evaluate(1.0)), (0.0, 1.0));
        assert_eq!(ecdf_ranks(&ctx, 2, 2.0).unwrap().sample(), &[fr(2, 3), fr(1, 1)]);
        let r = ecdf_ranks(&ctx, 3, 1.0).unwrap();
        assert_eq!(r.sample(), &[fr(1, 2)]);
        assert_eq!(r.evaluate(0.75), 1.0);
    }

    #[test]
    fn kolmogorov_examples() {
        let a = from_values(&[(1, 5)]);
        let b = from_values(&[(4, 5)]);
        assert_eq!(kolmogorov_distance(&a, &b).unwrap().value, 1.0);
        assert_eq!(kolmogorov_distance(&a, &a).unwrap().value, 0.0);
        let empty = Ecdf::new(Vec::new(), meta()).unwrap();
        assert!(matches!(kolmogorov_distance(&a, &empty), Err(Error::Domain(_))));
    }

    #[test]
    fn kolmogorov_at_least_grid_oracle() {
        let ctx = Context::default();
        let a = ecdf_prime_powers(&ctx, 1, 10.0).unwrap();
        let b = ecdf_prime_powers(&ctx, 1, 100.0).unwrap();
        let d = kolmogorov_distance(&a, &b).unwrap().value;
        let grid = (0..=10_000).map(|i| i as f64 / 10_000.0);
        let naive = grid.map(|z| (a.evaluate(z) - b.evaluate(z)).abs()).fold(0.0, f64::max);
        assert!(d > 0.0);
        assert!(naive <= d + 1e-15, "grid {naive} vs scan {d}");
        // every jump is a grid point of the exact scan, so a naive scan over jumps is equal
        let jumps: Vec<Fraction> = a.jumps().into_iter().chain(b.jumps()).map(|j| j.0).collect();
        let over_jumps = jumps
            .iter()
            .map(|z| {
                let fa = a.evaluate_exact(z).unwrap().to_f64();
                let fb = b.evaluate_exact(z).unwrap().to_f64();
                (fa - fb).abs()
            })
            .fold(0.0, f64::max);
        assert!((over_jumps - d).abs() < 1e-15);
    }

    #[test]
    fn rescaling_matches_unscaled_frequency() {
        let ctx = Context::default();
        for n in [1u32, 2, 3] {
            let m = members(&ctx, Ensemble::prime_powers(n).unwrap(), 200.0).unwrap();
            let e = Ecdf::from_members(&m, 200.0).unwrap();
            for (za, zb) in [(1u128, 3u128), (1, 2), (3, 5), (9, 10)] {
                let z = fr(za, zb);
                // p_n(q) ≤ z/n
                let threshold = BigRational::new(za.into(), (zb * n as u128).into());
                let direct = m.records.iter().filter(|r| r.exact() <= threshold).count();
                assert_eq!(e.count_le(&z), direct, "n={n} z={z}");
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let ctx = Context::default();
        let e = ecdf_prime_powers(&ctx, 2, 50.0).unwrap();
        let mut buf = Vec::new();
        write_ecdf_csv(&mut buf, &e, Rendering::Exact).unwrap();
        let rows = read_ecdf_csv(buf.as_slice()).unwrap();
        let jumps = e.jumps();
        assert_eq!(rows.len(), jumps.len());
        for ((z, f), (jz, count)) in rows.iter().zip(&jumps) {
            assert_eq!(z, &jz.to_big());
            assert_eq!(f, &fr(*count as u128, e.size() as u128).to_big());
        }
        let mut dec = Vec::new();
        write_ecdf_csv(&mut dec, &e, DEFAULT_DECIMAL).unwrap();
        let text = String::from_utf8(dec.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().contains('.'));
        assert_eq!(read_ecdf_csv(dec.as_slice()).unwrap().len(), jumps.len());

        let ladder = stability_ladder(&ctx, Ensemble::ranks(2).unwrap(), &[8.0, 16.0, 32.0]).unwrap();
        let mut lb = Vec::new();
        write_ladder_csv(&mut lb, &ladder).unwrap();
        assert_eq!(read_ladder_csv(lb.as_slice()).unwrap(), ladder);
        assert!(String::from_utf8(lb).unwrap().starts_with("mode,params,x1,x2,kolmogorov_distance"));
    }

    #[test]
    fn fraction_order_is_exact() {
        // values that collide in f64
        let big = u128::MAX / 3;
        let a = fr(big, big + 1);
        let b = fr(big - 1, big);
        assert!(b < a);
        assert_eq!(a.to_f64(), b.to_f64());
        assert!(fr(1, 3) < fr(1, 2) && fr(2, 4) == fr(1, 2));
    }

    fn sample_strategy() -> impl Strategy<Value = Vec<(u128, u128)>> {
        prop::collection::vec((1u128..=12, 1u128..=12), 1..30)
            .prop_map(|v| v.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect())
    }

    proptest! {
        #[test]
        fn kolmogorov_is_a_pseudometric(a in sample_strategy(), b in sample_strategy(), c in sample_strategy()) {
            let (ea, eb, ec) = (from_values(&a), from_values(&b), from_values(&c));
            let ab = kolmogorov_distance(&ea, &eb).unwrap().exact.to_big();
            let ba = kolmogorov_distance(&eb, &ea).unwrap().exact.to_big();
            let bc = kolmogorov_distance(&eb, &ec).unwrap().exact.to_big();
            let ac = kolmogorov_distance(&ea, &ec).unwrap().exact.to_big();
            prop_assert_eq!(&ab, &ba);
            prop_assert!(ac <= &ab + &bc);
            prop_assert_eq!(kolmogorov_distance(&ea, &ea).unwrap().value, 0.0);
            prop_assert!(ea.check_axioms().is_ok());
        }

        #[test]
        fn evaluate_is_monotone(a in sample_strategy(), zs in prop::collection::vec(0.0f64..1.0, 2..20)) {
            let e = from_values(&a);
            let mut zs = zs;
            zs.sort_by(f64::total_cmp);
            let vals: Vec<f64> = zs.iter().map(|&z| e.evaluate(z)).collect();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let min = e.sample()[0];
            let mult = e.sample().iter().filter(|v| **v == min).count();
            prop_assert_eq!(e.evaluate_exact(&min).unwrap(), fr(mult as u128, e.size() as u128));
        }
    }
}
