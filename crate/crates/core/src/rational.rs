//! Exact rational helpers: correctly rounded conversion to `f64`, decimal
//! rendering with round-half-even, and a summation accumulator that stays
//! exact for a bounded number of terms before switching to compensated
//! floating-point summation.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Significant digits used for every decimal rendering.
pub const DECIMAL_DIGITS: usize = 15;

/// Correctly rounded `num / den` for nonnegative integers, `den > 0`.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    // choose a shift so the integer quotient carries at least 66 bits
    let shift: i64 = 66 - (num.bits() as i64 - den.bits() as i64);
    let (n, d) = if shift >= 0 {
        (num << shift as u64, den.clone())
    } else {
        (num.clone(), den << (-shift) as u64)
    };
    let (q, r) = n.div_rem(&d);
    let mut q = q;
    if !r.is_zero() {
        // sticky bit sits far below the rounding position
        q |= BigUint::one();
    }
    // reduce q to at most 128 bits, keeping a sticky bit
    let qbits = q.bits();
    let mut extra = 0u64;
    if qbits > 127 {
        extra = qbits - 127;
        let lost = !(&q & ((BigUint::one() << extra) - 1u32)).is_zero();
        q >>= extra;
        if lost {
            q |= BigUint::one();
        }
    }
    let qf = q.to_u128().expect("fits after shift") as f64;
    let exp = extra as i64 - shift;
    scale_pow2(qf, exp)
}

fn scale_pow2(x: f64, exp: i64) -> f64 {
    let mut x = x;
    let mut e = exp;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let v = ratio_to_f64(num, den);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// Exact value of a finite `f64`.
pub fn f64_to_big(x: f64) -> BigRational {
    assert!(x.is_finite(), "non-finite value has no exact rational");
    BigRational::from_float(x).expect("finite")
}

/// Decimal rendering, round-half-even to [`DECIMAL_DIGITS`] significant digits.
pub fn decimal_string(r: &BigRational) -> String {
    decimal_with_digits(r, DECIMAL_DIGITS)
}

pub fn decimal_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    decimal_string(&f64_to_big(x))
}

pub fn decimal_with_digits(r: &BigRational, digits: usize) -> String {
    assert!(digits >= 1);
    if r.is_zero() {
        return "0".into();
    }
    let negative = r.is_negative();
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();

    // find e with 10^e ≤ num/den < 10^{e+1}
    let mut e: i64 = (num.bits() as i64 - den.bits() as i64) * 30103 / 100000;
    let ten = BigUint::from(10u32);
    let cmp_ge = |e: i64| -> bool {
        // num/den ≥ 10^e
        if e >= 0 {
            num >= &den * ten.pow(e as u32)
        } else {
            &num * ten.pow((-e) as u32) >= den
        }
    };
    while !cmp_ge(e) {
        e -= 1;
    }
    while cmp_ge(e + 1) {
        e += 1;
    }
    // scaled = num/den · 10^{digits-1-e}, rounded half-even to an integer
    let s = digits as i64 - 1 - e;
    let (sn, sd) = if s >= 0 {
        (&num * ten.pow(s as u32), den.clone())
    } else {
        (num.clone(), &den * ten.pow((-s) as u32))
    };
    let (mut q, rem) = sn.div_rem(&sd);
    let twice = &rem << 1u32;
    if twice > sd || (twice == sd && q.is_odd()) {
        q += 1u32;
    }
    let mut digit_str = q.to_str_radix(10);
    let mut e = e;
    if digit_str.len() > digits {
        // rounding carried into a new leading digit
        digit_str.truncate(digits);
        e += 1;
    }
    let body = place_decimal_point(&digit_str, e);
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn place_decimal_point(digits: &str, e: i64) -> String {
    let trimmed = digits.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "0" } else { trimmed };
    if (-6..=20).contains(&e) {
        if e >= 0 {
            let int_len = e as usize + 1;
            if trimmed.len() <= int_len {
                let mut s = trimmed.to_string();
                s.extend(std::iter::repeat_n('0', int_len - trimmed.len()));
                s
            } else {
                format!("{}.{}", &trimmed[..int_len], &trimmed[int_len..])
            }
        } else {
            let zeros = (-e - 1) as usize;
            format!("0.{}{}", "0".repeat(zeros), trimmed)
        }
    } else {
        let mantissa = if trimmed.len() > 1 {
            format!("{}.{}", &trimmed[..1], &trimmed[1..])
        } else {
            trimmed.to_string()
        };
        format!("{mantissa}e{e}")
    }
}

/// "num/den" in lowest terms.
pub fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `num/den`, an integer, or a decimal such as `0.125` or `1.5e-9`, exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let den: BigInt = b.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(a.trim().parse().ok()?, den));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / 10;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        r = -r;
    }
    Some(r)
}

pub fn big_ratio(num: u128, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from_biguint(Sign::Plus, den.clone()))
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new(start: f64) -> Self {
        CompensatedSum { sum: start, compensation: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sum of nonnegative fractions `a/b`, exact for the first `exact_terms`
/// terms, then compensated floating point.
///
/// The exact phase keeps the denominator as the lcm of all term
/// denominators, so each addition costs one big-by-small remainder and two
/// big-by-small products instead of a big gcd.
#[derive(Debug, Clone)]
pub struct MixedSum {
    exact_terms: usize,
    terms: usize,
    num: BigUint,
    den: BigUint,
    float: Option<CompensatedSum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SumState {
    /// Every term so far was accumulated exactly.
    Exact,
    /// Switched to floating point after this many exact terms.
    SwitchedAfter(usize),
}

impl MixedSum {
    pub fn new(exact_terms: usize) -> Self {
        MixedSum { exact_terms, terms: 0, num: BigUint::zero(), den: BigUint::one(), float: None }
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// Adds `num / den` (`den > 0`).
    pub fn add(&mut self, num: &BigUint, den: &BigUint) {
        self.terms += 1;
        if let Some(f) = self.float.as_mut() {
            f.add(ratio_to_f64(num, den));
            return;
        }
        if self.terms > self.exact_terms {
            let mut f = CompensatedSum::new(ratio_to_f64(&self.num, &self.den));
            f.add(ratio_to_f64(num, den));
            self.float = Some(f);
            return;
        }
        let g = (&self.den % den).gcd(den);
        let den_over_g = den / &g;
        let acc_over_g = &self.den / &g;
        self.num = &self.num * &den_over_g + num * acc_over_g;
        self.den = &self.den * den_over_g;
    }

    pub fn add_u128(&mut self, num: u128, den: &BigUint) {
        self.add(&BigUint::from(num), den);
    }

    pub fn state(&self) -> SumState {
        match self.float {
            None => SumState::Exact,
            Some(_) => SumState::SwitchedAfter(self.exact_terms),
        }
    }

    pub fn value(&self) -> f64 {
        match &self.float {
            Some(f) => f.value(),
            None => ratio_to_f64(&self.num, &self.den),
        }
    }

    /// The exact sum in lowest terms while still in the exact phase.
    pub fn exact(&self) -> Option<BigRational> {
        self.float.is_none().then(|| {
            BigRational::new(
                BigInt::from_biguint(Sign::Plus, self.num.clone()),
                BigInt::from_biguint(Sign::Plus, self.den.clone()),
            )
        })
    }

    /// Bit size of the exact-phase denominator; 0 after the switch.
    pub fn exact_denominator_bits(&self) -> u64 {
        if self.float.is_none() {
            self.den.bits()
        } else {
            0
        }
    }
}
