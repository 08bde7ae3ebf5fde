//! Integer factorization below 2^128.
//!
//! Trial division removes every prime below [`TRIAL_BOUND`]; what is left is
//! either prime, 1, or split by Brent's cycle-finding variant of Pollard's
//! rho. The rho schedule (starting point, increments, iteration budget) is
//! fixed, so the same input always produces the same output or the same
//! [`Error::FactorizationExhausted`].

use std::fmt;

use serde::{Deserialize, Serialize};

use super::modular::{gcd, Montgomery};
use super::prime::is_prime;
use crate::error::{Error, Result};

pub const TRIAL_BOUND: u32 = 100_000;

/// Number of rho increments tried before giving up on a composite.
const RHO_ATTEMPTS: u128 = 12;
/// Iterations allowed per increment.
const RHO_ITERATIONS: u64 = 1 << 22;
/// Brent batch length between gcds.
const RHO_BATCH: u64 = 128;

/// Exact prime factorization; an empty factor list stands for 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    value: u128,
    factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization { value: 1, factors: Vec::new() }
    }

    /// Builds a factorization from prime-exponent pairs, checking every invariant.
    pub fn from_parts(value: u128, mut factors: Vec<(u128, u32)>) -> Result<Self> {
        factors.sort_unstable();
        let mut product: u128 = 1;
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!("repeated prime {} in factorization", w[0].0)));
            }
        }
        for &(p, e) in &factors {
            if e == 0 {
                return Err(Error::invalid(format!("zero exponent for prime {p}")));
            }
            if !is_prime(p) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
            let pe = p
                .checked_pow(e)
                .ok_or_else(|| Error::range(format!("{p}^{e} overflows u128")))?;
            product = product
                .checked_mul(pe)
                .ok_or_else(|| Error::range("factor product overflows u128"))?;
        }
        if product != value {
            return Err(Error::invalid(format!("factors multiply to {product}, not {value}")));
        }
        Ok(Factorization { value, factors })
    }

    /// Caller guarantees sorted, distinct, prime, and product = value.
    pub(crate) fn from_sorted_unchecked(value: u128, factors: Vec<(u128, u32)>) -> Self {
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        Factorization { value, factors }
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn factors(&self) -> &[(u128, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> u128 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    /// Merges two factorizations of coprime-or-not values into that of their product.
    pub fn multiply(&self, other: &Factorization) -> Result<Factorization> {
        let value = self
            .value
            .checked_mul(other.value)
            .ok_or_else(|| Error::range("product of factorizations overflows u128"))?;
        let mut merged = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                merged.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                merged.push(b[j]);
                j += 1;
            } else {
                merged.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        Ok(Factorization { value, factors: merged })
    }

    /// All squarefree divisors with their Möbius sign, in no particular order.
    pub fn squarefree_divisors(&self) -> Vec<(u128, i8)> {
        let mut out = vec![(1u128, 1i8)];
        for &(p, _) in &self.factors {
            let len = out.len();
            for i in 0..len {
                let (d, s) = out[i];
                out.push((d * p, -s));
            }
        }
        out
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u128> {
        let mut out = vec![1u128];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u128;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Anything that can produce factorizations; implemented by the direct
/// algorithm and by the shared cache.
pub trait Factorer: Sync {
    fn factor(&self, n: u128) -> Result<Factorization>;
}

/// Stateless factorizer running [`factor`] on every call.
#[derive(Debug, Default, Clone, Copy)]
pub struct Direct;

impl Factorer for Direct {
    fn factor(&self, n: u128) -> Result<Factorization> {
        factor(n)
    }
}

/// Factors `n` with `1 ≤ n < 2^128`.
pub fn factor(n: u128) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::domain("cannot factor 0"));
    }
    let mut primes: Vec<(u128, u32)> = Vec::new();
    let mut rest = n;

    let tz = rest.trailing_zeros();
    if tz > 0 {
        primes.push((2, tz));
        rest >>= tz;
    }
    let mut d: u128 = 3;
    while d <= TRIAL_BOUND as u128 && d * d <= rest {
        if rest.is_multiple_of(d) {
            let mut e = 0;
            while rest.is_multiple_of(d) {
                rest /= d;
                e += 1;
            }
            primes.push((d, e));
        }
        d += 2;
    }
    if rest > 1 {
        let bound = TRIAL_BOUND as u128;
        if rest < bound * bound || is_prime(rest) {
            primes.push((rest, 1));
        } else {
            let mut stack = vec![rest];
            while let Some(c) = stack.pop() {
                if is_prime(c) {
                    push_prime(&mut primes, c);
                    continue;
                }
                let f = split(c).ok_or(Error::FactorizationExhausted { value: c, k: None })?;
                stack.push(f);
                stack.push(c / f);
            }
        }
    }
    primes.sort_unstable();
    Ok(Factorization::from_sorted_unchecked(n, primes))
}

fn push_prime(primes: &mut Vec<(u128, u32)>, p: u128) {
    if let Some(entry) = primes.iter_mut().find(|(q, _)| *q == p) {
        entry.1 += 1;
    } else {
        primes.push((p, 1));
    }
}

/// Returns a nontrivial factor of the odd composite `n`, or `None` once the budget is spent.
fn split(n: u128) -> Option<u128> {
    debug_assert!(n & 1 == 1 && n > 1);
    let r = super::prime::isqrt(n);
    if r * r == n {
        return Some(r);
    }
    if n <= u64::MAX as u128 {
        let n64 = n as u64;
        (1..=RHO_ATTEMPTS as u64).find_map(|c| rho_brent_u64(n64, c)).map(u128::from)
    } else {
        let mont = Montgomery::new(n);
        (1..=RHO_ATTEMPTS).find_map(|c| rho_brent_u128(&mont, c))
    }
}

fn rho_brent_u128(mont: &Montgomery, c: u128) -> Option<u128> {
    let n = mont.modulus();
    let cm = mont.to_mont(c);
    let f = |x: u128| mont.add(mont.mul(x, x), cm);
    let mut y = mont.to_mont(2);
    let mut x;
    let mut ys;
    let mut q = mont.one();
    let mut r: u64 = 1;
    let mut spent: u64 = 0;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r {
            ys = y;
            let m = RHO_BATCH.min(r - k);
            for _ in 0..m {
                y = f(y);
                let diff = x.abs_diff(y);
                q = mont.mul(q, diff);
            }
            spent += m;
            let g = gcd(q, n);
            if g != 1 {
                if g != n {
                    return Some(g);
                }
                // backtrack one step at a time from the batch start
                loop {
                    ys = f(ys);
                    let diff = x.abs_diff(ys);
                    let g = gcd(diff, n);
                    if g != 1 {
                        return (g != n).then_some(g);
                    }
                }
            }
            k += m;
        }
        r *= 2;
        if spent > RHO_ITERATIONS {
            return None;
        }
    }
}

/// 64-bit Montgomery arithmetic for the rho inner loop.
struct Mont64 {
    n: u64,
    n_neg_inv: u64,
}

impl Mont64 {
    fn new(n: u64) -> Self {
        let mut inv = n;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
        }
        Mont64 { n, n_neg_inv: inv.wrapping_neg() }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        let m = (t as u64).wrapping_mul(self.n_neg_inv);
        let mn = m as u128 * self.n as u128;
        let (s, o) = t.overflowing_add(mn);
        let mut r = (s >> 64) as u64;
        if o {
            // the true sum is s + 2^128; its high half is r + 2^64
            r = r.wrapping_sub(self.n);
        } else if r >= self.n {
            r -= self.n;
        }
        r
    }

    #[inline]
    fn to_mont(&self, a: u64) -> u64 {
        (((a as u128) << 64) % self.n as u128) as u64
    }
}

fn rho_brent_u64(n: u64, c: u64) -> Option<u64> {
    let mont = Mont64::new(n);
    let cm = mont.to_mont(c);
    let add = |a: u64, b: u64| {
        let (s, o) = a.overflowing_add(b);
        if o || s >= n {
            s.wrapping_sub(n)
        } else {
            s
        }
    };
    let f = |x: u64| add(mont.mul(x, x), cm);
    let mut y = mont.to_mont(2);
    let mut x;
    let mut ys;
    let mut q = mont.to_mont(1);
    let mut r: u64 = 1;
    let mut spent: u64 = 0;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r {
            ys = y;
            let m = RHO_BATCH.min(r - k);
            for _ in 0..m {
                y = f(y);
                q = mont.mul(q, x.abs_diff(y));
            }
            spent += m;
            let g = gcd_u64(q, n);
            if g != 1 {
                if g != n {
                    return Some(g);
                }
                loop {
                    ys = f(ys);
                    let g = gcd_u64(x.abs_diff(ys), n);
                    if g != 1 {
                        return (g != n).then_some(g);
                    }
                }
            }
            k += m;
        }
        r *= 2;
        if spent > RHO_ITERATIONS {
            return None;
        }
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    super::modular::gcd_u64(a, b)
}

/// Exact `q^n - 1`, or a range error if it does not fit in `u128`.
pub fn qn_minus_1(q: u128, n: u32) -> Result<u128> {
    if q < 2 || n == 0 {
        return Err(Error::invalid(format!("q^n - 1 needs q ≥ 2 and n ≥ 1 (got q={q}, n={n})")));
    }
    // q^n - 1 = q·(q^{n-1} - 1) + (q - 1), which stays in range even when q^n = 2^128
    let mut acc: u128 = 0; // q^k - 1
    for _ in 0..n {
        acc = acc
            .checked_mul(q)
            .and_then(|v| v.checked_add(q - 1))
            .ok_or_else(|| Error::range(format!("{q}^{n} - 1 exceeds 2^128")))?;
    }
    Ok(acc)
}

/// Values Φ_d(q) for every divisor d of n, ascending in d.
pub fn cyclotomic_values(q: u128, n: u32) -> Result<Vec<(u32, u128)>> {
    qn_minus_1(q, n)?;
    let divs: Vec<u32> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut phis: Vec<(u32, u128)> = Vec::with_capacity(divs.len());
    for &d in &divs {
        let mut v = qn_minus_1(q, d)?;
        for &(e, phi_e) in &phis {
            if d % e == 0 {
                debug_assert_eq!(v % phi_e, 0);
                v /= phi_e;
            }
        }
        phis.push((d, v));
    }
    Ok(phis)
}

/// Factors `q^n - 1` through its cyclotomic decomposition Π_{d|n} Φ_d(q).
pub fn factor_qn_minus_1(q: u128, n: u32) -> Result<Factorization> {
    factor_qn_minus_1_with(&Direct, q, n)
}

pub fn factor_qn_minus_1_with(factorer: &dyn Factorer, q: u128, n: u32) -> Result<Factorization> {
    let mut acc = Factorization::one();
    for (_, v) in cyclotomic_values(q, n)? {
        acc = acc.multiply(&factorer.factor(v)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multiply_out(f: &Factorization) -> u128 {
        f.factors().iter().map(|&(p, e)| p.pow(e)).product()
    }

    #[test]
    fn small_examples() {
        assert_eq!(factor(24).unwrap().factors(), &[(2, 3), (3, 1)]);
        assert_eq!(factor(80).unwrap().factors(), &[(2, 4), (5, 1)]);
        assert_eq!(factor(1).unwrap().factors(), &[]);
        let m31 = factor((1 << 31) - 1).unwrap();
        assert!(m31.is_prime());
        assert_eq!(factor(0), Err(Error::Domain("cannot factor 0".into())));
    }

    #[test]
    fn cyclotomic_route_examples() {
        assert_eq!(cyclotomic_values(2, 4).unwrap(), vec![(1, 1), (2, 3), (4, 5)]);
        assert_eq!(factor_qn_minus_1(2, 4).unwrap().factors(), &[(3, 1), (5, 1)]);
        assert_eq!(factor_qn_minus_1(3, 2).unwrap().factors(), &[(2, 3)]);
        assert_eq!(factor_qn_minus_1(2, 11).unwrap().factors(), &[(23, 1), (89, 1)]);
        assert!(matches!(factor_qn_minus_1(2, 129), Err(Error::Range(_))));
        assert_eq!(qn_minus_1(2, 128).unwrap(), u128::MAX);
    }

    #[test]
    fn trial_division_oracle_for_2_pow_11() {
        // independent: brute trial division over all d
        let mut n = 2047u128;
        let mut found = vec![];
        let mut d = 2;
        while n > 1 {
            while n.is_multiple_of(d) {
                found.push(d);
                n /= d;
            }
            d += 1;
        }
        assert_eq!(found, vec![23, 89]);
    }

    #[test]
    fn large_semiprimes_split() {
        let cases: [(u128, u128); 3] = [
            (4294967291, 4294967279),                     // two 32-bit primes
            (1_000_000_007, 998_244_353),                 // below 2^64
            (18446744073709551557, 1_000_000_000_039),    // above 2^64
        ];
        for (a, b) in cases {
            let f = factor(a * b).unwrap();
            let mut expect = vec![(a.min(b), 1), (a.max(b), 1)];
            expect.sort();
            assert_eq!(f.factors(), expect.as_slice(), "{a} * {b}");
        }
    }

    #[test]
    fn mersenne_and_fermat_style_values() {
        for k in 1..=64u32 {
            let f = factor_qn_minus_1(2, k).unwrap();
            assert_eq!(multiply_out(&f), qn_minus_1(2, k).unwrap());
            assert_eq!(&f, &factor(qn_minus_1(2, k).unwrap()).unwrap(), "k={k}");
        }
        let f = factor(u128::MAX).unwrap();
        assert_eq!(
            f.factors(),
            &[(3, 1), (5, 1), (17, 1), (257, 1), (641, 1), (65537, 1), (274177, 1), (6700417, 1), (67280421310721, 1)]
        );
    }

    #[test]
    fn divisor_helpers() {
        let f = factor(60).unwrap();
        assert_eq!(f.divisors(), vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]);
        let mut sf: Vec<_> = f.squarefree_divisors();
        sf.sort();
        assert_eq!(sf, vec![(1, 1), (2, -1), (3, -1), (5, -1), (6, 1), (10, 1), (15, 1), (30, -1)]);
        assert_eq!(f.radical(), 30);
        assert!(Factorization::from_parts(12, vec![(2, 2), (3, 1)]).is_ok());
        assert!(Factorization::from_parts(12, vec![(4, 1), (3, 1)]).is_err());
    }
}
