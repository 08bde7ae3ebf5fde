//! Limiting constants with rigorous truncation bounds: the Euler product
//! p_n and the series P(p, r) over squarefree m weighted by
//! μ(m)/m · gcd(ℓ_p(m), r)/ℓ_p(m).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factor, gcd, is_prime, mult_order_factored, primes_up_to, qn_minus_1, SmallestFactorTable};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::rational::{big_to_f64, CompensatedSum};

const EULER_GAMMA_EXP: f64 = 1.781_072_417_990_198; // e^γ, rounded up
const ROBIN_SECOND: f64 = 0.6483;
/// ln ln 16: below this every N in range is < 16 and σ(N)/N ≤ 7/3.
const LNLN_16: f64 = 1.019_781_0;
const SMALL_SIGMA_RATIO: f64 = 7.0 / 3.0;
/// Unit roundoff of f64.
const U: f64 = f64::EPSILON / 2.0;

/// An estimate with a rigorous bound on its distance from the true value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub estimate: f64,
    pub error_bound: f64,
    /// Prime bound for products, K for series.
    pub truncation: u64,
    pub meta: String,
}

impl CertifiedValue {
    pub fn lower(&self) -> f64 {
        self.estimate - self.error_bound
    }

    pub fn upper(&self) -> f64 {
        self.estimate + self.error_bound
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    pub fn intersects(&self, other: &CertifiedValue) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// True when the certified interval does not determine the sign.
    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// The same constant divided by `n`, with the division's rounding folded into the bound.
    pub fn divided_by(&self, n: u32) -> CertifiedValue {
        if n == 1 {
            return self.clone();
        }
        let estimate = self.estimate / n as f64;
        let error_bound = self.error_bound / n as f64 + estimate.abs() * 2.0 * U + self.error_bound * 2.0 * U;
        CertifiedValue {
            estimate,
            error_bound,
            truncation: self.truncation,
            meta: format!("{}; divided by {n}", self.meta),
        }
    }
}

/// (1/n) Π_{p ≤ T} (1 - gcd(p-1, n)/(p(p-1))) with a certified tail.
///
/// With t_p = gcd(p-1, n)/(p(p-1)) ≤ min(n, p-1)/(p(p-1)), every p > T has
/// t_p ≤ 1/p, so -log(1 - t_p) ≤ t_p/(1 - t_p) ≤ c·t_p with c = (T+1)/T.
/// Summing, 0 ≤ -log(tail) ≤ c·n·Σ_{m>T} 1/(m(m-1)) = c·n/T, hence
/// est·e^{-cn/T} ≤ true ≤ est. Floating rounding adds est·(4·π(T) + 3)·u.
pub fn euler_product_pn(ctx: &Context, n: u32, prime_bound: u64) -> Result<CertifiedValue> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if prime_bound < 2 {
        return Err(Error::invalid("prime bound must be at least 2"));
    }
    if prime_bound > ctx.limits.sieve_cap {
        return Err(Error::range(format!(
            "prime bound {prime_bound} exceeds sieve cap {}",
            ctx.limits.sieve_cap
        )));
    }
    let primes = primes_up_to(prime_bound);
    let mut product = 1.0f64;
    for &p in &primes {
        let g = gcd((p - 1) as u128, n as u128) as f64;
        let t = g / p as f64 / (p - 1) as f64;
        product *= 1.0 - t;
    }
    let estimate = product / n as f64;
    let t = prime_bound as f64;
    let c = (t + 1.0) / t;
    let tail = -(-c * n as f64 / t).exp_m1();
    let rounding = estimate * (4.0 * primes.len() as f64 + 3.0) * U * 1.01;
    let error_bound = estimate * tail * (1.0 + 4.0 * U) + rounding;
    Ok(CertifiedValue {
        estimate,
        error_bound,
        truncation: prime_bound,
        meta: format!(
            "product over {} primes <= {prime_bound}; tail: -log(1-t) <= t/(1-t) <= (T+1)/T * t and \
             sum_(p>T) t_p <= n/T, so est*exp(-(T+1)n/T^2) <= true <= est; plus float rounding {:e}",
            primes.len(),
            rounding
        ),
    })
}

/// Inner sum of the series for one order value k.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderGroupedTerm {
    pub k: u32,
    /// Σ μ(m)/m over squarefree m with ℓ_p(m) = k.
    pub inner_sum: BigRational,
    /// The contributing m, ascending.
    pub support: Vec<u128>,
    /// Σ 1/m over the same support.
    pub absolute_sum: BigRational,
}

/// Squarefree m | p^k - 1 with ℓ_p(m) = k exactly, with their inner sums.
pub fn order_grouped_term(ctx: &Context, p: u128, k: u32) -> Result<OrderGroupedTerm> {
    let f = ctx.factor_qn_minus_1(p, k).map_err(|e| e.at_series_term(k))?;
    // m has order exactly k iff m does not divide p^{k/l} - 1 for any prime l | k
    let lower: Vec<u128> = factor(k as u128)?
        .primes()
        .map(|l| qn_minus_1(p, k / l as u32))
        .collect::<Result<_>>()?;
    let radical = f.radical();
    let mut support = Vec::new();
    let mut signed = BigInt::zero();
    let mut absolute = BigInt::zero();
    let mut divisors = f.squarefree_divisors();
    divisors.sort_unstable();
    for (m, mu) in divisors {
        if lower.iter().any(|&a| a % m == 0) {
            continue;
        }
        let share = BigInt::from(radical / m);
        absolute += &share;
        if mu > 0 {
            signed += share;
        } else {
            signed -= share;
        }
        support.push(m);
    }
    let den = BigInt::from(radical);
    Ok(OrderGroupedTerm {
        k,
        inner_sum: BigRational::new(signed, den.clone()),
        support,
        absolute_sum: BigRational::new(absolute, den),
    })
}

/// Result of the grouped evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSeries {
    pub p: u128,
    pub r: u64,
    pub certified: CertifiedValue,
    /// Σ_{k ≤ K} gcd(k, r)/k · inner_sum(k), exactly.
    pub exact_estimate: BigRational,
    pub terms: Vec<OrderGroupedTerm>,
}

fn check_series_args(p: u128, r: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if r == 0 {
        return Err(Error::invalid("r must be at least 1"));
    }
    Ok(())
}

fn grouped_terms(ctx: &Context, p: u128, k_max: u32) -> Vec<Result<OrderGroupedTerm>> {
    ctx.install(|| (1..=k_max).into_par_iter().map(|k| order_grouped_term(ctx, p, k)).collect())
}

/// P(p, r) summed over orders k ≤ K, with an explicit tail bound.
pub fn series_p_grouped(ctx: &Context, p: u128, r: u64, k_max: u32) -> Result<GroupedSeries> {
    check_series_args(p, r)?;
    if k_max == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    qn_minus_1(p, k_max)?;
    let terms = grouped_terms(ctx, p, k_max).into_iter().collect::<Result<Vec<_>>>()?;
    assemble(p, r, terms, String::new())
}

/// K = 64 for p = 2, otherwise floor(127 / log2 p).
pub fn default_truncation(p: u128) -> u32 {
    if p == 2 {
        64
    } else {
        (127.0 / (p as f64).log2()).floor() as u32
    }
}

/// [`series_p_grouped`] at the default K. If p^k - 1 cannot be factored for
/// some k ≤ K, the truncation drops to k - 1 and the reduction is recorded in meta.
pub fn series_p_default(ctx: &Context, p: u128, r: u64) -> Result<GroupedSeries> {
    check_series_args(p, r)?;
    let k_default = default_truncation(p);
    if k_default == 0 {
        return Err(Error::range(format!("{p} too large for any series term below 2^128")));
    }
    let mut terms = Vec::new();
    let mut note = String::new();
    for result in grouped_terms(ctx, p, k_default) {
        match result {
            Ok(t) => terms.push(t),
            Err(Error::FactorizationExhausted { k: Some(k), .. }) if k > 1 => {
                log::warn!("series P({p},{r}): factorization exhausted at k = {k}, truncating at K = {}", k - 1);
                note = format!("; default K {k_default} reduced to {} (factorization exhausted at k = {k})", k - 1);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    assemble(p, r, terms, note)
}

fn assemble(p: u128, r: u64, terms: Vec<OrderGroupedTerm>, note: String) -> Result<GroupedSeries> {
    let k_max = terms.len() as u32;
    let mut exact = BigRational::zero();
    for t in &terms {
        let g = gcd(t.k as u128, r as u128);
        exact += &t.inner_sum * BigRational::new(BigInt::from(g), BigInt::from(t.k));
    }
    let estimate = big_to_f64(&exact);
    let absolute: Vec<f64> = terms.iter().map(|t| big_to_f64(&t.absolute_sum) * (1.0 - 4.0 * U)).collect();
    let (tail, tail_meta) = series_tail_bound(p, r, k_max, &absolute)?;
    let rounding = estimate.abs() * U;
    let certified = CertifiedValue {
        estimate,
        error_bound: tail + rounding,
        truncation: k_max as u64,
        meta: format!("orders k <= {k_max} summed exactly; {tail_meta}{note}"),
    };
    Ok(GroupedSeries { p, r, certified, exact_estimate: exact, terms })
}

/// Upper bound for σ(N)/N over all N with ln ln N ≤ `lnln`.
fn sigma_ratio_bound(lnln: f64) -> f64 {
    if lnln < LNLN_16 {
        SMALL_SIGMA_RATIO
    } else {
        SMALL_SIGMA_RATIO.max(EULER_GAMMA_EXP * lnln + ROBIN_SECOND / lnln)
    }
}

/// Bound on ln ln E_p(j, d), where E_p(j, d) = Π_{i ≤ j}(p^{id} - 1) < p^{d j(j+1)/2}.
fn lnln_e(d: u64, ln_p: f64, j: u64) -> f64 {
    let jj = j as f64;
    (d as f64 * jj * (jj + 1.0) / 2.0 * ln_p).ln() * (1.0 + 1e-12) + 1e-15
}

const NUMERIC_TAIL_TERMS: u64 = 200_000;

/// Bound on Σ_{k > K} gcd(k, r)/k · Σ_{ℓ_p(m) = k} 1/m.
///
/// gcd(k, r) = Σ_{d | k, d | r} φ(d) splits the tail as
/// Σ_{d | r} φ(d)/d · Σ_{j > J} a_j/j with J = ⌊K/d⌋ and a_j = Σ_{ℓ_p(m) = dj} 1/m.
/// Every such m with j ≤ x divides E_p(x, d), so A(x) = Σ_{j ≤ x} a_j ≤ σ(E)/E ≤ U(x)
/// by Robin's inequality σ(N)/N < e^γ ln ln N + 0.6483/ln ln N (N ≥ 3), with 7/3 covering N < 16.
/// Partial summation gives Σ_{j > J} a_j/j ≤ Σ_{j > J} U(j)/(j(j+1)) - A(J)/(J+1).
/// The j-sum runs numerically for 2·10^5 terms; beyond X the bound
/// U(j) ≤ α + 2e^γ ln(j+1) and ∫_X^∞ ln(t+1)/t² dt ≤ (ln X + 1)/X + 1/(2X²) close it.
fn series_tail_bound(p: u128, r: u64, k_max: u32, absolute: &[f64]) -> Result<(f64, String)> {
    let ln_p = (p as f64).ln() * (1.0 + 1e-15);
    let mut total = 0.0f64;
    let divisors = factor(r as u128)?.divisors();
    for &d in &divisors {
        let d64 = d as u64;
        let j0 = k_max as u64 / d64;
        let mut sum = CompensatedSum::new(0.0);
        let x = j0 + NUMERIC_TAIL_TERMS;
        for j in j0 + 1..=x {
            let jj = j as f64;
            sum.add(sigma_ratio_bound(lnln_e(d64, ln_p, j)) / (jj * (jj + 1.0)));
        }
        let xf = x as f64;
        let lnln_next = lnln_e(d64, ln_p, x + 1);
        debug_assert!(EULER_GAMMA_EXP * lnln_next + ROBIN_SECOND / lnln_next > SMALL_SIGMA_RATIO);
        let alpha = EULER_GAMMA_EXP * (d as f64 * ln_p / 2.0).ln() + ROBIN_SECOND / lnln_next + 1e-9;
        let analytic = alpha / (xf + 1.0) + 2.0 * EULER_GAMMA_EXP * ((xf.ln() + 1.0) / xf + 1.0 / (2.0 * xf * xf));
        // A(J) from the exactly known orders k = d, 2d, ..., Jd
        let known: f64 = (1..=j0).map(|j| absolute[(j * d64 - 1) as usize]).sum::<f64>() * (1.0 - 1e-12);
        let t_d = (sum.value() * (1.0 + 1e-10) + analytic - known / (j0 as f64 + 1.0)).max(0.0);
        let phi_d = euler_phi(&factor(d)?) as f64;
        total += phi_d / d as f64 * t_d;
    }
    let total = total * (1.0 + 1e-10);
    Ok((
        total,
        format!(
            "tail <= sum_(d|r) phi(d)/d * [sum_(j>K/d) U(j)/(j(j+1)) - A(K/d)/(K/d+1)], \
             U from sigma(N)/N < e^gamma lnln N + 0.6483/lnln N on E_p(j,d) < p^(d j(j+1)/2); tail bound {total:e}"
        ),
    ))
}

/// Direct partial sums of the series over a range of m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSum {
    pub lo: u64,
    pub hi: u64,
    /// Σ μ(m)/m · gcd(ℓ_p(m), r)/ℓ_p(m) over squarefree m in [lo, hi] coprime to p.
    pub value: f64,
    /// Σ 1/(m ℓ_p(m)) over the same m.
    pub absolute: f64,
    pub terms: usize,
}

/// Series summed directly over squarefree m with lo ≤ m ≤ hi. No certified bound.
pub fn series_p_direct_range(ctx: &Context, p: u128, r: u64, lo: u64, hi: u64) -> Result<DirectSum> {
    check_series_args(p, r)?;
    if lo == 0 || hi < lo {
        return Err(Error::invalid(format!("bad range [{lo}, {hi}]")));
    }
    if hi > ctx.limits.direct_cap {
        return Err(Error::range(format!("M = {hi} exceeds direct-summation cap {}", ctx.limits.direct_cap)));
    }
    let table = SmallestFactorTable::new(hi)?;
    let terms: Vec<Option<(f64, f64)>> = ctx.install(|| {
        (lo..=hi)
            .into_par_iter()
            .map(|m| {
                let f = table.factor(m);
                if !f.is_squarefree() || f.primes().any(|q| q == p) {
                    return Ok(None);
                }
                let order = mult_order_factored(p, &f)?;
                let mf = m as f64;
                let lf = order as f64;
                let g = gcd(order, r as u128) as f64;
                let sign = if f.factors().len() % 2 == 0 { 1.0 } else { -1.0 };
                Ok(Some((sign * g / (mf * lf), 1.0 / (mf * lf))))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut value = CompensatedSum::new(0.0);
    let mut absolute = CompensatedSum::new(0.0);
    let mut count = 0;
    for (v, a) in terms.into_iter().flatten() {
        value.add(v);
        absolute.add(a);
        count += 1;
    }
    Ok(DirectSum { lo, hi, value: value.value(), absolute: absolute.value(), terms: count })
}

pub fn series_p_direct(ctx: &Context, p: u128, r: u64, m_max: u64) -> Result<f64> {
    Ok(series_p_direct_range(ctx, p, r, 1, m_max)?.value)
}

/// Checks that an inner sum's denominator divides k(p^k - 1).
pub fn denominator_divides(term: &OrderGroupedTerm, p: u128) -> Result<bool> {
    let modulus = BigInt::from(qn_minus_1(p, term.k)?) * BigInt::from(term.k);
    Ok((modulus % term.inner_sum.denom()).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mult_order;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn product_single_factor() {
        let ctx = Context::default();
        let v = euler_product_pn(&ctx, 1, 2).unwrap();
        assert_eq!(v.estimate, 0.5);
        // Artin's constant 0.3739558136...
        assert!(v.contains(0.373_955_813_619_202_3));
        assert!(v.error_bound > 0.0);
    }

    #[test]
    fn product_is_inside_unit_interval() {
        let ctx = Context::default();
        for n in 1..=24 {
            for t in [2, 3, 100, 10_000] {
                let v = euler_product_pn(&ctx, n, t).unwrap();
                let scaled = v.estimate * n as f64;
                assert!(scaled > 0.0 && scaled < 1.0, "n={n} T={t}");
            }
        }
    }

    #[test]
    fn product_intervals_nest_toward_artin() {
        let ctx = Context::default();
        let a = euler_product_pn(&ctx, 1, 10_000).unwrap();
        let b = euler_product_pn(&ctx, 1, 20_000).unwrap();
        assert!(a.intersects(&b));
        assert!(a.contains(0.373_955_813_619_202_3) && b.contains(0.373_955_813_619_202_3));
        assert!(b.error_bound < a.error_bound);
        assert!(euler_product_pn(&ctx, 0, 10).is_err());
        assert!(euler_product_pn(&ctx, 1, 1).is_err());
    }

    #[test]
    fn series_k1_is_one() {
        let ctx = Context::default();
        let s = series_p_grouped(&ctx, 2, 1, 1).unwrap();
        assert_eq!(s.exact_estimate, q(1, 1));
        assert_eq!(s.certified.estimate, 1.0);
        assert!(s.certified.error_bound > 0.0);
    }

    #[test]
    fn series_k4_exact() {
        let ctx = Context::default();
        let s = series_p_grouped(&ctx, 2, 1, 4).unwrap();
        assert_eq!(s.exact_estimate, q(1, 1) - q(1, 6) - q(1, 21) - q(1, 30));
        assert_eq!(s.terms[3].support, vec![5, 15]);
        assert_eq!(s.terms[3].inner_sum, q(-1, 5) + q(1, 15));
    }

    #[test]
    fn series_p3_second_order_is_empty() {
        let ctx = Context::default();
        let one = series_p_grouped(&ctx, 3, 1, 1).unwrap();
        let two = series_p_grouped(&ctx, 3, 1, 2).unwrap();
        assert!(two.terms[1].support.is_empty());
        assert_eq!(two.terms[1].inner_sum, q(0, 1));
        assert_eq!(one.exact_estimate, two.exact_estimate);
        assert_eq!(one.exact_estimate, q(1, 2));
    }

    #[test]
    fn support_matches_brute_force() {
        let ctx = Context::default();
        for k in 1..=12u32 {
            let term = order_grouped_term(&ctx, 2, k).unwrap();
            let bound = (1u128 << k) - 1;
            let brute: Vec<u128> = (1..=bound)
                .filter(|&m| m % 2 == 1)
                .filter(|&m| factor(m).unwrap().is_squarefree())
                .filter(|&m| mult_order(2, m).unwrap() == k as u128)
                .collect();
            assert_eq!(term.support, brute, "k={k}");
            let sum = brute.iter().fold(q(0, 1), |acc, &m| {
                let mu = if factor(m).unwrap().factors().len().is_multiple_of(2) { 1 } else { -1 };
                acc + q(mu, m as i64)
            });
            assert_eq!(term.inner_sum, sum);
        }
    }

    #[test]
    fn inner_sum_denominators() {
        let ctx = Context::default();
        for p in [2u128, 3, 5, 7] {
            for k in 1..=16 {
                let term = order_grouped_term(&ctx, p, k).unwrap();
                assert!(denominator_divides(&term, p).unwrap(), "p={p} k={k}");
            }
        }
    }

    #[test]
    fn direct_small_values() {
        let ctx = Context::default();
        assert_eq!(series_p_direct(&ctx, 2, 1, 1).unwrap(), 1.0);
        assert!((series_p_direct(&ctx, 2, 1, 3).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert!(series_p_direct(&ctx, 4, 1, 10).is_err());
        let mut capped = Context::default();
        capped.limits.direct_cap = 100;
        assert!(matches!(series_p_direct(&capped, 2, 1, 101), Err(Error::Range(_))));
    }

    #[test]
    fn direct_doubling_is_self_consistent() {
        let ctx = Context::default();
        for r in [1u64, 2, 6] {
            let m = 2000;
            let a = series_p_direct(&ctx, 3, r, m).unwrap();
            let b = series_p_direct(&ctx, 3, r, 2 * m).unwrap();
            let block = series_p_direct_range(&ctx, 3, r, m + 1, 2 * m).unwrap();
            assert!((b - a).abs() < r as f64 * block.absolute, "r={r}");
        }
    }

    #[test]
    fn grouped_and_direct_agree_within_bound() {
        let ctx = Context::default();
        let g = series_p_grouped(&ctx, 2, 1, 24).unwrap();
        let d = series_p_direct(&ctx, 2, 1, 20_000).unwrap();
        assert!(g.certified.contains(d), "{} ± {} vs {d}", g.certified.estimate, g.certified.error_bound);
        let g20 = series_p_grouped(&ctx, 2, 1, 20).unwrap();
        assert!(g20.certified.intersects(&g.certified));
        assert!(!g.certified.contains_zero());
    }

    #[test]
    fn default_truncations() {
        assert_eq!(default_truncation(2), 64);
        assert_eq!(default_truncation(3), 80);
        assert_eq!(default_truncation(5), 54);
        assert!(qn_minus_1(3, 80).is_ok());
    }

    #[test]
    fn tail_bound_decreases_with_k() {
        let ctx = Context::default();
        let a = series_p_grouped(&ctx, 2, 1, 10).unwrap().certified.error_bound;
        let b = series_p_grouped(&ctx, 2, 1, 40).unwrap().certified.error_bound;
        assert!(b < a && b > 0.0);
    }

    #[test]
    fn divided_value_keeps_containment() {
        let v = CertifiedValue { estimate: 0.9, error_bound: 0.1, truncation: 1, meta: String::new() };
        let h = v.divided_by(3);
        assert!(h.contains(0.3) && h.contains(1.0 / 3.0) && h.contains(0.8 / 3.0));
        assert_eq!(v.divided_by(1), v);
    }
}
