//! Sieves: multiplicative-function tables, prime lists, smallest prime
//! factors, and the enumeration of prime powers below a bound.

use serde::{Deserialize, Serialize};

use super::factor::Factorization;
use super::prime::is_prime;
use crate::error::{Error, Result};

/// Default upper limit for any table built here.
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// μ, φ, τ and σ for every index `1..=limit`. Index 0 holds a placeholder.
#[derive(Debug, Clone)]
pub struct MultiplicativeTables {
    limit: usize,
    mu: Vec<i8>,
    phi: Vec<u32>,
    tau: Vec<u32>,
    sigma: Vec<u64>,
    primes: Vec<u32>,
}

impl MultiplicativeTables {
    pub fn limit(&self) -> usize {
        self.limit
    }
    pub fn mu(&self, k: usize) -> i8 {
        self.mu[k]
    }
    pub fn phi(&self, k: usize) -> u32 {
        self.phi[k]
    }
    pub fn tau(&self, k: usize) -> u32 {
        self.tau[k]
    }
    pub fn sigma(&self, k: usize) -> u64 {
        self.sigma[k]
    }
    /// Primes up to `limit`, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }
    /// The μ table as a slice indexed from 1 (entry 0 is unused).
    pub fn mu_table(&self) -> &[i8] {
        &self.mu
    }
    pub fn phi_table(&self) -> &[u32] {
        &self.phi
    }
}

fn check_limit(limit: u64, cap: u64) -> Result<usize> {
    if limit == 0 {
        return Err(Error::range("sieve limit must be at least 1"));
    }
    if limit > cap {
        return Err(Error::range(format!("sieve limit {limit} exceeds cap {cap}")));
    }
    usize::try_from(limit).map_err(|_| Error::range("sieve limit exceeds address space"))
}

pub fn sieve_multiplicative(limit: u64) -> Result<MultiplicativeTables> {
    sieve_multiplicative_capped(limit, DEFAULT_SIEVE_CAP)
}

/// Linear (Euler) sieve; every composite is visited once through its smallest prime.
pub fn sieve_multiplicative_capped(limit: u64, cap: u64) -> Result<MultiplicativeTables> {
    let n = check_limit(limit, cap)?;
    let mut mu = vec![0i8; n + 1];
    let mut phi = vec![0u32; n + 1];
    let mut tau = vec![0u32; n + 1];
    let mut sigma = vec![0u64; n + 1];
    // exponent of the smallest prime and 1 + p + ... + p^e for that prime
    let mut spf_exp = vec![0u8; n + 1];
    let mut spf_sigma = vec![0u64; n + 1];
    let mut is_comp = vec![false; n + 1];
    let mut primes: Vec<u32> = Vec::new();

    mu[1] = 1;
    phi[1] = 1;
    tau[1] = 1;
    sigma[1] = 1;
    for i in 2..=n {
        if !is_comp[i] {
            primes.push(i as u32);
            mu[i] = -1;
            phi[i] = (i - 1) as u32;
            tau[i] = 2;
            sigma[i] = i as u64 + 1;
            spf_exp[i] = 1;
            spf_sigma[i] = i as u64 + 1;
        }
        for &p in &primes {
            let p = p as usize;
            let ip = match i.checked_mul(p) {
                Some(v) if v <= n => v,
                _ => break,
            };
            is_comp[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                phi[ip] = phi[i] * p as u32;
                let e = spf_exp[i] as u32;
                tau[ip] = tau[i] / (e + 1) * (e + 2);
                let s_new = spf_sigma[i] * p as u64 + 1;
                sigma[ip] = sigma[i] / spf_sigma[i] * s_new;
                spf_exp[ip] = spf_exp[i] + 1;
                spf_sigma[ip] = s_new;
                break;
            }
            mu[ip] = -mu[i];
            phi[ip] = phi[i] * (p as u32 - 1);
            tau[ip] = tau[i] * 2;
            sigma[ip] = sigma[i] * (p as u64 + 1);
            spf_exp[ip] = 1;
            spf_sigma[ip] = p as u64 + 1;
        }
    }
    Ok(MultiplicativeTables { limit: n, mu, phi, tau, sigma, primes })
}

/// Sieve of Eratosthenes; primes `≤ limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    for (k, &c) in composite.iter().enumerate().skip(2) {
        if !c {
            out.push(k as u64);
        }
    }
    out
}

/// Smallest-prime-factor table for fast factorization of every `m ≤ limit`.
#[derive(Debug, Clone)]
pub struct SmallestFactorTable {
    spf: Vec<u32>,
}

impl SmallestFactorTable {
    pub fn new(limit: u64) -> Result<Self> {
        let n = check_limit(limit, u32::MAX as u64)?;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        if n >= 1 {
            spf[1] = 1;
        }
        Ok(SmallestFactorTable { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn factor(&self, m: u64) -> Factorization {
        assert!(m >= 1 && m <= self.limit(), "{m} outside smallest-factor table");
        let mut rest = m as usize;
        let mut out: Vec<(u128, u32)> = Vec::new();
        while rest > 1 {
            let p = self.spf[rest] as usize;
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            out.push((p as u128, e));
        }
        Factorization::from_sorted_unchecked(m as u128, out)
    }
}

/// A prime power q = p^r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    p: u128,
    r: u32,
    q: u128,
}

impl PrimePower {
    pub fn new(p: u128, r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("prime power exponent must be at least 1"));
        }
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        let q = p.checked_pow(r).ok_or_else(|| Error::range(format!("{p}^{r} exceeds u128")))?;
        Ok(PrimePower { p, r, q })
    }

    /// Recognizes `q` as a prime power.
    pub fn from_q(q: u128) -> Result<Self> {
        if q < 2 {
            return Err(Error::invalid(format!("{q} is not a prime power")));
        }
        let f = super::factor::factor(q)?;
        match f.factors() {
            [(p, r)] => Ok(PrimePower { p: *p, r: *r, q }),
            _ => Err(Error::invalid(format!("{q} is not a prime power"))),
        }
    }

    pub fn p(&self) -> u128 {
        self.p
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn q(&self) -> u128 {
        self.q
    }
}

/// All prime powers `q ≤ x`, ascending; `count()` is Q(x).
#[derive(Debug, Clone)]
pub struct PrimePowerEnumeration {
    x: f64,
    entries: Vec<PrimePower>,
}

impl PrimePowerEnumeration {
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn entries(&self) -> &[PrimePower] {
        &self.entries
    }
    pub fn count(&self) -> usize {
        self.entries.len()
    }
}

pub fn enumerate_prime_powers(x: f64) -> Result<PrimePowerEnumeration> {
    enumerate_prime_powers_capped(x, DEFAULT_SIEVE_CAP)
}

pub fn enumerate_prime_powers_capped(x: f64, cap: u64) -> Result<PrimePowerEnumeration> {
    if !x.is_finite() && x > 0.0 {
        return Err(Error::range("prime power bound must be finite"));
    }
    if x.is_nan() || x < 2.0 {
        return Ok(PrimePowerEnumeration { x, entries: Vec::new() });
    }
    let bound = x.floor() as u64;
    check_limit(bound, cap)?;
    let mut entries = Vec::new();
    for p in primes_up_to(bound) {
        let mut q = p;
        let mut r = 1;
        loop {
            entries.push(PrimePower { p: p as u128, r, q: q as u128 });
            match q.checked_mul(p) {
                Some(next) if next <= bound => {
                    q = next;
                    r += 1;
                }
                _ => break,
            }
        }
    }
    entries.sort_unstable_by_key(|e| e.q);
    Ok(PrimePowerEnumeration { x, entries })
}
