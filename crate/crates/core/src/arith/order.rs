//! Euler's φ, Carmichael's λ, multiplicative orders, and the root-counting
//! function ρ_n(m) = #{a mod m : a^n ≡ 1 (mod m)}.

use super::factor::{factor, Factorization};
use super::modular::{gcd, pow_mod};
use crate::error::{Error, Result};

pub fn euler_phi(f: &Factorization) -> u128 {
    f.factors()
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Factorization of λ(m), assembled from the factorizations of p - 1 for p | m.
pub fn carmichael_lambda(m: &Factorization) -> Result<Factorization> {
    let mut exps: Vec<(u128, u32)> = Vec::new();
    let bump = |p: u128, e: u32, exps: &mut Vec<(u128, u32)>| {
        if e == 0 {
            return;
        }
        match exps.iter_mut().find(|(q, _)| *q == p) {
            Some(entry) => entry.1 = entry.1.max(e),
            None => exps.push((p, e)),
        }
    };
    for &(p, e) in m.factors() {
        if p == 2 {
            let k = match e {
                1 => 0,
                2 => 1,
                _ => e - 2,
            };
            bump(2, k, &mut exps);
        } else {
            bump(p, e - 1, &mut exps);
            for &(l, le) in factor(p - 1)?.factors() {
                bump(l, le, &mut exps);
            }
        }
    }
    exps.sort_unstable();
    let value = exps.iter().map(|&(p, e)| p.pow(e)).product();
    Ok(Factorization::from_sorted_unchecked(value, exps))
}

/// Least k ≥ 1 with p^k ≡ 1 (mod m); ℓ_p(1) = 1.
pub fn mult_order(p: u128, m: u128) -> Result<u128> {
    if m == 0 {
        return Err(Error::domain("multiplicative order modulo 0 is undefined"));
    }
    if m == 1 {
        return Ok(1);
    }
    mult_order_factored(p, &factor(m)?)
}

/// As [`mult_order`], with the factorization of the modulus supplied.
pub fn mult_order_factored(p: u128, m: &Factorization) -> Result<u128> {
    let modulus = m.value();
    if modulus == 1 {
        return Ok(1);
    }
    if gcd(p % modulus, modulus) != 1 {
        return Err(Error::domain(format!("gcd({p}, {modulus}) > 1, order undefined")));
    }
    let lambda = carmichael_lambda(m)?;
    let mut order = lambda.value();
    for &(l, e) in lambda.factors() {
        for _ in 0..e {
            let candidate = order / l;
            if pow_mod(p, candidate, modulus) == 1 {
                order = candidate;
            } else {
                break;
            }
        }
    }
    debug_assert_eq!(pow_mod(p, order, modulus), 1);
    Ok(order)
}

/// Number of solutions of a^n ≡ 1 modulo p^e.
fn rho_prime_power(n: u128, p: u128, e: u32) -> u128 {
    if p == 2 {
        match e {
            1 => 1,
            2 => gcd(2, n),
            _ => gcd(2, n) * gcd(1u128 << (e - 2), n),
        }
    } else {
        gcd(p.pow(e - 1) * (p - 1), n)
    }
}

/// ρ_n(m), evaluated multiplicatively from the unit-group structure of each prime power.
pub fn rho(n: u128, m: u128) -> Result<u128> {
    if m == 0 {
        return Err(Error::domain("ρ_n(0) is undefined"));
    }
    if n == 0 {
        return Err(Error::invalid("ρ_n needs n ≥ 1"));
    }
    Ok(rho_factored(n, &factor(m)?))
}

pub fn rho_factored(n: u128, m: &Factorization) -> u128 {
    m.factors().iter().map(|&(p, e)| rho_prime_power(n, p, e)).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_order(p: u128, m: u128) -> u128 {
        let mut x = p % m;
        let mut k = 1;
        while x != 1 % m {
            x = x * p % m;
            k += 1;
        }
        k
    }

    fn naive_rho(n: u128, m: u128) -> u128 {
        (0..m).filter(|&a| pow_mod(a, n, m) == 1 % m).count() as u128
    }

    #[test]
    fn order_examples() {
        assert_eq!(mult_order(2, 7).unwrap(), 3);
        assert_eq!(mult_order(2, 15).unwrap(), 4);
        assert_eq!(mult_order(3, 80).unwrap(), naive_order(3, 80));
        assert_eq!(mult_order(3, 80).unwrap(), 4);
        assert_eq!(mult_order(5, 1).unwrap(), 1);
        assert!(matches!(mult_order(2, 6), Err(Error::Domain(_))));
    }

    #[test]
    fn order_on_large_modulus() {
        // 2 has order 127 modulo the Mersenne prime 2^127 - 1
        let m = (1u128 << 127) - 1;
        assert_eq!(mult_order(2, m).unwrap(), 127);
        // order of 2 modulo 2^64 + 1 = 274177 · 67280421310721 is 128
        assert_eq!(mult_order(2, (1u128 << 64) + 1).unwrap(), 128);
    }

    #[test]
    fn lambda_values() {
        for (m, l) in [(1u128, 1u128), (8, 2), (16, 4), (15, 4), (24, 2), (63, 6), (65, 12)] {
            assert_eq!(carmichael_lambda(&factor(m).unwrap()).unwrap().value(), l, "λ({m})");
        }
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(2, 8).unwrap(), 4);
        assert_eq!(rho(4, 13).unwrap(), 4);
        assert_eq!(rho(1, 97).unwrap(), 1);
        assert_eq!(rho(3, 1).unwrap(), 1);
        assert!(matches!(rho(2, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn rho_against_brute_force_small() {
        for m in 1..=300u128 {
            for n in 1..=12u128 {
                assert_eq!(rho(n, m).unwrap(), naive_rho(n, m), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(euler_phi(&factor(8).unwrap()), 4);
        assert_eq!(euler_phi(&factor(1).unwrap()), 1);
        assert_eq!(euler_phi(&factor(2047).unwrap()), 1936);
    }
}
