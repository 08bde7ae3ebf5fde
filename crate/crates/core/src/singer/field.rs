//! Concrete small finite fields F_{p^r} with table-driven arithmetic.
//!
//! Elements are integers `0..p^r` whose base-p digits are the coefficients
//! of a polynomial of degree < r. The modulus is the lexicographically
//! smallest monic irreducible polynomial of degree r, where polynomials are
//! ordered by that same base-p encoding of their non-leading coefficients.

use crate::arith::is_prime;
use crate::error::{Error, Result};

/// Hard ceiling on field size; tables are quadratic in the size.
pub const MAX_FIELD_SIZE: u128 = 4096;

#[derive(Debug, Clone)]
pub struct FiniteField {
    p: u32,
    r: u32,
    size: u32,
    /// Monic modulus, coefficients c_0..=c_r.
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

/// Polynomial over F_p, coefficients low to high, no trailing zeros (zero is empty).
fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    while a.len() > db {
        let shift = a.len() - 1 - db;
        let factor = (a[a.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &bc) in b.iter().enumerate() {
            let idx = shift + i;
            let sub = (factor as u64 * bc as u64 % p as u64) as u32;
            a[idx] = (a[idx] + p - sub) % p;
        }
        a = trim(a);
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // p prime: a^{p-2}
    let (mut r, mut b, mut e) = (1u64, a as u64 % p as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Monic polynomial of degree `deg` whose non-leading coefficients are the base-p digits of `code`.
fn monic_from_code(code: u64, deg: u32, p: u32) -> Vec<u32> {
    let mut c = Vec::with_capacity(deg as usize + 1);
    let mut rest = code;
    for _ in 0..deg {
        c.push((rest % p as u64) as u32);
        rest /= p as u64;
    }
    c.push(1);
    c
}

/// Irreducibility over F_p by trial division with every monic polynomial of degree ≤ deg/2.
pub fn is_irreducible_over_prime_field(f: &[u32], p: u32) -> bool {
    let deg = f.len() as u32 - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d);
        for code in 0..count {
            let g = monic_from_code(code, d, p);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.size as usize + b as usize]
    }
    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.size as usize + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        self.neg[a as usize]
    }
    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }
    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u16) -> Option<u16> {
        (a != 0).then(|| self.inv[a as usize])
    }

    fn digits(&self, a: u32) -> Vec<u32> {
        let mut out = vec![0u32; self.r as usize];
        let mut rest = a;
        for d in out.iter_mut() {
            *d = rest % self.p;
            rest /= self.p;
        }
        out
    }

    fn encode(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }
}

/// Builds F_{p^r} with the smallest monic irreducible modulus of degree r.
pub fn build_field(p: u32, r: u32, cap: u128) -> Result<FiniteField> {
    if r == 0 {
        return Err(Error::invalid("field degree must be at least 1"));
    }
    if !is_prime(p as u128) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let size = (p as u128).checked_pow(r).unwrap_or(u128::MAX);
    let cap = cap.min(MAX_FIELD_SIZE);
    if size > cap {
        return Err(Error::OracleCap { what: "field size", size, cap });
    }
    let size = size as u32;
    let modulus = (0..size as u64)
        .map(|code| monic_from_code(code, r, p))
        .find(|f| is_irreducible_over_prime_field(f, p))
        .expect("an irreducible polynomial exists in every degree");

    let mut field = FiniteField {
        p,
        r,
        size,
        modulus,
        add: Vec::new(),
        mul: Vec::new(),
        neg: Vec::new(),
        inv: Vec::new(),
    };
    let s = size as usize;
    let digits: Vec<Vec<u32>> = (0..size).map(|a| field.digits(a)).collect();
    let mut add = vec![0u16; s * s];
    let mut mul = vec![0u16; s * s];
    for a in 0..s {
        for b in 0..s {
            let sum: Vec<u32> = digits[a].iter().zip(&digits[b]).map(|(x, y)| (x + y) % p).collect();
            add[a * s + b] = field.encode(&sum) as u16;
            let mut prod = vec![0u32; 2 * r as usize - 1];
            for (i, &x) in digits[a].iter().enumerate() {
                for (j, &y) in digits[b].iter().enumerate() {
                    prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
                }
            }
            let mut red = poly_rem(&trim(prod), &field.modulus, p);
            red.resize(r as usize, 0);
            mul[a * s + b] = field.encode(&red) as u16;
        }
    }
    let mut neg = vec![0u16; s];
    let mut inv = vec![0u16; s];
    for a in 0..s {
        neg[a] = (0..s).find(|&b| add[a * s + b] == 0).expect("additive inverse") as u16;
        if a != 0 {
            inv[a] = (1..s).find(|&b| mul[a * s + b] == 1).expect("field is a field") as u16;
        }
    }
    field.add = add;
    field.mul = mul;
    field.neg = neg;
    field.inv = inv;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_examples() {
        assert_eq!(build_field(2, 1, 512).unwrap().modulus(), &[0, 1]); // x
        assert_eq!(build_field(2, 2, 512).unwrap().modulus(), &[1, 1, 1]); // x^2 + x + 1
        assert_eq!(build_field(3, 2, 512).unwrap().modulus(), &[1, 0, 1]); // x^2 + 1
        assert_eq!(build_field(2, 3, 512).unwrap().modulus(), &[1, 1, 0, 1]); // x^3 + x + 1
    }

    #[test]
    fn cap_and_argument_errors() {
        assert!(matches!(build_field(2, 10, 512), Err(Error::OracleCap { .. })));
        assert!(build_field(4, 1, 512).is_err());
        assert!(build_field(2, 0, 512).is_err());
    }

    #[test]
    fn field_axioms() {
        for (p, r) in [(2, 3), (3, 2), (5, 1), (2, 4), (7, 2)] {
            let f = build_field(p, r, 512).unwrap();
            let s = f.size() as u16;
            for a in 0..s {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..s {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in [0u16, 1, s - 1] {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            // the multiplicative group is cyclic of order size - 1: some element has full order
            let has_generator = (1..s).any(|g| {
                let mut x = g;
                let mut k = 1;
                while x != 1 {
                    x = f.mul(x, g);
                    k += 1;
                }
                k == s as u32 - 1
            });
            assert!(has_generator, "F_{p}^{r}");
        }
    }

    #[test]
    fn irreducibility_scan() {
        // over F_2: x^2+x+1 irreducible, x^2+1 = (x+1)^2 not
        assert!(is_irreducible_over_prime_field(&[1, 1, 1], 2));
        assert!(!is_irreducible_over_prime_field(&[1, 0, 1], 2));
        // x^4 + x^2 + 1 = (x^2+x+1)^2 over F_2 has no roots but is reducible
        assert!(!is_irreducible_over_prime_field(&[1, 0, 1, 0, 1], 2));
    }
}
