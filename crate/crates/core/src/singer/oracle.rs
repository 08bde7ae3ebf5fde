//! Exhaustive oracles over concrete fields. Nothing here relies on φ, on
//! the Singer-count formula, or on the arith factorizer: the only number
//! theory used is trial division of q^n - 1, which is small whenever an
//! oracle is within its caps.

use rayon::prelude::*;

use super::field::{build_field, FiniteField};
use super::{gl_order, GroupSpec};
use crate::arith::enumerate_prime_powers;
use crate::context::Context;
use crate::error::{Error, Result};

/// Largest matrix rank the fixed-size matrix type supports.
pub const MAX_RANK: usize = 8;

/// Distinct prime divisors by trial division.
pub fn small_prime_divisors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense n×n matrix over a small field, row-major in a fixed buffer.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Matrix {
    n: usize,
    a: [u16; MAX_RANK * MAX_RANK],
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut a = [0u16; MAX_RANK * MAX_RANK];
        for i in 0..n {
            a[i * MAX_RANK + i] = 1;
        }
        Matrix { n, a }
    }

    /// Decodes `index` as n² base-q digits.
    pub fn from_index(n: usize, q: u32, mut index: u64) -> Self {
        let mut a = [0u16; MAX_RANK * MAX_RANK];
        for i in 0..n {
            for j in 0..n {
                a[i * MAX_RANK + j] = (index % q as u64) as u16;
                index /= q as u64;
            }
        }
        Matrix { n, a }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.a[i * MAX_RANK + j]
    }

    pub fn mul(&self, other: &Matrix, f: &FiniteField) -> Matrix {
        let n = self.n;
        let mut out = [0u16; MAX_RANK * MAX_RANK];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u16;
                for k in 0..n {
                    acc = f.add(acc, f.mul(self.a[i * MAX_RANK + k], other.a[k * MAX_RANK + j]));
                }
                out[i * MAX_RANK + j] = acc;
            }
        }
        Matrix { n, a: out }
    }

    pub fn pow(&self, mut e: u128, f: &FiniteField) -> Matrix {
        let mut result = Matrix::identity(self.n);
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, f);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, f);
            }
        }
        result
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.n)
    }

    /// Invertibility by Gaussian elimination.
    pub fn is_invertible(&self, f: &FiniteField) -> bool {
        let n = self.n;
        let mut m = self.a;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| m[r * MAX_RANK + col] != 0) else {
                return false;
            };
            if pivot != col {
                for j in 0..n {
                    m.swap(pivot * MAX_RANK + j, col * MAX_RANK + j);
                }
            }
            let inv = f.inv(m[col * MAX_RANK + col]).expect("nonzero pivot");
            for r in col + 1..n {
                let factor = f.mul(m[r * MAX_RANK + col], inv);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    let sub = f.mul(factor, m[col * MAX_RANK + j]);
                    m[r * MAX_RANK + j] = f.sub(m[r * MAX_RANK + j], sub);
                }
            }
        }
        true
    }
}

/// Order of an invertible matrix dividing `exponent`, found by descending
/// through the prime quotients of `exponent`. Returns `None` if A^exponent ≠ I.
pub fn order_dividing(a: &Matrix, exponent: u128, primes: &[u128], f: &FiniteField) -> Option<u128> {
    if !a.pow(exponent, f).is_identity() {
        return None;
    }
    let mut order = exponent;
    for &l in primes {
        while order.is_multiple_of(l) && a.pow(order / l, f).is_identity() {
            order /= l;
        }
    }
    Some(order)
}

/// Order by repeated multiplication; for cross-checking only.
pub fn order_naive(a: &Matrix, f: &FiniteField, limit: u128) -> Option<u128> {
    let mut x = *a;
    let mut k = 1u128;
    while !x.is_identity() {
        if k >= limit {
            return None;
        }
        x = x.mul(a, f);
        k += 1;
    }
    Some(k)
}

/// A^N = I and A^{N/ℓ} ≠ I for every prime ℓ | N.
fn has_exact_order(a: &Matrix, exponent: u128, primes: &[u128], f: &FiniteField) -> bool {
    let mut first_quotient: Option<Matrix> = None;
    for &l in primes {
        let b = a.pow(exponent / l, f);
        if b.is_identity() {
            return false;
        }
        if first_quotient.is_none() {
            first_quotient = Some(b);
        }
    }
    match (first_quotient, primes.first()) {
        (Some(b), Some(&l)) => b.pow(l, f).is_identity(),
        _ => a.pow(exponent, f).is_identity(),
    }
}

/// Field for the group's q, rejecting non-prime-field parameters the oracle cannot model.
fn oracle_field(ctx: &Context, spec: &GroupSpec) -> Result<FiniteField> {
    let p = u32::try_from(spec.q().p()).map_err(|_| Error::OracleCap {
        what: "field size",
        size: spec.q().q(),
        cap: ctx.limits.field_cap,
    })?;
    build_field(p, spec.q().r(), ctx.limits.field_cap)
}

fn matrix_space(ctx: &Context, spec: &GroupSpec) -> Result<(FiniteField, u64)> {
    let n = spec.n() as usize;
    if n > MAX_RANK {
        return Err(Error::OracleCap { what: "matrix rank", size: n as u128, cap: MAX_RANK as u128 });
    }
    let gl = super::gl_order(spec)?;
    if gl > ctx.limits.group_cap {
        return Err(Error::OracleCap { what: "|GL_n(q)|", size: gl, cap: ctx.limits.group_cap });
    }
    let field = oracle_field(ctx, spec)?;
    let total = (field.size() as u128).pow((n * n) as u32);
    let total = u64::try_from(total).map_err(|_| Error::OracleCap {
        what: "matrix count",
        size: total,
        cap: u64::MAX as u128,
    })?;
    Ok((field, total))
}

/// Every (n, q) with q ≤ `field_cap` and |GL_n(q)| ≤ `group_cap`, ordered by (n, q).
pub fn specs_within(group_cap: u128, field_cap: u128) -> Vec<GroupSpec> {
    let Ok(qs) = enumerate_prime_powers(field_cap as f64) else {
        return Vec::new();
    };
    let mut specs = Vec::new();
    for q in qs.entries() {
        for n in 1.. {
            let Ok(spec) = GroupSpec::new(n, *q) else { break };
            match gl_order(&spec) {
                Ok(order) if order <= group_cap => specs.push(spec),
                _ => break,
            }
        }
    }
    specs.sort_by_key(|s| (s.n(), s.q().q()));
    specs
}

/// |GL_n(q)| by counting invertible matrices.
pub fn oracle_gl_order(ctx: &Context, spec: &GroupSpec) -> Result<u128> {
    let (field, total) = matrix_space(ctx, spec)?;
    let n = spec.n() as usize;
    let q = field.size();
    let count = ctx.install(|| {
        (0..total)
            .into_par_iter()
            .filter(|&i| Matrix::from_index(n, q, i).is_invertible(&field))
            .count()
    });
    Ok(count as u128)
}

/// Number of elements of GL_n(q) of order exactly q^n - 1, by enumerating every matrix.
pub fn oracle_count_max_order_elements(ctx: &Context, spec: &GroupSpec) -> Result<u128> {
    let (field, total) = matrix_space(ctx, spec)?;
    let n = spec.n() as usize;
    let q = field.size();
    let exponent = spec.modulus();
    let primes = small_prime_divisors(exponent);
    let count = ctx.install(|| {
        (0..total)
            .into_par_iter()
            .filter(|&i| has_exact_order(&Matrix::from_index(n, q, i), exponent, &primes, &field))
            .count()
    });
    Ok(count as u128)
}

/// Polynomial over the oracle field, coefficients low to high.
type FieldPoly = Vec<u16>;

fn fp_trim(mut a: FieldPoly) -> FieldPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// a·b mod f for monic f of degree d, inputs of degree < d.
fn fp_mulmod(a: &[u16], b: &[u16], m: &[u16], f: &FiniteField) -> FieldPoly {
    let d = m.len() - 1;
    let mut prod = vec![0u16; (a.len() + b.len()).max(1)];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = f.add(prod[i + j], f.mul(x, y));
        }
    }
    // reduce by the monic modulus from the top
    for top in (d..prod.len()).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        for k in 0..=d {
            let idx = top - d + k;
            prod[idx] = f.sub(prod[idx], f.mul(c, m[k]));
        }
    }
    prod.truncate(d);
    fp_trim(prod)
}

fn fp_powmod(base: &[u16], mut e: u128, m: &[u16], f: &FiniteField) -> FieldPoly {
    let mut result: FieldPoly = fp_trim(vec![1]);
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = fp_mulmod(&result, &b, m, f);
        }
        e >>= 1;
        if e > 0 {
            b = fp_mulmod(&b, &b, m, f);
        }
    }
    result
}

fn fp_rem(a: &[u16], b: &[u16], f: &FiniteField) -> FieldPoly {
    let mut a = fp_trim(a.to_vec());
    let db = b.len() - 1;
    let lead_inv = f.inv(b[db]).expect("nonzero leading coefficient");
    while a.len() > db {
        let shift = a.len() - 1 - db;
        let factor = f.mul(a[a.len() - 1], lead_inv);
        for (i, &bc) in b.iter().enumerate() {
            a[shift + i] = f.sub(a[shift + i], f.mul(factor, bc));
        }
        a = fp_trim(a);
    }
    a
}

fn fp_gcd(a: &[u16], b: &[u16], f: &FiniteField) -> FieldPoly {
    let mut a = fp_trim(a.to_vec());
    let mut b = fp_trim(b.to_vec());
    while !b.is_empty() {
        let r = fp_rem(&a, &b, f);
        a = b;
        b = r;
    }
    a
}

fn fp_sub_x(a: &[u16], f: &FiniteField) -> FieldPoly {
    let mut out = a.to_vec();
    if out.len() < 2 {
        out.resize(2, 0);
    }
    out[1] = f.sub(out[1], 1);
    fp_trim(out)
}

/// Rabin's test: f of degree n is irreducible over F_q iff x^{q^n} ≡ x mod f
/// and gcd(x^{q^{n/ℓ}} - x, f) = 1 for each prime ℓ | n.
fn is_irreducible(m: &[u16], f: &FiniteField) -> bool {
    let n = m.len() - 1;
    let q = f.size() as u128;
    if n == 1 {
        return true;
    }
    let x: FieldPoly = fp_trim(vec![0, 1]);
    // frob[k] = x^{q^k} mod m
    let mut frob = vec![x.clone()];
    for _ in 0..n {
        let last = frob.last().expect("nonempty");
        frob.push(fp_powmod(last, q, m, f));
    }
    if fp_trim(frob[n].clone()) != x {
        return false;
    }
    for l in small_prime_divisors(n as u128) {
        let k = n / l as usize;
        let g = fp_gcd(m, &fp_sub_x(&frob[k], f), f);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Number of primitive monic polynomials of degree n over F_q, by enumeration.
pub fn oracle_count_primitive_polys(ctx: &Context, spec: &GroupSpec) -> Result<u128> {
    let n = spec.n();
    let q = spec.q().q();
    let count = q.checked_pow(n).unwrap_or(u128::MAX);
    if count > ctx.limits.poly_cap {
        return Err(Error::OracleCap { what: "monic polynomial count", size: count, cap: ctx.limits.poly_cap });
    }
    let field = oracle_field(ctx, spec)?;
    let exponent = spec.modulus();
    let primes = small_prime_divisors(exponent);
    let qs = field.size() as u64;
    let found = ctx.install(|| {
        (0..count as u64)
            .into_par_iter()
            .filter(|&code| {
                let mut poly: FieldPoly = Vec::with_capacity(n as usize + 1);
                let mut rest = code;
                for _ in 0..n {
                    poly.push((rest % qs) as u16);
                    rest /= qs;
                }
                poly.push(1);
                if poly[0] == 0 || !is_irreducible(&poly, &field) {
                    return false;
                }
                let x: FieldPoly = if n == 1 {
                    // x mod (x - a) is the constant a
                    fp_trim(vec![field.neg(poly[0])])
                } else {
                    vec![0, 1]
                };
                let one: FieldPoly = vec![1];
                fp_powmod(&x, exponent, &poly, &field) == one
                    && primes.iter().all(|&l| fp_powmod(&x, exponent / l, &poly, &field) != one)
            })
            .count()
    });
    Ok(found as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PrimePower;

    fn spec(n: u32, q: u128) -> GroupSpec {
        GroupSpec::new(n, PrimePower::from_q(q).unwrap()).unwrap()
    }

    #[test]
    fn specs_within_small_cap() {
        let got: Vec<(u32, u128)> = specs_within(200, 512).iter().map(|s| (s.n(), s.q().q())).filter(|&(n, _)| n > 1).collect();
        assert_eq!(got, [(2, 2), (2, 3), (2, 4), (3, 2)]);
        assert_eq!(specs_within(200, 512).iter().filter(|s| s.n() == 1).count(), 60);
    }

    #[test]
    fn gl_order_by_enumeration() {
        let ctx = Context::default();
        assert_eq!(oracle_gl_order(&ctx, &spec(2, 2)).unwrap(), 6);
        assert_eq!(oracle_gl_order(&ctx, &spec(2, 3)).unwrap(), 48);
        assert_eq!(oracle_gl_order(&ctx, &spec(1, 5)).unwrap(), 4);
    }

    #[test]
    fn max_order_examples() {
        let ctx = Context::default();
        assert_eq!(oracle_count_max_order_elements(&ctx, &spec(2, 2)).unwrap(), 2);
        assert_eq!(oracle_count_max_order_elements(&ctx, &spec(1, 5)).unwrap(), 2);
        assert_eq!(oracle_count_max_order_elements(&ctx, &spec(2, 3)).unwrap(), 12);
        assert_eq!(oracle_count_max_order_elements(&ctx, &spec(3, 2)).unwrap(), 48);
        assert_eq!(oracle_count_max_order_elements(&ctx, &spec(1, 2)).unwrap(), 1);
    }

    #[test]
    fn primitive_poly_examples() {
        let ctx = Context::default();
        assert_eq!(oracle_count_primitive_polys(&ctx, &spec(2, 2)).unwrap(), 1);
        assert_eq!(oracle_count_primitive_polys(&ctx, &spec(1, 5)).unwrap(), 2);
        assert_eq!(oracle_count_primitive_polys(&ctx, &spec(3, 2)).unwrap(), 2);
        assert_eq!(oracle_count_primitive_polys(&ctx, &spec(2, 3)).unwrap(), 2);
        assert_eq!(oracle_count_primitive_polys(&ctx, &spec(1, 7)).unwrap(), 2);
    }

    #[test]
    fn prime_quotient_order_matches_naive_on_gl2_3() {
        let ctx = Context::default();
        let s = spec(2, 3);
        let f = build_field(3, 1, ctx.limits.field_cap).unwrap();
        let exponent = s.modulus();
        let primes = small_prime_divisors(exponent);
        let mut seen = 0;
        for i in 0..81 {
            let a = Matrix::from_index(2, 3, i);
            if !a.is_invertible(&f) {
                assert!(order_naive(&a, &f, 100).is_none());
                continue;
            }
            seen += 1;
            // in GL_2(3) every element order divides 48 but not necessarily 8
            let naive = order_naive(&a, &f, 100).unwrap();
            assert_eq!(order_dividing(&a, 48, &[2, 3], &f), Some(naive));
            assert_eq!(has_exact_order(&a, exponent, &primes, &f), naive == exponent);
        }
        assert_eq!(seen, 48);
    }

    #[test]
    fn caps_enforced() {
        let mut ctx = Context::default();
        ctx.limits.group_cap = 10;
        assert!(matches!(oracle_count_max_order_elements(&ctx, &spec(2, 3)), Err(Error::OracleCap { .. })));
        ctx.limits.poly_cap = 5;
        assert!(matches!(oracle_count_primitive_polys(&ctx, &spec(2, 3)), Err(Error::OracleCap { .. })));
    }

    #[test]
    fn rabin_irreducibility_matches_trial_division_over_prime_field() {
        let f = build_field(3, 1, 512).unwrap();
        for code in 0..81u32 {
            let mut c = vec![];
            let mut rest = code;
            for _ in 0..4 {
                c.push(rest % 3);
                rest /= 3;
            }
            c.push(1);
            let as_field: Vec<u16> = c.iter().map(|&v| v as u16).collect();
            assert_eq!(
                is_irreducible(&as_field, &f),
                super::super::field::is_irreducible_over_prime_field(&c, 3),
                "{c:?}"
            );
        }
    }
}
