//! Orders of GL_n(q), Singer-cycle counts, densities and primitive-polynomial
//! counts from closed formulas, with exhaustive oracles in [`oracle`].

pub mod field;
pub mod oracle;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::arith::{euler_phi, qn_minus_1, Factorization, PrimePower};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::rational::ratio_to_f64;

pub use field::{build_field, FiniteField};

/// The group GL_n(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    n: u32,
    q: PrimePower,
    modulus: u128,
}

impl GroupSpec {
    /// Fails with a range error unless q^n - 1 < 2^128.
    pub fn new(n: u32, q: PrimePower) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("rank n must be at least 1"));
        }
        let modulus = qn_minus_1(q.q(), n)?;
        Ok(GroupSpec { n, q, modulus })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> PrimePower {
        self.q
    }

    /// q^n - 1, the maximal element order.
    pub fn modulus(&self) -> u128 {
        self.modulus
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GL_{}({})", self.n, self.q.q())
    }
}

fn overflow(spec: &GroupSpec, what: &str) -> Error {
    Error::range(format!("{what} of {spec} exceeds 2^128"))
}

/// |GL_n(q)| / (q^n - 1) = q^{n(n-1)/2} · Π_{i<n} (q^i - 1).
fn gl_cofactor(spec: &GroupSpec) -> Result<u128> {
    let q = spec.q.q();
    let mut acc: u128 = 1;
    let mut qi: u128 = 1;
    for i in 1..spec.n {
        qi = qi.checked_mul(q).ok_or_else(|| overflow(spec, "|GL_n(q)|"))?;
        acc = acc
            .checked_mul(qi)
            .and_then(|a| a.checked_mul(qi - 1))
            .ok_or_else(|| overflow(spec, "|GL_n(q)|"))?;
        debug_assert!(i < spec.n);
    }
    Ok(acc)
}

/// |GL_n(q)| = Π_{i=0}^{n-1} (q^n - q^i).
pub fn gl_order(spec: &GroupSpec) -> Result<u128> {
    gl_cofactor(spec)?
        .checked_mul(spec.modulus)
        .ok_or_else(|| overflow(spec, "|GL_n(q)|"))
}

fn phi_over_n(spec: &GroupSpec, f: &Factorization) -> Result<(u128, u128)> {
    let phi = euler_phi(f);
    let n = spec.n as u128;
    assert!(phi.is_multiple_of(n), "n = {n} does not divide φ(q^n - 1) = {phi} for {spec}");
    Ok((phi, phi / n))
}

/// Number of primitive monic polynomials of degree n over F_q: φ(q^n - 1)/n.
pub fn primitive_poly_count(ctx: &Context, spec: &GroupSpec) -> Result<u128> {
    let f = ctx.factor_qn_minus_1(spec.q.q(), spec.n)?;
    Ok(phi_over_n(spec, &f)?.1)
}

/// Number of Singer cycles, |GL_n(q)|/(q^n - 1) · φ(q^n - 1)/n.
pub fn singer_count(ctx: &Context, spec: &GroupSpec) -> Result<u128> {
    let cofactor = gl_cofactor(spec)?;
    let f = ctx.factor_qn_minus_1(spec.q.q(), spec.n)?;
    let (_, per_n) = phi_over_n(spec, &f)?;
    cofactor.checked_mul(per_n).ok_or_else(|| overflow(spec, "Singer count"))
}

/// p_n(q) = φ(q^n - 1) / (n (q^n - 1)), kept unreduced alongside its reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRecord {
    pub spec: GroupSpec,
    pub phi_value: u128,
    pub modulus: u128,
    /// n · (q^n - 1); may exceed 2^128.
    pub denominator: BigUint,
    pub value: f64,
}

impl DensityRecord {
    pub fn numerator(&self) -> u128 {
        self.phi_value
    }

    /// Reduced exact rational.
    pub fn exact(&self) -> BigRational {
        BigRational::new(BigUint::from(self.phi_value).into(), self.denominator.clone().into())
    }

    /// n · p_n(q) = φ(q^n - 1)/(q^n - 1), which lies in (0, 1].
    pub fn scaled_exact(&self) -> BigRational {
        BigRational::new(BigUint::from(self.phi_value).into(), BigUint::from(self.modulus).into())
    }

    pub fn scaled_value(&self) -> f64 {
        ratio_to_f64(&BigUint::from(self.phi_value), &BigUint::from(self.modulus))
    }
}

/// Density record from a known factorization of q^n - 1.
pub fn density_from_factorization(spec: &GroupSpec, f: &Factorization) -> Result<DensityRecord> {
    if f.value() != spec.modulus {
        return Err(Error::invalid(format!(
            "factorization of {} supplied for {spec}, expected {}",
            f.value(),
            spec.modulus
        )));
    }
    let (phi, _) = phi_over_n(spec, f)?;
    let denominator = BigUint::from(spec.n) * BigUint::from(spec.modulus);
    let value = ratio_to_f64(&BigUint::from(phi), &denominator);
    Ok(DensityRecord { spec: *spec, phi_value: phi, modulus: spec.modulus, denominator, value })
}

pub fn density(ctx: &Context, spec: &GroupSpec) -> Result<DensityRecord> {
    let f = ctx.factor_qn_minus_1(spec.q.q(), spec.n)?;
    density_from_factorization(spec, &f)
}

/// Singer count over group order as an exact rational, for identity checks.
pub fn count_ratio(ctx: &Context, spec: &GroupSpec) -> Result<BigRational> {
    let count = singer_count(ctx, spec)?;
    let order = gl_order(spec)?;
    Ok(BigRational::new(BigUint::from(count).into(), BigUint::from(order).into()))
}

/// 1/n as a rational.
pub fn reciprocal_rank(spec: &GroupSpec) -> BigRational {
    BigRational::new(One::one(), BigUint::from(spec.n).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u32, q: u128) -> GroupSpec {
        GroupSpec::new(n, PrimePower::from_q(q).unwrap()).unwrap()
    }

    fn ratio(a: u64, b: u64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn gl_order_examples() {
        assert_eq!(gl_order(&spec(1, 5)).unwrap(), 4);
        assert_eq!(gl_order(&spec(2, 2)).unwrap(), 6);
        assert_eq!(gl_order(&spec(2, 3)).unwrap(), 48);
        assert_eq!(gl_order(&spec(3, 2)).unwrap(), 168);
        assert_eq!(gl_order(&spec(4, 2)).unwrap(), 20160);
    }

    #[test]
    fn gl_order_overflow_is_range_error() {
        assert!(gl_order(&spec(11, 2)).is_ok());
        assert!(matches!(gl_order(&spec(12, 2)), Err(Error::Range(_))));
        assert!(matches!(GroupSpec::new(129, PrimePower::from_q(2).unwrap()), Err(Error::Range(_))));
        // 2^128 - 1 itself is representable
        assert_eq!(spec(128, 2).modulus(), u128::MAX);
    }

    #[test]
    fn singer_count_examples() {
        let ctx = Context::default();
        assert_eq!(singer_count(&ctx, &spec(2, 2)).unwrap(), 2);
        assert_eq!(singer_count(&ctx, &spec(2, 3)).unwrap(), 12);
        assert_eq!(singer_count(&ctx, &spec(3, 2)).unwrap(), 48);
        assert_eq!(singer_count(&ctx, &spec(2, 4)).unwrap(), 48);
    }

    #[test]
    fn density_examples() {
        let ctx = Context::default();
        assert_eq!(density(&ctx, &spec(1, 2)).unwrap().exact(), ratio(1, 1));
        assert_eq!(density(&ctx, &spec(2, 2)).unwrap().exact(), ratio(1, 3));
        let d = density(&ctx, &spec(2, 3)).unwrap();
        assert_eq!(d.exact(), ratio(1, 4));
        assert_eq!((d.numerator(), d.denominator.clone()), (4, BigUint::from(16u32)));
        assert_eq!(d.value, 0.25);
    }

    #[test]
    fn primitive_poly_examples() {
        let ctx = Context::default();
        assert_eq!(primitive_poly_count(&ctx, &spec(2, 2)).unwrap(), 1);
        assert_eq!(primitive_poly_count(&ctx, &spec(1, 7)).unwrap(), 2);
        assert_eq!(primitive_poly_count(&ctx, &spec(2, 3)).unwrap(), 2);
        assert_eq!(primitive_poly_count(&ctx, &spec(3, 2)).unwrap(), 2);
    }

    #[test]
    fn density_identities() {
        let ctx = Context::default();
        for n in 1..=6u32 {
            for q in [2u128, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27] {
                let s = spec(n, q);
                let d = density(&ctx, &s).unwrap();
                let exact = d.exact();
                assert!(exact > ratio(0, 1));
                assert!(exact <= reciprocal_rank(&s));
                assert_eq!(exact == reciprocal_rank(&s), n == 1 && q == 2, "{s}");
                // density · n · modulus = φ
                let back = &exact * BigRational::from_integer(d.denominator.clone().into());
                assert_eq!(back, BigRational::from_integer(BigUint::from(d.phi_value).into()));
                if gl_order(&s).is_ok() {
                    assert_eq!(count_ratio(&ctx, &s).unwrap(), exact, "{s}");
                }
            }
        }
    }

    #[test]
    fn formulas_match_oracles() {
        let ctx = Context::default();
        for (n, q) in [(1u32, 5u128), (1, 7), (2, 2), (2, 3), (2, 4), (2, 5), (3, 2)] {
            let s = spec(n, q);
            assert_eq!(singer_count(&ctx, &s).unwrap(), oracle::oracle_count_max_order_elements(&ctx, &s).unwrap(), "{s}");
            assert_eq!(primitive_poly_count(&ctx, &s).unwrap(), oracle::oracle_count_primitive_polys(&ctx, &s).unwrap(), "{s}");
            assert_eq!(gl_order(&s).unwrap(), oracle::oracle_gl_order(&ctx, &s).unwrap(), "{s}");
        }
    }

    #[test]
    fn mismatched_factorization_rejected() {
        let f = crate::arith::factor(9).unwrap();
        assert!(density_from_factorization(&spec(2, 3), &f).is_err());
    }
}
