//! Exact modular arithmetic on `u128`.
//!
//! Moduli below 2^64 go through a native `u128` product. Larger odd moduli
//! use Montgomery multiplication with R = 2^128, and larger even moduli fall
//! back to a 256-bit product reduced by shift-subtract.

/// Full 256-bit product of two `u128`, returned as `(hi, lo)`.
#[inline]
pub fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & MASK);
    let (b1, b0) = (b >> 64, b & MASK);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
    let lo = (p00 & MASK) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// Reduces the 256-bit value `hi·2^128 + lo` modulo `m`.
fn reduce_wide(hi: u128, lo: u128, m: u128) -> u128 {
    debug_assert!(m > 0);
    let mut r = hi % m;
    for i in (0..128).rev() {
        // r < m; r·2 + bit may exceed u128 only when m > 2^127.
        let bit = (lo >> i) & 1;
        let carry = r >> 127;
        r = (r << 1) | bit;
        if carry == 1 || r >= m {
            r = r.wrapping_sub(m);
        }
    }
    r
}

/// `a·b mod m` for any `m ≥ 1`.
#[inline]
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        let a = a % m;
        let b = b % m;
        (a * b) % m
    } else {
        let (hi, lo) = mul_wide(a % m, b % m);
        reduce_wide(hi, lo, m)
    }
}

/// `base^exp mod m`; returns 0 for `m = 1`.
pub fn pow_mod(base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    if m > u64::MAX as u128 && m & 1 == 1 {
        let mont = Montgomery::new(m);
        return mont.to_int(mont.pow(mont.to_mont(base % m), exp));
    }
    let mut result = 1u128;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    result
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Montgomery form arithmetic modulo an odd `n`, with R = 2^128.
#[derive(Debug, Clone, Copy)]
pub struct Montgomery {
    n: u128,
    /// -n^{-1} mod 2^128
    n_neg_inv: u128,
    /// R^2 mod n
    r2: u128,
}

impl Montgomery {
    pub fn new(n: u128) -> Self {
        assert!(n & 1 == 1 && n > 1, "Montgomery modulus must be odd and > 1");
        // Newton iteration for n^{-1} mod 2^128; each step doubles the correct bits.
        let mut inv: u128 = n;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(n.wrapping_mul(inv)));
        }
        debug_assert_eq!(n.wrapping_mul(inv), 1);
        let r_mod = (u128::MAX % n + 1) % n;
        let r2 = mul_mod(r_mod, r_mod, n);
        Montgomery { n, n_neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline]
    pub fn modulus(&self) -> u128 {
        self.n
    }

    #[inline]
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let m = lo.wrapping_mul(self.n_neg_inv);
        let (mh, ml) = mul_wide(m, self.n);
        let carry = (ml.overflowing_add(lo).1) as u128;
        let (s, o1) = hi.overflowing_add(mh);
        let (s, o2) = s.overflowing_add(carry);
        if o1 || o2 || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.redc(hi, lo)
    }

    #[inline]
    pub fn to_mont(&self, a: u128) -> u128 {
        self.mul(a % self.n, self.r2)
    }

    #[inline]
    pub fn to_int(&self, a: u128) -> u128 {
        self.redc(0, a)
    }

    #[inline]
    pub fn one(&self) -> u128 {
        self.to_mont(1)
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let (s, o) = a.overflowing_add(b);
        if o || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a.wrapping_sub(b).wrapping_add(self.n)
        }
    }

    pub fn pow(&self, base: u128, mut exp: u128) -> u128 {
        let mut result = self.one();
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_product_matches_small_cases() {
        assert_eq!(mul_wide(u128::MAX, u128::MAX), (u128::MAX - 1, 1));
        assert_eq!(mul_wide(1 << 64, 1 << 64), (1, 0));
        assert_eq!(mul_wide(12345, 678910), (0, 12345 * 678910));
    }

    #[test]
    fn mul_mod_large_modulus() {
        let m = u128::MAX - 158; // odd
        let a = u128::MAX - 1000;
        let b = u128::MAX - 2000;
        // (m + x)(m + y) ≡ x·y with x = 158 - 1000 + ... computed via small residues
        let ra = a % m;
        let rb = b % m;
        assert_eq!(mul_mod(a, b, m), mul_mod(ra, rb, m));
        let mont = Montgomery::new(m);
        let got = mont.to_int(mont.mul(mont.to_mont(a), mont.to_mont(b)));
        assert_eq!(got, mul_mod(a, b, m));
    }

    #[test]
    fn montgomery_agrees_with_shift_reduction() {
        let moduli = [(1u128 << 127) + 1, (1u128 << 100) - 1, 340282366920938463463374607431768211297];
        for &m in &moduli {
            let mont = Montgomery::new(m);
            let mut x = 0x1234_5678_9abc_def0_1122_3344_5566_7788u128 % m;
            for _ in 0..50 {
                let y = x.wrapping_mul(2862933555777941757).wrapping_add(3037000493) % m;
                let (hi, lo) = mul_wide(x, y);
                let expect = reduce_wide(hi, lo, m);
                let got = mont.to_int(mont.mul(mont.to_mont(x), mont.to_mont(y)));
                assert_eq!(got, expect);
                x = y;
            }
        }
    }

    #[test]
    fn pow_mod_fermat() {
        let p = 2305843009213693951u128; // 2^61 - 1
        assert_eq!(pow_mod(3, p - 1, p), 1);
        let big_p = 170141183460469231731687303715884105727u128; // 2^127 - 1
        assert_eq!(pow_mod(5, big_p - 1, big_p), 1);
        assert_eq!(pow_mod(7, 0, 10), 1);
        assert_eq!(pow_mod(7, 5, 1), 0);
    }
}
