//! Deterministic primality for the full `u128` range.
//!
//! Below 3 317 044 064 679 887 385 961 981 the strong-probable-prime test to
//! the first thirteen prime bases is a proof of primality. Above that bound
//! the same bases are combined with a strong Lucas test (Selfridge
//! parameters), which gives a fixed, reproducible answer with no known
//! counterexample.

use super::modular::Montgomery;

const MR_BASES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const MR_PROVEN_BOUND: u128 = 3_317_044_064_679_887_385_961_981;
const SMALL_PRIMES: [u128; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 97 * 97 {
        return true;
    }
    if n <= u64::MAX as u128 {
        return is_prime_u64(n as u64);
    }
    let mont = Montgomery::new(n);
    if !MR_BASES.iter().all(|&a| strong_probable_prime(&mont, a)) {
        return false;
    }
    if n < MR_PROVEN_BOUND {
        return true;
    }
    strong_lucas(&mont)
}

fn strong_probable_prime(mont: &Montgomery, a: u128) -> bool {
    let n = mont.modulus();
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    let one = mont.one();
    let minus_one = mont.to_mont(n - 1);
    let mut x = mont.pow(mont.to_mont(a), d);
    if x == one || x == minus_one {
        return true;
    }
    for _ in 1..s {
        x = mont.mul(x, x);
        if x == minus_one {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

/// Miller–Rabin for 64-bit inputs; the first twelve prime bases are a proof below 2^64.
fn is_prime_u64(n: u64) -> bool {
    let n128 = n as u128;
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    'witness: for &a in &MR_BASES[..12] {
        let a = a as u64 % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m128) as u64;
        }
        b = ((b as u128 * b as u128) % m128) as u64;
        e >>= 1;
    }
    r
}

/// Jacobi symbol (a / n) for odd n > 0.
pub fn jacobi(mut a: u128, mut n: u128) -> i32 {
    debug_assert!(n & 1 == 1);
    a %= n;
    let mut t = 1;
    while a != 0 {
        while a & 1 == 0 {
            a >>= 1;
            let r = n & 7;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a & 3 == 3 && n & 3 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    // correct the float estimate in both directions
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// Strong Lucas probable-prime test with Selfridge's method A parameters.
fn strong_lucas(mont: &Montgomery) -> bool {
    let n = mont.modulus();
    let r = isqrt(n);
    if r * r == n {
        return false;
    }
    // D = 5, -7, 9, -11, ... until (D/n) = -1
    let mut abs_d: u128 = 5;
    let mut negative = false;
    loop {
        let d_mod = if negative { n - abs_d % n } else { abs_d % n };
        match jacobi(d_mod, n) {
            -1 => break,
            0 if !abs_d.is_multiple_of(n) => return false,
            _ => {}
        }
        abs_d += 2;
        negative = !negative;
    }
    let d_mod = if negative { n - abs_d % n } else { abs_d % n };
    // Q = (1 - D) / 4
    let q_mod = if negative {
        ((abs_d + 1) / 4) % n
    } else {
        n - ((abs_d - 1) / 4) % n
    };

    let half = |x: u128| -> u128 {
        if x & 1 == 0 {
            x >> 1
        } else {
            (x >> 1) + (n >> 1) + 1
        }
    };

    let dm = mont.to_mont(d_mod);
    let qm = mont.to_mont(q_mod);
    let pm = mont.one();

    let mut k = n + 1; // n is odd and < 2^128 - 1 here, so this cannot overflow
    let s = k.trailing_zeros();
    k >>= s;

    let mut u = mont.one();
    let mut v = pm;
    let mut qk = qm;
    let bits = 128 - k.leading_zeros();
    for i in (0..bits - 1).rev() {
        u = mont.mul(u, v);
        v = mont.sub(mont.mul(v, v), mont.add(qk, qk));
        qk = mont.mul(qk, qk);
        if (k >> i) & 1 == 1 {
            let u2 = half(mont.add(mont.mul(pm, u), v));
            let v2 = half(mont.add(mont.mul(dm, u), mont.mul(pm, v)));
            u = u2;
            v = v2;
            qk = mont.mul(qk, qm);
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        v = mont.sub(mont.mul(v, v), mont.add(qk, qk));
        qk = mont.mul(qk, qk);
        if v == 0 {
            return true;
        }
    }
    false
}
