//! Small integer helpers: divisor sums, prime factors, extended gcd.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Sum of the divisors of `n`; zero for `n <= 0`.
pub fn sigma(k: u32, n: i64) -> BigInt {
    if n <= 0 {
        return BigInt::zero();
    }
    let mut total = BigInt::zero();
    let mut i = 1i64;
    while i * i <= n {
        if n % i == 0 {
            total += BigInt::from(i).pow(k);
            let j = n / i;
            if j != i {
                total += BigInt::from(j).pow(k);
            }
        }
        i += 1;
    }
    total
}

/// `sigma_1(x)` for a rational argument: the divisor sum when `x` is a positive
/// integer and zero otherwise.
pub fn sigma1(x: &BigRational) -> BigRational {
    match positive_integer(x) {
        Some(n) => BigRational::from_integer(sigma(1, n)),
        None => BigRational::zero(),
    }
}

/// Divisor sum of `n` restricted to divisors not divisible by `level`.
///
/// Non-integral or negative arguments give 0 and `x = 0` gives `(level - 1)/24`.
pub fn sigma1_level(level: u32, x: &BigRational) -> BigRational {
    if x.is_zero() {
        return BigRational::new(BigInt::from(level as i64 - 1), BigInt::from(24));
    }
    let n = match positive_integer(x) {
        Some(n) => n,
        None => return BigRational::zero(),
    };
    let level = level as i64;
    let mut total = 0i64;
    for dv in 1..=n {
        if n % dv == 0 && dv % level != 0 {
            total += dv;
        }
    }
    BigRational::from_integer(BigInt::from(total))
}

fn positive_integer(x: &BigRational) -> Option<i64> {
    if !x.is_integer() || x <= &BigRational::zero() {
        return None;
    }
    i64::try_from(x.to_integer()).ok()
}

/// Distinct prime factors of `n > 0`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> u32 {
    if n == 0 {
        return 0;
    }
    prime_factors(n).len() as u32
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Möbius function for square-free inputs and beyond.
pub fn moebius(n: u64) -> i64 {
    let mut m = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

/// Returns `(g, x, y)` with `g = gcd(a, b) >= 0` and `a*x + b*y = g`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn is_square(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r - 1..=r + 1).find(|&s| s >= 0 && s * s == n)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow2(e: i32) -> BigRational {
    let two = BigInt::from(2);
    if e >= 0 {
        BigRational::from_integer(two.pow(e as u32))
    } else {
        BigRational::new(BigInt::one(), two.pow((-e) as u32))
    }
}
