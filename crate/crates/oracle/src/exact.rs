use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Exact value of a finite double.
pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn qi(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `lo <= v <= hi` with exact comparison.
pub fn encloses(lo: f64, hi: f64, v: &BigRational) -> bool {
    (lo == f64::NEG_INFINITY || &q(lo) <= v) && (hi == f64::INFINITY || v <= &q(hi))
}

/// Number of doubles strictly between `a` and `b` plus one (`a <= b`, same sign domain).
pub fn ulps_between(a: f64, b: f64) -> u64 {
    fn key(x: f64) -> i64 {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    }
    (key(b) - key(a)).unsigned_abs()
}

pub fn abs(x: &BigRational) -> BigRational {
    x.abs()
}

pub fn is_zero(x: &BigRational) -> bool {
    x.is_zero()
}
