//! Closed intervals of doubles with outward rounding.
//!
//! Bounds may be infinite (`lo = -inf`, `hi = +inf`) but never NaN and never
//! `lo > hi`. Which rounding policy the operator impls use is fixed by
//! [`ActiveRounding`]; every operation is also available with an explicit
//! policy through the `*_with` methods.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalError {
    /// A bound was NaN or `lo > hi`.
    Invalid,
    DivisionByZeroInterval,
    DimensionMismatch { left: usize, right: usize },
    /// Malformed hex-float text.
    Parse,
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalError::Invalid => write!(f, "invalid interval bounds"),
            IntervalError::DivisionByZeroInterval => write!(f, "divisor interval contains zero"),
            IntervalError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            IntervalError::Parse => write!(f, "malformed hex float"),
        }
    }
}

/// Directed rounding of the four basic operations.
pub trait Rounding: Copy + Default + fmt::Debug + 'static {
    const NAME: &'static str;
    fn add_down(a: f64, b: f64) -> f64;
    fn add_up(a: f64, b: f64) -> f64;
    fn mul_down(a: f64, b: f64) -> f64;
    fn mul_up(a: f64, b: f64) -> f64;
    fn div_down(a: f64, b: f64) -> f64;
    fn div_up(a: f64, b: f64) -> f64;
}

/// Round to nearest, then step one ulp outward. Always sound, never tight.
#[derive(Clone, Copy, Debug, Default)]
pub struct UlpWidening;

#[inline]
fn widen_down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn widen_up(x: f64) -> f64 {
    x.next_up()
}

impl Rounding for UlpWidening {
    const NAME: &'static str = "ulp-widening";
    #[inline]
    fn add_down(a: f64, b: f64) -> f64 {
        widen_down(a + b)
    }
    #[inline]
    fn add_up(a: f64, b: f64) -> f64 {
        widen_up(a + b)
    }
    #[inline]
    fn mul_down(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        widen_down(a * b)
    }
    #[inline]
    fn mul_up(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        widen_up(a * b)
    }
    #[inline]
    fn div_down(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        widen_down(a / b)
    }
    #[inline]
    fn div_up(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        widen_up(a / b)
    }
}

/// Correct directed rounding, as an FPU in round-up/round-down mode would give,
/// obtained from round-to-nearest plus error-free transformations.
/// Falls back to ulp widening where the transformations are not exact
/// (overflow, results near the subnormal range, huge operands).
#[derive(Clone, Copy, Debug, Default)]
pub struct DirectedEmulation;

const SPLIT_LIMIT: f64 = 6.696928794914171e299; // 2^996
const TINY: f64 = 2.004168360008973e-292; // 2^-969

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = 134_217_729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

#[inline]
fn two_prod_err(a: f64, b: f64, p: f64) -> f64 {
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    ((ah * bh - p) + ah * bl + al * bh) + al * bl
}

#[inline]
fn products_exact_range(a: f64, b: f64, p: f64) -> bool {
    p.is_finite() && p.abs() >= TINY && a.abs() < SPLIT_LIMIT && b.abs() < SPLIT_LIMIT
}

impl DirectedEmulation {
    /// Sign of `exact(a + b) - fl(a + b)`, or `None` when not decidable.
    #[inline]
    fn add_err(a: f64, b: f64, s: f64) -> Option<f64> {
        if s.is_finite() {
            Some(two_sum_err(a, b, s))
        } else {
            None
        }
    }

    #[inline]
    fn mul_err(a: f64, b: f64, p: f64) -> Option<f64> {
        if products_exact_range(a, b, p) {
            Some(two_prod_err(a, b, p))
        } else {
            None
        }
    }

    /// Sign of `exact(a / b) - q`.
    #[inline]
    fn div_err(a: f64, b: f64, q: f64) -> Option<f64> {
        if !products_exact_range(q, b, a) || q.abs() < TINY {
            return None;
        }
        let p = q * b;
        if !p.is_finite() {
            return None;
        }
        let e = two_prod_err(q, b, p);
        // a - q b = (a - p) - e; a - p is exact because p is within a factor two of a
        let r = (a - p) - e;
        Some(if b > 0.0 { r } else { -r })
    }
}

impl Rounding for DirectedEmulation {
    const NAME: &'static str = "directed-emulation";
    #[inline]
    fn add_down(a: f64, b: f64) -> f64 {
        let s = a + b;
        if a.is_infinite() || b.is_infinite() {
            return s;
        }
        match Self::add_err(a, b, s) {
            Some(e) if e < 0.0 => s.next_down(),
            Some(_) => s,
            None => widen_down(s),
        }
    }
    #[inline]
    fn add_up(a: f64, b: f64) -> f64 {
        let s = a + b;
        if a.is_infinite() || b.is_infinite() {
            return s;
        }
        match Self::add_err(a, b, s) {
            Some(e) if e > 0.0 => s.next_up(),
            Some(_) => s,
            None => widen_up(s),
        }
    }
    #[inline]
    fn mul_down(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        let p = a * b;
        if a.is_infinite() || b.is_infinite() {
            return p;
        }
        match Self::mul_err(a, b, p) {
            Some(e) if e < 0.0 => p.next_down(),
            Some(_) => p,
            None => widen_down(p),
        }
    }
    #[inline]
    fn mul_up(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        let p = a * b;
        if a.is_infinite() || b.is_infinite() {
            return p;
        }
        match Self::mul_err(a, b, p) {
            Some(e) if e > 0.0 => p.next_up(),
            Some(_) => p,
            None => widen_up(p),
        }
    }
    #[inline]
    fn div_down(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        let q = a / b;
        if a.is_infinite() || b.is_infinite() {
            return if q == 0.0 { widen_down(q) } else { q };
        }
        match Self::div_err(a, b, q) {
            Some(e) if e < 0.0 => q.next_down(),
            Some(_) => q,
            None => widen_down(q),
        }
    }
    #[inline]
    fn div_up(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        let q = a / b;
        if a.is_infinite() || b.is_infinite() {
            return if q == 0.0 { widen_up(q) } else { q };
        }
        match Self::div_err(a, b, q) {
            Some(e) if e > 0.0 => q.next_up(),
            Some(_) => q,
            None => widen_up(q),
        }
    }
}

/// Policy used by the operator impls and by everything downstream.
#[cfg(not(feature = "ulp-rounding"))]
pub type ActiveRounding = DirectedEmulation;
#[cfg(feature = "ulp-rounding")]
pub type ActiveRounding = UlpWidening;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(IntervalError::Invalid);
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval; panics on NaN or infinity.
    #[inline]
    pub fn point(x: f64) -> Interval {
        assert!(x.is_finite(), "point interval needs a finite value");
        Interval { lo: x, hi: x }
    }

    /// `[c - r, c + r]` rounded outward; `r >= 0`.
    pub fn ball(c: f64, r: f64) -> Interval {
        debug_assert!(r >= 0.0);
        Interval { lo: ActiveRounding::add_down(c, -r), hi: ActiveRounding::add_up(c, r) }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    /// `o` lies in the interior of `self`.
    #[inline]
    pub fn interior_contains(&self, o: &Interval) -> bool {
        self.lo < o.lo && o.hi < self.hi
    }

    #[inline]
    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    #[inline]
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Upper bound on the width.
    #[inline]
    pub fn width(&self) -> f64 {
        ActiveRounding::add_up(self.hi, -self.lo)
    }

    /// Upper bound on the radius about [`Interval::mid`].
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        let a = ActiveRounding::add_up(m, -self.lo);
        let b = ActiveRounding::add_up(self.hi, -m);
        if a > b {
            a
        } else {
            b
        }
    }

    /// A point in the interval close to the midpoint.
    pub fn mid(&self) -> f64 {
        if self.lo == f64::NEG_INFINITY || self.hi == f64::INFINITY {
            if self.lo.is_finite() {
                return self.lo;
            }
            if self.hi.is_finite() {
                return self.hi;
            }
            return 0.0;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on `max |x|`.
    #[inline]
    pub fn mag(&self) -> f64 {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    /// Lower bound on `min |x|`.
    #[inline]
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            let a = self.lo.abs();
            let b = self.hi.abs();
            if a < b {
                a
            } else {
                b
            }
        }
    }

    #[inline]
    pub fn abs(&self) -> Interval {
        Interval { lo: self.mig(), hi: self.mag() }
    }

    #[inline]
    pub fn hull(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    /// `[lo - r, hi + r]` rounded outward.
    pub fn inflate(&self, r: f64) -> Interval {
        Interval { lo: ActiveRounding::add_down(self.lo, -r), hi: ActiveRounding::add_up(self.hi, r) }
    }

    #[inline]
    pub fn add_with<R: Rounding>(self, o: Interval) -> Interval {
        Interval { lo: R::add_down(self.lo, o.lo), hi: R::add_up(self.hi, o.hi) }
    }

    #[inline]
    pub fn sub_with<R: Rounding>(self, o: Interval) -> Interval {
        Interval { lo: R::add_down(self.lo, -o.hi), hi: R::add_up(self.hi, -o.lo) }
    }

    #[inline]
    pub fn mul_with<R: Rounding>(self, o: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        if a >= 0.0 {
            if c >= 0.0 {
                Interval { lo: R::mul_down(a, c), hi: R::mul_up(b, d) }
            } else if d <= 0.0 {
                Interval { lo: R::mul_down(b, c), hi: R::mul_up(a, d) }
            } else {
                Interval { lo: R::mul_down(b, c), hi: R::mul_up(b, d) }
            }
        } else if b <= 0.0 {
            if c >= 0.0 {
                Interval { lo: R::mul_down(a, d), hi: R::mul_up(b, c) }
            } else if d <= 0.0 {
                Interval { lo: R::mul_down(b, d), hi: R::mul_up(a, c) }
            } else {
                Interval { lo: R::mul_down(a, d), hi: R::mul_up(a, c) }
            }
        } else if c >= 0.0 {
            Interval { lo: R::mul_down(a, d), hi: R::mul_up(b, d) }
        } else if d <= 0.0 {
            Interval { lo: R::mul_down(b, c), hi: R::mul_up(a, c) }
        } else {
            let lo1 = R::mul_down(a, d);
            let lo2 = R::mul_down(b, c);
            let hi1 = R::mul_up(a, c);
            let hi2 = R::mul_up(b, d);
            Interval { lo: lo1.min(lo2), hi: hi1.max(hi2) }
        }
    }

    pub fn div_with<R: Rounding>(self, o: Interval) -> Result<Interval, IntervalError> {
        if o.contains_zero() {
            return Err(IntervalError::DivisionByZeroInterval);
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let r = if c > 0.0 {
            if a >= 0.0 {
                Interval { lo: R::div_down(a, d), hi: R::div_up(b, c) }
            } else if b <= 0.0 {
                Interval { lo: R::div_down(a, c), hi: R::div_up(b, d) }
            } else {
                Interval { lo: R::div_down(a, c), hi: R::div_up(b, c) }
            }
        } else if a >= 0.0 {
            Interval { lo: R::div_down(b, d), hi: R::div_up(a, c) }
        } else if b <= 0.0 {
            Interval { lo: R::div_down(b, c), hi: R::div_up(a, d) }
        } else {
            Interval { lo: R::div_down(b, d), hi: R::div_up(a, d) }
        };
        Ok(r)
    }

    #[inline]
    pub fn checked_div(self, o: Interval) -> Result<Interval, IntervalError> {
        self.div_with::<ActiveRounding>(o)
    }

    #[inline]
    pub fn sqr(self) -> Interval {
        let m = self.mig();
        let mm = self.mag();
        Interval { lo: ActiveRounding::mul_down(m, m), hi: ActiveRounding::mul_up(mm, mm) }
    }

    #[inline]
    pub fn scale(self, c: f64) -> Interval {
        self * Interval::point(c)
    }

    pub fn exp_with<R: Rounding>(self) -> Interval {
        let lo = exp_enclose::<R>(self.lo).lo;
        let hi = exp_enclose::<R>(self.hi).hi;
        Interval { lo, hi }
    }

    /// Rigorous exponential; the result is always a subset of `[0, inf]`.
    #[inline]
    pub fn exp_pos(self) -> Interval {
        self.exp_with::<ActiveRounding>()
    }

    /// `[-r, r]` for `r >= 0`.
    #[inline]
    pub fn symmetric(r: f64) -> Interval {
        Interval { lo: -r, hi: r }
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::from("[");
        s.push_str(&hex_f64(self.lo));
        s.push_str(", ");
        s.push_str(&hex_f64(self.hi));
        s.push(']');
        s
    }

    pub fn from_hex(text: &str) -> Result<Interval, IntervalError> {
        let t = text.trim();
        let inner = t.strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or(IntervalError::Parse)?;
        let mut it = inner.split(',');
        let lo = parse_hex_f64(it.next().ok_or(IntervalError::Parse)?)?;
        let hi = parse_hex_f64(it.next().ok_or(IntervalError::Parse)?)?;
        if it.next().is_some() {
            return Err(IntervalError::Parse);
        }
        Interval::new(lo, hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, o: Interval) -> Interval {
        self.add_with::<ActiveRounding>(o)
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, o: Interval) -> Interval {
        self.sub_with::<ActiveRounding>(o)
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, o: Interval) -> Interval {
        self.mul_with::<ActiveRounding>(o)
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

// ln 2 = LN2_HEAD + tail, LN2_HEAD has 32 significant bits so k * LN2_HEAD is exact
const LN2_HEAD: f64 = f64::from_bits(0x3FE6_2E42_FEE0_0000);
// nearest double to the tail; the true tail is within half an ulp
const LN2_TAIL: f64 = f64::from_bits(0x3DEA_39EF_3579_3C76);

fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// Enclosure of `e^x` for a single double.
fn exp_enclose<R: Rounding>(x: f64) -> Interval {
    if x == f64::NEG_INFINITY {
        return Interval::ZERO;
    }
    if x == f64::INFINITY || x > 709.8 {
        return Interval { lo: f64::MAX, hi: f64::INFINITY };
    }
    if x < -745.2 {
        return Interval { lo: 0.0, hi: f64::from_bits(1) };
    }
    if x == 0.0 {
        return Interval::ONE;
    }
    let k = libm::round(x / LN2_HEAD) as i32;
    let tail = Interval { lo: LN2_TAIL.next_down(), hi: LN2_TAIL.next_up() };
    let kk = Interval::point(k as f64);
    let r = Interval::point(x)
        .sub_with::<R>(kk.mul_with::<R>(Interval::point(LN2_HEAD)))
        .sub_with::<R>(kk.mul_with::<R>(tail));
    // |r| <= 0.35 here; Taylor to degree 18 plus Lagrange remainder
    const N: i32 = 18;
    let mut p = Interval::ONE;
    for n in (1..=N).rev() {
        let t = r.mul_with::<R>(p).div_with::<R>(Interval::point(n as f64)).expect("nonzero");
        p = Interval::ONE.add_with::<R>(t);
    }
    let m = r.mag();
    // remainder <= m^(N+1) / (N+1)! * e^m, with e^m < 1.5
    let mut rem = 1.5;
    for n in 1..=(N + 1) {
        rem = R::div_up(R::mul_up(rem, m), n as f64);
    }
    let p = p.add_with::<R>(Interval::symmetric(rem));
    let p = Interval { lo: p.lo.max(0.0), hi: p.hi };
    // scale by 2^k, splitting when the power is out of the normal range
    let (k1, k2) = if k > 1000 {
        (1000, k - 1000)
    } else if k < -1000 {
        (-1000, k + 1000)
    } else {
        (k, 0)
    };
    let mut out = p.mul_with::<R>(Interval::point(pow2(k1)));
    if k2 != 0 {
        out = out.mul_with::<R>(Interval::point(pow2(k2)));
    }
    Interval { lo: out.lo.max(0.0), hi: out.hi }
}

/// `0x1.xxxp+e` rendering; exact.
pub fn hex_f64(x: f64) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    if x.is_nan() {
        s.push_str("nan");
        return s;
    }
    if x.is_infinite() {
        s.push_str(if x > 0.0 { "inf" } else { "-inf" });
        return s;
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let man = bits & ((1u64 << 52) - 1);
    if neg {
        s.push('-');
    }
    if exp == 0 && man == 0 {
        s.push_str("0x0p+0");
        return s;
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = alloc::format!("{:013x}", man);
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        let _ = write!(s, "0x{lead}p{e:+}");
    } else {
        let _ = write!(s, "0x{lead}.{digits}p{e:+}");
    }
    s
}

pub fn parse_hex_f64(text: &str) -> Result<f64, IntervalError> {
    let t = text.trim();
    match t {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let t = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).ok_or(IntervalError::Parse)?;
    let (mant, exp) = t.split_once(['p', 'P']).ok_or(IntervalError::Parse)?;
    let exp: i64 = exp.parse().map_err(|_| IntervalError::Parse)?;
    let (int_part, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if frac.len() > 13 || int_part.is_empty() {
        return Err(IntervalError::Parse);
    }
    let lead = u64::from_str_radix(int_part, 16).map_err(|_| IntervalError::Parse)?;
    if lead > 1 {
        return Err(IntervalError::Parse);
    }
    let mut f = 0u64;
    if !frac.is_empty() {
        f = u64::from_str_radix(frac, 16).map_err(|_| IntervalError::Parse)?;
        f <<= 4 * (13 - frac.len());
    }
    let v = if lead == 0 {
        if f == 0 {
            0.0
        } else if exp == -1022 {
            f64::from_bits(f)
        } else {
            return Err(IntervalError::Parse);
        }
    } else {
        let be = exp + 1023;
        if !(1..=2046).contains(&be) {
            return Err(IntervalError::Parse);
        }
        f64::from_bits(((be as u64) << 52) | f)
    };
    Ok(if neg { -v } else { v })
}

/// A box in R^n; the dimension is fixed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalVector {
    comps: Vec<Interval>,
}

impl IntervalVector {
    pub fn new(comps: Vec<Interval>) -> IntervalVector {
        IntervalVector { comps }
    }

    pub fn from_points(p: &[f64]) -> IntervalVector {
        IntervalVector { comps: p.iter().map(|&x| Interval::point(x)).collect() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    #[inline]
    pub fn comps(&self) -> &[Interval] {
        &self.comps
    }

    #[inline]
    pub fn get(&self, i: usize) -> Interval {
        self.comps[i]
    }

    fn check(&self, o: &IntervalVector) -> Result<(), IntervalError> {
        if self.dim() != o.dim() {
            return Err(IntervalError::DimensionMismatch { left: self.dim(), right: o.dim() });
        }
        Ok(())
    }

    pub fn add(&self, o: &IntervalVector) -> Result<IntervalVector, IntervalError> {
        self.check(o)?;
        Ok(IntervalVector { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| *a + *b).collect() })
    }

    pub fn sub(&self, o: &IntervalVector) -> Result<IntervalVector, IntervalError> {
        self.check(o)?;
        Ok(IntervalVector { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| *a - *b).collect() })
    }

    pub fn scale(&self, c: Interval) -> IntervalVector {
        IntervalVector { comps: self.comps.iter().map(|a| *a * c).collect() }
    }

    pub fn hull(&self, o: &IntervalVector) -> Result<IntervalVector, IntervalError> {
        self.check(o)?;
        Ok(IntervalVector { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.hull(b)).collect() })
    }

    pub fn intersect(&self, o: &IntervalVector) -> Result<Option<IntervalVector>, IntervalError> {
        self.check(o)?;
        let mut comps = Vec::with_capacity(self.dim());
        for (a, b) in self.comps.iter().zip(&o.comps) {
            match a.intersect(b) {
                Some(c) => comps.push(c),
                None => return Ok(None),
            }
        }
        Ok(Some(IntervalVector { comps }))
    }

    pub fn contains(&self, o: &IntervalVector) -> Result<bool, IntervalError> {
        self.check(o)?;
        Ok(self.comps.iter().zip(&o.comps).all(|(a, b)| a.contains_interval(b)))
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.comps.iter().zip(p).all(|(a, &x)| a.contains(x))
    }

    /// Upper bound on the sup-norm diameter.
    pub fn sup_width(&self) -> f64 {
        self.comps.iter().map(|c| c.width()).fold(0.0, f64::max)
    }

    /// Upper bound on the sup norm of any point.
    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.mag()).fold(0.0, f64::max)
    }

    pub fn mid(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.mid()).collect()
    }

    /// Lower bound on the sup-norm distance between the boxes; 0 if they meet.
    pub fn sup_dist(&self, o: &IntervalVector) -> Result<f64, IntervalError> {
        self.check(o)?;
        let mut d: f64 = 0.0;
        for (a, b) in self.comps.iter().zip(&o.comps) {
            let g1 = ActiveRounding::add_down(b.lo, -a.hi);
            let g2 = ActiveRounding::add_down(a.lo, -b.hi);
            d = d.max(g1).max(g2);
        }
        Ok(d)
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::from("[");
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&c.to_hex());
        }
        s.push(']');
        s
    }
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for Interval {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            (hex_f64(self.lo), hex_f64(self.hi)).serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for Interval {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let (a, b) = <(String, String)>::deserialize(d)?;
            let lo = parse_hex_f64(&a).map_err(D::Error::custom)?;
            let hi = parse_hex_f64(&b).map_err(D::Error::custom)?;
            Interval::new(lo, hi).map_err(D::Error::custom)
        }
    }
}
