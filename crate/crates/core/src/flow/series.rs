use crate::interval::Interval;
use core::ops::{Add, Mul, Neg, Sub};

/// Number of stored Taylor coefficients (orders 0..=5).
pub const ORDER: usize = 6;

/// Scalars a vector field can be evaluated on.
pub trait FieldScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn constant(c: f64) -> Self;
    fn scale(self, c: f64) -> Self;
}

impl FieldScalar for Interval {
    #[inline]
    fn constant(c: f64) -> Self {
        Interval::point(c)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * Interval::point(c)
    }
}

impl FieldScalar for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Truncated power series with interval coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series {
    pub c: [Interval; ORDER],
}

impl Series {
    pub const ZERO: Series = Series { c: [Interval::ZERO; ORDER] };

    pub fn constant_interval(x: Interval) -> Series {
        let mut s = Series::ZERO;
        s.c[0] = x;
        s
    }

    /// `x0 + t` as a series in `t`.
    pub fn variable(x0: Interval) -> Series {
        let mut s = Series::ZERO;
        s.c[0] = x0;
        s.c[1] = Interval::ONE;
        s
    }
}

impl Add for Series {
    type Output = Series;
    #[inline]
    fn add(self, o: Series) -> Series {
        let mut r = self;
        for i in 0..ORDER {
            r.c[i] = self.c[i] + o.c[i];
        }
        r
    }
}

impl Sub for Series {
    type Output = Series;
    #[inline]
    fn sub(self, o: Series) -> Series {
        let mut r = self;
        for i in 0..ORDER {
            r.c[i] = self.c[i] - o.c[i];
        }
        r
    }
}

impl Neg for Series {
    type Output = Series;
    #[inline]
    fn neg(self) -> Series {
        let mut r = self;
        for i in 0..ORDER {
            r.c[i] = -self.c[i];
        }
        r
    }
}

impl Mul for Series {
    type Output = Series;
    #[inline]
    fn mul(self, o: Series) -> Series {
        let mut r = Series::ZERO;
        for k in 0..ORDER {
            let mut acc = self.c[0] * o.c[k];
            for i in 1..=k {
                acc = acc + self.c[i] * o.c[k - i];
            }
            r.c[k] = acc;
        }
        r
    }
}

impl FieldScalar for Series {
    fn constant(c: f64) -> Self {
        Series::constant_interval(Interval::point(c))
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        let k = Interval::point(c);
        let mut r = self;
        for i in 0..ORDER {
            r.c[i] = self.c[i] * k;
        }
        r
    }
}
