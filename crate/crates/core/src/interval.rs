//! Outward-rounded `f64` intervals.
//!
//! Used only as a cheap first-pass filter: an interval that excludes zero certifies
//! that a quantity is nonzero. Every operation widens its result by one relative
//! rounding error in each direction, which dominates the IEEE round-to-nearest error.

use std::ops::{Add, Mul, Neg, Sub};

const WIDEN: f64 = 2.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x == 0.0 {
        -f64::MIN_POSITIVE
    } else {
        x - x.abs() * WIDEN - f64::MIN_POSITIVE
    }
}

fn up(x: f64) -> f64 {
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else {
        x + x.abs() * WIDEN + f64::MIN_POSITIVE
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn entire() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains_zero(&self) -> bool {
        !(self.lo > 0.0 || self.hi < 0.0)
    }

    pub fn abs_hi(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound of `|x|`.
    pub fn abs_lo(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    fn sanitize(self) -> Self {
        if self.lo.is_nan() || self.hi.is_nan() {
            Interval::entire()
        } else {
            self
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }.sanitize()
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        self + (-o)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        if c.iter().any(|x| x.is_nan()) {
            return Interval::entire();
        }
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: down(lo), hi: up(hi) }
    }
}

/// Rectangular complex interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub fn zero() -> Self {
        ComplexInterval { re: Interval::point(0.0), im: Interval::point(0.0) }
    }

    pub fn real(re: Interval) -> Self {
        ComplexInterval { re, im: Interval::point(0.0) }
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn add(self, o: ComplexInterval) -> ComplexInterval {
        ComplexInterval { re: self.re + o.re, im: self.im + o.im }
    }

    pub fn scale(self, r: Interval) -> ComplexInterval {
        ComplexInterval { re: self.re * r, im: self.im * r }
    }

    /// Bounds `(lo, hi)` on `|z|`.
    pub fn abs_bounds(&self) -> (f64, f64) {
        let hi = up(self.re.abs_hi().hypot(self.im.abs_hi()));
        let lo = down(self.re.abs_lo().hypot(self.im.abs_lo())).max(0.0);
        (lo, hi)
    }
}
