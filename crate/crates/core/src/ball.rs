//! Arbitrary-precision midpoint-radius ball arithmetic.
//!
//! A [`Ball`] stands for the closed interval `[(mid - rad) * 2^exp, (mid + rad) * 2^exp]`
//! with an exact big-integer midpoint and an unsigned big-integer radius sharing one
//! binary exponent. Every operation returns a ball that contains the exact result of
//! the operation applied to any points of the input balls.
//!
//! Precision is a per-ball attribute (bits of midpoint kept after rounding). Binary
//! operations use the larger of the operand precisions; a precision of `0` marks an
//! exact value that is never rounded. Transcendental functions take an explicit
//! working precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Radius is kept to roughly this many significant bits.
const RAD_BITS: u64 = 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigUint,
    exp: i64,
    prec: u32,
}

fn shr_floor(x: &BigInt, s: u64) -> BigInt {
    // num-bigint shifts of negative values round toward negative infinity
    x >> s
}

fn shr_ceil_u(x: &BigUint, s: u64) -> BigUint {
    if s == 0 {
        return x.clone();
    }
    let q = x >> s;
    if (&q << s) == *x {
        q
    } else {
        q + 1u32
    }
}

fn ceil_div_u(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

impl Ball {
    pub fn zero() -> Self {
        Ball { mid: BigInt::zero(), rad: BigUint::zero(), exp: 0, prec: 0 }
    }

    pub fn one() -> Self {
        Ball::from_int(1)
    }

    /// Exact integer ball.
    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        Ball { mid: n.into(), rad: BigUint::zero(), exp: 0, prec: 0 }
    }

    /// Exact dyadic value `m * 2^e`.
    pub fn from_dyadic(m: BigInt, e: i64) -> Self {
        Ball { mid: m, rad: BigUint::zero(), exp: e, prec: 0 }
    }

    /// Ball `[m - r, m + r] * 2^e`, rounded to `prec` bits.
    pub fn from_parts(mid: BigInt, rad: BigUint, exp: i64, prec: u32) -> Self {
        let mut b = Ball { mid, rad, exp, prec };
        b.normalize();
        b
    }

    /// Enclosure of a rational number at `prec` bits. Exact when the denominator is a
    /// power of two.
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let den = q.denom();
        if den.is_one() {
            return Ball::from_int(q.numer().clone());
        }
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz).is_one() {
            return Ball::from_dyadic(q.numer().clone(), -(tz as i64));
        }
        Ball::from_int(q.numer().clone())
            .div(&Ball::from_int(den.clone()), prec)
            .expect("nonzero denominator")
    }

    /// Enclosure of an `f64` (exact).
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Ball::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        Ball::from_dyadic(BigInt::from(sign) * BigInt::from(m), ex)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = prec;
        self.normalize();
        self
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn mid_ball(&self) -> Ball {
        Ball { mid: self.mid.clone(), rad: BigUint::zero(), exp: self.exp, prec: self.prec }
    }

    /// Radius as an exact (dyadic) ball with zero radius.
    pub fn rad_ball(&self) -> Ball {
        Ball::from_dyadic(BigInt::from(self.rad.clone()), self.exp)
    }

    /// Adds `r * 2^e` to the radius.
    pub fn add_error(&mut self, r: &BigUint, e: i64) {
        if r.is_zero() {
            return;
        }
        if e >= self.exp {
            self.rad += r << ((e - self.exp) as u64);
        } else {
            let s = (self.exp - e) as u64;
            if self.mid.is_zero() && self.rad.is_zero() {
                self.exp = e;
                self.rad = r.clone();
            } else if s > 2 * (self.mid.bits().max(self.rad.bits()) + 64) {
                self.rad += 1u32;
            } else {
                self.rad += shr_ceil_u(r, s);
            }
        }
        self.normalize();
    }

    /// Adds the absolute error bound `|err| <= bound` where `bound` is a ball (its upper
    /// endpoint is used).
    pub fn add_error_ball(&mut self, bound: &Ball) {
        let up = bound.abs_upper_parts();
        self.add_error(&up.0, up.1);
    }

    /// `(m, e)` with `|x| <= m * 2^e` for all x in the ball.
    fn abs_upper_parts(&self) -> (BigUint, i64) {
        (self.mid.magnitude() + &self.rad, self.exp)
    }

    fn normalize(&mut self) {
        if self.mid.is_zero() && self.rad.is_zero() {
            self.exp = 0;
            return;
        }
        let mut shift = 0u64;
        if self.prec > 0 {
            let mb = self.mid.bits();
            let p = self.prec as u64 + 2;
            if mb > p {
                shift = mb - p;
            }
        }
        let rb = self.rad.bits();
        if rb > RAD_BITS {
            shift = shift.max(rb - RAD_BITS);
        }
        if shift > 0 {
            self.shift_right(shift);
        }
    }

    /// Rounds to exponent `self.exp + s`, widening the radius.
    fn shift_right(&mut self, s: u64) {
        let exact = (&self.mid >> s) << s == self.mid;
        self.mid = shr_floor(&self.mid, s);
        self.rad = shr_ceil_u(&self.rad, s);
        if !exact {
            self.rad += 1u32;
        }
        self.exp += s as i64;
    }

    /// Returns (mid, rad) expressed at exponent `e` (rounding if `e > self.exp`).
    fn at_exp(&self, e: i64) -> (BigInt, BigUint) {
        match e.cmp(&self.exp) {
            Ordering::Equal => (self.mid.clone(), self.rad.clone()),
            Ordering::Less => {
                let s = (self.exp - e) as u64;
                (&self.mid << s, &self.rad << s)
            }
            Ordering::Greater => {
                let s = (e - self.exp) as u64;
                let mut b = self.clone();
                b.shift_right(s);
                (b.mid, b.rad)
            }
        }
    }

    /// Exponent of the top bit of `max |x|` (so `|x| < 2^top`); `None` for exact zero.
    fn top(&self) -> Option<i64> {
        let m = self.mid.magnitude() + &self.rad;
        if m.is_zero() {
            None
        } else {
            Some(self.exp + m.bits() as i64)
        }
    }

    /// Smallest integer `t` with `|x| < 2^t` for every point; `None` for exact zero.
    pub fn mag_log2_upper(&self) -> Option<i64> {
        self.top()
    }

    /// Largest integer `t` with `|x| >= 2^t` for every point; `None` if the ball
    /// contains zero.
    pub fn mag_log2_lower(&self) -> Option<i64> {
        if self.contains_zero() {
            return None;
        }
        let lo = self.mid.magnitude() - &self.rad;
        Some(self.exp + lo.bits() as i64 - 1)
    }

    fn add_impl(&self, other: &Ball, prec: u32) -> Ball {
        let e = match (self.top(), other.top()) {
            (None, _) => return other.clone().with_prec(prec),
            (_, None) => return self.clone().with_prec(prec),
            (Some(ta), Some(tb)) => {
                let mut e = self.exp.min(other.exp);
                if prec > 0 {
                    e = e.max(ta.max(tb) - prec as i64 - 8);
                }
                e
            }
        };
        let (ma, ra) = self.at_exp(e);
        let (mb, rb) = other.at_exp(e);
        Ball::from_parts(ma + mb, ra + rb, e, prec)
    }

    fn mul_impl(&self, other: &Ball, prec: u32) -> Ball {
        let rad = self.mid.magnitude() * &other.rad
            + other.mid.magnitude() * &self.rad
            + &self.rad * &other.rad;
        Ball::from_parts(&self.mid * &other.mid, rad, self.exp + other.exp, prec)
    }

    pub fn sqr(&self) -> Ball {
        self.mul_impl(self, self.prec)
    }

    pub fn mul_2exp(&self, k: i64) -> Ball {
        Ball { mid: self.mid.clone(), rad: self.rad.clone(), exp: self.exp + k, prec: self.prec }
    }

    pub fn mul_int(&self, k: &BigInt) -> Ball {
        self.mul_impl(&Ball::from_int(k.clone()), self.prec)
    }

    /// Division by a nonzero integer, rounded to the ball's precision.
    pub fn div_int(&self, k: &BigInt, prec: u32) -> Ball {
        assert!(!k.is_zero(), "division by zero");
        let kk = k.magnitude();
        let g = prec as u64 + kk.bits() + 4;
        let g = g.saturating_sub(self.mid.bits().min(g));
        let num = &self.mid << g;
        let (q, r) = num.div_mod_floor(&BigInt::from(kk.clone()));
        let mut rad = ceil_div_u(&(&self.rad << g), kk);
        if !r.is_zero() {
            rad += 1u32;
        }
        let q = if k.is_negative() { -q } else { q };
        Ball::from_parts(q, rad, self.exp - g as i64, prec.max(self.prec))
    }

    pub fn negated(&self) -> Ball {
        Ball { mid: -&self.mid, rad: self.rad.clone(), exp: self.exp, prec: self.prec }
    }

    pub fn abs(&self) -> Ball {
        if !self.contains_zero() {
            if self.mid.is_negative() {
                return self.negated();
            }
            return self.clone();
        }
        let hi = self.mid.magnitude() + &self.rad;
        // [0, hi] = hi/2 +- hi/2, expressed one exponent lower
        Ball::from_parts(BigInt::from(hi.clone()), hi, self.exp - 1, self.prec)
    }

    /// Lower endpoint as an exact ball.
    pub fn lower(&self) -> Ball {
        Ball::from_dyadic(&self.mid - BigInt::from(self.rad.clone()), self.exp)
    }

    /// Upper endpoint as an exact ball.
    pub fn upper(&self) -> Ball {
        Ball::from_dyadic(&self.mid + BigInt::from(self.rad.clone()), self.exp)
    }

    fn endpoints(&self) -> (BigInt, BigInt) {
        let r = BigInt::from(self.rad.clone());
        (&self.mid - &r, &self.mid + &r)
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.magnitude() <= &self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.mid.is_positive() && self.mid.magnitude() > &self.rad
    }

    pub fn is_negative(&self) -> bool {
        self.mid.is_negative() && self.mid.magnitude() > &self.rad
    }

    /// Certainly `self < other` for all points.
    pub fn certainly_lt(&self, other: &Ball) -> bool {
        other.sub_exact(self).is_positive()
    }

    pub fn certainly_le(&self, other: &Ball) -> bool {
        let d = other.sub_exact(self);
        let (lo, _) = d.endpoints();
        !lo.is_negative()
    }

    /// Difference computed without rounding.
    fn sub_exact(&self, other: &Ball) -> Ball {
        self.add_impl(&other.negated(), 0)
    }

    /// The two balls share at least one point.
    pub fn overlaps(&self, other: &Ball) -> bool {
        self.sub_exact(other).contains_zero()
    }

    pub fn contains(&self, other: &Ball) -> bool {
        let (a_lo, a_hi) = (self.lower(), self.upper());
        let (b_lo, b_hi) = (other.lower(), other.upper());
        a_lo.certainly_le(&b_lo) && b_hi.certainly_le(&a_hi)
    }

    pub fn contains_int(&self, n: &BigInt) -> bool {
        self.overlaps(&Ball::from_int(n.clone()))
    }

    /// Integers `ceil(lo) ..= floor(hi)` contained in the ball.
    pub fn integer_range(&self) -> (BigInt, BigInt) {
        let (lo, hi) = self.endpoints();
        if self.exp >= 0 {
            let s = self.exp as u64;
            (lo << s, hi << s)
        } else {
            let s = (-self.exp) as u64;
            let d = BigInt::one() << s;
            (Integer::div_ceil(&lo, &d), Integer::div_floor(&hi, &d))
        }
    }

    /// The unique integer in the ball, if there is exactly one.
    pub fn unique_integer(&self) -> Option<BigInt> {
        let (a, b) = self.integer_range();
        if a == b {
            Some(a)
        } else {
            None
        }
    }

    pub fn floor_mid(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mid << self.exp as u64
        } else {
            shr_floor(&self.mid, (-self.exp) as u64)
        }
    }

    /// Nearest integer to the midpoint (ties up).
    pub fn round_mid(&self) -> BigInt {
        self.add_impl(&Ball::from_dyadic(BigInt::one(), -1), 0).floor_mid()
    }

    /// `1 / self`, or `None` if the ball contains zero.
    pub fn recip(&self, prec: u32) -> Option<Ball> {
        if self.contains_zero() {
            return None;
        }
        if self.mid.is_negative() {
            return self.negated().recip(prec).map(|b| b.negated());
        }
        let (lo, hi) = self.endpoints();
        let lo = lo.magnitude().clone();
        let hi = hi.magnitude().clone();
        let k = prec.max(32) as u64 + hi.bits() + 4;
        let num = BigUint::one() << k;
        let l = &num / &hi;
        let u = ceil_div_u(&num, &lo);
        let mid = (&l + &u) >> 1u32;
        let rad = &u - &mid;
        Some(Ball::from_parts(BigInt::from(mid), rad, -(k as i64) - self.exp, prec.max(self.prec)))
    }

    pub fn div(&self, other: &Ball, prec: u32) -> Option<Ball> {
        if other.is_exact() && other.exp == 0 && other.mid.bits() <= 64 {
            if other.mid.is_zero() {
                return None;
            }
            return Some(self.div_int(&other.mid, prec.max(self.prec)));
        }
        let p = prec.max(self.prec).max(other.prec);
        let r = other.recip(p + 8)?;
        Some(self.mul_impl(&r, p))
    }

    /// Square root; negative parts of the ball are clipped. `None` if entirely negative.
    pub fn sqrt(&self, prec: u32) -> Option<Ball> {
        let (mut lo, mut hi) = self.endpoints();
        if hi.is_negative() {
            return None;
        }
        if lo.is_negative() {
            lo = BigInt::zero();
        }
        let mut e = self.exp;
        if e.rem_euclid(2) != 0 {
            lo <<= 1u32;
            hi <<= 1u32;
            e -= 1;
        }
        let want = 2 * (prec.max(32) as i64) + 8;
        let k = (want - hi.bits() as i64).div_euclid(2) + 1;
        let (slo, shi) = if k >= 0 {
            let s = 2 * k as u64;
            let lo_s = (lo << s).magnitude().sqrt();
            let hi_s = (hi << s).magnitude().sqrt() + 1u32;
            (lo_s, hi_s)
        } else {
            let s = 2 * (-k) as u64;
            let lo_s = (lo >> s).magnitude().sqrt();
            let hi_s = ((hi >> s) + BigInt::one()).magnitude().sqrt() + 1u32;
            (lo_s, hi_s)
        };
        let mid = (&slo + &shi) >> 1u32;
        let rad = &shi - &mid;
        let rad = rad.max(&mid - &slo);
        Some(Ball::from_parts(BigInt::from(mid), rad, e / 2 - k, prec.max(self.prec)))
    }

    /// `exp(self)` at working precision `prec`.
    pub fn exp(&self, prec: u32) -> Ball {
        let top = match self.top() {
            None => return Ball::one(),
            Some(t) => t,
        };
        let t = ((prec as f64).sqrt() / 2.0).ceil() as i64 + 2;
        let s = (top + t).max(0);
        let wp = prec + s as u32 + 16;
        let y = self.clone().with_prec(wp).mul_2exp(-s);
        // |y| < 2^-t
        let mut sum = Ball::one().with_prec(wp);
        let mut term = Ball::one().with_prec(wp);
        let mut k: u64 = 1;
        loop {
            term = term.mul_impl(&y, wp).div_int(&BigInt::from(k), wp);
            sum = sum.add_impl(&term, wp);
            k += 1;
            if (k as i64) * t > wp as i64 + 8 {
                break;
            }
        }
        // tail: sum_{j>=k} |y|^j/j! <= 2 |y|^k / k! <= 2^(1 - t k)
        sum.add_error(&BigUint::one(), 1 - t * k as i64);
        for _ in 0..s {
            sum = sum.sqr();
        }
        sum.with_prec(prec.max(self.prec))
    }

    /// Natural logarithm; `None` unless the ball is strictly positive.
    pub fn ln(&self, prec: u32) -> Option<Ball> {
        if !self.is_positive() {
            return None;
        }
        let wp = prec.max(32) + 16;
        let k = self.exp + self.mid.bits() as i64 - 1;
        let y = self.clone().with_prec(wp).mul_2exp(-k);
        // ln y = 2 atanh((y-1)/(y+1)), y in about [1, 2]
        let one = Ball::one();
        let t = y.add_impl(&one.negated(), wp).div(&y.add_impl(&one, wp), wp)?;
        let mut r = atanh_series(&t, wp).mul_2exp(1);
        if k != 0 {
            r = r.add_impl(&ln2(wp).mul_int(&BigInt::from(k)), wp);
        }
        Some(r.with_prec(prec.max(self.prec)))
    }

    /// `self^n` for a non-negative integer exponent.
    pub fn pow(&self, n: u64) -> Ball {
        let mut result = Ball::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul_impl(&base, self.prec);
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr();
            }
        }
        result
    }

    /// Conservative `f64` bounds `(lo, hi)` with `lo <= x <= hi` for every point.
    pub fn to_f64_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.endpoints();
        (dyadic_to_f64(&lo, self.exp, false), dyadic_to_f64(&hi, self.exp, true))
    }

    /// Midpoint rounded to `f64` (not certified).
    pub fn mid_f64(&self) -> f64 {
        let (lo, hi) = self.to_f64_bounds();
        if lo.is_finite() && hi.is_finite() {
            lo / 2.0 + hi / 2.0
        } else {
            dyadic_to_f64(&self.mid, self.exp, true)
        }
    }

    /// Upper bound of `|x|` as `f64` (may be `inf`).
    pub fn abs_upper_f64(&self) -> f64 {
        let (m, e) = self.abs_upper_parts();
        dyadic_to_f64(&BigInt::from(m), e, true)
    }

    /// Radius upper bound as `f64` (may be `inf`, never rounds down to a smaller value).
    pub fn rad_f64(&self) -> f64 {
        dyadic_to_f64(&BigInt::from(self.rad.clone()), self.exp, true)
    }

    /// Upper bound of log2 of the radius, `None` for exact balls.
    pub fn rad_log2_upper(&self) -> Option<i64> {
        if self.rad.is_zero() {
            None
        } else {
            Some(self.exp + self.rad.bits() as i64)
        }
    }

    /// Decimal rendering of the midpoint with `digits` digits after the point.
    pub fn mid_decimal(&self, digits: usize) -> String {
        let exact = Ball::from_dyadic(self.mid.clone(), self.exp);
        let scaled = exact.mul_int(&num_traits::pow(BigInt::from(10), digits)).round_mid();
        let neg = scaled.is_negative();
        let s = scaled.magnitude().to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (ip, fp) = s.split_at(s.len() - digits);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(ip);
        if digits > 0 {
            out.push('.');
            out.push_str(fp);
        }
        out
    }

    /// Upper bound of the radius in compact scientific notation, e.g. `3.2e-25`.
    pub fn rad_sci(&self) -> String {
        if self.rad.is_zero() {
            return "0".to_string();
        }
        sci_upper(&self.rad, self.exp)
    }

    /// Number of correct significant decimal digits implied by the radius (0 if none).
    pub fn certified_digits(&self) -> u64 {
        match (self.rad_log2_upper(), self.mag_log2_lower()) {
            (None, _) => u64::MAX,
            (Some(_), None) => 0,
            (Some(r), Some(m)) => {
                let bits = m - r;
                if bits <= 0 {
                    0
                } else {
                    (bits as f64 * std::f64::consts::LOG10_2).floor() as u64
                }
            }
        }
    }

    /// `mid ± rad` with enough digits to show the certified part.
    pub fn display_certified(&self) -> String {
        let digits = match self.rad_log2_upper() {
            None => 0,
            Some(r) if r >= 0 => 0,
            Some(r) => ((-r) as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1,
        };
        let digits = if self.rad.is_zero() && self.exp < 0 {
            ((-self.exp) as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
        } else {
            digits
        };
        format!("{} ± {}", self.mid_decimal(digits.min(400)), self.rad_sci())
    }
}

fn atanh_series(t: &Ball, wp: u32) -> Ball {
    let t2 = t.sqr();
    let mut power = t.clone();
    let mut sum = t.clone();
    let mut k: u64 = 1;
    loop {
        power = power.mul_impl(&t2, wp);
        let term = power.div_int(&BigInt::from(2 * k + 1), wp);
        sum = sum.add_impl(&term, wp);
        k += 1;
        match power.mag_log2_upper() {
            None => break,
            Some(m) if m < -(wp as i64) - 8 => {
                // remaining terms sum to less than |power| t^2/(1-t^2) < |power|
                sum.add_error(&BigUint::one(), m);
                break;
            }
            _ => {}
        }
    }
    sum
}

fn dyadic_to_f64(m: &BigInt, e: i64, up: bool) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let bits = m.bits() as i64;
    let s = (bits - 52).max(0);
    let mut mm = if s > 0 { shr_floor(m, s as u64) } else { m.clone() };
    let inexact = s > 0 && (&mm << s as u64) != *m;
    if inexact && up {
        mm += 1;
    }
    let f = mm.to_f64().expect("fits in 53 bits");
    let ex = e + s;
    ldexp_directed(f, ex, up)
}

fn ldexp_directed(f: f64, e: i64, up: bool) -> f64 {
    if f == 0.0 {
        return 0.0;
    }
    let fe = f.abs().log2().floor() as i64;
    let total = fe + e;
    if total > 1020 {
        return match (f > 0.0, up) {
            (true, true) => f64::INFINITY,
            (true, false) => f64::MAX,
            (false, true) => -f64::MAX,
            (false, false) => f64::NEG_INFINITY,
        };
    }
    if total < -1000 {
        // underflow: return the safe side of zero
        return if up {
            if f > 0.0 { 2f64.powi(-1000) } else { 0.0 }
        } else if f > 0.0 {
            0.0
        } else {
            -(2f64.powi(-1000))
        };
    }
    let mut x = f;
    let mut e = e;
    while e > 0 {
        let step = e.min(512);
        x *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(512);
        x /= 2f64.powi(step as i32);
        e += step;
    }
    x
}

fn sci_upper(r: &BigUint, e: i64) -> String {
    // log10(r * 2^e), rounded so the printed value is >= the true radius
    let bits = r.bits() as i64;
    let s = (bits - 52).max(0);
    let top = (r >> s as u64).to_f64().unwrap_or(f64::MAX) + 1.0;
    let l10 = top.log10() + (e + s) as f64 * std::f64::consts::LOG10_2;
    let ex = l10.floor();
    let mant = 10f64.powf(l10 - ex) * (1.0 + 1e-9);
    let mut mant = (mant * 10.0).ceil() / 10.0;
    let mut ex = ex as i64;
    if mant >= 10.0 {
        mant /= 10.0;
        ex += 1;
    }
    format!("{mant:.1}e{ex}")
}

static PI_CACHE: Mutex<Option<Ball>> = Mutex::new(None);
static LN2_CACHE: Mutex<Option<Ball>> = Mutex::new(None);

/// atan(1/m) in fixed point with `wp` fractional bits; error below `terms + 2` ulps.
fn atan_inv_fixed(m: u64, wp: u64) -> (BigInt, u64) {
    let one = BigInt::one() << wp;
    let m_big = BigInt::from(m);
    let m2 = &m_big * &m_big;
    let mut power = &one / &m_big;
    let mut sum = power.clone();
    let mut k: u64 = 1;
    loop {
        power = &power / &m2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    (sum, 2 * k + 2)
}

/// π enclosed at `prec` bits.
pub fn pi(prec: u32) -> Ball {
    let mut guard = PI_CACHE.lock().expect("pi cache");
    if let Some(b) = guard.as_ref() {
        if b.prec >= prec {
            return b.clone().with_prec(prec);
        }
    }
    let p = (prec.max(64) as u64).next_multiple_of(64);
    let wp = p + 32;
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let (a, ea) = atan_inv_fixed(5, wp);
    let (b, eb) = atan_inv_fixed(239, wp);
    let mid = a * 16 - b * 4;
    let rad = BigUint::from(16 * ea + 4 * eb);
    let ball = Ball::from_parts(mid, rad, -(wp as i64), p as u32);
    *guard = Some(ball.clone());
    ball.with_prec(prec)
}

/// ln 2 enclosed at `prec` bits.
pub fn ln2(prec: u32) -> Ball {
    {
        let guard = LN2_CACHE.lock().expect("ln2 cache");
        if let Some(b) = guard.as_ref() {
            if b.prec >= prec {
                return b.clone().with_prec(prec);
            }
        }
    }
    let p = (prec.max(64) as u64).next_multiple_of(64) as u32;
    let wp = p + 16;
    let third = Ball::one().div_int(&BigInt::from(3), wp);
    let ball = atanh_series(&third, wp).mul_2exp(1).with_prec(p);
    *LN2_CACHE.lock().expect("ln2 cache") = Some(ball.clone());
    ball.with_prec(prec)
}

impl Add for &Ball {
    type Output = Ball;
    fn add(self, rhs: &Ball) -> Ball {
        self.add_impl(rhs, self.prec.max(rhs.prec))
    }
}

impl Sub for &Ball {
    type Output = Ball;
    fn sub(self, rhs: &Ball) -> Ball {
        self.add_impl(&rhs.negated(), self.prec.max(rhs.prec))
    }
}

impl Mul for &Ball {
    type Output = Ball;
    fn mul(self, rhs: &Ball) -> Ball {
        self.mul_impl(rhs, self.prec.max(rhs.prec))
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball::negated(self)
    }
}

impl Add for Ball {
    type Output = Ball;
    fn add(self, rhs: Ball) -> Ball {
        &self + &rhs
    }
}

impl Sub for Ball {
    type Output = Ball;
    fn sub(self, rhs: Ball) -> Ball {
        &self - &rhs
    }
}

impl Mul for Ball {
    type Output = Ball;
    fn mul(self, rhs: Ball) -> Ball {
        &self * &rhs
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball::negated(&self)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_certified())
    }
}

/// Rectangular complex ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexBall {
    pub re: Ball,
    pub im: Ball,
}

impl ComplexBall {
    pub fn new(re: Ball, im: Ball) -> Self {
        ComplexBall { re, im }
    }

    pub fn real(re: Ball) -> Self {
        ComplexBall { re, im: Ball::zero() }
    }

    pub fn zero() -> Self {
        ComplexBall::real(Ball::zero())
    }

    pub fn one() -> Self {
        ComplexBall::real(Ball::one())
    }

    pub fn with_prec(self, prec: u32) -> Self {
        ComplexBall { re: self.re.with_prec(prec), im: self.im.with_prec(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec.max(self.im.prec)
    }

    pub fn add(&self, o: &ComplexBall) -> ComplexBall {
        ComplexBall { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &ComplexBall) -> ComplexBall {
        ComplexBall { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn negated(&self) -> ComplexBall {
        ComplexBall { re: self.re.negated(), im: self.im.negated() }
    }

    pub fn conj(&self) -> ComplexBall {
        ComplexBall { re: self.re.clone(), im: self.im.negated() }
    }

    pub fn mul(&self, o: &ComplexBall) -> ComplexBall {
        if o.im.is_exact() && o.im.mid.is_zero() {
            return self.scale(&o.re);
        }
        if self.im.is_exact() && self.im.mid.is_zero() {
            return o.scale(&self.re);
        }
        let re = &(&self.re * &o.re) - &(&self.im * &o.im);
        let im = &(&self.re * &o.im) + &(&self.im * &o.re);
        ComplexBall { re, im }
    }

    pub fn sqr(&self) -> ComplexBall {
        let re = &self.re.sqr() - &self.im.sqr();
        let im = (&self.re * &self.im).mul_2exp(1);
        ComplexBall { re, im }
    }

    /// Multiplication by a real ball.
    pub fn scale(&self, r: &Ball) -> ComplexBall {
        ComplexBall { re: &self.re * r, im: &self.im * r }
    }

    pub fn mul_2exp(&self, k: i64) -> ComplexBall {
        ComplexBall { re: self.re.mul_2exp(k), im: self.im.mul_2exp(k) }
    }

    pub fn div_int(&self, k: &BigInt, prec: u32) -> ComplexBall {
        ComplexBall { re: self.re.div_int(k, prec), im: self.im.div_int(k, prec) }
    }

    /// `|z|^2`.
    pub fn norm_sqr(&self) -> Ball {
        &self.re.sqr() + &self.im.sqr()
    }

    pub fn abs(&self, prec: u32) -> Ball {
        self.norm_sqr().sqrt(prec).expect("norm is non-negative")
    }

    pub fn recip(&self, prec: u32) -> Option<ComplexBall> {
        let n = self.norm_sqr().with_prec(prec + 8);
        let inv = n.recip(prec + 8)?;
        Some(self.conj().scale(&inv).with_prec(prec))
    }

    pub fn div(&self, o: &ComplexBall, prec: u32) -> Option<ComplexBall> {
        Some(self.mul(&o.recip(prec + 8)?).with_prec(prec))
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn overlaps(&self, o: &ComplexBall) -> bool {
        self.re.overlaps(&o.re) && self.im.overlaps(&o.im)
    }

    /// Upper bound of `|z|` as `f64`.
    pub fn abs_upper_f64(&self) -> f64 {
        let a = self.re.abs_upper_f64();
        let b = self.im.abs_upper_f64();
        (a.hypot(b)) * (1.0 + 1e-15)
    }

    /// Largest radius of the two components, as an upper bound (`inf` if huge).
    pub fn rad_f64(&self) -> f64 {
        self.re.rad_f64().max(self.im.rad_f64())
    }

    pub fn rad_log2_upper(&self) -> Option<i64> {
        match (self.re.rad_log2_upper(), self.im.rad_log2_upper()) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(i64::MIN).max(b.unwrap_or(i64::MIN))),
        }
    }

    /// `exp(z)` at working precision `prec`.
    pub fn exp(&self, prec: u32) -> ComplexBall {
        let top = match (self.re.top(), self.im.top()) {
            (None, None) => return ComplexBall::one(),
            (a, b) => a.unwrap_or(i64::MIN).max(b.unwrap_or(i64::MIN)) + 1,
        };
        let t = ((prec as f64).sqrt() / 2.0).ceil() as i64 + 2;
        let s = (top + t).max(0);
        let wp = prec + s as u32 + 16;
        let y = self.clone().with_prec(wp).mul_2exp(-s);
        let mut sum = ComplexBall::one().with_prec(wp);
        let mut term = ComplexBall::one().with_prec(wp);
        let mut k: u64 = 1;
        loop {
            term = term.mul(&y).div_int(&BigInt::from(k), wp);
            sum = sum.add(&term);
            k += 1;
            if (k as i64) * t > wp as i64 + 8 {
                break;
            }
        }
        // |y| < 2^-t, tail < 2^(1 - t k) in modulus
        sum.re.add_error(&BigUint::one(), 1 - t * k as i64);
        sum.im.add_error(&BigUint::one(), 1 - t * k as i64);
        for _ in 0..s {
            sum = sum.sqr();
        }
        sum.with_prec(prec)
    }
}

impl fmt::Display for ComplexBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_exact() && self.im.mid.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({}) + ({})i", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(b: &Ball, x: f64, tol: f64) -> bool {
        (b.mid_f64() - x).abs() <= tol * x.abs().max(1.0)
    }

    #[test]
    fn pi_digits() {
        let p = pi(256);
        assert!(p.mid_decimal(40).starts_with("3.14159265358979323846264338327950288419"));
        assert!(p.rad_log2_upper().unwrap() < -240);
    }

    #[test]
    fn pi_contains_f64_pi_neighbourhood() {
        let p = pi(64);
        let (lo, hi) = p.to_f64_bounds();
        assert!(lo <= std::f64::consts::PI + 1e-15 && hi >= std::f64::consts::PI - 1e-15);
    }

    #[test]
    fn sqrt_two_squares_back() {
        let s = Ball::from_int(2).sqrt(200).unwrap();
        let sq = s.sqr();
        assert!(sq.contains_int(&BigInt::from(2)));
        assert!(sq.rad_log2_upper().unwrap() < -190);
        assert!(s.mid_decimal(30).starts_with("1.41421356237309504880168872421"));
    }

    #[test]
    fn sqrt_of_perfect_square_contains_root() {
        let s = Ball::from_int(25).sqrt(128).unwrap();
        assert!(s.contains_int(&BigInt::from(5)));
    }

    #[test]
    fn exp_and_ln_are_inverse() {
        let x = Ball::from_rational(&BigRational::new(7.into(), 3.into()), 200);
        let y = x.exp(200);
        let z = y.ln(200).unwrap();
        assert!(z.overlaps(&x));
        assert!(close(&y, (7.0f64 / 3.0).exp(), 1e-14));
    }

    #[test]
    fn exp_large_negative_argument() {
        let x = Ball::from_int(-1000);
        let y = x.exp(128);
        // e^-1000 = 5.075958897549...e-435
        let l = y.ln(128).unwrap();
        assert!(l.contains_int(&BigInt::from(-1000)));
        assert!(y.is_positive());
    }

    #[test]
    fn ln2_value() {
        let l = ln2(128);
        assert!(l.mid_decimal(30).starts_with("0.693147180559945309417232121458"));
    }

    #[test]
    fn recip_brackets_third() {
        let t = Ball::from_int(3).recip(100).unwrap();
        let back = &t * &Ball::from_int(3);
        assert!(back.contains_int(&BigInt::one()));
    }

    #[test]
    fn complex_exp_of_i_pi_is_minus_one() {
        let z = ComplexBall::new(Ball::zero(), pi(200));
        let e = z.exp(200);
        assert!(e.re.contains_int(&BigInt::from(-1)));
        assert!(e.im.contains_zero());
        assert!(e.rad_log2_upper().unwrap() < -150);
    }

    #[test]
    fn unique_integer_detection() {
        let b = Ball::from_parts(BigInt::from(7), BigUint::from(1u32), -1, 64); // 3.5 +- 0.5
        assert_eq!(b.integer_range(), (BigInt::from(3), BigInt::from(4)));
        assert_eq!(b.unique_integer(), None);
        let c = Ball::from_parts(BigInt::from(13), BigUint::from(1u32), -2, 64); // 3.25 +- .25
        assert_eq!(c.unique_integer(), Some(BigInt::from(3)));
    }

    #[test]
    fn f64_bounds_are_conservative() {
        let b = Ball::from_rational(&BigRational::new(1.into(), 10.into()), 80);
        let (lo, hi) = b.to_f64_bounds();
        assert!(lo <= 0.1 && 0.1 <= hi);
        assert!(hi - lo < 1e-15);
    }

    #[test]
    fn abs_of_straddling_ball() {
        let b = Ball::from_parts(BigInt::from(1), BigUint::from(3u32), 0, 64);
        let a = b.abs();
        assert!(a.contains_int(&BigInt::from(4)));
        assert!(a.contains_zero());
    }

    #[test]
    fn display_shows_radius() {
        let s = Ball::from_int(2).sqrt(100).unwrap();
        let txt = s.display_certified();
        assert!(txt.starts_with("1.41421356"), "{txt}");
        assert!(txt.contains("±"));
    }
}
