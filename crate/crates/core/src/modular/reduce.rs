//! Reduction of `τ` into the fundamental domain
//! `{−1/2 ≤ Re τ < 1/2, |τ| > 1} ∪ {|τ| = 1, Re τ ≤ 0}`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ball::{Ball, ComplexBall};
use crate::error::{Error, Result};
use crate::quadratic::ReducedForm;

const MAX_STEPS: usize = 100_000;

/// `[[a, b], [c, d]]` with `ad − bc = 1`, acting by `τ ↦ (aτ + b)/(cτ + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sl2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2 {
    pub const IDENTITY: Sl2 = Sl2 { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Sl2 = Sl2 { a: 0, b: -1, c: 1, d: 0 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
            return Err(Error::InvalidArgument(format!("[[{a},{b}],[{c},{d}]] has determinant ≠ 1")));
        }
        Ok(Sl2 { a, b, c, d })
    }

    pub fn translation(n: i64) -> Self {
        Sl2 { a: 1, b: n, c: 0, d: 1 }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, o: &Sl2) -> Sl2 {
        Sl2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, tau: &ComplexBall, prec: u32) -> Option<ComplexBall> {
        let num = tau.scale(&Ball::from_int(self.a)).add(&ComplexBall::real(Ball::from_int(self.b)));
        let den = tau.scale(&Ball::from_int(self.c)).add(&ComplexBall::real(Ball::from_int(self.d)));
        num.div(&den, prec)
    }

    pub fn is_identity(&self) -> bool {
        *self == Sl2::IDENTITY
    }
}

impl fmt::Display for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

fn half() -> Ball {
    Ball::from_dyadic(BigInt::from(1), -1)
}

/// `(γτ, γ)` with `γτ` in the fundamental domain. Fails with `Undecidable` when the
/// ball straddles a boundary of the domain at its current radius.
pub fn reduce_to_fundamental(tau: &ComplexBall) -> Result<(ComplexBall, Sl2)> {
    if !tau.im.is_positive() {
        return Err(Error::InvalidArgument("τ must lie in the upper half plane".into()));
    }
    let prec = tau.prec().max(64);
    let mut t = tau.clone();
    let mut g = Sl2::IDENTITY;
    let one = Ball::one();
    let (h, mh) = (half(), half().negated());
    for _ in 0..MAX_STEPS {
        let n = (&t.re + &h).floor_mid();
        if n != BigInt::from(0) {
            let ni = n.to_i64().ok_or_else(|| Error::InvalidArgument("translation out of range".into()))?;
            t.re = &t.re - &Ball::from_int(n);
            g = Sl2::translation(-ni).compose(&g);
        }
        if !(mh.certainly_le(&t.re) && t.re.certainly_lt(&h)) {
            return Err(Error::Undecidable(format!("Re τ = {} meets the strip boundary", t.re)));
        }
        let norm = t.norm_sqr();
        if norm.certainly_lt(&one) {
            t = t.recip(prec).ok_or_else(|| Error::Undecidable("|τ| indistinguishable from 0".into()))?.negated();
            g = Sl2::S.compose(&g);
            continue;
        }
        if one.certainly_lt(&norm) {
            return Ok((t, g));
        }
        if norm.is_exact() && norm.contains_int(&BigInt::from(1)) {
            if t.re.certainly_le(&Ball::zero()) {
                return Ok((t, g));
            }
            if t.re.is_positive() {
                // on the arc −1/τ = −conj(τ)
                t = ComplexBall::new(t.re.negated(), t.im.clone());
                return Ok((t, Sl2::S.compose(&g)));
            }
        }
        return Err(Error::Undecidable(format!("|τ|² = {norm} meets the unit circle")));
    }
    Err(Error::Undecidable("reduction did not terminate".into()))
}

/// Exact Gauss reduction of a positive definite form; returns the reduced form and
/// `γ` with `τ(reduced) = γ·τ(input)`.
pub fn reduce_form(a: i64, b: i64, c: i64) -> Result<(ReducedForm, Sl2)> {
    let disc = b as i128 * b as i128 - 4 * a as i128 * c as i128;
    if a <= 0 || disc >= 0 {
        return Err(Error::InvalidArgument(format!("({a},{b},{c}) is not positive definite")));
    }
    let (mut a, mut b, mut c) = (a as i128, b as i128, c as i128);
    let mut g = Sl2::IDENTITY;
    for _ in 0..MAX_STEPS {
        // normalize −a < b ≤ a via τ ↦ τ + k, which sends b ↦ b − 2ak
        if !(-a < b && b <= a) {
            let k = (b + a - 1).div_euclid(2 * a);
            let nb = b - 2 * a * k;
            c = c - b * k + a * k * k;
            b = nb;
            g = Sl2::translation(k as i64).compose(&g);
            continue;
        }
        if a > c || (a == c && b < 0) {
            // τ ↦ −1/τ swaps a and c and negates b
            std::mem::swap(&mut a, &mut c);
            b = -b;
            g = Sl2::S.compose(&g);
            continue;
        }
        let f = ReducedForm { a: a as i64, b: b as i64, c: c as i64 };
        return Ok((f, g));
    }
    Err(Error::Undecidable("form reduction did not terminate".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::tau_ball;

    fn exact(re: f64, im: f64) -> ComplexBall {
        ComplexBall::new(Ball::from_f64(re), Ball::from_f64(im))
    }

    #[test]
    fn translation_example() {
        let (t, g) = reduce_to_fundamental(&exact(5.0, 1.0)).unwrap();
        assert_eq!(t, exact(0.0, 1.0));
        assert_eq!(g, Sl2::translation(-5));
    }

    #[test]
    fn inversion_example() {
        let (t, g) = reduce_to_fundamental(&exact(0.0, 0.25)).unwrap();
        assert!(t.im.contains_int(&BigInt::from(4)) && t.re.contains_zero());
        assert_eq!(g, Sl2::S);
        assert!(t.im.mid_f64() >= 3f64.sqrt() / 2.0);
    }

    #[test]
    fn i_is_fixed() {
        let (t, g) = reduce_to_fundamental(&exact(0.0, 1.0)).unwrap();
        assert_eq!(t, exact(0.0, 1.0));
        assert!(g.is_identity());
    }

    #[test]
    fn boundary_conventions() {
        let (t, g) = reduce_to_fundamental(&exact(0.5, 2.0)).unwrap();
        assert_eq!(t, exact(-0.5, 2.0));
        assert_eq!(g, Sl2::translation(-1));
        let (t, _) = reduce_to_fundamental(&exact(-0.5, 2.0)).unwrap();
        assert_eq!(t, exact(-0.5, 2.0));
        let (t, g) = reduce_to_fundamental(&exact(0.7, 0.2)).unwrap();
        assert!((t.re.mid_f64() - 4.0 / 13.0).abs() < 1e-12 && (t.im.mid_f64() - 20.0 / 13.0).abs() < 1e-12);
        assert_eq!(g, Sl2 { a: -2, b: 1, c: 1, d: -1 });
        // a ball around an arc point cannot be placed on either side of the circle
        let mut re = Ball::from_f64(0.28);
        re.add_error(&num_bigint::BigUint::from(1u32), -30);
        let tau = ComplexBall::new(re, Ball::from_f64(0.96));
        assert!(matches!(reduce_to_fundamental(&tau), Err(Error::Undecidable(_))));
    }

    #[test]
    fn straddling_ball_is_undecidable() {
        let mut re = Ball::from_f64(0.5);
        re.add_error(&num_bigint::BigUint::from(1u32), -40);
        let tau = ComplexBall::new(re, Ball::from_f64(2.0));
        assert!(matches!(reduce_to_fundamental(&tau), Err(Error::Undecidable(_))));
    }

    #[test]
    fn transform_maps_input_to_output() {
        let tau = exact(3.3, 0.07);
        let (t, g) = reduce_to_fundamental(&tau).unwrap();
        let back = g.apply(&tau, 128).unwrap();
        assert!(back.overlaps(&t));
        assert!(t.im.mid_f64() >= 3f64.sqrt() / 2.0 - 1e-12);
        assert_eq!(g.a * g.d - g.b * g.c, 1);
    }

    #[test]
    fn form_reduction_matches_tau_reduction() {
        let (f, g) = reduce_form(3, 7, 5).unwrap();
        assert_eq!(f.discriminant(), 49 - 60);
        assert!(f.is_reduced());
        // τ of (3,7,5) is (−7 + i√11)/6
        let tau = ComplexBall::new(
            Ball::from_rational(&num_rational::BigRational::new((-7).into(), 6.into()), 128),
            Ball::from_int(11).sqrt(128).unwrap().div_int(&BigInt::from(6), 128),
        );
        let image = g.apply(&tau, 128).unwrap();
        assert!(image.overlaps(&tau_ball(&f, 128)));
        assert!(reduce_form(1, 0, -1).is_err());
    }
}
