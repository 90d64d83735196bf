//! Certified evaluation of Klein's `j` at CM points, reduction to the fundamental
//! domain, Hilbert class polynomials and the archimedean size estimates for
//! singular moduli.

mod cache;
mod class_poly;
pub mod coefficients;
mod reduce;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use crate::ball::{pi, Ball, ComplexBall};
use crate::error::{Error, Result};
use crate::quadratic::{Discriminant, ReducedForm};

pub use cache::{ClassPolynomialCache, CACHE_DIR_ENV, CACHE_FORMAT_VERSION};
pub use class_poly::{class_polynomial, class_polynomial_from, ClassPolynomial};
pub use coefficients::j_coefficients;
pub use reduce::{reduce_form, reduce_to_fundamental, Sl2};

/// Precision ceiling for every escalation loop, in bits.
pub const MAX_PREC: u32 = 1 << 16;

/// Default absolute radius goal for a singular modulus.
pub const DEFAULT_TARGET_RADIUS: f64 = 1e-20;

/// `√3/2`, the smallest imaginary part on the fundamental domain, rounded down.
const SQRT3_HALF_LOWER: f64 = 0.866_025_403_784_438_5;

/// A CM point of the fundamental domain, `τ = (−b + i√|Δ|)/(2a)` for a primitive
/// reduced form `(a, b, c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMPeriod {
    form: ReducedForm,
    discriminant: Discriminant,
    tau: ComplexBall,
}

impl CMPeriod {
    pub fn new(form: ReducedForm) -> Result<Self> {
        if !form.is_reduced() || !form.is_primitive() {
            return Err(Error::InvalidArgument(format!("{form} is not a primitive reduced form")));
        }
        let discriminant = Discriminant::new(form.discriminant())?;
        let tau = tau_ball(&form, 128);
        Ok(CMPeriod { form, discriminant, tau })
    }

    pub fn form(&self) -> &ReducedForm {
        &self.form
    }

    pub fn discriminant(&self) -> &Discriminant {
        &self.discriminant
    }

    /// `τ` at 128 bits.
    pub fn tau(&self) -> &ComplexBall {
        &self.tau
    }

    pub fn tau_at(&self, prec: u32) -> ComplexBall {
        tau_ball(&self.form, prec)
    }

    /// `2π·Im τ = π√|Δ|/a` as `f64`; `e` to this power approximates `|j(τ)|`.
    pub fn log_size(&self) -> f64 {
        std::f64::consts::PI * (self.discriminant.abs() as f64).sqrt() / self.form.a as f64
    }
}

/// `τ` of a form as a complex ball at `prec` bits.
pub fn tau_ball(form: &ReducedForm, prec: u32) -> ComplexBall {
    let two_a = BigInt::from(2 * form.a);
    let re = Ball::from_rational(&BigRational::new(BigInt::from(-form.b), two_a.clone()), prec);
    let d = form.discriminant().unsigned_abs();
    let im = Ball::from_int(d).sqrt(prec).expect("positive").div_int(&two_a, prec);
    ComplexBall::new(re, im)
}

/// `τ_Δ = (−b_Δ + i√|Δ|)/2`, the period of the principal form.
pub fn tau_delta(disc: &Discriminant) -> CMPeriod {
    let b = disc.value().rem_euclid(2);
    let c = (b * b - disc.value()) / 4;
    CMPeriod::new(ReducedForm { a: 1, b, c }).expect("principal form is reduced")
}

/// A certified enclosure of `j(τ)` at a CM period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularModulus {
    pub period: CMPeriod,
    pub value: ComplexBall,
    pub precision_bits: u32,
}

impl fmt::Display for SingularModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{} = {}", self.period.form(), self.value)
    }
}

/// `ln` of the truncation tail `Σ_{k>K} e^(4π√k)|q|^k`, with one nat of slack, or
/// `None` while the terms are not yet geometrically decreasing.
fn tail_log(k_max: u64, log_q: f64) -> Option<f64> {
    let m = (k_max + 1) as f64;
    let log_rho = 2.0 * std::f64::consts::PI / m.sqrt() + log_q;
    if log_rho >= -1e-3 {
        return None;
    }
    let rho = log_rho.exp();
    Some(coefficients::coefficient_log_bound(k_max + 1) + m * log_q - (-rho).ln_1p() + 1.0)
}

/// Truncation order and `ln` of the tail bound achieving absolute error `2^(−prec)`.
fn truncation(log_q: f64, prec: u32) -> (u64, f64) {
    let goal = -(prec as f64 + 2.0) * std::f64::consts::LN_2;
    let mut k = 1u64;
    loop {
        if let Some(t) = tail_log(k, log_q) {
            if t <= goal {
                return (k, t);
            }
        }
        k += 1;
    }
}

/// `j(τ)` for `τ` in the fundamental domain, with the truncated expansion error
/// bounded by `2^(−prec)` (the input radius of `τ` propagates on top of that).
pub fn j_of_tau(tau: &ComplexBall, prec: u32) -> Result<ComplexBall> {
    let (im_lo, im_hi) = tau.im.to_f64_bounds();
    // |q| ≤ e^(−π√3) on the fundamental domain
    if !(im_lo >= SQRT3_HALF_LOWER * (1.0 - 1e-9)) {
        return Err(Error::InvalidArgument(format!("Im τ ≥ {im_lo} is below √3/2; τ is not reduced")));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let log_q = -two_pi * im_lo * (1.0 - 1e-14);
    let (k_max, tail) = truncation(log_q, prec);
    let extra = (two_pi * im_hi / std::f64::consts::LN_2).ceil() as u32 + 24 + 64 - (k_max.leading_zeros());
    let wp = prec + extra;
    let coeffs = j_coefficients(k_max as usize);

    let two_pi_ball = pi(wp).mul_2exp(1);
    let tau_w = tau.clone().with_prec(wp);
    // 2πiτ = 2π(−Im τ + i Re τ)
    let arg = ComplexBall::new(tau_w.im.negated(), tau_w.re.clone()).scale(&two_pi_ball);
    let q = arg.exp(wp);
    let q_inv = arg.negated().exp(wp);

    let mut acc = ComplexBall::real(Ball::from_int(coeffs[k_max as usize + 1].clone()));
    for k in (0..k_max as usize).rev() {
        acc = acc.mul(&q);
        acc.re = &acc.re + &Ball::from_int(coeffs[k + 1].clone());
    }
    let mut j = acc.add(&q_inv);
    let e = (tail / std::f64::consts::LN_2).ceil() as i64 + 1;
    j.re.add_error(&BigUint::from(1u32), e);
    j.im.add_error(&BigUint::from(1u32), e);
    Ok(j.with_prec(wp))
}

/// `j` at a reduced form, at absolute accuracy about `2^(−prec)`.
pub fn j_of_form(form: &ReducedForm, prec: u32) -> Result<ComplexBall> {
    let log_size = std::f64::consts::PI * (form.discriminant().unsigned_abs() as f64).sqrt() / form.a as f64;
    let wp = prec + (log_size / std::f64::consts::LN_2).ceil() as u32 + 32;
    j_of_tau(&tau_ball(form, wp), prec)
}

fn prec_for_radius(target_radius: f64) -> u32 {
    ((-target_radius.log2()).ceil().max(0.0) as u32 + 16).max(64)
}

/// Certified `j(τ)` with radius at most `target_radius`, escalating precision.
pub fn j_eval(period: &CMPeriod, target_radius: f64) -> Result<SingularModulus> {
    if !(target_radius > 0.0) {
        return Err(Error::InvalidArgument("target radius must be positive".into()));
    }
    let mut prec = prec_for_radius(target_radius);
    loop {
        let value = j_of_form(period.form(), prec)?;
        if value.rad_f64() <= target_radius {
            return Ok(SingularModulus { period: period.clone(), value, precision_bits: prec });
        }
        if prec >= MAX_PREC {
            return Err(Error::PrecisionExhausted { bits: prec });
        }
        prec = (prec * 2).min(MAX_PREC);
    }
}

/// Same as [`j_eval`] for an arbitrary ball `τ` in the fundamental domain. Fails
/// once extra precision stops shrinking the radius (the radius of `τ` dominates).
pub fn j_eval_tau(tau: &ComplexBall, target_radius: f64) -> Result<ComplexBall> {
    let mut prec = prec_for_radius(target_radius);
    let mut last = f64::INFINITY;
    loop {
        let value = j_of_tau(tau, prec)?;
        let r = value.rad_f64();
        if r <= target_radius {
            return Ok(value);
        }
        if prec >= MAX_PREC || r > 0.5 * last {
            return Err(Error::PrecisionExhausted { bits: prec });
        }
        last = r;
        prec = (prec * 2).min(MAX_PREC);
    }
}

/// `11·e^(π√|Δ|)`, bounding both the house and the height of any singular modulus
/// of discriminant `Δ`.
pub fn j_house_bound(disc: &Discriminant) -> Ball {
    let p = 128;
    let root = Ball::from_int(disc.abs()).sqrt(p).expect("positive");
    (&pi(p) * &root).exp(p).mul_int(&BigInt::from(11))
}

pub fn j_height_bound(disc: &Discriminant) -> Ball {
    j_house_bound(disc)
}

/// `ln(11·e^(π√|Δ|)) = ln 11 + π√|Δ|`.
pub fn log_j_height_bound(disc: &Discriminant) -> Ball {
    let p = 128;
    let root = Ball::from_int(disc.abs()).sqrt(p).expect("positive");
    &(&pi(p) * &root) + &Ball::from_int(11).ln(p).expect("positive")
}

/// Certified check of `| |j(τ)| − e^(2π Im τ) | ≤ 2079`.
pub fn jestimate_holds(tau: &ComplexBall, j: &ComplexBall) -> bool {
    let p = j.prec().max(tau.prec()).max(64);
    let size = (&pi(p).mul_2exp(1) * &tau.im).exp(p);
    let diff = &j.abs(p) - &size;
    diff.abs().certainly_le(&Ball::from_int(2079))
}

/// Upper bound of `| |j(τ)| − e^(2π Im τ) |` as `f64`, for reporting.
pub fn jestimate_gap(tau: &ComplexBall, j: &ComplexBall) -> f64 {
    let p = j.prec().max(tau.prec()).max(64);
    let size = (&pi(p).mul_2exp(1) * &tau.im).exp(p);
    (&j.abs(p) - &size).abs_upper_f64()
}

/// `j(τ)` rounded to the nearest integer when `τ` has class number one and the ball
/// pins it down.
pub fn rational_singular_modulus(m: &SingularModulus) -> Option<BigInt> {
    if m.value.im.contains_zero() && m.value.re.rad_f64() < 0.5 {
        m.value.re.unique_integer()
    } else {
        None
    }
}

/// `(lo, hi)` enclosure of `e^(2π Im τ) = e^(π√|Δ|/a)` in `f64`.
pub fn size_bounds(form: &ReducedForm) -> (f64, f64) {
    let s = std::f64::consts::PI * (form.discriminant().unsigned_abs() as f64).sqrt() / form.a as f64;
    let e = s.exp();
    (e * (1.0 - 1e-12), e * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::{reduced_forms, reduced_forms_up_to};

    fn disc(v: i64) -> Discriminant {
        Discriminant::new(v).unwrap()
    }

    #[test]
    fn tau_delta_examples() {
        let t = tau_delta(&disc(-4));
        assert_eq!(*t.form(), ReducedForm { a: 1, b: 0, c: 1 });
        assert!(t.tau().re.contains_int(&BigInt::from(0)) && t.tau().re.is_exact());
        assert!(t.tau().im.contains_int(&BigInt::from(1)));
        let t = tau_delta(&disc(-3));
        assert_eq!(*t.form(), ReducedForm { a: 1, b: 1, c: 1 });
        assert!(t.tau().re.contains(&Ball::from_f64(-0.5)));
        assert!((t.tau().im.mid_f64() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let t = tau_delta(&disc(-23));
        assert_eq!(*t.form(), ReducedForm { a: 1, b: 1, c: 6 });
        assert!((t.tau().im.mid_f64() - 23f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn j_of_i_is_1728() {
        let m = j_eval(&tau_delta(&disc(-4)), 1e-10).unwrap();
        assert!(m.value.re.contains_int(&BigInt::from(1728)));
        assert!(m.value.im.contains_int(&BigInt::from(0)));
        assert!(m.value.rad_f64() < 1e-10);
        assert_eq!(rational_singular_modulus(&m), Some(BigInt::from(1728)));
    }

    #[test]
    fn j_of_rho_is_zero() {
        let m = j_eval(&tau_delta(&disc(-3)), 1e-20).unwrap();
        assert!(m.value.contains_zero());
        assert!(m.value.rad_f64() <= 1e-20);
    }

    #[test]
    fn class_number_one_values() {
        let known: [(i64, i64); 6] =
            [(-7, -3375), (-8, 8000), (-11, -32768), (-12, 54000), (-16, 287496), (-28, 16581375)];
        for (d, j) in known {
            let m = j_eval(&tau_delta(&disc(d)), 1e-30).unwrap();
            assert_eq!(rational_singular_modulus(&m), Some(BigInt::from(j)), "Δ={d}");
        }
        let m = j_eval(&tau_delta(&disc(-163)), 1e-30).unwrap();
        let expected: BigInt = -(BigInt::from(640320u64).pow(3));
        assert_eq!(rational_singular_modulus(&m), Some(expected));
    }

    #[test]
    fn jestimate_on_cm_points() {
        for forms in reduced_forms_up_to(200).values() {
            for f in forms {
                let p = CMPeriod::new(*f).unwrap();
                let m = j_eval(&p, 1e-6).unwrap();
                assert!(jestimate_holds(&p.tau_at(m.precision_bits + 64), &m.value), "{f}");
            }
        }
    }

    #[test]
    fn house_bound_examples() {
        let b = j_house_bound(&disc(-4));
        assert!((b.mid_f64() - 11.0 * (2.0 * std::f64::consts::PI).exp()).abs() < 1e-9);
        assert!((b.mid_f64() - 5890.41).abs() < 0.01);
        assert!(Ball::from_int(1728).certainly_le(&b));
        let b = j_house_bound(&disc(-3));
        assert!((b.mid_f64() - 2538.41).abs() < 0.01);
        assert!(Ball::one().certainly_le(&b));
        let l = log_j_height_bound(&disc(-23));
        assert!((l.mid_f64() - (11f64.ln() + std::f64::consts::PI * 23f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn conjugate_forms_give_conjugate_values() {
        let fs = reduced_forms(&disc(-23));
        let a = j_of_form(&fs[1], 128).unwrap();
        let b = j_of_form(&fs[2], 128).unwrap();
        assert!(a.overlaps(&b.conj()));
    }

    #[test]
    fn rejects_unreduced_tau() {
        let tau = ComplexBall::new(Ball::zero(), Ball::from_f64(0.5));
        assert!(j_of_tau(&tau, 64).is_err());
    }

    #[test]
    fn larger_precision_shrinks_radius() {
        let p = CMPeriod::new(ReducedForm { a: 2, b: 1, c: 3 }).unwrap();
        let lo = j_eval(&p, 1e-10).unwrap();
        let hi = j_eval(&p, 1e-60).unwrap();
        assert!(hi.value.rad_f64() <= 1e-60);
        assert!(lo.value.overlaps(&hi.value));
    }
}
