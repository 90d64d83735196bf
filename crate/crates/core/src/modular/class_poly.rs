use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::{j_of_form, MAX_PREC};
use crate::ball::{Ball, ComplexBall};
use crate::error::{Error, Result};
use crate::quadratic::{reduced_forms, Discriminant, ReducedForm};

/// Monic `H_Δ(X) = ∏ (X − j(τ))` over the reduced forms of discriminant `Δ`;
/// `coefficients[i]` is the coefficient of `Xⁱ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassPolynomial {
    pub discriminant: Discriminant,
    pub coefficients: Vec<BigInt>,
    /// Working precision at which every coefficient was certified.
    pub precision_bits: u32,
}

impl ClassPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn evaluate(&self, x: &BigInt) -> BigInt {
        self.coefficients.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn evaluate_ball(&self, z: &ComplexBall) -> ComplexBall {
        self.coefficients.iter().rev().fold(ComplexBall::zero(), |acc, c| {
            let mut r = acc.mul(z);
            r.re = &r.re + &Ball::from_int(c.clone());
            r
        })
    }
}

impl fmt::Display for ClassPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || mag != BigInt::from(1);
            match (show_coeff, i) {
                (true, 0) => write!(f, "{mag}")?,
                (true, 1) => write!(f, "{mag}*X")?,
                (true, _) => write!(f, "{mag}*X^{i}")?,
                (false, 1) => write!(f, "X")?,
                (false, _) => write!(f, "X^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Starting precision: bits of the largest coefficient, estimated from
/// `|j(τ)| ≈ e^(π√|Δ|/a)`, plus a margin.
fn start_precision(disc: &Discriminant) -> u32 {
    let root = (disc.abs() as f64).sqrt();
    let bits: f64 = reduced_forms(disc)
        .iter()
        .map(|f| (std::f64::consts::PI * root / f.a as f64 / std::f64::consts::LN_2).max(0.0) + 1.0)
        .sum();
    (bits.ceil() as u32 + 64).max(128)
}

pub fn class_polynomial(disc: &Discriminant) -> Result<ClassPolynomial> {
    class_polynomial_from(disc, start_precision(disc))
}

/// Certifies `H_Δ` starting at `start_prec` bits and doubling until every coefficient
/// ball has radius below 1/2.
pub fn class_polynomial_from(disc: &Discriminant, start_prec: u32) -> Result<ClassPolynomial> {
    let forms = reduced_forms(disc);
    let mut prec = start_prec.max(64);
    loop {
        match attempt(&forms, prec)? {
            Some(coefficients) => {
                return Ok(ClassPolynomial { discriminant: *disc, coefficients, precision_bits: prec });
            }
            None if prec >= MAX_PREC => return Err(Error::PrecisionExhausted { bits: prec }),
            None => prec = (prec * 2).min(MAX_PREC),
        }
    }
}

/// `Ok(None)` asks for more precision.
fn attempt(forms: &[ReducedForm], prec: u32) -> Result<Option<Vec<BigInt>>> {
    let roots: Vec<ComplexBall> = forms.par_iter().map(|f| j_of_form(f, prec)).collect::<Result<_>>()?;
    let mut poly = vec![ComplexBall::one()];
    for r in &roots {
        let mut next = vec![ComplexBall::zero(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(&c.mul(r));
        }
        poly = next;
    }
    let half = Ball::from_dyadic(BigInt::from(1), -1);
    let mut out = Vec::with_capacity(poly.len());
    for (index, c) in poly.iter().enumerate() {
        if !c.re.rad_ball().certainly_lt(&half) || !c.im.rad_ball().certainly_lt(&half) {
            return Ok(None);
        }
        let nonintegral = || Error::NonIntegralCoefficient { index, ball: c.to_string() };
        if !c.im.contains_zero() {
            return Err(nonintegral());
        }
        let n = c.re.unique_integer().ok_or_else(nonintegral)?;
        out.push(n);
    }
    debug_assert_eq!(out.last(), Some(&BigInt::from(1)), "class polynomials are monic");
    Ok(Some(out))
}
