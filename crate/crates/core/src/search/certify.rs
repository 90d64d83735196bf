//! Deciding whether `Σ aᵢ·j(τᵢ) + b` vanishes.
//!
//! A cheap interval pass settles almost every nonzero case. Otherwise the sum is
//! evaluated in ball arithmetic; it is certified zero once its modulus is below the
//! Liouville gap `H^(−D)` for a height bound `H` and degree bound `D` of the sum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::moduli::{ModulusEntry, ModulusId, BASE_PREC};
use crate::ball::{ln2, Ball, ComplexBall};
use crate::error::{Error, Result};
use crate::exact_linear::{primitive_integer_vector, ExactRational};
use crate::heights::{liouville_gap_from_log, HEIGHT_PREC};
use crate::interval::{ComplexInterval, Interval};
use crate::modular::MAX_PREC;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroTest {
    Zero,
    Nonzero,
    /// Not decided within the precision ceiling.
    NeedsPrecision,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub outcome: ZeroTest,
    /// Upper bound on `|S|` at the last evaluation.
    pub residual: f64,
    pub precision_bits: u32,
    pub degree_bound: u64,
    /// Upper bound of `ln H(S)`.
    pub log_height_bound: f64,
}

impl Certification {
    fn quick(outcome: ZeroTest, residual: f64) -> Self {
        Certification { outcome, residual, precision_bits: 0, degree_bound: 1, log_height_bound: 0.0 }
    }
}

fn int_interval(x: &BigInt) -> Interval {
    let (lo, hi) = Ball::from_int(x.clone()).to_f64_bounds();
    Interval::new(lo, hi)
}

/// `Σ aᵢ·zᵢ + b` scaled to coprime integers, with cached `f64` enclosures of the
/// coefficients for the interval pass.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerForm {
    coefficients: Vec<BigInt>,
    constant: BigInt,
    coefficient_intervals: Vec<Interval>,
    constant_interval: Interval,
}

impl IntegerForm {
    /// `None` when every coefficient and the constant vanish.
    pub fn new(a: &[ExactRational], b: &ExactRational) -> Option<Self> {
        let mut all = a.to_vec();
        all.push(b.clone());
        let mut ints = primitive_integer_vector(&all)?;
        let constant = ints.pop().expect("constant");
        Some(Self::from_integers(ints, constant))
    }

    pub fn from_integers(coefficients: Vec<BigInt>, constant: BigInt) -> Self {
        let coefficient_intervals = coefficients.iter().map(int_interval).collect();
        let constant_interval = int_interval(&constant);
        IntegerForm { coefficients, constant, coefficient_intervals, constant_interval }
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn constant(&self) -> &BigInt {
        &self.constant
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficient_interval(&self, i: usize) -> Interval {
        self.coefficient_intervals[i]
    }

    pub fn constant_interval(&self) -> Interval {
        self.constant_interval
    }

    /// Interval enclosure of the form at the given moduli.
    pub fn interval(&self, moduli: &[&ModulusEntry]) -> ComplexInterval {
        self.coefficient_intervals
            .iter()
            .zip(moduli)
            .fold(ComplexInterval::real(self.constant_interval), |acc, (c, m)| acc.add(m.interval.scale(*c)))
    }

    /// Ball enclosure with every modulus at absolute accuracy about `2^(−prec)`.
    pub fn evaluate(&self, moduli: &[&ModulusEntry], prec: u32) -> Result<ComplexBall> {
        let mut s = ComplexBall::real(Ball::from_int(self.constant.clone()));
        for (c, m) in self.coefficients.iter().zip(moduli) {
            if !c.is_zero() {
                s = s.add(&m.value_at(prec)?.scale(&Ball::from_int(c.clone())));
            }
        }
        Ok(s)
    }

    /// Certified zero test at the given moduli, escalating precision up to `max_prec`.
    pub fn certify(&self, moduli: &[&ModulusEntry], max_prec: u32) -> Result<Certification> {
        if moduli.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: moduli.len() });
        }
        let iv = self.interval(moduli);
        if !iv.contains_zero() {
            return Ok(Certification::quick(ZeroTest::Nonzero, iv.abs_bounds().1));
        }
        let mut merged: BTreeMap<ModulusId, (BigInt, &ModulusEntry)> = BTreeMap::new();
        for (c, m) in self.coefficients.iter().zip(moduli) {
            let slot = merged.entry(m.id).or_insert_with(|| (BigInt::zero(), *m));
            slot.0 += c;
        }
        let terms: Vec<(BigInt, &ModulusEntry)> = merged.into_values().filter(|(c, _)| !c.is_zero()).collect();
        if terms.is_empty() {
            let outcome = if self.constant.is_zero() { ZeroTest::Zero } else { ZeroTest::Nonzero };
            return Ok(Certification::quick(outcome, self.constant_interval.abs_hi()));
        }
        MergedSum { terms, constant: &self.constant }.certify(max_prec)
    }
}

/// The sum after merging equal moduli; every coefficient is nonzero.
struct MergedSum<'a> {
    terms: Vec<(BigInt, &'a ModulusEntry)>,
    constant: &'a BigInt,
}

impl MergedSum<'_> {
    fn ball(&self, prec: u32) -> Result<ComplexBall> {
        let mut s = ComplexBall::real(Ball::from_int(self.constant.clone()));
        for (c, m) in &self.terms {
            s = s.add(&m.value_at(prec)?.scale(&Ball::from_int(c.clone())));
        }
        Ok(s)
    }

    /// `∏_Δ min(h^m, 2h)` where `m` moduli of discriminant `Δ` occur: the moduli of one
    /// discriminant all lie in a ring class field of degree `2h` over ℚ.
    fn degree_bound(&self) -> u64 {
        let mut per_disc: BTreeMap<i64, (u64, u32)> = BTreeMap::new();
        for (_, m) in &self.terms {
            let e = per_disc.entry(m.id.discriminant).or_insert((m.class_number, 0));
            e.1 += 1;
        }
        per_disc.values().fold(1u64, |acc, &(h, k)| {
            let own = h.checked_pow(k).map_or(2 * h, |p| p.min(2 * h));
            acc.saturating_mul(own)
        })
    }

    /// `ln H(S) ≤ (t−1)·ln 2 + Σ ln|cᵢ| + Σ ln H(jᵢ) + ln|b|` over `t` nonzero terms.
    fn log_height_bound(&self) -> Ball {
        let p = HEIGHT_PREC;
        let ln_abs = |x: &BigInt| Ball::from_int(x.abs()).ln(p).expect("nonzero");
        let mut t = self.terms.len();
        let mut acc = Ball::zero();
        if !self.constant.is_zero() {
            t += 1;
            acc = ln_abs(self.constant);
        }
        for (c, m) in &self.terms {
            acc = &(&acc + &ln_abs(c)) + &m.log_height;
        }
        if t > 1 {
            acc = &acc + &ln2(p).mul_int(&BigInt::from(t as u64 - 1));
        }
        acc
    }

    fn certify(&self, max_prec: u32) -> Result<Certification> {
        let degree_bound = self.degree_bound();
        let log_h = self.log_height_bound();
        let log_h_up = log_h.upper().abs_upper_f64();
        let max_prec = max_prec.min(MAX_PREC);
        let coeff_bits = self.terms.iter().map(|(c, _)| c.bits()).max().unwrap_or(0) as u32 + self.terms.len() as u32;
        // −log₂ of the gap, when it is reachable at all
        let gap_bits = degree_bound as f64 * log_h_up / std::f64::consts::LN_2;
        let reachable = gap_bits + (coeff_bits as f64) + 16.0 < max_prec as f64;
        let gap = reachable.then(|| liouville_gap_from_log(&log_h, degree_bound).lower());
        let needed = if reachable { gap_bits.ceil() as u32 + coeff_bits + 16 } else { max_prec };

        let mut prec = (BASE_PREC + coeff_bits).min(max_prec);
        loop {
            let s = self.ball(prec)?;
            let residual = s.abs_upper_f64();
            let done = |outcome| Certification { outcome, residual, precision_bits: prec, degree_bound, log_height_bound: log_h_up };
            if !s.re.contains_zero() || !s.im.contains_zero() {
                return Ok(done(ZeroTest::Nonzero));
            }
            if let Some(eps) = &gap {
                let modulus = &s.re.abs() + &s.im.abs();
                if modulus.certainly_lt(eps) {
                    return Ok(done(ZeroTest::Zero));
                }
            }
            if prec >= max_prec {
                return Ok(done(ZeroTest::NeedsPrecision));
            }
            prec = needed.max(prec.saturating_mul(2)).min(max_prec);
        }
    }
}

/// Certified zero test for `Σ aᵢ·jᵢ + b` with precision escalation up to `max_prec`.
pub fn certify_zero(a: &[ExactRational], b: &ExactRational, moduli: &[&ModulusEntry], max_prec: u32) -> Result<Certification> {
    if a.len() != moduli.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: moduli.len() });
    }
    match IntegerForm::new(a, b) {
        None => Ok(Certification::quick(ZeroTest::Zero, 0.0)),
        Some(form) => form.certify(moduli, max_prec),
    }
}
