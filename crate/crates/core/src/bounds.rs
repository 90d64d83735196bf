//! Explicit constants bounding the discriminants of special points on a linear
//! subvariety, and the intermediate constants for single linear equations in
//! distinct singular moduli.
//!
//! Every constant here is an integer combination of `log` terms, so the integer
//! parts are computed exactly and only the logarithms carry a radius.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Pow;

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::exact_linear::LinearSubvariety;
use crate::heights::subspace_height;

/// Working precision for the constants; grown with the size of the result.
const BOUND_PREC: u32 = 192;

fn int(n: u64) -> BigInt {
    BigInt::from(n)
}

fn pow_u(base: u64, e: u64) -> BigInt {
    Pow::pow(int(base), e)
}

/// `480·k²·64^k·deg³`, the coefficient of `log H` shared by the theorem and the
/// general single-equation constant.
pub fn log_height_coefficient(k: u64, degree: u64) -> BigInt {
    int(480) * int(k * k) * pow_u(64, k) * pow_u(degree, 3)
}

/// `lead·10¹⁰·21000^k·(k+1)^(4k+6)·deg⁴` where `lead·10¹⁰` is the leading decimal
/// (`14` for the theorem, `13` for the single-equation constant).
fn additive_constant(lead: u64, k: u64, degree: u64) -> BigInt {
    int(lead) * pow_u(10, 10) * pow_u(21_000, k) * pow_u(k + 1, 4 * k + 6) * pow_u(degree, 4)
}

/// `(c₁, c₂)` with `c₁ = 480n²64ⁿdeg³` and `c₂ = 1.4·10¹¹·(2.1·10⁴)ⁿ·(n+1)^(4n+6)·deg⁴`,
/// both exact integers.
pub fn theorem_constants(n: u64, degree: u64) -> Result<(BigInt, BigInt)> {
    check_positive("n", n)?;
    check_positive("degree", degree)?;
    Ok((log_height_coefficient(n, degree), additive_constant(14, n, degree)))
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn prec_for(x: &BigInt) -> u32 {
    BOUND_PREC + 2 * x.bits() as u32
}

/// Ball for `coeff·λ + constant`, with `λ` a log-height ball.
fn linear_in_log(coeff: &BigInt, log: &Ball, constant: &Ball) -> Ball {
    let prec = prec_for(coeff).max(prec_for(&constant.floor_mid()));
    &(&Ball::from_int(coeff.clone()).with_prec(prec) * &log.clone().with_prec(prec)) + constant
}

/// `⌈x⌉` for the upper endpoint of `x`.
pub fn ceil_upper(x: &Ball) -> BigInt {
    x.upper().integer_range().0
}

/// Discriminant cap for special points outside the special locus of an `n`-dimensional
/// linear subvariety of height `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub n: u64,
    pub degree: u64,
    pub log_height: Ball,
    pub c1: BigInt,
    pub c2: BigInt,
    /// `c₁·log H + c₂`, bounding `|Δᵢ|^(1/2)`.
    pub sqrt_cap: Ball,
    /// `⌈sqrt_cap²⌉` taken at the upper endpoint.
    pub discriminant_cap: BigInt,
}

impl BoundReport {
    pub fn new(n: u64, degree: u64, log_height: &Ball) -> Result<Self> {
        if log_height.is_negative() {
            return Err(Error::InvalidArgument("log-height must be non-negative".into()));
        }
        let (c1, c2) = theorem_constants(n, degree)?;
        let sqrt_cap = linear_in_log(&c1, log_height, &Ball::from_int(c2.clone()));
        let prec = 2 * prec_for(&sqrt_cap.floor_mid());
        let discriminant_cap = ceil_upper(&sqrt_cap.clone().with_prec(prec).sqr()).max(int(3));
        Ok(BoundReport { n, degree, log_height: log_height.clone(), c1, c2, sqrt_cap, discriminant_cap })
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}, degree = {}", self.n, self.degree)?;
        writeln!(f, "log H(L) = {}", self.log_height.display_certified())?;
        writeln!(f, "c1 = {}", self.c1)?;
        writeln!(f, "c2 = {}", self.c2)?;
        writeln!(f, "c1 log H + c2 = {}", self.sqrt_cap.display_certified())?;
        write!(f, "|Δ| ≤ {}", self.discriminant_cap)
    }
}

/// Bound report for a proper linear subvariety of `𝔸ⁿ` with `H = H(L)`.
pub fn discriminant_cap(l: &LinearSubvariety, degree: u64) -> Result<BoundReport> {
    if l.is_full() {
        return Err(Error::FullSpace);
    }
    let h = subspace_height(l);
    BoundReport::new(l.ambient_dim() as u64, degree, h.log())
}

/// `log⁺|b| = log max{1, |b|}`.
pub fn log_plus(abs_b: &Ball) -> Ball {
    let x = abs_b.abs();
    let one = Ball::one();
    if x.certainly_le(&one) {
        return Ball::zero();
    }
    if one.certainly_lt(&x) {
        return x.ln(BOUND_PREC).expect("positive");
    }
    // straddles 1: enclose [0, log upper]
    let up = x.upper().ln(BOUND_PREC).expect("positive").upper();
    let mut r = up.mul_2exp(-1);
    r.add_error_ball(&up.mul_2exp(-1));
    r
}

/// The two single-equation constants for `k` coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaConstants {
    /// `480k²64^k·deg³·log H + 1.3·10¹¹(2.1·10⁴)^k(k+1)^(4k+6)·deg⁴`, valid for any
    /// solution in distinct singular moduli; `H` is the height of `(a, b)`.
    pub general: Ball,
    /// `18k²8^k·deg₀³·log H₀ + log⁺|b| + 21k³8^k·deg₀³`, valid when all moduli share
    /// one CM field; `H₀` is the height of `a`.
    pub same_field: Ball,
}

/// Constants bounding `|Δᵢ|^(1/2)` for solutions of `Σ aᵢ j(τᵢ) + b = 0`.
pub fn lemma_c1(k: u64, log_h0: &Ball, log_h: &Ball, log_plus_b: &Ball, degree0: u64, degree: u64) -> Result<LemmaConstants> {
    check_positive("k", k)?;
    check_positive("degree", degree)?;
    check_positive("degree0", degree0)?;
    let general = linear_in_log(
        &log_height_coefficient(k, degree),
        log_h,
        &Ball::from_int(additive_constant(13, k, degree)),
    );
    let d3 = pow_u(degree0, 3);
    let coeff = int(18) * int(k * k) * pow_u(8, k) * &d3;
    let constant = int(21) * pow_u(k, 3) * pow_u(8, k) * &d3;
    let same_field = &linear_in_log(&coeff, log_h0, &Ball::from_int(constant)) + log_plus_b;
    Ok(LemmaConstants { general, same_field })
}

/// `144k²64^k·deg₀³·log H₀ + 218k³64^k·deg₀³`, the automorphism-count threshold when
/// all moduli share one CM field.
pub fn lemma_c2(k: u64, log_h0: &Ball, degree0: u64) -> Result<Ball> {
    check_positive("k", k)?;
    check_positive("degree0", degree0)?;
    let d3 = pow_u(degree0, 3);
    let coeff = int(144) * int(k * k) * pow_u(64, k) * &d3;
    let constant = int(218) * pow_u(k, 3) * pow_u(64, k) * &d3;
    Ok(linear_in_log(&coeff, log_h0, &Ball::from_int(constant)))
}

/// One of the intermediate conductor bounds, evaluated for audit output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditFormula {
    pub name: &'static str,
    pub formula: &'static str,
    pub value: Ball,
}

/// The four intermediate bounds on `f|Δ_K|^(1/2)` that the single-equation constants
/// majorize. They are evaluated as stated, not re-derived.
pub fn audit_formulas(k: u64, log_h0: &Ball, log_plus_b: &Ball, degree0: u64) -> Result<Vec<AuditFormula>> {
    check_positive("k", k)?;
    check_positive("degree0", degree0)?;
    let p = BOUND_PREC;
    let d0 = Ball::from_int(degree0);
    let log_int = |m: u64| Ball::from_int(m).ln(p).expect("positive");
    let lh = log_h0.clone().with_prec(p);
    let two_d0_lh = (&d0 * &lh).mul_2exp(1);

    let same_disc = &(&two_d0_lh + log_plus_b) + &log_int(70 * k);
    let separated = &(&two_d0_lh + log_plus_b) + &log_int(8400 * k);
    let automorphism = &(&two_d0_lh.mul_2exp(1) + &(&d0 * &log_int(2)).mul_2exp(1)) + &log_int(140 * k);
    let k2 = Ball::from_int(k * k);
    let gcd = &(&(&Ball::from_int(138) * &k2) * &(&d0.pow(3) * &lh))
        + &(&(&Ball::from_int(69) * &k2) * &(&log_int(2 * k) * &d0.pow(2)));

    Ok(vec![
        AuditFormula { name: "same-discriminant", formula: "2·deg0·log H0 + log⁺|b| + log(70k)", value: same_disc },
        AuditFormula { name: "separated-conductors", formula: "2·deg0·log H0 + log⁺|b| + log(8400k)", value: separated },
        AuditFormula {
            name: "automorphism-threshold",
            formula: "4·deg0·log H0 + 2·deg0·log 2 + log(140k)",
            value: automorphism,
        },
        AuditFormula {
            name: "conductor-gcd",
            formula: "138·k²·deg0³·log H0 + 69·k²·log(2k)·deg0²",
            value: gcd,
        },
    ])
}

/// `138k²deg₀³·log H₀ + log⁺|b| + 69k²·log(2k)·deg₀²`, which majorizes every
/// audit formula.
pub fn audit_majorant(k: u64, log_h0: &Ball, log_plus_b: &Ball, degree0: u64) -> Ball {
    let p = BOUND_PREC;
    let d0 = Ball::from_int(degree0);
    let k2 = Ball::from_int(k * k);
    let first = &(&Ball::from_int(138) * &k2) * &(&d0.pow(3) * &log_h0.clone().with_prec(p));
    let last = &(&Ball::from_int(69) * &k2) * &(&Ball::from_int(2 * k).ln(p).expect("positive") * &d0.pow(2));
    &(&first + log_plus_b) + &last
}
