//! Empirical check of the single-equation bound: every solution of
//! `Σ aᵢ·j(τᵢ) + b = 0` in distinct singular moduli has `max |Δᵢ|^(1/2) < c₁`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::certify::IntegerForm;
use super::engine::solve_equation;
use super::moduli::ModuliTable;
use super::report::format_residual;
use crate::ball::Ball;
use crate::bounds::{lemma_c1, log_plus};
use crate::error::{Error, Result};
use crate::exact_linear::ExactRational;
use crate::heights::{affine_height, HEIGHT_PREC};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSolution {
    pub moduli: Vec<String>,
    pub max_abs_discriminant: u64,
    /// All moduli lie in one CM field.
    pub same_field: bool,
    /// `c₁ − max |Δᵢ|^(1/2)`, certified.
    pub margin: String,
    pub within_bound: bool,
    /// The sharper same-field constant, checked only when `same_field`.
    pub within_same_field_bound: Option<bool>,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub coefficients: Vec<String>,
    pub constant: String,
    pub cap: u64,
    pub k: u64,
    pub log_height: String,
    pub log_height_coefficients: String,
    pub log_plus_constant: String,
    pub c1: String,
    pub c1_same_field: String,
    pub solutions: Vec<LemmaSolution>,
    pub undecided: Vec<Vec<String>>,
    pub violations: Vec<Vec<String>>,
    /// Smallest margin over all solutions, as a lower bound.
    pub min_margin: Option<String>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Solves `Σ aᵢ·zᵢ + b = 0` in distinct moduli with `|Δ| ≤ cap` and checks each
/// solution against the general constant.
pub fn verify_equation_bound(a: &[ExactRational], b: &ExactRational, cap: u64, max_prec: u32) -> Result<LemmaReport> {
    check_coefficients(a)?;
    let table = ModuliTable::new(cap)?;
    verify_equation_bound_with_table(a, b, &table, max_prec)
}

fn check_coefficients(a: &[ExactRational]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("at least one coefficient is required".into()));
    }
    match a.iter().position(Zero::is_zero) {
        Some(i) => Err(Error::ZeroCoefficient(i)),
        None => Ok(()),
    }
}

pub fn verify_equation_bound_with_table(a: &[ExactRational], b: &ExactRational, table: &ModuliTable, max_prec: u32) -> Result<LemmaReport> {
    check_coefficients(a)?;
    let form = IntegerForm::new(a, b).expect("nonzero coefficients");
    let k = a.len() as u64;
    let mut ab = a.to_vec();
    ab.push(b.clone());
    let log_h = affine_height(&ab).log().clone();
    let log_h0 = affine_height(a).log().clone();
    let log_plus_b = log_plus(&Ball::from_rational(b, HEIGHT_PREC));
    let c1 = lemma_c1(k, &log_h0, &log_h, &log_plus_b, 1, 1)?;
    let out = solve_equation(table, &form, true, max_prec)?;

    let mut solutions = Vec::new();
    let mut violations = Vec::new();
    let mut min_margin: Option<Ball> = None;
    for (tuple, cert) in &out.zeros {
        let entries: Vec<_> = tuple.iter().map(|&i| table.get(i)).collect();
        let ids: Vec<String> = entries.iter().map(|e| e.id.to_string()).collect();
        let max_abs = entries.iter().map(|e| e.discriminant.abs()).max().expect("nonempty");
        let fundamental = entries[0].discriminant.fundamental();
        let same_field = entries.iter().all(|e| e.discriminant.fundamental() == fundamental);
        let root = Ball::from_int(max_abs).sqrt(HEIGHT_PREC).expect("positive");
        let within_bound = root.certainly_lt(&c1.general);
        let within_same_field_bound = same_field.then(|| root.certainly_lt(&c1.same_field));
        let margin = &c1.general - &root;
        if !within_bound {
            violations.push(ids.clone());
        }
        if min_margin.as_ref().is_none_or(|m| margin.lower().certainly_lt(&m.lower())) {
            min_margin = Some(margin.clone());
        }
        solutions.push(LemmaSolution {
            moduli: ids,
            max_abs_discriminant: max_abs,
            same_field,
            margin: margin.display_certified(),
            within_bound,
            within_same_field_bound,
            residual: format_residual(cert.residual),
        });
    }
    let undecided = out
        .undecided
        .iter()
        .map(|(t, _)| t.iter().map(|&i| table.get(i).id.to_string()).collect())
        .collect();
    Ok(LemmaReport {
        coefficients: a.iter().map(ToString::to_string).collect(),
        constant: b.to_string(),
        cap: table.cap(),
        k,
        log_height: log_h.display_certified(),
        log_height_coefficients: log_h0.display_certified(),
        log_plus_constant: log_plus_b.display_certified(),
        c1: c1.general.display_certified(),
        c1_same_field: c1.same_field.display_certified(),
        solutions,
        undecided,
        violations,
        min_margin: min_margin.map(|m| m.display_certified()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linear::{rat, ratio};
    use crate::modular::MAX_PREC;

    #[test]
    fn sum_to_1728() {
        let r = verify_equation_bound(&[rat(1), rat(1)], &rat(-1728), 100, MAX_PREC).unwrap();
        let sols: Vec<_> = r.solutions.iter().map(|s| s.moduli.join(" ")).collect();
        assert_eq!(sols, ["-3:(1,1,1) -4:(1,0,1)", "-4:(1,0,1) -3:(1,1,1)"]);
        assert!(r.holds() && r.undecided.is_empty());
        assert!(r.solutions.iter().all(|s| s.within_bound && s.max_abs_discriminant == 4 && !s.same_field));
    }

    #[test]
    fn single_zero() {
        let r = verify_equation_bound(&[rat(1)], &rat(0), 100, MAX_PREC).unwrap();
        assert_eq!(r.solutions.len(), 1);
        assert_eq!(r.solutions[0].moduli, ["-3:(1,1,1)"]);
        assert_eq!(r.solutions[0].within_same_field_bound, Some(true));
        assert!(r.holds());
    }

    #[test]
    fn distinctness_and_errors() {
        let r = verify_equation_bound(&[rat(1), rat(-1)], &rat(0), 50, MAX_PREC).unwrap();
        assert!(r.solutions.is_empty() && r.holds());
        assert!(r.min_margin.is_none());
        assert!(matches!(verify_equation_bound(&[rat(1), rat(0)], &rat(0), 50, MAX_PREC), Err(Error::ZeroCoefficient(1))));
        // rational coefficients are cleared: j/2 − 864 = 0 at j = 1728
        let r = verify_equation_bound(&[ratio(1, 2)], &rat(-864), 20, MAX_PREC).unwrap();
        assert_eq!(r.solutions[0].moduli, ["-4:(1,0,1)"]);
    }
}
