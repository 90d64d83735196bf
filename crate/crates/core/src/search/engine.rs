//! Enumeration of tuples of pairwise distinct singular moduli solving one linear
//! equation with nonzero integer coefficients.

use rayon::prelude::*;

use super::certify::{Certification, IntegerForm, ZeroTest};
use super::moduli::ModuliTable;
use crate::error::Result;
use crate::interval::ComplexInterval;

/// Half-width of the window `| |j(τ)| − e^(2π Im τ) | ≤ 2079` on the fundamental domain.
pub const JESTIMATE_SLACK: f64 = 2079.0;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    /// Complete tuples that reached a zero test.
    pub enumerated: u64,
    /// Candidates for the last coordinate excluded by the size window.
    pub pruned: u64,
    pub nonzero: u64,
}

impl EngineStats {
    fn merge(&mut self, o: &EngineStats) {
        self.enumerated += o.enumerated;
        self.pruned += o.pruned;
        self.nonzero += o.nonzero;
    }
}

#[derive(Debug, Default)]
pub struct EngineOutput {
    pub zeros: Vec<(Vec<usize>, Certification)>,
    pub undecided: Vec<(Vec<usize>, Certification)>,
    pub stats: EngineStats,
}

impl EngineOutput {
    fn merge(mut self, o: EngineOutput) -> EngineOutput {
        self.zeros.extend(o.zeros);
        self.undecided.extend(o.undecided);
        self.stats.merge(&o.stats);
        self
    }
}

/// All tuples `(t₁, …, t_k)` of pairwise distinct table indices with
/// `Σ cᵢ·j(t_i) + b = 0`, where every `cᵢ ≠ 0`. With `prune`, the last coordinate is
/// restricted to moduli whose size `e^(2π Im τ)` is compatible with `|c_k·j| = |partial sum|`.
pub fn solve_equation(table: &ModuliTable, form: &IntegerForm, prune: bool, max_prec: u32) -> Result<EngineOutput> {
    let k = form.len();
    assert!(k >= 1 && form.coefficients().iter().all(|c| c.sign() != num_bigint::Sign::NoSign));
    let search = Search { table, form, prune, max_prec };
    let start = ComplexInterval::real(form.constant_interval());
    if k == 1 {
        let mut out = EngineOutput::default();
        search.last(&mut Vec::new(), start, &mut out)?;
        return Ok(out);
    }
    let parts: Vec<Result<EngineOutput>> = (0..table.len())
        .into_par_iter()
        .map(|i| {
            let mut out = EngineOutput::default();
            let mut prefix = vec![i];
            let partial = search.extend(start, 0, i);
            search.walk(&mut prefix, partial, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut out = EngineOutput::default();
    for p in parts {
        out = out.merge(p?);
    }
    out.zeros.sort_by(|a, b| a.0.cmp(&b.0));
    out.undecided.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

struct Search<'a> {
    table: &'a ModuliTable,
    form: &'a IntegerForm,
    prune: bool,
    max_prec: u32,
}

impl Search<'_> {
    fn extend(&self, partial: ComplexInterval, pos: usize, idx: usize) -> ComplexInterval {
        partial.add(self.table.get(idx).interval.scale(self.form.coefficient_interval(pos)))
    }

    fn walk(&self, prefix: &mut Vec<usize>, partial: ComplexInterval, out: &mut EngineOutput) -> Result<()> {
        if prefix.len() + 1 == self.form.len() {
            return self.last(prefix, partial, out);
        }
        let pos = prefix.len();
        for i in 0..self.table.len() {
            if prefix.contains(&i) {
                continue;
            }
            prefix.push(i);
            let next = self.extend(partial, pos, i);
            self.walk(prefix, next, out)?;
            prefix.pop();
        }
        Ok(())
    }

    /// Candidates for the last coordinate: if the sum vanishes then
    /// `|j| = |partial|/|c|`, and `e^(2π Im τ)` lies within 2079 of `|j|`.
    fn window(&self, partial: ComplexInterval) -> Vec<usize> {
        let c = self.form.coefficient_interval(self.form.len() - 1);
        let (t_lo, t_hi) = partial.abs_bounds();
        let w = 8.0 * f64::EPSILON;
        let j_lo = t_lo / c.abs_hi() * (1.0 - w);
        let j_hi = t_hi / c.abs_lo() * (1.0 + w);
        // the absolute ±1 absorbs rounding in the subtraction
        let lo = j_lo - JESTIMATE_SLACK - j_lo.abs() * w - 1.0;
        let hi = j_hi + JESTIMATE_SLACK + j_hi * w + 1.0;
        self.table.size_window(lo, hi)
    }

    fn last(&self, prefix: &mut Vec<usize>, partial: ComplexInterval, out: &mut EngineOutput) -> Result<()> {
        let pos = prefix.len();
        let candidates: Vec<usize> = if self.prune {
            let w = self.window(partial);
            out.stats.pruned += (self.table.len() - w.len()) as u64;
            w
        } else {
            (0..self.table.len()).collect()
        };
        for i in candidates {
            if prefix.contains(&i) {
                continue;
            }
            out.stats.enumerated += 1;
            if !self.extend(partial, pos, i).contains_zero() {
                out.stats.nonzero += 1;
                continue;
            }
            prefix.push(i);
            let moduli: Vec<_> = prefix.iter().map(|&t| self.table.get(t)).collect();
            let cert = self.form.certify(&moduli, self.max_prec)?;
            match cert.outcome {
                ZeroTest::Zero => out.zeros.push((prefix.clone(), cert)),
                ZeroTest::Nonzero => out.stats.nonzero += 1,
                ZeroTest::NeedsPrecision => out.undecided.push((prefix.clone(), cert)),
            }
            prefix.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::MAX_PREC;
    use num_bigint::BigInt;

    fn form(a: &[i64], b: i64) -> IntegerForm {
        IntegerForm::from_integers(a.iter().map(|&x| BigInt::from(x)).collect(), BigInt::from(b))
    }

    fn ids(t: &ModuliTable, out: &EngineOutput) -> Vec<Vec<String>> {
        out.zeros.iter().map(|(v, _)| v.iter().map(|&i| t.get(i).id.to_string()).collect()).collect()
    }

    #[test]
    fn sum_to_1728() {
        let t = ModuliTable::new(100).unwrap();
        for prune in [true, false] {
            let out = solve_equation(&t, &form(&[1, 1], -1728), prune, MAX_PREC).unwrap();
            assert_eq!(ids(&t, &out), [vec!["-3:(1,1,1)", "-4:(1,0,1)"], vec!["-4:(1,0,1)", "-3:(1,1,1)"]]);
            assert!(out.undecided.is_empty());
        }
        let pruned = solve_equation(&t, &form(&[1, 1], -1728), true, MAX_PREC).unwrap();
        assert!(pruned.stats.pruned > 0);
        assert!(pruned.stats.enumerated < (t.len() * (t.len() - 1)) as u64);
    }

    #[test]
    fn single_coordinate() {
        let t = ModuliTable::new(100).unwrap();
        let out = solve_equation(&t, &form(&[1], 0), true, MAX_PREC).unwrap();
        assert_eq!(ids(&t, &out), [vec!["-3:(1,1,1)"]]);
        let out = solve_equation(&t, &form(&[1], 3375), true, MAX_PREC).unwrap();
        assert_eq!(ids(&t, &out), [vec!["-7:(1,1,2)"]]);
        let out = solve_equation(&t, &form(&[2], -1727), true, MAX_PREC).unwrap();
        assert!(out.zeros.is_empty());
    }

    #[test]
    fn distinct_moduli_only() {
        let t = ModuliTable::new(50).unwrap();
        let out = solve_equation(&t, &form(&[1, -1], 0), true, MAX_PREC).unwrap();
        assert!(out.zeros.is_empty() && out.undecided.is_empty());
    }

    #[test]
    fn conjugate_pair() {
        let t = ModuliTable::new(20).unwrap();
        let out = solve_equation(&t, &form(&[1, 1], 191_025), true, MAX_PREC).unwrap();
        assert_eq!(ids(&t, &out), [vec!["-15:(1,1,4)", "-15:(2,1,2)"], vec!["-15:(2,1,2)", "-15:(1,1,4)"]]);
    }
}
