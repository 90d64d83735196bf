//! Random subvarieties and a brute-force special-point oracle shared by the
//! integration suites.
#![allow(dead_code)]

use linspecial_core::exact_linear::{AffineEquation, LinearSubvariety};
use linspecial_core::heights::subspace_height;
use linspecial_core::search::{IntegerForm, ModuliTable, ModulusId, ZeroTest};
use linspecial_core::special_geometry::in_positive_dim_special;
use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

/// A proper nonempty subvariety of `𝔸ⁿ` with `H(L) ≤ max_height`. Half of the draws
/// pass through the origin, where special points are likeliest.
pub fn random_subvariety<R: Rng>(rng: &mut R, n: usize, max_height: u64) -> LinearSubvariety {
    let bound = BigUint::from(max_height * max_height);
    loop {
        let codim = rng.gen_range(1..=n);
        let origin = rng.gen_bool(0.5);
        let eqs: Vec<AffineEquation> = (0..codim)
            .map(|_| {
                let a: Vec<i64> =
                    (0..n).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(-6..=6) }).collect();
                let b = if origin { 0 } else { rng.gen_range(-30..=30) };
                AffineEquation::from_i64(&a, b)
            })
            .collect();
        let Ok(Some(l)) = LinearSubvariety::from_equations(n, &eqs) else { continue };
        if !l.is_full() && *subspace_height(&l).square() <= bound {
            return l;
        }
    }
}

/// Forms of the nontrivial defining equations, each on its support.
pub fn equation_forms(l: &LinearSubvariety) -> Vec<(Vec<usize>, IntegerForm)> {
    l.equations()
        .iter()
        .filter_map(|eq| {
            let support: Vec<usize> = (0..eq.coefficients.len()).filter(|&i| !eq.coefficients[i].is_zero()).collect();
            let a: Vec<_> = support.iter().map(|&i| eq.coefficients[i].clone()).collect();
            IntegerForm::new(&a, &eq.constant).map(|f| (support, f))
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct OracleOutput {
    pub points: Vec<Vec<ModulusId>>,
    pub undecided: Vec<Vec<ModulusId>>,
}

/// Every `n`-tuple of table moduli, repetition allowed, tested against every
/// defining equation of `L`; points on a positive-dimensional special subvariety
/// are dropped.
pub fn oracle(l: &LinearSubvariety, table: &ModuliTable, max_prec: u32) -> OracleOutput {
    let n = l.ambient_dim();
    let forms = equation_forms(l);
    let mut out = OracleOutput::default();
    let mut tuple = vec![0usize; n];
    walk(l, table, &forms, max_prec, 0, &mut tuple, &mut out);
    out.points.sort();
    out.undecided.sort();
    out
}

fn walk(
    l: &LinearSubvariety,
    table: &ModuliTable,
    forms: &[(Vec<usize>, IntegerForm)],
    max_prec: u32,
    depth: usize,
    tuple: &mut Vec<usize>,
    out: &mut OracleOutput,
) {
    let n = tuple.len();
    if depth == n {
        let mut undecided = false;
        for (support, f) in forms {
            let ms: Vec<_> = support.iter().map(|&p| table.get(tuple[p])).collect();
            match f.certify(&ms, max_prec).unwrap().outcome {
                ZeroTest::Zero => {}
                ZeroTest::Nonzero => return,
                ZeroTest::NeedsPrecision => undecided = true,
            }
        }
        let ids: Vec<ModulusId> = tuple.iter().map(|&i| table.get(i).id).collect();
        if undecided {
            out.undecided.push(ids);
        } else if !in_positive_dim_special(l, &ids).unwrap() {
            out.points.push(ids);
        }
        return;
    }
    for i in 0..table.len() {
        tuple[depth] = i;
        // a cheap sufficient test for nonvanishing of equations already fully assigned
        let dead = forms.iter().any(|(support, f)| {
            support.iter().all(|&p| p <= depth)
                && support.contains(&depth)
                && !f.interval(&support.iter().map(|&p| table.get(tuple[p])).collect::<Vec<_>>()).contains_zero()
        });
        if !dead {
            walk(l, table, forms, max_prec, depth + 1, tuple, out);
        }
    }
}
