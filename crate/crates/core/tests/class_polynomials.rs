use linspecial_core::modular::{class_polynomial, j_of_form, ClassPolynomialCache};
use linspecial_core::quadratic::{class_number, discriminants_up_to, reduced_forms, Discriminant};
use num_bigint::BigInt;
use rayon::prelude::*;

#[test]
fn degree_is_class_number() {
    let discs = discriminants_up_to(2000);
    let bad: Vec<i64> = discs
        .par_iter()
        .filter(|d| class_polynomial(d).unwrap().degree() as u64 != class_number(d))
        .map(|d| d.value())
        .collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn singular_moduli_are_roots() {
    for d in discriminants_up_to(300) {
        let h = class_polynomial(&d).unwrap();
        assert_eq!(h.coefficients.last(), Some(&BigInt::from(1)));
        for f in reduced_forms(&d) {
            let j = j_of_form(&f, h.precision_bits).unwrap();
            assert!(h.evaluate_ball(&j).contains_zero(), "Δ = {}, form {f}", d.value());
        }
    }
}

#[test]
fn cached_polynomials_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ClassPolynomialCache::with_dir(dir.path());
    for v in [-23, -71, -260, -391] {
        let d = Discriminant::new(v).unwrap();
        let fresh = class_polynomial(&d).unwrap();
        assert_eq!(*cache.get(&d).unwrap(), fresh);
        let reread = ClassPolynomialCache::with_dir(dir.path());
        assert_eq!(*reread.get(&d).unwrap(), fresh);
    }
}
