mod common;

use std::sync::OnceLock;

use common::{equation_forms, oracle, random_subvariety};
use linspecial_core::ball::Ball;
use linspecial_core::exact_linear::{AffineEquation, LinearSubvariety};
use linspecial_core::heights::liouville_gap_from_log;
use linspecial_core::modular::MAX_PREC;
use linspecial_core::search::{solve_with_table, ModuliTable, ModulusId, SolveOptions, SolveStatus, BASE_PREC};
use linspecial_core::special_geometry::EqualityPattern;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: u64 = 60;

fn table() -> &'static ModuliTable {
    static T: OnceLock<ModuliTable> = OnceLock::new();
    T.get_or_init(|| ModuliTable::new(CAP).unwrap())
}

fn opts(prune: bool) -> SolveOptions {
    SolveOptions { prune, ..SolveOptions::with_cap(CAP) }
}

fn solved_ids(l: &LinearSubvariety, prune: bool) -> (Vec<Vec<ModulusId>>, usize) {
    let s = solve_with_table(l, table(), &opts(prune)).unwrap();
    (s.points.iter().map(|p| p.moduli.clone()).collect(), s.undecided.len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_oracle(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_subvariety(&mut rng, n, 50);
        let (got, undecided) = solved_ids(&l, true);
        let want = oracle(&l, table(), MAX_PREC);
        prop_assert_eq!(undecided, 0);
        prop_assert!(want.undecided.is_empty());
        prop_assert_eq!(&got, &want.points, "L = {}", l);
        // each point comes from the stream of its own equality pattern
        let s = solve_with_table(&l, table(), &opts(true)).unwrap();
        for p in &s.points {
            prop_assert_eq!(&p.pattern, &EqualityPattern::from_labels(&p.moduli));
        }
    }

    #[test]
    fn pruning_is_safe(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_subvariety(&mut rng, n, 50);
        prop_assert_eq!(solved_ids(&l, true), solved_ids(&l, false));
    }
}

/// Subvarieties through known special points, so the oracle comparison has
/// nonempty answers.
#[test]
fn seeded_instances_match_oracle() {
    let cases: Vec<(usize, Vec<AffineEquation>)> = vec![
        (2, vec![AffineEquation::from_i64(&[1, 1], -1728)]),
        (2, vec![AffineEquation::from_i64(&[3, -1], 0)]),
        (2, vec![AffineEquation::from_i64(&[125, -27], 0)]),
        (2, vec![AffineEquation::from_i64(&[1, 1], 3375)]),
        (3, vec![AffineEquation::from_i64(&[1, 1, 1], -1728)]),
        (3, vec![AffineEquation::from_i64(&[1, -1, 1], -1728)]),
        (3, vec![AffineEquation::from_i64(&[1, 1, 0], -1728), AffineEquation::from_i64(&[0, 1, -2], 0)]),
        (3, vec![AffineEquation::from_i64(&[1, 1, -1], 0)]),
    ];
    for (n, eqs) in cases {
        let l = LinearSubvariety::from_equations(n, &eqs).unwrap().unwrap();
        let want = oracle(&l, table(), MAX_PREC);
        let (got, undecided) = solved_ids(&l, true);
        assert_eq!(undecided, 0);
        assert_eq!(got, want.points, "L = {l}");
        assert_eq!(solved_ids(&l, false).0, got);
    }
    let l = LinearSubvariety::from_equations(3, &[AffineEquation::from_i64(&[1, 1, 1], -1728)]).unwrap().unwrap();
    // the three arrangements of (0, 0, 1728); no distinct triple under the cap sums to 1728
    assert_eq!(solved_ids(&l, true).0.len(), 3);
}

#[test]
fn reported_points_resubstitute() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ls: Vec<LinearSubvariety> = (0..10).map(|i| random_subvariety(&mut rng, 2 + i % 2, 50)).collect();
    ls.push(LinearSubvariety::from_equations(3, &[AffineEquation::from_i64(&[1, -1, 1], -1728)]).unwrap().unwrap());
    let mut checked = 0;
    for l in &ls {
        let s = solve_with_table(l, table(), &opts(true)).unwrap();
        for p in &s.points {
            let entries: Vec<_> = p.moduli.iter().map(|id| table().get(table().index_of(id).unwrap())).collect();
            let prec = 4 * p.precision_bits.max(BASE_PREC);
            for (support, f) in equation_forms(l) {
                let ms: Vec<_> = support.iter().map(|&q| entries[q]).collect();
                let v = f.evaluate(&ms, prec).unwrap();
                assert!(v.contains_zero(), "{l}: {:?}", p.moduli);
                let cert = f.certify(&ms, MAX_PREC).unwrap();
                let gap = liouville_gap_from_log(&Ball::from_f64(cert.log_height_bound), cert.degree_bound);
                assert!(v.norm_sqr().certainly_lt(&gap.lower().sqr()), "{l}: {:?}", p.moduli);
            }
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn reports_identical_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..6 {
        let l = random_subvariety(&mut rng, 2 + i % 2, 50);
        let one = solve_with_table(&l, table(), &SolveOptions { threads: Some(1), ..opts(true) }).unwrap();
        let many = solve_with_table(&l, table(), &SolveOptions { threads: Some(4), ..opts(true) }).unwrap();
        assert_eq!(one.status, SolveStatus::Complete);
        let a = serde_json::to_string(&one.report()).unwrap();
        let b = serde_json::to_string(&many.report()).unwrap();
        assert_eq!(a, b);
    }
}
