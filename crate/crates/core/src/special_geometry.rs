//! Diagonal subvarieties, the reduction of a linear subvariety along an equality
//! pattern, and the exact test for lying on a positive-dimensional special
//! subvariety inside `L`.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::exact_linear::{determinant, primitive_integer_vector, subsets, ExactRational, LinearSubvariety};
use crate::heights::{subspace_height, HeightValue, HEIGHT_PREC};

/// A set partition of the coordinates `0..n`. Blocks are sorted internally and
/// ordered by their least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EqualityPattern {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl EqualityPattern {
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block in pattern".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= n || seen[i] {
                    return Err(Error::InvalidArgument(format!("coordinate {} repeated or out of range", i + 1)));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("pattern does not cover every coordinate".into()));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(EqualityPattern { n, blocks })
    }

    /// All singletons.
    pub fn trivial(n: usize) -> Self {
        EqualityPattern { n, blocks: (0..n).map(|i| vec![i]).collect() }
    }

    /// The partition induced by equality of `labels`.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        'outer: for (i, x) in labels.iter().enumerate() {
            for b in blocks.iter_mut() {
                if labels[b[0]] == *x {
                    b.push(i);
                    continue 'outer;
                }
            }
            blocks.push(vec![i]);
        }
        EqualityPattern { n: labels.len(), blocks }
    }

    /// Every partition of `0..n` in a fixed order (restricted growth strings,
    /// lexicographically).
    pub fn all(n: usize) -> Vec<EqualityPattern> {
        let mut out = Vec::new();
        let mut labels = vec![0usize; n];
        fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<EqualityPattern>) {
            if i == labels.len() {
                out.push(EqualityPattern::from_labels(labels));
                return;
            }
            for v in 0..=max + 1 {
                labels[i] = v;
                rec(i + 1, max.max(v), labels, out);
            }
        }
        if n == 0 {
            return vec![EqualityPattern { n: 0, blocks: vec![] }];
        }
        // first label is always 0
        rec(1, 0, &mut labels, &mut out);
        out
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == self.n
    }

    /// Index of the block holding coordinate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&i)).expect("coordinate in range")
    }

    /// The representative coordinate of each block: its largest index.
    pub fn representatives(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| *b.last().expect("non-empty")).collect()
    }

    /// `true` if every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &EqualityPattern) -> bool {
        self.blocks.iter().all(|b| {
            let j = other.block_of(b[0]);
            b.iter().all(|&i| other.block_of(i) == j)
        })
    }

    /// Spreads a point of `𝔸^r` over the blocks.
    pub fn lift<T: Clone>(&self, reduced: &[T]) -> Vec<T> {
        assert_eq!(reduced.len(), self.blocks.len());
        let mut out: Vec<Option<T>> = vec![None; self.n];
        for (b, v) in self.blocks.iter().zip(reduced) {
            for &i in b {
                out[i] = Some(v.clone());
            }
        }
        out.into_iter().map(|x| x.expect("pattern covers all coordinates")).collect()
    }

    /// The coordinates at the representatives.
    pub fn project<T: Clone>(&self, point: &[T]) -> Vec<T> {
        self.representatives().into_iter().map(|i| point[i].clone()).collect()
    }
}

impl fmt::Display for EqualityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            let items: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        write!(f, "}}")
    }
}

fn indicator(n: usize, block: &[usize]) -> Vec<ExactRational> {
    let mut v = vec![BigRational::zero(); n];
    for &i in block {
        v[i] = BigRational::one();
    }
    v
}

/// The subspace where coordinates agree on each block; one free parameter per block.
pub fn diagonal_of(pattern: &EqualityPattern) -> LinearSubvariety {
    let n = pattern.ambient_dim();
    let dirs: Vec<_> = pattern.blocks().iter().map(|b| indicator(n, b)).collect();
    LinearSubvariety::from_basis(n, &dirs, vec![BigRational::zero(); n]).expect("block indicators are independent")
}

/// `H(Z)` for a diagonal subspace with the blockwise bound `2^(m−1)·m^(1/2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalHeight {
    pub height: HeightValue,
    pub block_bounds: Vec<Ball>,
    pub product_bound: Ball,
    /// Exact `∏ 4^(m−1)·m`, the square of `product_bound`.
    pub product_bound_square: BigUint,
}

impl DiagonalHeight {
    /// `H(Z) ≤ ∏ 2^(m−1)·m^(1/2)`, compared exactly through squares.
    pub fn within_bound(&self) -> bool {
        *self.height.square() <= self.product_bound_square
    }
}

pub fn diagonal_height(pattern: &EqualityPattern) -> DiagonalHeight {
    let height = subspace_height(&diagonal_of(pattern));
    let block_bounds: Vec<Ball> = pattern
        .block_sizes()
        .into_iter()
        .map(|m| {
            let root = Ball::from_int(m as u64).sqrt(HEIGHT_PREC).expect("positive");
            root.mul_2exp(m as i64 - 1)
        })
        .collect();
    let product_bound = block_bounds.iter().fold(Ball::one(), |acc, b| &acc * b);
    let product_bound_square = pattern
        .block_sizes()
        .into_iter()
        .map(|m| num_traits::pow(BigUint::from(4u32), m - 1) * BigUint::from(m))
        .product();
    let d = DiagonalHeight { height, block_bounds, product_bound, product_bound_square };
    debug_assert!(d.within_bound());
    d
}

/// Result of restricting `L` to the diagonal of a pattern and projecting to the
/// representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternProjection {
    /// `L` misses the diagonal.
    Empty,
    /// `l1 = L ∩ Z ⊂ 𝔸ⁿ` and its isomorphic image `l2 ⊂ 𝔸^r`.
    Projected { l1: LinearSubvariety, l2: LinearSubvariety },
}

impl PatternProjection {
    /// `L₁` is the whole diagonal, so every point of it lies on a special subvariety.
    pub fn is_fully_special(&self) -> bool {
        matches!(self, PatternProjection::Projected { l2, .. } if l2.is_full())
    }
}

pub fn project_by_pattern(l: &LinearSubvariety, pattern: &EqualityPattern) -> Result<PatternProjection> {
    if l.ambient_dim() != pattern.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: l.ambient_dim(), found: pattern.ambient_dim() });
    }
    let Some(l1) = l.intersect(&diagonal_of(pattern))? else {
        return Ok(PatternProjection::Empty);
    };
    let r = pattern.block_count();
    let dirs: Vec<_> = l1.direction_vectors().iter().map(|v| pattern.project(v)).collect();
    let offset = pattern.project(l1.offset());
    let l2 = LinearSubvariety::from_basis(r, &dirs, offset)?;
    Ok(PatternProjection::Projected { l1, l2 })
}

/// `H(L₁)²` from the homogenized basis `A` of `L₂`: `Σ_I (∏_{i∈I} |block i|)·det(A_I)²`
/// over the maximal minors, after scaling the minor vector to be primitive. The
/// homogenizing coordinate has weight 1.
pub fn weighted_minor_height_square(l2: &LinearSubvariety, pattern: &EqualityPattern) -> Result<BigUint> {
    let r = pattern.block_count();
    if l2.ambient_dim() != r {
        return Err(Error::DimensionMismatch { expected: r, found: l2.ambient_dim() });
    }
    let a = l2.homogenized_basis();
    let l = a.cols();
    let mut sizes: Vec<u64> = pattern.block_sizes().into_iter().map(|m| m as u64).collect();
    sizes.push(1);
    let all_cols: Vec<usize> = (0..l).collect();
    let rows = subsets(r + 1, l);
    let dets: Vec<ExactRational> = rows.iter().map(|rs| determinant(&a.select(rs, &all_cols))).collect();
    let prim = primitive_integer_vector(&dets).ok_or(Error::ZeroVector)?;
    Ok(rows
        .iter()
        .zip(&prim)
        .map(|(rs, d)| {
            let w: u64 = rs.iter().map(|&i| sizes[i]).product();
            BigUint::from(w) * d.magnitude() * d.magnitude()
        })
        .sum())
}

/// Nonempty subsets of `block` given as index lists.
fn nonempty_subsets(block: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let m = block.len();
    (1u64..(1u64 << m)).map(move |mask| (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| block[i]).collect())
}

/// For a point of `L` whose coordinates have identities `ids` (equal identity means
/// equal value), whether it lies on a positive-dimensional special subvariety inside
/// `L`. Such a subvariety exists iff for some set `B` of coordinates sharing one value,
/// the indicator of `B` is a direction of `L`: then moving the `B` coordinates together
/// stays inside `L`. Membership of the point in `L` is the caller's responsibility.
pub fn in_positive_dim_special<T: PartialEq>(l: &LinearSubvariety, ids: &[T]) -> Result<bool> {
    if ids.len() != l.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: l.ambient_dim(), found: ids.len() });
    }
    Ok(special_direction(l, ids)?.is_some())
}

/// A witness set `B` for [`in_positive_dim_special`], 0-based.
pub fn special_direction<T: PartialEq>(l: &LinearSubvariety, ids: &[T]) -> Result<Option<Vec<usize>>> {
    let n = l.ambient_dim();
    let pattern = EqualityPattern::from_labels(ids);
    for block in pattern.blocks() {
        for s in nonempty_subsets(block) {
            if l.contains_direction(&indicator(n, &s))? {
                return Ok(Some(s));
            }
        }
    }
    Ok(None)
}

/// [`in_positive_dim_special`] for a rational point, checking membership exactly.
pub fn in_positive_dim_special_rational(l: &LinearSubvariety, p: &[ExactRational]) -> Result<bool> {
    if !l.contains_point(p)? {
        return Err(Error::NotOnSubvariety);
    }
    in_positive_dim_special(l, p)
}

/// A pattern whose diagonal lies inside `L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalSpecial {
    pub pattern: EqualityPattern,
    /// No finer pattern's diagonal lies inside `L`.
    pub maximal: bool,
}

/// Every pattern `P` with `diagonal_of(P) ⊆ L`, in the order of
/// [`EqualityPattern::all`], with the maximal ones marked.
pub fn diagonal_specials_in(l: &LinearSubvariety) -> Result<Vec<DiagonalSpecial>> {
    let n = l.ambient_dim();
    if !l.contains_point(&vec![BigRational::zero(); n])? {
        return Ok(vec![]);
    }
    let mut found = Vec::new();
    for p in EqualityPattern::all(n) {
        let mut inside = true;
        for b in p.blocks() {
            if !l.contains_direction(&indicator(n, b))? {
                inside = false;
                break;
            }
        }
        if inside {
            found.push(p);
        }
    }
    let marked = found
        .iter()
        .map(|p| DiagonalSpecial {
            pattern: p.clone(),
            maximal: !found.iter().any(|q| q != p && q.refines(p)),
        })
        .collect();
    Ok(marked)
}

/// `H(L₁) < 3ⁿ·H(L)` as an exact comparison of squares.
pub fn within_product_bound(l: &LinearSubvariety, l1: &LinearSubvariety) -> bool {
    let h = subspace_height(l);
    let h1 = subspace_height(l1);
    let nine_n = num_traits::pow(BigUint::from(9u32), l.ambient_dim());
    *h1.square() < nine_n * h.square()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linear::{rat, AffineEquation};
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn eqs(n: usize, rows: &[(&[i64], i64)]) -> LinearSubvariety {
        let e: Vec<_> = rows.iter().map(|(a, b)| AffineEquation::from_i64(a, *b)).collect();
        LinearSubvariety::from_equations(n, &e).unwrap().unwrap()
    }

    fn pat(n: usize, blocks: &[&[usize]]) -> EqualityPattern {
        EqualityPattern::new(n, blocks.iter().map(|b| b.iter().map(|i| i - 1).collect()).collect()).unwrap()
    }

    fn q(v: &[i64]) -> Vec<ExactRational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (1..=6).map(|n| EqualityPattern::all(n).len()).collect();
        assert_eq!(counts, [1, 2, 5, 15, 52, 203]);
        let p = EqualityPattern::new(3, vec![vec![2], vec![1, 0]]).unwrap();
        assert_eq!(p.to_string(), "{{1,2},{3}}");
        assert_eq!(p.representatives(), [1, 2]);
        assert!(EqualityPattern::new(3, vec![vec![0, 1]]).is_err());
        assert!(EqualityPattern::new(2, vec![vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let z = diagonal_of(&pat(2, &[&[1, 2]]));
        assert_eq!(z, eqs(2, &[(&[1, -1], 0)]));
        assert!(diagonal_of(&EqualityPattern::trivial(2)).is_full());
        let z = diagonal_of(&pat(3, &[&[1, 2], &[3]]));
        assert_eq!(z.dim(), 2);
        assert!(z.contains_direction(&q(&[1, 1, 0])).unwrap());
        assert!(z.contains_direction(&q(&[0, 0, 1])).unwrap());
    }

    #[test]
    fn diagonal_heights() {
        let d = diagonal_height(&pat(2, &[&[1, 2]]));
        assert_eq!(d.height.square(), &BigUint::from(2u32));
        assert!(d.within_bound() && d.height.certainly_le_ball(&d.product_bound));
        assert_eq!(diagonal_height(&EqualityPattern::trivial(3)).height.square(), &BigUint::from(1u32));
        let d = diagonal_height(&pat(4, &[&[1, 2], &[3, 4]]));
        assert!(d.product_bound.overlaps(&Ball::from_int(8)));
        assert!(d.product_bound.certainly_lt(&Ball::from_int(81)));
        // block indicator minors are all 1: H(Z)² = ∏ block sizes
        for p in EqualityPattern::all(5) {
            let h = diagonal_height(&p);
            let prod: usize = p.block_sizes().iter().product();
            assert_eq!(h.height.square(), &BigUint::from(prod));
            assert!(h.within_bound());
            assert!(h.product_bound.sqr().overlaps(&Ball::from_int(BigInt::from(h.product_bound_square.clone()))));
        }
    }

    #[test]
    fn projection_examples() {
        let l = eqs(2, &[(&[1, 1], -1728)]);
        match project_by_pattern(&l, &EqualityPattern::trivial(2)).unwrap() {
            PatternProjection::Projected { l2, .. } => assert_eq!(l2, l),
            other => panic!("{other:?}"),
        }
        match project_by_pattern(&l, &pat(2, &[&[1, 2]])).unwrap() {
            PatternProjection::Projected { l1, l2 } => {
                assert_eq!(l1, LinearSubvariety::point(q(&[864, 864])));
                assert_eq!(l2, LinearSubvariety::point(q(&[864])));
            }
            other => panic!("{other:?}"),
        }
        let diag = eqs(2, &[(&[1, -1], 0)]);
        assert!(project_by_pattern(&diag, &pat(2, &[&[1, 2]])).unwrap().is_fully_special());
        let pt = LinearSubvariety::point(q(&[1, 2]));
        assert_eq!(project_by_pattern(&pt, &pat(2, &[&[1, 2]])).unwrap(), PatternProjection::Empty);
    }

    #[test]
    fn positive_dim_special_examples() {
        let diag = eqs(2, &[(&[1, -1], 0)]);
        assert!(in_positive_dim_special_rational(&diag, &q(&[1728, 1728])).unwrap());
        let l = eqs(2, &[(&[1, 1], -1728)]);
        assert!(!in_positive_dim_special_rational(&l, &q(&[0, 1728])).unwrap());
        let l3 = eqs(3, &[(&[1, -1, 0], 0)]);
        assert!(in_positive_dim_special_rational(&l3, &q(&[0, 0, 1728])).unwrap());
        assert_eq!(special_direction(&l3, &q(&[0, 0, 1728])).unwrap(), Some(vec![0, 1]));
        assert!(matches!(in_positive_dim_special_rational(&l, &q(&[1, 1])), Err(Error::NotOnSubvariety)));
        let fixed = eqs(2, &[(&[1, 0], -1728)]);
        assert!(in_positive_dim_special_rational(&fixed, &q(&[1728, 0])).unwrap());
    }

    #[test]
    fn diagonal_special_examples() {
        let diag = eqs(2, &[(&[1, -1], 0)]);
        let d = diagonal_specials_in(&diag).unwrap();
        assert_eq!(d, vec![DiagonalSpecial { pattern: pat(2, &[&[1, 2]]), maximal: true }]);
        assert!(diagonal_specials_in(&eqs(2, &[(&[1, 1], -1728)])).unwrap().is_empty());
        let l = eqs(4, &[(&[1, -1, 0, 0], 0), (&[0, 0, 1, -1], 0)]);
        let d = diagonal_specials_in(&l).unwrap();
        let brute: Vec<EqualityPattern> = EqualityPattern::all(4)
            .into_iter()
            .filter(|p| {
                let z = diagonal_of(p);
                z.direction_vectors().iter().all(|v| l.contains_direction(v).unwrap())
                    && l.contains_point(z.offset()).unwrap()
            })
            .collect();
        assert_eq!(d.iter().map(|x| x.pattern.clone()).collect::<Vec<_>>(), brute);
        let maximal: Vec<_> = d.iter().filter(|x| x.maximal).map(|x| x.pattern.to_string()).collect();
        assert_eq!(maximal, ["{{1,2},{3,4}}"]);
        assert_eq!(d.len(), 2);
    }

    /// Brute force: some partition of the coordinates into free blocks (≥ 1) and fixed
    /// coordinates gives a special subvariety through `p` inside `l`.
    fn oracle(l: &LinearSubvariety, p: &[ExactRational]) -> bool {
        let n = p.len();
        for part in EqualityPattern::all(n) {
            let blocks = part.blocks();
            for mask in 1u32..(1 << blocks.len()) {
                let free: Vec<&Vec<usize>> = (0..blocks.len()).filter(|i| mask >> i & 1 == 1).map(|i| &blocks[i]).collect();
                // P must be constant on free blocks
                if !free.iter().all(|b| b.iter().all(|&i| p[i] == p[b[0]])) {
                    continue;
                }
                let dirs: Vec<_> = free.iter().map(|b| indicator(n, b)).collect();
                let x = LinearSubvariety::from_spanning(n, &dirs, p.to_vec()).unwrap();
                let inside = x.direction_vectors().iter().all(|v| l.contains_direction(v).unwrap())
                    && l.contains_point(x.offset()).unwrap();
                if inside {
                    return true;
                }
            }
        }
        false
    }

    fn small_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-3i64..=3, n)
    }

    /// A random proper subvariety through a point whose coordinates repeat often.
    fn subvariety_through_point() -> impl Strategy<Value = (LinearSubvariety, Vec<ExactRational>)> {
        (2usize..=4)
            .prop_flat_map(|n| (Just(n), prop::collection::vec(0i64..3, n), prop::collection::vec(small_vec(n), 1..n)))
            .prop_filter_map("needs a nonzero equation", |(n, p, rows)| {
                let pt: Vec<ExactRational> = p.iter().map(|&x| rat(x * 100)).collect();
                let equations: Vec<AffineEquation> = rows
                    .iter()
                    .filter(|a| a.iter().any(|&x| x != 0))
                    .map(|a| {
                        let e = AffineEquation::from_i64(a, 0);
                        let c = -e.evaluate(&pt);
                        AffineEquation::new(e.coefficients, c)
                    })
                    .collect();
                if equations.is_empty() {
                    return None;
                }
                let l = LinearSubvariety::from_equations(n, &equations).ok()??;
                (!l.is_full()).then_some((l, pt))
            })
    }

    fn random_subvariety() -> impl Strategy<Value = LinearSubvariety> {
        (2usize..=5)
            .prop_flat_map(|n| (Just(n), prop::collection::vec((small_vec(n), -20i64..=20), 1..n)))
            .prop_filter_map("proper and consistent", |(n, rows)| {
                let e: Vec<_> = rows
                    .iter()
                    .filter(|(a, _)| a.iter().any(|&x| x != 0))
                    .map(|(a, b)| AffineEquation::from_i64(a, *b))
                    .collect();
                if e.is_empty() {
                    return None;
                }
                LinearSubvariety::from_equations(n, &e).ok()?
            })
    }

    fn pattern_for(n: usize, seed: usize) -> EqualityPattern {
        let all = EqualityPattern::all(n);
        all[seed % all.len()].clone()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn special_membership_matches_oracle((l, p) in subvariety_through_point()) {
            prop_assert_eq!(in_positive_dim_special_rational(&l, &p).unwrap(), oracle(&l, &p));
        }

        #[test]
        fn height_chain_and_weighted_minors(l in random_subvariety(), seed in 0usize..1000) {
            let pattern = pattern_for(l.ambient_dim(), seed);
            if let PatternProjection::Projected { l1, l2 } = project_by_pattern(&l, &pattern).unwrap() {
                let h1 = subspace_height(&l1);
                let h2 = subspace_height(&l2);
                prop_assert!(h2 <= h1);
                prop_assert!(within_product_bound(&l, &l1));
                let w = weighted_minor_height_square(&l2, &pattern).unwrap();
                prop_assert_eq!(&w, h1.square());
                prop_assert!(HeightValue::from_square(w).value().overlaps(h1.value()));
            }
        }

        #[test]
        fn projection_is_bijective_on_diagonal(seed in 0usize..1000, n in 1usize..=5, vals in prop::collection::vec(-50i64..50, 5)) {
            let pattern = pattern_for(n, seed);
            let reduced: Vec<ExactRational> = vals[..pattern.block_count()].iter().map(|&x| rat(x)).collect();
            let full = pattern.lift(&reduced);
            prop_assert!(diagonal_of(&pattern).contains_point(&full).unwrap());
            prop_assert_eq!(pattern.project(&full), reduced);
        }
    }
}
