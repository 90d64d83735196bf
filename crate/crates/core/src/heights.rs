//! Weil heights of rational points and linear subvarieties.
//!
//! Over ℚ the finite places are absorbed by scaling to a primitive integer vector, so
//! every height computed here is the square root of a positive integer. That integer
//! is kept exactly; comparisons go through it and never through the balls.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::exact_linear::{
    kernel, minors, primitive_integer_vector, subsets, AffineEquation, ExactMatrix, ExactRational, LinearSubvariety,
};

/// Working precision of height balls, in bits.
pub const HEIGHT_PREC: u32 = 128;

/// More completions than this are not searched for the smallest one.
const COMPLETION_SEARCH_LIMIT: usize = 4096;

/// A height `H ≥ 1` with `H² = square` exactly, plus certified balls for `H` and `ln H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightValue {
    square: BigUint,
    value: Ball,
    log: Ball,
}

impl HeightValue {
    pub fn from_square(square: BigUint) -> Self {
        Self::from_square_prec(square, HEIGHT_PREC)
    }

    pub fn from_square_prec(square: BigUint, prec: u32) -> Self {
        assert!(!square.is_zero(), "heights are at least 1");
        let s = Ball::from_int(BigInt::from(square.clone()));
        let value = s.sqrt(prec).expect("positive");
        let log = s.ln(prec).expect("positive").mul_2exp(-1);
        HeightValue { square, value, log }
    }

    pub fn from_integer(h: &BigUint) -> Self {
        Self::from_square(h * h)
    }

    pub fn one() -> Self {
        Self::from_square(BigUint::one())
    }

    /// Exact `H²`.
    pub fn square(&self) -> &BigUint {
        &self.square
    }

    pub fn value(&self) -> &Ball {
        &self.value
    }

    pub fn log(&self) -> &Ball {
        &self.log
    }

    /// `H` itself when it is an integer.
    pub fn as_integer(&self) -> Option<BigUint> {
        let r = self.square.sqrt();
        (&r * &r == self.square).then_some(r)
    }

    /// Recomputes both balls at a higher precision.
    pub fn refine(&self, prec: u32) -> Self {
        Self::from_square_prec(self.square.clone(), prec)
    }
}

impl PartialOrd for HeightValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeightValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.square.cmp(&other.square)
    }
}

impl fmt::Display for HeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(h) => write!(f, "{h}"),
            None => write!(f, "sqrt({}) = {}", self.square, self.value.display_certified()),
        }
    }
}

/// Primitive integer vector on the line through `coords`.
pub fn primitive_coordinates(coords: &[ExactRational]) -> Result<Vec<BigInt>> {
    primitive_integer_vector(coords).ok_or(Error::ZeroVector)
}

/// `H^(∞)`: largest absolute value of the primitive integer representative.
pub fn projective_height_sup(coords: &[ExactRational]) -> Result<HeightValue> {
    let v = primitive_coordinates(coords)?;
    Ok(sup_of_primitive(&v))
}

fn sup_of_primitive(v: &[BigInt]) -> HeightValue {
    let m = v.iter().map(|x| x.magnitude().clone()).max().expect("non-empty");
    HeightValue::from_integer(&m)
}

/// `H^(2)`: Euclidean norm of the primitive integer representative.
pub fn projective_height_l2(coords: &[ExactRational]) -> Result<HeightValue> {
    let v = primitive_coordinates(coords)?;
    Ok(l2_of_primitive(&v))
}

pub(crate) fn l2_of_primitive(v: &[BigInt]) -> HeightValue {
    HeightValue::from_square(norm_sqr(v))
}

pub(crate) fn norm_sqr(v: &[BigInt]) -> BigUint {
    v.iter().map(|x| x.magnitude() * x.magnitude()).sum()
}

/// Affine height `H(p) = H^(∞)(1 : p₁ : … : pₙ)`.
pub fn affine_height(p: &[ExactRational]) -> HeightValue {
    let mut v = Vec::with_capacity(p.len() + 1);
    v.push(BigRational::one());
    v.extend_from_slice(p);
    projective_height_sup(&v).expect("leading 1")
}

/// Primitive integer Grassmann coordinates of the column span of `basis`
/// (columns independent), one per maximal row subset in lexicographic order.
pub fn grassmann_coordinates(basis: &ExactMatrix) -> Result<Vec<BigInt>> {
    let l = basis.cols();
    let dets: Vec<ExactRational> = minors(basis, l)?.into_iter().map(|m| m.det).collect();
    primitive_coordinates(&dets)
}

/// Height of the linear subspace spanned by the columns of `basis`.
pub fn homogeneous_subspace_height(basis: &ExactMatrix) -> Result<HeightValue> {
    if basis.cols() == 0 {
        return Ok(HeightValue::one());
    }
    Ok(l2_of_primitive(&grassmann_coordinates(basis)?))
}

/// `H(L)`, the height of the homogenization of `L` in ℚⁿ⁺¹.
pub fn subspace_height(l: &LinearSubvariety) -> HeightValue {
    homogeneous_subspace_height(&l.homogenized_basis()).expect("homogenized basis is independent")
}

/// A primitive integral equation `a·z + b = 0` vanishing on the proper subvariety `L`
/// whose affine height is at most `H(L)`. The homogenized basis is completed by
/// standard basis vectors to a hyperplane; among the valid completions the one of
/// least height is taken.
pub fn reduce_to_hyperplane(l: &LinearSubvariety) -> Result<AffineEquation> {
    if l.is_full() {
        return Err(Error::FullSpace);
    }
    let n = l.ambient_dim();
    let hb = l.homogenized_basis();
    let missing = n - 1 - l.dim();
    let base_cols = hb.column_vectors();

    let normal_of = |extra: &[usize]| -> Option<Vec<BigInt>> {
        let mut cols = base_cols.clone();
        for &i in extra {
            let mut e = vec![BigRational::zero(); n + 1];
            e[i] = BigRational::one();
            cols.push(e);
        }
        let m = ExactMatrix::from_rows(&cols, n + 1).expect("consistent lengths");
        let k = kernel(&m);
        (k.cols() == 1).then(|| primitive_integer_vector(&k.column(0)).expect("nonzero kernel vector"))
    };

    let candidates = subsets(n + 1, missing);
    let best = if candidates.len() <= COMPLETION_SEARCH_LIMIT {
        candidates.iter().filter_map(|s| normal_of(s)).min_by(|a, b| norm_sqr(a).cmp(&norm_sqr(b)).then_with(|| a.cmp(b)))
    } else {
        candidates.iter().find_map(|s| normal_of(s))
    };
    let normal = best.expect("some standard completion always spans a hyperplane");
    let mut coeffs: Vec<ExactRational> = normal.into_iter().map(BigRational::from_integer).collect();
    let constant = coeffs.pop().expect("n+1 entries");
    Ok(AffineEquation::new(coeffs, constant))
}

/// Height of the primitive equation vector `(a₁ : … : aₙ : b)`.
pub fn equation_height_sup(eq: &AffineEquation) -> Result<HeightValue> {
    let mut v = eq.coefficients.clone();
    v.push(eq.constant.clone());
    projective_height_sup(&v)
}

/// Ball enclosing `H^(−D)`. Its lower endpoint is a certified Liouville gap: every
/// nonzero algebraic number of height ≤ H and degree ≤ D has absolute value at least it.
pub fn liouville_gap(height_bound: &HeightValue, degree_bound: u64) -> Ball {
    assert!(degree_bound >= 1, "degree bound must be positive");
    let sq = height_bound.square();
    if sq.is_one() {
        return Ball::one();
    }
    let bits = sq.bits().saturating_mul(degree_bound);
    if bits > 1 << 22 {
        return liouville_gap_from_log(height_bound.log(), degree_bound);
    }
    let prec = HEIGHT_PREC.max(64);
    let half = (degree_bound / 2) as u32;
    let even_part = num_traits::pow(sq.clone(), half as usize);
    let q = BigRational::new(BigInt::one(), BigInt::from(even_part));
    let mut gap = Ball::from_rational(&q, prec + bits as u32);
    if degree_bound % 2 == 1 {
        if let Some(h) = height_bound.as_integer() {
            gap = gap.div_int(&BigInt::from(h), prec + bits as u32);
        } else {
            let r = height_bound.value().recip(prec + bits as u32).expect("H >= 1");
            gap = &gap * &r;
        }
    }
    gap
}

/// Ball enclosing `exp(−D·λ)` where `λ` is the upper endpoint of `log_height`.
pub fn liouville_gap_from_log(log_height: &Ball, degree_bound: u64) -> Ball {
    let x = log_height.upper().mul_int(&BigInt::from(degree_bound)).negated();
    let top = x.abs_upper_f64() / std::f64::consts::LN_2;
    let prec = HEIGHT_PREC + 64 + top.min(1e8) as u32;
    x.exp(prec)
}

impl HeightValue {
    /// `H ≤ other` when `other` is a positive real ball, checked through squares.
    pub fn certainly_le_ball(&self, other: &Ball) -> bool {
        let sq = Ball::from_int(BigInt::from(self.square.clone()));
        other.is_positive() && sq.certainly_le(&other.lower().sqr())
    }

    /// Whether the height is a square root of a non-negative rational `≤ bound²`.
    pub fn le_rational(&self, bound: &BigRational) -> bool {
        !bound.is_negative() && BigRational::from_integer(BigInt::from(self.square.clone())) <= bound * bound
    }
}
