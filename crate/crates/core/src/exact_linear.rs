//! Exact linear algebra over ℚ and affine-linear subvarieties of 𝔸ⁿ.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type ExactRational = BigRational;

pub fn rat(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Dense row-major matrix of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<ExactRational>,
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<ExactRational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        Ok(ExactMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, entries: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExactMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length. `cols` is needed
    /// only to shape a matrix with no rows.
    pub fn from_rows(rows: &[Vec<ExactRational>], cols: usize) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            entries.extend(r.iter().cloned());
        }
        Ok(ExactMatrix { rows: rows.len(), cols, entries })
    }

    pub fn from_columns(columns: &[Vec<ExactRational>], rows: usize) -> Result<Self> {
        Ok(ExactMatrix::from_rows(columns, rows)?.transpose())
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rs: Vec<Vec<ExactRational>> = rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        ExactMatrix::from_rows(&rs, cols).expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &ExactRational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: ExactRational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[ExactRational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<Vec<ExactRational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<ExactRational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn column_vectors(&self) -> Vec<Vec<ExactRational>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = ExactMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = ExactMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigRational::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc += a * other.get(k, j);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Submatrix on the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> ExactMatrix {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        ExactMatrix { rows: rows.len(), cols: cols.len(), entries }
    }

    pub fn rank(&self) -> usize {
        rref(self).rank
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: ExactMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

pub fn rref(m: &ExactMatrix) -> Rref {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
            continue;
        };
        if p != row {
            for c in 0..a.cols {
                a.entries.swap(p * a.cols + c, row * a.cols + c);
            }
        }
        let inv = a.get(row, col).recip();
        for c in col..a.cols {
            let v = a.get(row, c) * &inv;
            a.set(row, c, v);
        }
        for r in 0..a.rows {
            if r == row {
                continue;
            }
            let factor = a.get(r, col).clone();
            if factor.is_zero() {
                continue;
            }
            for c in col..a.cols {
                let v = a.get(r, c) - &factor * a.get(row, c);
                a.set(r, c, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    let rank = pivots.len();
    Rref { matrix: a, pivots, rank }
}

/// Basis of the right kernel, as the columns of a `cols × nullity` matrix.
pub fn kernel(m: &ExactMatrix) -> ExactMatrix {
    let r = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !r.pivots.contains(c)).collect();
    let mut k = ExactMatrix::zeros(m.cols, free.len());
    for (j, &f) in free.iter().enumerate() {
        k.set(f, j, BigRational::one());
        for (i, &p) in r.pivots.iter().enumerate() {
            k.set(p, j, -r.matrix.get(i, f).clone());
        }
    }
    k
}

/// Determinant of a square matrix by exact Gaussian elimination.
pub fn determinant(m: &ExactMatrix) -> ExactRational {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    let mut a = m.clone();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            for c in 0..n {
                a.entries.swap(p * n + c, col * n + c);
            }
            det = -det;
        }
        let pivot = a.get(col, col).clone();
        det *= &pivot;
        for r in col + 1..n {
            let factor = a.get(r, col) / &pivot;
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let v = a.get(r, c) - &factor * a.get(col, c);
                a.set(r, c, v);
            }
        }
    }
    det
}

/// One `order × order` minor: the chosen rows and columns and the determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Minor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: ExactRational,
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if idx[i] == i + n - k {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All minors of the given order, ordered lexicographically by row subset and then by
/// column subset. When `order` equals the column count (the Grassmann case) there is
/// exactly one minor per row subset.
pub fn minors(m: &ExactMatrix, order: usize) -> Result<Vec<Minor>> {
    let max = m.rows.min(m.cols);
    if order > max {
        return Err(Error::OrderOutOfRange { order, max });
    }
    let col_sets = subsets(m.cols, order);
    let mut out = Vec::new();
    for rows in subsets(m.rows, order) {
        for cols in &col_sets {
            let det = if order == 0 { BigRational::one() } else { determinant(&m.select(&rows, cols)) };
            out.push(Minor { rows: rows.clone(), cols: cols.clone(), det });
        }
    }
    Ok(out)
}

/// Scales a nonzero rational vector to the primitive integer vector on the same line
/// whose first nonzero entry is positive.
pub fn primitive_integer_vector(v: &[ExactRational]) -> Option<Vec<BigInt>> {
    let first = v.iter().position(|x| !x.is_zero())?;
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = if ints[first].is_negative() { -BigInt::one() } else { BigInt::one() };
    Some(ints.into_iter().map(|x| x / &g * &sign).collect())
}

/// Affine equation `coefficients · z + constant = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineEquation {
    #[serde(with = "rational_vec_serde")]
    pub coefficients: Vec<ExactRational>,
    #[serde(with = "rational_serde")]
    pub constant: ExactRational,
}

impl AffineEquation {
    pub fn new(coefficients: Vec<ExactRational>, constant: ExactRational) -> Self {
        AffineEquation { coefficients, constant }
    }

    pub fn from_i64(coefficients: &[i64], constant: i64) -> Self {
        AffineEquation { coefficients: coefficients.iter().map(|&x| rat(x)).collect(), constant: rat(constant) }
    }

    pub fn evaluate(&self, z: &[ExactRational]) -> ExactRational {
        self.coefficients.iter().zip(z).map(|(a, x)| a * x).fold(self.constant.clone(), |acc, t| acc + t)
    }

    pub fn is_trivial(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero)
    }

    /// The same equation scaled to coprime integers with positive leading coefficient.
    pub fn primitive(&self) -> AffineEquation {
        let mut all = self.coefficients.clone();
        all.push(self.constant.clone());
        match primitive_integer_vector(&all) {
            None => self.clone(),
            Some(ints) => {
                let mut rs: Vec<ExactRational> = ints.into_iter().map(BigRational::from_integer).collect();
                let constant = rs.pop().expect("non-empty");
                AffineEquation { coefficients: rs, constant }
            }
        }
    }
}

impl fmt::Display for AffineEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.coefficients.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let (sign, mag) = if a.is_negative() { ("-", -a.clone()) } else { ("+", a.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag.is_one() {
                write!(f, "z{}", i + 1)?;
            } else {
                write!(f, "{}*z{}", mag, i + 1)?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        if !self.constant.is_zero() {
            let (sign, mag) = if self.constant.is_negative() { ("-", -self.constant.clone()) } else { ("+", self.constant.clone()) };
            write!(f, " {sign} {mag}")?;
        }
        write!(f, " = 0")
    }
}

/// Affine-linear subvariety `offset + span(directions)` of 𝔸ⁿ over ℚ, stored in a
/// canonical form: direction vectors are the nonzero rows of a reduced row echelon
/// matrix, and the offset vanishes in every pivot coordinate. Two equal subvarieties
/// therefore compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearSubvariety {
    ambient_dim: usize,
    /// Canonical direction vectors (rows), each of length `ambient_dim`.
    basis: Vec<Vec<ExactRational>>,
    pivots: Vec<usize>,
    offset: Vec<ExactRational>,
}

impl LinearSubvariety {
    /// `offset + span(directions)`. Directions must be linearly independent.
    pub fn from_basis(ambient_dim: usize, directions: &[Vec<ExactRational>], offset: Vec<ExactRational>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        if offset.len() != ambient_dim {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: offset.len() });
        }
        let m = ExactMatrix::from_rows(directions, ambient_dim)?;
        let r = rref(&m);
        if r.rank != directions.len() {
            return Err(Error::DependentDirections);
        }
        Ok(Self::from_rref(ambient_dim, &r, offset))
    }

    /// Like [`from_basis`](Self::from_basis) but tolerates dependent spanning vectors.
    pub fn from_spanning(ambient_dim: usize, directions: &[Vec<ExactRational>], offset: Vec<ExactRational>) -> Result<Self> {
        if offset.len() != ambient_dim {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: offset.len() });
        }
        let m = ExactMatrix::from_rows(directions, ambient_dim)?;
        Ok(Self::from_rref(ambient_dim, &rref(&m), offset))
    }

    fn from_rref(ambient_dim: usize, r: &Rref, mut offset: Vec<ExactRational>) -> Self {
        let basis: Vec<Vec<ExactRational>> = (0..r.rank).map(|i| r.matrix.row(i).to_vec()).collect();
        for (row, &p) in basis.iter().zip(&r.pivots) {
            let f = offset[p].clone();
            if !f.is_zero() {
                for (o, b) in offset.iter_mut().zip(row) {
                    *o -= &f * b;
                }
            }
        }
        LinearSubvariety { ambient_dim, basis, pivots: r.pivots.clone(), offset }
    }

    /// Solution set of the system `eq_i(z) = 0`; `None` when inconsistent.
    pub fn from_equations(ambient_dim: usize, equations: &[AffineEquation]) -> Result<Option<Self>> {
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        let n = ambient_dim;
        let mut aug = ExactMatrix::zeros(equations.len(), n + 1);
        for (i, e) in equations.iter().enumerate() {
            if e.coefficients.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.coefficients.len() });
            }
            for (j, a) in e.coefficients.iter().enumerate() {
                aug.set(i, j, a.clone());
            }
            aug.set(i, n, -e.constant.clone());
        }
        let r = rref(&aug);
        if r.pivots.last() == Some(&n) {
            return Ok(None);
        }
        let mut offset = vec![BigRational::zero(); n];
        for (i, &p) in r.pivots.iter().enumerate() {
            offset[p] = r.matrix.get(i, n).clone();
        }
        let coeff = ExactMatrix::from_rows(
            &(0..r.rank).map(|i| r.matrix.row(i)[..n].to_vec()).collect::<Vec<_>>(),
            n,
        )?;
        let k = kernel(&coeff);
        Ok(Some(Self::from_basis(n, &k.column_vectors(), offset)?))
    }

    pub fn whole_space(n: usize) -> Self {
        let id = ExactMatrix::identity(n);
        Self::from_rref(n, &rref(&id), vec![BigRational::zero(); n])
    }

    pub fn point(p: Vec<ExactRational>) -> Self {
        LinearSubvariety { ambient_dim: p.len(), basis: Vec::new(), pivots: Vec::new(), offset: p }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Canonical direction vectors.
    pub fn direction_vectors(&self) -> &[Vec<ExactRational>] {
        &self.basis
    }

    /// Directions as the columns of an `n × l` matrix.
    pub fn directions(&self) -> ExactMatrix {
        ExactMatrix::from_columns(&self.basis, self.ambient_dim).expect("consistent lengths")
    }

    pub fn offset(&self) -> &[ExactRational] {
        &self.offset
    }

    /// Basis of the homogenized subspace `π⁻¹(Lʰ) ⊆ ℚⁿ⁺¹` as the columns of an
    /// `(n+1) × (l+1)` matrix: directions extended by 0, then the offset extended by 1.
    pub fn homogenized_basis(&self) -> ExactMatrix {
        let mut cols: Vec<Vec<ExactRational>> = self
            .basis
            .iter()
            .map(|d| {
                let mut v = d.clone();
                v.push(BigRational::zero());
                v
            })
            .collect();
        let mut o = self.offset.clone();
        o.push(BigRational::one());
        cols.push(o);
        ExactMatrix::from_columns(&cols, self.ambient_dim + 1).expect("consistent lengths")
    }

    fn reduce(&self, v: &[ExactRational]) -> Vec<ExactRational> {
        let mut w = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let f = w[p].clone();
            if !f.is_zero() {
                for (x, b) in w.iter_mut().zip(row) {
                    *x -= &f * b;
                }
            }
        }
        w
    }

    pub fn contains_direction(&self, v: &[ExactRational]) -> Result<bool> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: v.len() });
        }
        Ok(self.reduce(v).iter().all(Zero::is_zero))
    }

    pub fn contains_point(&self, p: &[ExactRational]) -> Result<bool> {
        if p.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: p.len() });
        }
        let d: Vec<ExactRational> = p.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        self.contains_direction(&d)
    }

    /// Canonical defining equations (one per codimension), each primitive integral.
    pub fn equations(&self) -> Vec<AffineEquation> {
        let n = self.ambient_dim;
        let d = ExactMatrix::from_rows(&self.basis, n).expect("consistent lengths");
        let ann = kernel(&d);
        let ann_rows = rref(&ann.transpose());
        (0..ann_rows.rank)
            .map(|i| {
                let w = ann_rows.matrix.row(i).to_vec();
                let b = -w.iter().zip(&self.offset).map(|(a, x)| a * x).fold(BigRational::zero(), |s, t| s + t);
                AffineEquation::new(w, b).primitive()
            })
            .collect()
    }

    /// Exact intersection; `None` when empty.
    pub fn intersect(&self, other: &LinearSubvariety) -> Result<Option<LinearSubvariety>> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: other.ambient_dim });
        }
        let mut eqs = self.equations();
        eqs.extend(other.equations());
        LinearSubvariety::from_equations(self.ambient_dim, &eqs)
    }

    /// Point `offset + Σ tᵢ·directionᵢ`.
    pub fn point_at(&self, t: &[ExactRational]) -> Vec<ExactRational> {
        let mut p = self.offset.clone();
        for (ti, d) in t.iter().zip(&self.basis) {
            for (x, y) in p.iter_mut().zip(d) {
                *x += ti * y;
            }
        }
        p
    }
}

impl fmt::Display for LinearSubvariety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eqs = self.equations();
        if eqs.is_empty() {
            return write!(f, "A^{}", self.ambient_dim);
        }
        let parts: Vec<String> = eqs.iter().map(|e| e.to_string()).collect();
        write!(f, "V({})", parts.join(", "))
    }
}

/// Serde helpers: rationals travel as `"p/q"` strings.
pub mod rational_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &ExactRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ExactRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod rational_vec_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[ExactRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|q| q.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ExactRational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<ExactRational> {
    let t = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) || !ip.chars().all(|c| c.is_ascii_digit()) || (ip.is_empty() && fp.is_empty()) {
            return Err(bad());
        }
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let q = BigRational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}
