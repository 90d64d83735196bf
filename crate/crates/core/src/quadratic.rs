//! Imaginary quadratic discriminants, reduced binary quadratic forms, class numbers
//! and ring class field degrees.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ball::Ball;
use crate::error::{Error, Result};

const PREC: u32 = 128;

/// `Δ = f²·d` with `d` the discriminant of the maximal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Discriminant {
    value: i64,
    fundamental: i64,
    conductor: u64,
}

impl Discriminant {
    pub fn new(value: i64) -> Result<Self> {
        classify_discriminant(value)
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn abs(&self) -> u64 {
        self.value.unsigned_abs()
    }

    pub fn fundamental(&self) -> i64 {
        self.fundamental
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Number of distinct prime divisors.
pub fn omega(n: u64) -> usize {
    factorize(n).len()
}

fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Whether `d < 0` is the discriminant of an imaginary quadratic field.
pub fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let m = d.unsigned_abs();
    match d.rem_euclid(4) {
        1 => is_squarefree(m),
        0 => {
            let q = d / 4;
            matches!(q.rem_euclid(4), 2 | 3) && is_squarefree(q.unsigned_abs())
        }
        _ => false,
    }
}

/// Splits `Δ` into conductor and fundamental part.
pub fn classify_discriminant(value: i64) -> Result<Discriminant> {
    if value >= 0 || !matches!(value.rem_euclid(4), 0 | 1) || value == i64::MIN {
        return Err(Error::InvalidDiscriminant(value));
    }
    let m = value.unsigned_abs();
    let mut f0 = 1u64;
    for (p, e) in factorize(m) {
        f0 *= p.pow(e / 2);
    }
    let core = value / (f0 * f0) as i64;
    let (fundamental, conductor) = if core.rem_euclid(4) == 1 { (core, f0) } else { (4 * core, f0 / 2) };
    debug_assert!(is_fundamental(fundamental));
    Ok(Discriminant { value, fundamental, conductor })
}

/// Reduced positive definite form `ax² + bxy + cy²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReducedForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl ReducedForm {
    /// Checks the reduction inequalities.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = ReducedForm { a, b, c };
        if f.is_reduced() {
            Ok(f)
        } else {
            Err(Error::InvalidArgument(format!("({a},{b},{c}) is not a reduced positive definite form")))
        }
    }

    pub fn is_reduced(&self) -> bool {
        let ReducedForm { a, b, c } = *self;
        a > 0 && self.discriminant() < 0 && ((-a < b && b <= a && a < c) || (0 <= b && b <= a && a == c))
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// Reduced forms of order dividing two in the class group are exactly these.
    pub fn is_ambiguous(&self) -> bool {
        self.b == 0 || self.a == self.b || self.a == self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// All primitive reduced forms of discriminant `Δ`, sorted by `(a, b)`.
pub fn reduced_forms(disc: &Discriminant) -> Vec<ReducedForm> {
    let delta = disc.value();
    let m = disc.abs();
    let bmax = ((m / 3) as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    let start = if delta.rem_euclid(2) == 0 { 0 } else { 1 };
    let mut b = start;
    while b <= bmax {
        let n = (b * b - delta) / 4;
        let mut a = b.max(1);
        while a * a <= n {
            if n % a == 0 {
                let c = n / a;
                for s in if b == 0 { vec![0] } else { vec![b, -b] } {
                    let f = ReducedForm { a, b: s, c };
                    if f.is_reduced() && f.is_primitive() {
                        out.push(f);
                    }
                }
            }
            a += 1;
        }
        b += 2;
    }
    out.sort();
    out
}

/// Primitive reduced forms of every discriminant with `|Δ| ≤ max_abs`, keyed by `|Δ|`.
pub fn reduced_forms_up_to(max_abs: u64) -> BTreeMap<u64, Vec<ReducedForm>> {
    let mut map: BTreeMap<u64, Vec<ReducedForm>> = BTreeMap::new();
    let x = max_abs as i64;
    let mut a = 1i64;
    while 3 * a * a <= x {
        for b in -a + 1..=a {
            let mut c = a;
            loop {
                let d = 4 * a * c - b * b;
                if d > x {
                    break;
                }
                let f = ReducedForm { a, b, c };
                if f.is_reduced() && f.is_primitive() {
                    map.entry(d as u64).or_default().push(f);
                }
                c += 1;
            }
        }
        a += 1;
    }
    for v in map.values_mut() {
        v.sort();
    }
    map
}

pub fn class_number(disc: &Discriminant) -> u64 {
    reduced_forms(disc).len() as u64
}

/// `ψ(N) = N·∏_{p|N}(1 + 1/p)`, the partial degrees of the modular polynomial.
pub fn psi(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument("psi is defined for N >= 1".into()));
    }
    let mut r = n;
    for p in prime_divisors(n) {
        r = r / p * (p + 1);
    }
    Ok(r)
}

/// Kronecker symbol `(a/n)` for `n ≥ 1`.
pub fn kronecker(a: i64, n: u64) -> i32 {
    assert!(n >= 1, "kronecker symbol needs n >= 1");
    let mut n = n;
    let mut result = 1i32;
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= tz;
    }
    // Jacobi symbol (a mod n / n) for odd n
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Unit index `[𝒪_K^× : 𝒪_{K,f}^×]`: 3 for `d = −3`, 2 for `d = −4` when `f ≠ 1`, else 1.
pub fn unit_index(d: i64, f: u64) -> u64 {
    match (d, f) {
        (_, 1) => 1,
        (-3, _) => 3,
        (-4, _) => 2,
        _ => 1,
    }
}

/// `[K[cf] : K[f]]` for the field of discriminant `d`.
pub fn rcf_degree_ratio(d: i64, f: u64, c: u64) -> Result<BigRational> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    if f == 0 || c == 0 {
        return Err(Error::InvalidArgument("conductors must be positive".into()));
    }
    let cf = c.checked_mul(f).ok_or_else(|| Error::InvalidArgument("conductor overflow".into()))?;
    let mut r = BigRational::new(BigInt::from(unit_index(d, f) * c), BigInt::from(unit_index(d, cf)));
    for p in prime_divisors(cf) {
        if f % p != 0 {
            let chi = kronecker(d, p) as i64;
            r *= BigRational::new(BigInt::from(p as i64 - chi), BigInt::from(p));
        }
    }
    Ok(r)
}

/// `h(f²d)` from `h(d)` by the class number formula.
pub fn class_number_from_fundamental(d: i64, h_d: u64, f: u64) -> Result<u64> {
    let r = rcf_degree_ratio(d, 1, f)? * BigRational::from_integer(BigInt::from(h_d));
    if !r.is_integer() {
        return Err(Error::InvalidArgument(format!("non-integral class number for d={d}, f={f}")));
    }
    r.to_integer().to_u64().ok_or_else(|| Error::InvalidArgument("class number overflow".into()))
}

/// `(√6/12)·√c`, a lower bound for every `[K[cf]:K[f]]`.
pub fn rcf_degree_lower_bound(c: u64) -> Ball {
    Ball::from_int(6 * c as u128).sqrt(PREC).expect("positive").div_int(&BigInt::from(12), PREC)
}

/// Weaker general lower bound `(c/3)·(1/2)^ω(c)`.
pub fn rcf_degree_omega_bound(c: u64) -> BigRational {
    BigRational::new(BigInt::from(c), BigInt::from(3u64 << omega(c)))
}

/// `7.4·10⁻⁴·|Δ|^(5/12)`; a strict lower bound for `h(Δ)` unless `Δ` belongs to the
/// single possible exceptional field, which is not computable.
pub fn siegel_tatuzawa_floor(disc: &Discriminant) -> Ball {
    let c = Ball::from_rational(&BigRational::new(BigInt::from(74), BigInt::from(100_000)), PREC);
    let l = Ball::from_int(disc.abs()).ln(PREC).expect("positive");
    let e = l.mul_int(&BigInt::from(5)).div_int(&BigInt::from(12), PREC).exp(PREC);
    &c * &e
}

/// `dim_𝔽₂ Pic(𝒪_Δ)[2]`, from the number of ambiguous reduced forms.
pub fn two_rank(disc: &Discriminant) -> u32 {
    let count = reduced_forms(disc).iter().filter(|f| f.is_ambiguous()).count() as u64;
    debug_assert!(count.is_power_of_two());
    count.trailing_zeros()
}

/// Both sides of the `n`-th root bound on the 2-rank.
#[derive(Clone, Debug)]
pub struct TwoRankBound {
    /// `4·(n!)^(1/n)·|Δ|^(1/n)`.
    pub intermediate: Ball,
    /// `4n²·|Δ|^(1/n)`.
    pub bound: Ball,
}

pub fn two_rank_root_bound(disc: &Discriminant, n: u32) -> Result<TwoRankBound> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let nn = BigInt::from(n);
    let root = |x: Ball| -> Ball { x.ln(PREC).expect("positive").div_int(&nn, PREC).exp(PREC) };
    let disc_root = root(Ball::from_int(disc.abs()));
    let fact: BigInt = (1..=n as u64).map(BigInt::from).product();
    let fact_root = root(Ball::from_int(fact));
    let intermediate = (&fact_root * &disc_root).mul_int(&BigInt::from(4));
    let bound = disc_root.mul_int(&BigInt::from(4u64 * n as u64 * n as u64));
    Ok(TwoRankBound { intermediate, bound })
}

/// `4·ln|Δ|`, the weak logarithmic 2-rank estimate.
pub fn two_rank_log_bound(disc: &Discriminant) -> Ball {
    Ball::from_int(disc.abs()).ln(PREC).expect("positive").mul_int(&BigInt::from(4))
}

/// Every negative discriminant with `|Δ| ≤ max_abs`, ascending in `|Δ|`.
pub fn discriminants_up_to(max_abs: u64) -> Vec<Discriminant> {
    (3..=max_abs)
        .filter(|m| matches!(m % 4, 0 | 3))
        .map(|m| classify_discriminant(-(m as i64)).expect("congruence checked"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    fn disc(v: i64) -> Discriminant {
        Discriminant::new(v).unwrap()
    }

    fn forms(v: i64) -> Vec<(i64, i64, i64)> {
        reduced_forms(&disc(v)).iter().map(|f| (f.a, f.b, f.c)).collect()
    }

    #[test]
    fn classify_examples() {
        let d = disc(-4);
        assert_eq!((d.fundamental(), d.conductor()), (-4, 1));
        let d = disc(-16);
        assert_eq!((d.fundamental(), d.conductor()), (-4, 2));
        let d = disc(-12);
        assert_eq!((d.fundamental(), d.conductor()), (-3, 2));
        let d = disc(-8);
        assert_eq!((d.fundamental(), d.conductor()), (-8, 1));
        let d = disc(-72);
        assert_eq!((d.fundamental(), d.conductor()), (-8, 3));
        assert_eq!(Discriminant::new(-1), Err(Error::InvalidDiscriminant(-1)));
        assert_eq!(Discriminant::new(-5), Err(Error::InvalidDiscriminant(-5)));
        assert_eq!(Discriminant::new(4), Err(Error::InvalidDiscriminant(4)));
    }

    #[test]
    fn reduced_form_examples() {
        assert_eq!(forms(-4), vec![(1, 0, 1)]);
        assert_eq!(forms(-23), vec![(1, 1, 6), (2, -1, 3), (2, 1, 3)]);
        assert_eq!(forms(-3), vec![(1, 1, 1)]);
        assert_eq!(forms(-15), vec![(1, 1, 4), (2, 1, 2)]);
    }

    #[test]
    fn class_number_examples() {
        assert_eq!(class_number(&disc(-4)), 1);
        assert_eq!(class_number(&disc(-23)), 3);
        assert_eq!(class_number(&disc(-47)), 5);
        assert_eq!(class_number(&disc(-163)), 1);
        assert_eq!(class_number(&disc(-16)), 1);
        assert_eq!(class_number(&disc(-12)), 1);
        assert_eq!(class_number(&disc(-28)), 1);
    }

    #[test]
    fn class_number_one_discriminants() {
        let ones: Vec<i64> =
            discriminants_up_to(200).into_iter().filter(|d| class_number(d) == 1).map(|d| d.value()).collect();
        assert_eq!(ones, vec![-3, -4, -7, -8, -11, -12, -16, -19, -27, -28, -43, -67, -163]);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(1).unwrap(), 1);
        assert_eq!(psi(6).unwrap(), 12);
        assert_eq!(psi(7).unwrap(), 8);
        assert_eq!(psi(4).unwrap(), 6);
        assert!(psi(0).is_err());
    }

    #[test]
    fn kronecker_against_residues() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            for a in -40i64..40 {
                let expected = if a.rem_euclid(p as i64) == 0 {
                    0
                } else if (1..p).any(|x| (x * x) % p == a.rem_euclid(p as i64) as u64) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(a, p), expected, "({a}/{p})");
            }
        }
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(5, 1), 1);
    }

    #[test]
    fn rcf_ratio_examples() {
        assert_eq!(rcf_degree_ratio(-4, 1, 2).unwrap(), BigRational::one());
        assert_eq!(rcf_degree_ratio(-3, 1, 3).unwrap(), BigRational::one());
        let r = rcf_degree_ratio(-7, 1, 2).unwrap();
        assert_eq!(r, BigRational::from_integer(BigInt::from(class_number(&disc(-28)) / class_number(&disc(-7)))));
        assert!(rcf_degree_ratio(-12, 1, 2).is_err());
    }

    #[test]
    fn rcf_ratio_matches_form_counts() {
        for d in (3..=500i64).map(|m| -m).filter(|&d| is_fundamental(d)) {
            let hd = class_number(&disc(d));
            for f in 1..=10u64 {
                let hf = class_number(&disc(d * (f * f) as i64));
                let r = rcf_degree_ratio(d, 1, f).unwrap();
                assert_eq!(r, BigRational::new(BigInt::from(hf), BigInt::from(hd)), "d={d} f={f}");
                assert_eq!(class_number_from_fundamental(d, hd, f).unwrap(), hf);
            }
        }
    }

    #[test]
    fn rcf_ratio_between_orders_matches_form_counts() {
        for d in [-3i64, -4, -7, -8, -15, -20, -23] {
            for f in 1..=6u64 {
                for c in 1..=6u64 {
                    let num = class_number(&disc(d * (c * c * f * f) as i64));
                    let den = class_number(&disc(d * (f * f) as i64));
                    let r = rcf_degree_ratio(d, f, c).unwrap();
                    assert_eq!(r, BigRational::new(BigInt::from(num), BigInt::from(den)), "d={d} f={f} c={c}");
                    let lb = rcf_degree_lower_bound(c);
                    let rb = Ball::from_rational(&r, 128);
                    assert!(lb.certainly_le(&rb), "lower bound fails at d={d} f={f} c={c}");
                    assert!(rcf_degree_omega_bound(c) <= r);
                }
            }
        }
    }

    #[test]
    fn lower_bound_examples() {
        let b = rcf_degree_lower_bound(1);
        assert!((b.mid_f64() - 6f64.sqrt() / 12.0).abs() < 1e-15);
        assert!(rcf_degree_lower_bound(6).contains(&Ball::from_dyadic(BigInt::one(), -1)));
        assert!(rcf_degree_lower_bound(24).contains(&Ball::one()));
    }

    #[test]
    fn siegel_floor_examples() {
        let b = siegel_tatuzawa_floor(&disc(-4));
        assert!((b.mid_f64() - 7.4e-4 * 4f64.powf(5.0 / 12.0)).abs() < 1e-15);
        assert!((b.mid_f64() - 1.317e-3).abs() < 5e-6);
        let b = siegel_tatuzawa_floor(&disc(-10000));
        assert!((b.mid_f64() - 0.03435).abs() < 1e-4);
    }

    #[test]
    fn siegel_floor_sweep() {
        let table = reduced_forms_up_to(10_000);
        for d in discriminants_up_to(10_000) {
            let h = table.get(&d.abs()).map_or(0, |v| v.len());
            let floor = siegel_tatuzawa_floor(&d);
            assert!(floor.certainly_lt(&Ball::from_int(h as u64)), "h({}) = {h}", d.value());
        }
    }

    #[test]
    fn two_rank_examples() {
        assert_eq!(two_rank(&disc(-4)), 0);
        assert_eq!(two_rank(&disc(-15)), 1);
        assert_eq!(two_rank(&disc(-84)), 2);
        assert_eq!(class_number(&disc(-84)), 4);
    }

    #[test]
    fn two_rank_bound_examples() {
        let b = two_rank_root_bound(&disc(-4), 1).unwrap();
        assert!(b.bound.contains(&Ball::from_int(16)));
        assert!(b.intermediate.overlaps(&Ball::from_int(16)));
        let b = two_rank_root_bound(&disc(-4), 2).unwrap();
        assert!(b.bound.overlaps(&Ball::from_int(32)));
        assert!(two_rank_root_bound(&disc(-4), 0).is_err());
    }

    #[test]
    fn two_rank_within_root_bounds() {
        let table = reduced_forms_up_to(10_000);
        for d in discriminants_up_to(10_000) {
            let forms = &table[&d.abs()];
            let amb = forms.iter().filter(|f| f.is_ambiguous()).count() as u64;
            assert!(amb.is_power_of_two());
            let r = amb.trailing_zeros();
            let rb = Ball::from_int(r);
            for n in 1..=6 {
                let b = two_rank_root_bound(&d, n).unwrap();
                assert!(rb.certainly_le(&b.intermediate));
                assert!(!b.bound.certainly_lt(&b.intermediate));
            }
            assert!(rb.certainly_le(&two_rank_log_bound(&d)));
        }
    }

    #[test]
    fn batch_enumeration_is_complete() {
        let table = reduced_forms_up_to(10_000);
        for d in discriminants_up_to(10_000) {
            let brute = brute_force_forms(d.value());
            assert_eq!(reduced_forms(&d), brute, "Δ={}", d.value());
            assert_eq!(table.get(&d.abs()).cloned().unwrap_or_default(), brute);
        }
    }

    fn brute_force_forms(delta: i64) -> Vec<ReducedForm> {
        let m = -delta;
        let mut out = Vec::new();
        let mut a = 1;
        while 3 * a * a <= m {
            for b in -a..=a {
                let num = b * b - delta;
                if num % (4 * a) == 0 {
                    let f = ReducedForm { a, b, c: num / (4 * a) };
                    if f.is_reduced() && f.is_primitive() {
                        out.push(f);
                    }
                }
            }
            a += 1;
        }
        out.sort();
        out
    }

    #[test]
    fn forms_are_reduced_and_inside_fundamental_domain() {
        for f in reduced_forms(&disc(-5000)) {
            assert!(ReducedForm::new(f.a, f.b, f.c).is_ok());
            assert_eq!(f.discriminant(), -5000);
        }
    }

    proptest! {
        #[test]
        fn rcf_telescopes_over_gcd_lcm(
            d in prop::sample::select(vec![-7i64, -8, -11, -15, -19, -20, -23, -24, -31, -35, -39, -40]),
            f1 in 1u64..40, f2 in 1u64..40,
        ) {
            let g = f1.gcd(&f2);
            let l = f1.lcm(&f2);
            let deg = |f: u64| rcf_degree_ratio(d, 1, f).unwrap();
            prop_assert_eq!(deg(l) * deg(g), deg(f1) * deg(f2));
        }

        #[test]
        fn classify_roundtrip(m in 3u64..2_000_000) {
            prop_assume!(matches!(m % 4, 0 | 3));
            let d = disc(-(m as i64));
            prop_assert!(is_fundamental(d.fundamental()));
            prop_assert_eq!(d.fundamental() * (d.conductor() * d.conductor()) as i64, d.value());
        }
    }
}
