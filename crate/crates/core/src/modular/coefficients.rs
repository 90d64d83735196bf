//! Exact Fourier coefficients of `j(q) = q⁻¹ + 744 + 196884q + …`.

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// `table[k + 1] = c_k` for `k = -1, 0, 1, …`.
static TABLE: RwLock<Option<Arc<Vec<BigInt>>>> = RwLock::new(None);

/// Coefficients `c_{-1}, …, c_max` (so `max + 2` entries), computed once and shared.
pub fn j_coefficients(max: usize) -> Arc<Vec<BigInt>> {
    if let Some(t) = TABLE.read().expect("coefficient table").as_ref() {
        if t.len() >= max + 2 {
            return Arc::clone(t);
        }
    }
    let mut guard = TABLE.write().expect("coefficient table");
    if let Some(t) = guard.as_ref() {
        if t.len() >= max + 2 {
            return Arc::clone(t);
        }
    }
    let have = guard.as_ref().map_or(0, |t| t.len());
    let want = (max + 2).max(2 * have).max(64);
    let t = Arc::new(compute(want - 2));
    *guard = Some(Arc::clone(&t));
    t
}

fn sigma(n: usize, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

fn mul_truncated(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `j = E₄³ · q⁻¹ ∏(1 − qⁿ)⁻²⁴`, all series truncated after `q^(max+1)`.
fn compute(max: usize) -> Vec<BigInt> {
    let len = max + 2;
    let mut e4 = vec![BigInt::one(); len];
    for (n, c) in e4.iter_mut().enumerate().skip(1) {
        *c = sigma(n, 3) * 240;
    }
    let e4_cubed = mul_truncated(&mul_truncated(&e4, &e4, len), &e4, len);
    // p[n]: coefficients of ∏(1 − qⁿ)⁻²⁴, from n·p[n] = 24 Σ σ₁(k) p[n−k]
    let s1: Vec<BigInt> = (0..len).map(|k| if k == 0 { BigInt::zero() } else { sigma(k, 1) }).collect();
    let mut p = vec![BigInt::zero(); len];
    p[0] = BigInt::one();
    for n in 1..len {
        let mut acc = BigInt::zero();
        for k in 1..=n {
            acc += &s1[k] * &p[n - k];
        }
        p[n] = acc * 24 / BigInt::from(n);
    }
    mul_truncated(&e4_cubed, &p, len)
}

/// `ln c_k < 4π√k` for every `k ≥ 1`; this log-space bound drives the truncation
/// tail estimate.
pub fn coefficient_log_bound(k: u64) -> f64 {
    4.0 * std::f64::consts::PI * (k as f64).sqrt()
}
