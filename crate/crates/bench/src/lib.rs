//! Fixed inputs shared by the benchmarks, so timings stay comparable across runs.

use linspecial_core::exact_linear::{AffineEquation, LinearSubvariety};

/// `z₁ + z₂ = 1728` in `𝔸²`.
pub fn sum_line() -> LinearSubvariety {
    plane(&[&[1, 1]], &[-1728])
}

/// `z₁ − 2z₂ + z₃ = 0` in `𝔸³`, a plane through the origin with diagonal specials.
pub fn balanced_plane() -> LinearSubvariety {
    plane(&[&[1, -2, 1]], &[0])
}

/// Discriminants of increasing class number.
pub const CLASS_POLY_DISCRIMINANTS: [i64; 4] = [-163, -23, -95, -719];

fn plane(rows: &[&[i64]], constants: &[i64]) -> LinearSubvariety {
    let n = rows[0].len();
    let eqs: Vec<AffineEquation> = rows.iter().zip(constants).map(|(r, &c)| AffineEquation::from_i64(r, c)).collect();
    LinearSubvariety::from_equations(n, &eqs).expect("valid").expect("consistent")
}
