//! Machine-readable solve reports. Every number is a string or an integer so that
//! parsing and re-serializing is byte-identical.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::moduli::ModulusId;
use super::solve::{CapSource, Solution, SolveStats, SolveStatus};
use crate::heights::subspace_height;

pub const REPORT_FORMAT: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    pub ambient_dim: usize,
    pub dim: usize,
    pub equations: Vec<String>,
    /// `H(L)` with its certified digits.
    pub height: String,
    /// `H(L)²`, an exact integer.
    pub height_squared: String,
    pub log_height: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundEcho {
    pub n: u64,
    pub degree: u64,
    pub c1: String,
    pub c2: String,
    pub sqrt_cap: String,
    pub theorem_cap: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapEcho {
    pub user: Option<u64>,
    pub theorem: String,
    pub effective: String,
    pub source: CapSource,
    pub refusal_threshold: u64,
    pub executed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalEcho {
    pub pattern: String,
    pub maximal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointEcho {
    pub moduli: Vec<String>,
    pub pattern: String,
    pub values: Vec<String>,
    pub residual: String,
    pub precision_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndecidedEcho {
    pub moduli: Vec<String>,
    pub pattern: String,
    pub residual: String,
    pub precision_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub format: u32,
    pub input: InputEcho,
    pub bound: BoundEcho,
    pub cap: CapEcho,
    pub status: SolveStatus,
    /// The discriminant cap holds unconditionally, so this is always false.
    pub assume_no_exceptional_field: bool,
    pub diagonal_specials: Vec<DiagonalEcho>,
    pub special_patterns: Vec<String>,
    pub points: Vec<PointEcho>,
    pub undecided: Vec<UndecidedEcho>,
    pub stats: SolveStats,
}

fn ids(m: &[ModulusId]) -> Vec<String> {
    m.iter().map(ToString::to_string).collect()
}

pub fn format_residual(r: f64) -> String {
    format!("{r:.3e}")
}

impl Solution {
    pub fn report(&self) -> SolveReport {
        let l = &self.subvariety;
        let h = subspace_height(l);
        let b = &self.bound;
        SolveReport {
            format: REPORT_FORMAT,
            input: InputEcho {
                ambient_dim: l.ambient_dim(),
                dim: l.dim(),
                equations: l.equations().iter().map(ToString::to_string).collect(),
                height: h.value().display_certified(),
                height_squared: h.square().to_string(),
                log_height: h.log().display_certified(),
            },
            bound: BoundEcho {
                n: b.n,
                degree: b.degree,
                c1: b.c1.to_string(),
                c2: b.c2.to_string(),
                sqrt_cap: b.sqrt_cap.display_certified(),
                theorem_cap: b.discriminant_cap.to_string(),
            },
            cap: CapEcho {
                user: self.cap.user,
                theorem: self.cap.theorem.to_string(),
                effective: self.cap.effective.to_string(),
                source: self.cap.source,
                refusal_threshold: self.cap.refusal_threshold,
                executed: self.status != SolveStatus::Refused,
            },
            status: self.status,
            assume_no_exceptional_field: false,
            diagonal_specials: self
                .diagonal_specials
                .iter()
                .map(|d| DiagonalEcho { pattern: d.pattern.to_string(), maximal: d.maximal })
                .collect(),
            special_patterns: self.special_patterns.iter().map(ToString::to_string).collect(),
            points: self
                .points
                .iter()
                .map(|p| PointEcho {
                    moduli: ids(&p.moduli),
                    pattern: p.pattern.to_string(),
                    values: p.values.iter().map(ToString::to_string).collect(),
                    residual: format_residual(p.residual),
                    precision_bits: p.precision_bits,
                })
                .collect(),
            undecided: self
                .undecided
                .iter()
                .map(|u| UndecidedEcho {
                    moduli: ids(&u.moduli),
                    pattern: u.pattern.to_string(),
                    residual: format_residual(u.residual),
                    precision_bits: u.precision_bits,
                })
                .collect(),
            stats: self.stats.clone(),
        }
    }
}

fn status_word(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Complete => "complete",
        SolveStatus::Undecided => "undecided tuples present",
        SolveStatus::Refused => "refused: cap above threshold",
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = &self.input;
        writeln!(f, "subvariety of dimension {} in A^{}:", i.dim, i.ambient_dim)?;
        for e in &i.equations {
            writeln!(f, "  {e}")?;
        }
        writeln!(f, "H(L) = {}  (H^2 = {}, log H = {})", i.height, i.height_squared, i.log_height)?;
        let b = &self.bound;
        writeln!(f, "c1 = {}, c2 = {}, c1 log H + c2 = {}", b.c1, b.c2, b.sqrt_cap)?;
        writeln!(f, "theorem cap |D| <= {}", b.theorem_cap)?;
        let c = &self.cap;
        let user = c.user.map_or_else(|| "none".to_string(), |u| u.to_string());
        let source = match c.source {
            CapSource::User => "user",
            CapSource::Theorem => "theorem",
        };
        writeln!(f, "cap: effective {} from {source} (user {user}, refusal above {})", c.effective, c.refusal_threshold)?;
        writeln!(f, "status: {}", status_word(self.status))?;
        writeln!(f, "assume no exceptional field: {}", self.assume_no_exceptional_field)?;
        if !self.diagonal_specials.is_empty() {
            writeln!(f, "diagonals inside L:")?;
            for d in &self.diagonal_specials {
                writeln!(f, "  {}{}", d.pattern, if d.maximal { " (maximal)" } else { "" })?;
            }
        }
        if !self.special_patterns.is_empty() {
            writeln!(f, "patterns lying in the special locus: {}", self.special_patterns.join(" "))?;
        }
        writeln!(f, "special points outside the special locus: {}", self.points.len())?;
        for p in &self.points {
            writeln!(f, "  [{}] pattern {} residual <= {} ({} bits)", p.moduli.join(", "), p.pattern, p.residual, p.precision_bits)?;
            for v in &p.values {
                writeln!(f, "    j = {v}")?;
            }
        }
        if !self.undecided.is_empty() {
            writeln!(f, "undecided tuples: {}", self.undecided.len())?;
            for u in &self.undecided {
                writeln!(f, "  [{}] pattern {} residual <= {} ({} bits)", u.moduli.join(", "), u.pattern, u.residual, u.precision_bits)?;
            }
        }
        let s = &self.stats;
        write!(
            f,
            "stats: patterns {} (empty {}, special {}), enumerated {}, pruned {}, nonzero {}, certified {}, \
             rejected {} off L and {} special, undecided {}",
            s.patterns,
            s.empty_patterns,
            s.special_patterns,
            s.enumerated,
            s.pruned,
            s.nonzero,
            s.certified,
            s.rejected_membership,
            s.rejected_special,
            s.undecided
        )
    }
}
