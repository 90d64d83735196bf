//! Command results. Each is serialized as-is for `--json` and rendered from the same
//! strings for humans, so both carry identical numeric payloads.

use std::fmt;

use linspecial_core::search::{LemmaReport, SolveReport, ZeroTest};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct HeightOut {
    pub ambient_dim: usize,
    pub dim: usize,
    pub equations: Vec<String>,
    pub height: String,
    pub height_squared: String,
    pub log_height: String,
}

impl fmt::Display for HeightOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "subvariety of dimension {} in A^{}", self.dim, self.ambient_dim)?;
        for e in &self.equations {
            writeln!(f, "  {e}")?;
        }
        writeln!(f, "H(L)   = {}", self.height)?;
        writeln!(f, "H(L)^2 = {}", self.height_squared)?;
        write!(f, "log H  = {}", self.log_height)
    }
}

#[derive(Debug, Serialize)]
pub struct BoundOut {
    pub n: u64,
    pub degree: u64,
    pub log_height: String,
    pub c1: String,
    pub c2: String,
    pub sqrt_cap: String,
    pub discriminant_cap: String,
}

impl fmt::Display for BoundOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}, degree = {}", self.n, self.degree)?;
        writeln!(f, "log H(L)      = {}", self.log_height)?;
        writeln!(f, "c1            = {}", self.c1)?;
        writeln!(f, "c2            = {}", self.c2)?;
        writeln!(f, "c1 log H + c2 = {}", self.sqrt_cap)?;
        write!(f, "|D| <= {}", self.discriminant_cap)
    }
}

#[derive(Debug, Serialize)]
pub struct ClassNumberOut {
    pub discriminant: i64,
    pub fundamental: i64,
    pub conductor: u64,
    pub class_number: u64,
}

impl fmt::Display for ClassNumberOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class_number)
    }
}

#[derive(Debug, Serialize)]
pub struct ClassPolyOut {
    pub discriminant: i64,
    pub degree: usize,
    /// Ascending powers of `X`.
    pub coefficients: Vec<String>,
    pub polynomial: String,
    pub precision_bits: u32,
}

impl fmt::Display for ClassPolyOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "H_{}(X) = {}", self.discriminant, self.polynomial)?;
        writeln!(f, "degree {}, certified at {} bits", self.degree, self.precision_bits)?;
        write!(f, "coefficients (X^0 first): {}", self.coefficients.join(" "))
    }
}

#[derive(Debug, Serialize)]
pub struct FormsOut {
    pub discriminant: i64,
    pub class_number: usize,
    pub forms: Vec<String>,
}

impl fmt::Display for FormsOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.forms.join("\n"))
    }
}

#[derive(Debug, Serialize)]
pub struct JEvalOut {
    pub discriminant: i64,
    pub form: String,
    pub tau: String,
    pub value: String,
    pub radius: String,
    pub precision_bits: u32,
    /// The exact value when the class number is one.
    pub integer: Option<String>,
}

impl fmt::Display for JEvalOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "form {} of discriminant {}", self.form, self.discriminant)?;
        writeln!(f, "tau = {}", self.tau)?;
        writeln!(f, "j   = {}", self.value)?;
        write!(f, "radius <= {} ({} bits)", self.radius, self.precision_bits)?;
        if let Some(n) = &self.integer {
            write!(f, "\nj is the integer {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct ReduceTauOut {
    pub tau: String,
    pub reduced: String,
    pub transform: String,
}

impl fmt::Display for ReduceTauOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tau     = {}", self.tau)?;
        writeln!(f, "reduced = {}", self.reduced)?;
        write!(f, "gamma   = {}", self.transform)
    }
}

#[derive(Debug, Serialize)]
pub struct PsiOut {
    pub n: u64,
    pub psi: u64,
}

impl fmt::Display for PsiOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.psi)
    }
}

#[derive(Debug, Serialize)]
pub struct RcfDegreeOut {
    pub d: i64,
    pub f: u64,
    pub c: u64,
    pub ratio: String,
    pub lower_bound: String,
}

impl fmt::Display for RcfDegreeOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[K[{}] : K[{}]] = {} for d = {}", self.c * self.f, self.f, self.ratio, self.d)?;
        write!(f, "lower bound (sqrt 6 / 12) sqrt c = {}", self.lower_bound)
    }
}

#[derive(Debug, Serialize)]
pub struct TwoRankBoundOut {
    pub n: u32,
    pub bound: String,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct TwoRankOut {
    pub discriminant: i64,
    pub two_rank: u32,
    pub log_bound: String,
    pub bounds: Vec<TwoRankBoundOut>,
}

impl fmt::Display for TwoRankOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "2-rank of Pic(O_{}) = {}", self.discriminant, self.two_rank)?;
        write!(f, "4 log|D| = {}", self.log_bound)?;
        for b in &self.bounds {
            write!(f, "\n4n^2 |D|^(1/n), n = {}: {} ({})", b.n, b.bound, if b.holds { "holds" } else { "fails" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct CheckPointOut {
    pub moduli: Vec<String>,
    pub values: Vec<String>,
    pub pattern: String,
    pub on_subvariety: ZeroTest,
    pub residual: String,
    /// 1-based coordinates that move together inside `L`.
    pub special_witness: Option<Vec<usize>>,
    pub classification: String,
}

impl fmt::Display for CheckPointOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, v) in self.moduli.iter().zip(&self.values) {
            writeln!(f, "{m}: j = {v}")?;
        }
        writeln!(f, "equality pattern {}", self.pattern)?;
        let on = match self.on_subvariety {
            ZeroTest::Zero => "yes",
            ZeroTest::Nonzero => "no",
            ZeroTest::NeedsPrecision => "undecided",
        };
        writeln!(f, "on L: {on} (residual <= {})", self.residual)?;
        if let Some(w) = &self.special_witness {
            let w: Vec<String> = w.iter().map(ToString::to_string).collect();
            writeln!(f, "coordinates {{{}}} move together inside L", w.join(","))?;
        }
        write!(f, "{}", self.classification)
    }
}

#[derive(Debug, Serialize)]
#[serde(transparent)]
pub struct SolveOut(pub SolveReport);

impl fmt::Display for SolveOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Serialize)]
#[serde(transparent)]
pub struct LemmaOut(pub LemmaReport);

impl fmt::Display for LemmaOut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.0;
        writeln!(f, "equation: ({})·z + ({}) = 0, |D| <= {}", r.coefficients.join(", "), r.constant, r.cap)?;
        writeln!(f, "log H(a, b) = {}", r.log_height)?;
        writeln!(f, "log H(a)    = {}", r.log_height_coefficients)?;
        writeln!(f, "log+ |b|    = {}", r.log_plus_constant)?;
        writeln!(f, "c1          = {}", r.c1)?;
        writeln!(f, "c1 (one CM field) = {}", r.c1_same_field)?;
        writeln!(f, "solutions in distinct singular moduli: {}", r.solutions.len())?;
        for s in &r.solutions {
            let same = match s.within_same_field_bound {
                Some(true) => ", one CM field: within bound",
                Some(false) => ", one CM field: EXCEEDS bound",
                None => "",
            };
            writeln!(
                f,
                "  [{}] max |D| = {}, margin {}{}{same} (residual <= {})",
                s.moduli.join(", "),
                s.max_abs_discriminant,
                s.margin,
                if s.within_bound { "" } else { " VIOLATION" },
                s.residual
            )?;
        }
        for u in &r.undecided {
            writeln!(f, "  undecided: [{}]", u.join(", "))?;
        }
        if let Some(m) = &r.min_margin {
            writeln!(f, "smallest margin: {m}")?;
        }
        write!(f, "violations: {}", r.violations.len())
    }
}
